#pragma once

#include <span>
#include <utility>
#include <vector>

namespace sqmem {

enum class ModeKind { cos, sin, gaussian, half_gaussian, sampled };

/// Real temporal mode function. Every kind is L2-normalized over its support:
///   cos/sin       beat mode cos(2πΔt + phase) on [center - width/2, center + width/2]
///   gaussian      |f|² is a Gaussian with FWHM `width` centered at `center`
///   half_gaussian zero before `center`, then the falling half of the same Gaussian
///   sampled       linear interpolation of `samples` starting at `t0` with step `dt`
///
/// The continuous cos/sin normalization replaces the formal 1/√π prefactor of the
/// infinite-time beat modes.
struct TemporalModeFn {
  ModeKind kind = ModeKind::gaussian;
  double delta_hz = 0.0;
  double phase = 0.0;
  double center = 0.0;
  double width = 470e-9;

  std::vector<double> samples;
  double t0 = 0.0;
  double dt = 0.0;

  static TemporalModeFn beat_cos(double delta_hz, double phase, double start, double duration);
  static TemporalModeFn beat_sin(double delta_hz, double phase, double start, double duration);
  static TemporalModeFn gaussian(double center, double fwhm);
  static TemporalModeFn half_gaussian(double turn_on, double fwhm);
  /// Takes ownership of the samples and rescales them to unit Riemann norm.
  static TemporalModeFn from_samples(std::vector<double> samples, double t0, double dt);

  void validate() const;

  /// [start, end) outside which the function is identically zero.
  std::pair<double, double> support() const;
};

/// Normalized envelope value at time t (0 outside the support).
double mode_value(const TemporalModeFn& fn, double t);

/// Samples the mode at t0 + k dt, k < n, and rescales so that Σ f² dt = 1 exactly.
/// Throws if the mode has no weight on the grid.
std::vector<double> sample_mode(const TemporalModeFn& fn, double t0, double dt, std::size_t n);

/// Σ a[k] b[k] dt.
double discrete_inner_product(std::span<const double> a, std::span<const double> b, double dt);

}  // namespace sqmem
