#pragma once

#include "sqmem/gaussian_state.hpp"
#include "sqmem/temporal_mode.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sqmem {

/// Sampled beat note sin(2πΔt + phase), t = k / sample_rate.
struct BeatReference {
  double delta_hz = 0.0;
  double phase = 0.0;
  std::vector<double> samples;
};

struct HomodyneTrace {
  std::vector<double> samples;
  double sample_rate = 0.0;
  double lo_phase = 0.0;
  std::uint64_t seed = 0;
  std::optional<BeatReference> reference;

  void validate() const;
  double dt() const { return 1.0 / sample_rate; }
};

/// Stationary phase-sensitive noise band. Inside the band the noise at LO phase θ is
/// 10^{sq/10} cos²(θ - θ_sq) + 10^{asq/10} sin²(θ - θ_sq) times shot noise.
/// The band has a flat-topped super-Gaussian profile with full width `width_hz`.
struct SpectralFeature {
  double center_hz = 2.0e6;
  double width_hz = 1.0e6;
  double squeezing_db = 0.0;
  double antisqueezing_db = 0.0;
  double theta_sq = 0.0;
};

/// Extra phase-insensitive noise power (variance) at one frequency.
struct EnvironmentalLine {
  double freq_hz = 0.0;
  double power = 0.0;
};

/// Noise gains of the two beat channels at baseband offset f, relative to vacuum:
/// at LO phase θ the sine (a+) channel carries uᵀ·plus·u and the cosine (a-) channel
/// uᵀ·minus·u, with u = (cos θ, sin θ). Vacuum is the identity.
struct PairProfilePoint {
  double f_hz = 0.0;
  Eigen::Matrix2d plus = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d minus = Eigen::Matrix2d::Identity();
};

/// Sideband pair around the beat frequency Δ written in the ± basis. a+ rides on
/// √2 sin(2πΔt + beat_phase) and a- on √2 cos(2πΔt + beat_phase), each as a real
/// baseband process limited to |f| < bandwidth_hz. The noise measured at LO phase θ
/// is X+(θ) on the sine and X-(θ + π/2) on the cosine, so the direct spectrum at
/// Δ ± f is ½ X+² + ½ X-².
///
/// The profile is interpolated linearly in f and held constant past its ends.
struct PairFeature {
  double delta_hz = 2.0e6;
  double beat_phase = 0.0;
  double bandwidth_hz = 1.0e6;
  std::vector<PairProfilePoint> profile{PairProfilePoint{}};

  /// Constant profile from the a+ and a- blocks (modes 0 and 1) of a two-mode state.
  static PairFeature from_pm_state(const CovarianceState& pm, double delta_hz, double beat_phase,
                                   double bandwidth_hz);
};

/// `shot_level` is the one-sided vacuum noise density: a vacuum trace sampled at
/// rate fs has per-sample variance shot_level · fs / 2.
struct NoiseSpectrumModel {
  double shot_level = 1.0;
  std::vector<SpectralFeature> features;
  std::vector<EnvironmentalLine> lines;
  std::optional<PairFeature> pair;

  void validate() const;

  /// 2x2 stationary quadrature density matrix at f in the (x, p) LO frame, in shot units.
  Eigen::Matrix2d stationary_matrix(double f_hz) const;

  /// Expected one-sided PSD at f and LO phase θ. Within Δ ± bandwidth the pair
  /// feature replaces the stationary noise. Environmental lines are not included.
  double psd(double f_hz, double theta) const;
};

/// Super-Gaussian band profile with unit peak and FWHM `width`.
double flat_top_profile(double f_hz, double center_hz, double width_hz);

/// Real symmetric M with uᵀ M u = power(θ) for u = (cos θ, sin θ); the power must be
/// of the form a + b cos 2θ + c sin 2θ.
template <class PowerFn>
Eigen::Matrix2d quadrature_matrix(PowerFn&& power) {
  const double p0 = power(0.0);
  const double p90 = power(0.5 * std::numbers::pi);
  const double p45 = power(0.25 * std::numbers::pi);
  const double a = 0.5 * (p0 + p90);
  Eigen::Matrix2d m;
  m << p0, p45 - a, p45 - a, p90;
  return m;
}

/// Gaussian trace whose expected one-sided PSD is model.psd(f, θ). n must be a power
/// of two. Deterministic in (model, theta, sample_rate, n, seed). A pair feature adds
/// the beat reference to the trace.
HomodyneTrace synthesize_trace(const NoiseSpectrumModel& model, double theta, double sample_rate,
                               std::size_t n, std::uint64_t seed);

/// White vacuum trace, variance shot_level · fs / 2.
HomodyneTrace shot_noise_trace(double sample_rate, std::size_t n, std::uint64_t seed,
                               double shot_level = 1.0);

/// Unit-amplitude sin(2πΔ k / fs + phase).
BeatReference beat_reference(double delta_hz, double phase, double sample_rate, std::size_t n);

/// Pulse-mode traces. The demodulated projections onto the sampled envelope of the
/// a+ mode (beat phase) and of the a- mode (beat phase + π/2) have covariance
///   T = D^{1/2} G D^{1/2},   D = diag(plus_gain, minus_gain),
/// where G is the projection covariance of white vacuum noise. Outside that
/// two-dimensional subspace the trace is vacuum.
class PulseTraceSynth {
 public:
  PulseTraceSynth(std::span<const double> envelope, double sample_rate, double delta_hz,
                  double beat_phase, double shot_level, double plus_gain, double minus_gain);

  /// Trace `index` of the ensemble seeded by `seed`. The gains already refer to one
  /// LO phase; `theta` is only recorded on the trace.
  HomodyneTrace trace(double theta, std::uint64_t seed, std::uint64_t index) const;

  std::size_t size() const { return n_; }
  const BeatReference& reference() const { return reference_; }

  /// Projection variance of vacuum onto the a+ (true) or a- (false) pulse mode.
  double shot_projection_level(bool plus) const;

 private:
  double sample_rate_;
  double sigma_;
  std::size_t n_;
  Eigen::MatrixXd q_;
  Eigen::Matrix2d lift_;
  Eigen::Matrix2d gram_;
  BeatReference reference_;
};

/// Gains for PulseTraceSynth from a ± state (a+ in mode 0, a- in mode 1) at LO phase θ:
/// Var X+(θ) / 0.25 and Var X-(θ + π/2) / 0.25.
std::pair<double, double> pulse_gains(const CovarianceState& pm, double theta);

}  // namespace sqmem
