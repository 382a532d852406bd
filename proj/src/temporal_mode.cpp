#include "sqmem/temporal_mode.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace sqmem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Gaussian tails are cut where the dropped weight is far below double precision.
constexpr double kGaussianCutoffSigmas = 12.0;

double sigma_of_fwhm(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

double gaussian_amplitude(double t, double center, double sigma) {
  const double x = t - center;
  return std::exp(-x * x / (4.0 * sigma * sigma)) / std::pow(kTwoPi * sigma * sigma, 0.25);
}

// ∫ cos²(ωt + φ) (sign = +1) or sin²(ωt + φ) (sign = -1) over [a, b].
double beat_norm2(double omega, double phase, double a, double b, double sign) {
  const double osc = (std::sin(2.0 * (omega * b + phase)) - std::sin(2.0 * (omega * a + phase))) /
                     (4.0 * omega);
  return 0.5 * (b - a) + sign * osc;
}

}  // namespace

TemporalModeFn TemporalModeFn::beat_cos(double delta_hz, double phase, double start,
                                        double duration) {
  TemporalModeFn fn;
  fn.kind = ModeKind::cos;
  fn.delta_hz = delta_hz;
  fn.phase = phase;
  fn.center = start + 0.5 * duration;
  fn.width = duration;
  fn.validate();
  return fn;
}

TemporalModeFn TemporalModeFn::beat_sin(double delta_hz, double phase, double start,
                                        double duration) {
  TemporalModeFn fn = beat_cos(delta_hz, phase, start, duration);
  fn.kind = ModeKind::sin;
  return fn;
}

TemporalModeFn TemporalModeFn::gaussian(double center, double fwhm) {
  TemporalModeFn fn;
  fn.kind = ModeKind::gaussian;
  fn.center = center;
  fn.width = fwhm;
  fn.validate();
  return fn;
}

TemporalModeFn TemporalModeFn::half_gaussian(double turn_on, double fwhm) {
  TemporalModeFn fn = gaussian(turn_on, fwhm);
  fn.kind = ModeKind::half_gaussian;
  return fn;
}

TemporalModeFn TemporalModeFn::from_samples(std::vector<double> samples, double t0, double dt) {
  TemporalModeFn fn;
  fn.kind = ModeKind::sampled;
  fn.samples = std::move(samples);
  fn.t0 = t0;
  fn.dt = dt;
  if (!(dt > 0.0) || fn.samples.empty()) {
    throw std::invalid_argument("sampled mode needs samples and a positive step");
  }
  const double norm2 = discrete_inner_product(fn.samples, fn.samples, dt);
  if (!(norm2 > 0.0)) throw std::invalid_argument("sampled mode has zero norm");
  const double scale = 1.0 / std::sqrt(norm2);
  for (double& v : fn.samples) v *= scale;
  return fn;
}

void TemporalModeFn::validate() const {
  switch (kind) {
    case ModeKind::cos:
    case ModeKind::sin:
      if (!(width > 0.0)) throw std::invalid_argument("beat mode needs a positive duration");
      if (!(delta_hz > 0.0)) throw std::invalid_argument("beat mode needs a positive frequency");
      break;
    case ModeKind::gaussian:
    case ModeKind::half_gaussian:
      if (!(width > 0.0)) throw std::invalid_argument("Gaussian mode needs a positive width");
      break;
    case ModeKind::sampled:
      if (samples.empty() || !(dt > 0.0)) {
        throw std::invalid_argument("sampled mode needs samples and a positive step");
      }
      break;
  }
}

std::pair<double, double> TemporalModeFn::support() const {
  switch (kind) {
    case ModeKind::cos:
    case ModeKind::sin:
      return {center - 0.5 * width, center + 0.5 * width};
    case ModeKind::gaussian: {
      const double s = kGaussianCutoffSigmas * sigma_of_fwhm(width);
      return {center - s, center + s};
    }
    case ModeKind::half_gaussian:
      return {center, center + kGaussianCutoffSigmas * sigma_of_fwhm(width)};
    case ModeKind::sampled:
      return {t0, t0 + dt * static_cast<double>(samples.size() - 1)};
  }
  return {0.0, 0.0};
}

double mode_value(const TemporalModeFn& fn, double t) {
  const auto [start, end] = fn.support();
  if (t < start || t > end) return 0.0;
  switch (fn.kind) {
    case ModeKind::cos:
    case ModeKind::sin: {
      const double omega = kTwoPi * fn.delta_hz;
      const double sign = fn.kind == ModeKind::cos ? 1.0 : -1.0;
      const double norm = std::sqrt(beat_norm2(omega, fn.phase, start, end, sign));
      const double arg = omega * t + fn.phase;
      return (fn.kind == ModeKind::cos ? std::cos(arg) : std::sin(arg)) / norm;
    }
    case ModeKind::gaussian:
      return gaussian_amplitude(t, fn.center, sigma_of_fwhm(fn.width));
    case ModeKind::half_gaussian:
      return std::sqrt(2.0) * gaussian_amplitude(t, fn.center, sigma_of_fwhm(fn.width));
    case ModeKind::sampled: {
      const double x = (t - fn.t0) / fn.dt;
      const auto k = static_cast<std::size_t>(x);
      if (k + 1 >= fn.samples.size()) return fn.samples.back();
      const double w = x - static_cast<double>(k);
      return (1.0 - w) * fn.samples[k] + w * fn.samples[k + 1];
    }
  }
  return 0.0;
}

std::vector<double> sample_mode(const TemporalModeFn& fn, double t0, double dt, std::size_t n) {
  fn.validate();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = mode_value(fn, t0 + dt * static_cast<double>(k));
  const double norm2 = discrete_inner_product(out, out, dt);
  if (!(norm2 > 0.0)) throw std::invalid_argument("temporal mode has no support on the sample grid");
  const double scale = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= scale;
  return out;
}

double discrete_inner_product(std::span<const double> a, std::span<const double> b, double dt) {
  if (a.size() != b.size()) throw std::invalid_argument("inner product of mismatched grids");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0) * dt;
}

}  // namespace sqmem
