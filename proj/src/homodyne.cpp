#include "sqmem/homodyne.hpp"

#include "sqmem/fft.hpp"
#include "sqmem/random.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace sqmem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Matrix2d rotation(double a) {
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

// Closed-form square root of a 2x2 positive semidefinite matrix.
Eigen::Matrix2d sqrt_psd(const Eigen::Matrix2d& m) {
  const double det = m.determinant();
  const double tr = m.trace();
  if (det < -1e-12 * std::max(1.0, tr * tr) || tr < -1e-12) {
    throw std::invalid_argument("noise model has a negative spectral density");
  }
  const double s = std::sqrt(std::max(det, 0.0));
  const double t = std::sqrt(std::max(tr + 2.0 * s, 0.0));
  if (t == 0.0) return Eigen::Matrix2d::Zero();
  return (m + s * Eigen::Matrix2d::Identity()) / t;
}

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// Real Gaussian process with one-sided PSD shot · uᵀ M(f) u, built from two
// independent white processes shaped by M^{1/2}.
template <class MatrixFn>
std::vector<double> colored_noise(MatrixFn&& density, const Eigen::Vector2d& u, double shot_level,
                                  double sample_rate, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t half = n / 2;
  const double amp = std::sqrt(static_cast<double>(n) * sample_rate * 0.5 * shot_level);
  std::vector<std::complex<double>> spectrum(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    const bool real_bin = k == 0 || k == half;
    const double s = real_bin ? 1.0 : std::sqrt(0.5);
    const double w1r = normal(rng), w1i = normal(rng), w2r = normal(rng), w2i = normal(rng);
    const double f = sample_rate * static_cast<double>(k) / static_cast<double>(n);
    const Eigen::Vector2d g = sqrt_psd(density(f)) * u;
    std::complex<double> x{g[0] * w1r + g[1] * w2r, g[0] * w1i + g[1] * w2i};
    if (real_bin) x.imag(0.0);
    spectrum[k] = amp * s * x;
  }
  return irfft(spectrum, n);
}

Eigen::Matrix2d lerp(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b, double w) {
  return (1.0 - w) * a + w * b;
}

std::pair<Eigen::Matrix2d, Eigen::Matrix2d> profile_at(const PairFeature& pair, double f_hz) {
  const auto& prof = pair.profile;
  const double f = std::abs(f_hz);
  if (f <= prof.front().f_hz) return {prof.front().plus, prof.front().minus};
  if (f >= prof.back().f_hz) return {prof.back().plus, prof.back().minus};
  const auto hi = std::upper_bound(prof.begin(), prof.end(), f,
                                   [](double v, const PairProfilePoint& p) { return v < p.f_hz; });
  const auto lo = hi - 1;
  const double w = (f - lo->f_hz) / (hi->f_hz - lo->f_hz);
  return {lerp(lo->plus, hi->plus, w), lerp(lo->minus, hi->minus, w)};
}

bool in_pair_band(const PairFeature& pair, double f_hz) {
  return std::abs(f_hz - pair.delta_hz) < pair.bandwidth_hz;
}

bool is_psd(const Eigen::Matrix2d& m) {
  return m.trace() >= 0.0 && m.determinant() >= -1e-12 * std::max(1.0, m.trace() * m.trace());
}

}  // namespace

void HomodyneTrace::validate() const {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("trace sample rate must be > 0");
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("trace holds non-finite samples");
  }
  if (reference && reference->samples.size() != samples.size()) {
    throw std::invalid_argument("reference channel length differs from the trace");
  }
}

PairFeature PairFeature::from_pm_state(const CovarianceState& pm, double delta_hz,
                                       double beat_phase, double bandwidth_hz) {
  const Eigen::Matrix2d r = rotation(0.5 * std::numbers::pi);
  PairFeature pair;
  pair.delta_hz = delta_hz;
  pair.beat_phase = beat_phase;
  pair.bandwidth_hz = bandwidth_hz;
  pair.profile = {PairProfilePoint{0.0, pm.mode_cov(0) / kVacuumVariance,
                                   r.transpose() * pm.mode_cov(1) * r / kVacuumVariance}};
  return pair;
}

double flat_top_profile(double f_hz, double center_hz, double width_hz) {
  const double x = 2.0 * std::abs(f_hz - center_hz) / width_hz;
  return std::exp(-std::log(2.0) * std::pow(x, 8.0));
}

void NoiseSpectrumModel::validate() const {
  if (!(shot_level > 0.0)) throw std::invalid_argument("shot level must be > 0");
  for (const auto& f : features) {
    if (!(f.width_hz > 0.0) || !(f.center_hz >= 0.0)) {
      throw std::invalid_argument("spectral feature needs a positive width and center ≥ 0");
    }
  }
  for (const auto& l : lines) {
    if (!(l.power >= 0.0) || !(l.freq_hz >= 0.0)) throw std::invalid_argument("environmental line needs power ≥ 0");
  }
  if (pair) {
    if (!(pair->delta_hz > 0.0) || !(pair->bandwidth_hz > 0.0) || pair->bandwidth_hz >= pair->delta_hz) {
      throw std::invalid_argument("pair feature needs 0 < bandwidth < Δ");
    }
    if (pair->profile.empty()) throw std::invalid_argument("pair feature needs a profile");
    for (std::size_t k = 0; k < pair->profile.size(); ++k) {
      const auto& p = pair->profile[k];
      if (k > 0 && !(p.f_hz > pair->profile[k - 1].f_hz)) {
        throw std::invalid_argument("pair profile frequencies must increase");
      }
      if (!is_psd(p.plus) || !is_psd(p.minus)) throw std::invalid_argument("pair profile gain is not positive");
    }
  }
}

Eigen::Matrix2d NoiseSpectrumModel::stationary_matrix(double f_hz) const {
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  for (const auto& feat : features) {
    const double weight = flat_top_profile(f_hz, feat.center_hz, feat.width_hz);
    if (weight < 1e-300) continue;
    const Eigen::Matrix2d r = rotation(feat.theta_sq);
    const Eigen::Vector2d d{std::pow(10.0, feat.squeezing_db / 10.0), std::pow(10.0, feat.antisqueezing_db / 10.0)};
    m += weight * (r * d.asDiagonal() * r.transpose() - Eigen::Matrix2d::Identity());
  }
  return m;
}

double NoiseSpectrumModel::psd(double f_hz, double theta) const {
  const Eigen::Vector2d u{std::cos(theta), std::sin(theta)};
  if (pair && in_pair_band(*pair, f_hz)) {
    const auto [plus, minus] = profile_at(*pair, f_hz - pair->delta_hz);
    return shot_level * 0.5 * (u.dot(plus * u) + u.dot(minus * u));
  }
  return shot_level * u.dot(stationary_matrix(f_hz) * u);
}

BeatReference beat_reference(double delta_hz, double phase, double sample_rate, std::size_t n) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be > 0");
  BeatReference ref{delta_hz, phase, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    ref.samples[k] = std::sin(kTwoPi * delta_hz * static_cast<double>(k) / sample_rate + phase);
  }
  return ref;
}

HomodyneTrace synthesize_trace(const NoiseSpectrumModel& model, double theta, double sample_rate,
                               std::size_t n, std::uint64_t seed) {
  model.validate();
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be > 0");
  if (!is_power_of_two(n)) throw std::invalid_argument("trace length must be a power of two ≥ 2");
  const Eigen::Vector2d u{std::cos(theta), std::sin(theta)};
  const double df = sample_rate / static_cast<double>(n);

  auto rng = stream_rng(seed, 0);
  auto stationary = [&](double f) -> Eigen::Matrix2d {
    if (model.pair && in_pair_band(*model.pair, f)) return Eigen::Matrix2d::Zero();
    Eigen::Matrix2d m = model.stationary_matrix(f);
    for (const auto& line : model.lines) {
      if (std::abs(f - line.freq_hz) < 0.5 * df) {
        m += line.power / (df * model.shot_level) * Eigen::Matrix2d::Identity();
      }
    }
    return m;
  };
  HomodyneTrace trace;
  trace.samples = colored_noise(stationary, u, model.shot_level, sample_rate, n, rng);
  trace.sample_rate = sample_rate;
  trace.lo_phase = theta;
  trace.seed = seed;

  if (model.pair) {
    const PairFeature& pair = *model.pair;
    if (pair.delta_hz + pair.bandwidth_hz >= 0.5 * sample_rate) {
      throw std::invalid_argument("pair feature extends past Nyquist");
    }
    auto plus_rng = stream_rng(seed, 1);
    auto minus_rng = stream_rng(seed, 2);
    auto band = [&](double f, bool plus) -> Eigen::Matrix2d {
      if (f >= pair.bandwidth_hz) return Eigen::Matrix2d::Zero();
      const auto gains = profile_at(pair, f);
      return plus ? gains.first : gains.second;
    };
    const auto c_plus = colored_noise([&](double f) { return band(f, true); }, u, model.shot_level,
                                      sample_rate, n, plus_rng);
    const auto c_minus = colored_noise([&](double f) { return band(f, false); }, u, model.shot_level,
                                       sample_rate, n, minus_rng);
    const double root2 = std::sqrt(2.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double arg = kTwoPi * pair.delta_hz * static_cast<double>(k) / sample_rate + pair.beat_phase;
      trace.samples[k] += root2 * (std::sin(arg) * c_plus[k] + std::cos(arg) * c_minus[k]);
    }
    trace.reference = beat_reference(pair.delta_hz, pair.beat_phase, sample_rate, n);
  }
  return trace;
}

HomodyneTrace shot_noise_trace(double sample_rate, std::size_t n, std::uint64_t seed,
                               double shot_level) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be > 0");
  if (!(shot_level > 0.0)) throw std::invalid_argument("shot level must be > 0");
  auto rng = stream_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, std::sqrt(shot_level * sample_rate * 0.5));
  HomodyneTrace trace;
  trace.samples.resize(n);
  for (double& v : trace.samples) v = normal(rng);
  trace.sample_rate = sample_rate;
  trace.seed = seed;
  return trace;
}

PulseTraceSynth::PulseTraceSynth(std::span<const double> envelope, double sample_rate,
                                 double delta_hz, double beat_phase, double shot_level,
                                 double plus_gain, double minus_gain)
    : sample_rate_(sample_rate),
      sigma_(std::sqrt(shot_level * sample_rate * 0.5)),
      n_(envelope.size()) {
  if (!(sample_rate > 0.0) || !(shot_level > 0.0)) throw std::invalid_argument("sample rate and shot level must be > 0");
  if (!(plus_gain >= 0.0) || !(minus_gain >= 0.0)) throw std::invalid_argument("pulse gains must be ≥ 0");
  if (n_ < 2) throw std::invalid_argument("pulse envelope needs at least two samples");
  const double dt = 1.0 / sample_rate;
  Eigen::MatrixXd h(n_, 2);
  for (std::size_t k = 0; k < n_; ++k) {
    const double arg = kTwoPi * delta_hz * static_cast<double>(k) * dt + beat_phase;
    h(k, 0) = std::sqrt(2.0) * std::sin(arg) * envelope[k];
    h(k, 1) = std::sqrt(2.0) * std::cos(arg) * envelope[k];
  }
  const double scale = sigma_ * sigma_ * dt * dt;
  gram_ = scale * (h.transpose() * h);
  const Eigen::Vector2d root_gain{std::sqrt(plus_gain), std::sqrt(minus_gain)};
  const Eigen::Matrix2d target = root_gain.asDiagonal() * gram_ * root_gain.asDiagonal();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(h);
  q_ = qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n_), 2);
  const Eigen::Matrix2d r = qr.matrixQR().topLeftCorner<2, 2>().triangularView<Eigen::Upper>();
  if (std::abs(r.determinant()) < 1e-300) throw std::invalid_argument("pulse modes are degenerate on this grid");
  const Eigen::Matrix2d r_inv = r.inverse();
  const Eigen::Matrix2d b = r_inv.transpose() * (target - gram_) * r_inv / scale;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(Eigen::Matrix2d::Identity() + b);
  const Eigen::Vector2d ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  lift_ = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose() -
          Eigen::Matrix2d::Identity();
  reference_ = beat_reference(delta_hz, beat_phase, sample_rate, n_);
}

HomodyneTrace PulseTraceSynth::trace(double theta, std::uint64_t seed, std::uint64_t index) const {
  auto rng = stream_rng(seed, index);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n_));
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = normal(rng);
  const Eigen::VectorXd x = sigma_ * (w + q_ * (lift_ * (q_.transpose() * w)));

  HomodyneTrace out;
  out.samples.assign(x.data(), x.data() + x.size());
  out.sample_rate = sample_rate_;
  out.lo_phase = theta;
  out.seed = seed;
  out.reference = reference_;
  return out;
}

double PulseTraceSynth::shot_projection_level(bool plus) const {
  return plus ? gram_(0, 0) : gram_(1, 1);
}

std::pair<double, double> pulse_gains(const CovarianceState& pm, double theta) {
  return {quadrature_variance(pm, 0, theta) / kVacuumVariance,
          quadrature_variance(pm, 1, theta + 0.5 * std::numbers::pi) / kVacuumVariance};
}

}  // namespace sqmem
