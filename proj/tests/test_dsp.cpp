#include "sqmem/dsp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace sqmem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFs = 5e7;

double sample_variance(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / x.size();
}

double integrated(const SpectrumEstimate& est, double fs, std::size_t len) {
  double s = 0.0;
  for (double p : est.power) s += p;
  return s * fs / static_cast<double>(len);
}

HomodyneTrace tone(double amp, double freq, double phase, std::size_t n, bool with_ref, double ref_phase = 0.0) {
  HomodyneTrace t;
  t.sample_rate = kFs;
  t.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) t.samples[k] = amp * std::sin(2 * kPi * freq * k / kFs + phase);
  if (with_ref) t.reference = beat_reference(freq, ref_phase, kFs, n);
  return t;
}

}  // namespace

TEST(Welch, ParsevalRectangular) {
  NoiseSpectrumModel m;
  m.features.push_back({2e6, 1e6, -1.78, 4.0, 0.0});
  const auto t = synthesize_trace(m, 0.7, kFs, std::size_t{1} << 18, 3);
  const std::vector<HomodyneTrace> traces{t};
  const auto est = power_spectrum(traces, {1024, Window::rect, 0.0, 1});
  // Exact for the raw mean square; within 0.5 % of the sample variance.
  double ms = 0.0;
  for (double v : t.samples) ms += v * v;
  ms /= t.samples.size();
  EXPECT_NEAR(integrated(est, kFs, 1024) / ms, 1.0, 1e-12);
  EXPECT_NEAR(integrated(est, kFs, 1024) / sample_variance(t.samples), 1.0, 0.005);
}

TEST(Welch, ParsevalHann) {
  const std::vector<HomodyneTrace> traces{shot_noise_trace(kFs, std::size_t{1} << 20, 4)};
  const auto est = power_spectrum(traces, {4096, Window::hann, 0.5, 1});
  EXPECT_NEAR(integrated(est, kFs, 4096) / sample_variance(traces[0].samples), 1.0, 0.005);
  EXPECT_EQ(est.n_averages, 511u);
  EXPECT_DOUBLE_EQ(est.freqs[1] - est.freqs[0], kFs / 4096);
}

TEST(Welch, Linearity) {
  const auto t = shot_noise_trace(kFs, 1 << 14, 5);
  auto scaled = t;
  for (double& v : scaled.samples) v *= 3.0;
  const std::vector<HomodyneTrace> a{t}, b{scaled};
  const auto pa = power_spectrum(a, {512, Window::hann, 0.5, 1});
  const auto pb = power_spectrum(b, {512, Window::hann, 0.5, 1});
  for (std::size_t k = 0; k < pa.power.size(); ++k) EXPECT_NEAR(pb.power[k], 9.0 * pa.power[k], 1e-12 * pb.power[k]);
}

TEST(Welch, IndependentOfThreadCount) {
  std::vector<HomodyneTrace> traces;
  for (std::uint64_t s = 0; s < 5; ++s) traces.push_back(shot_noise_trace(kFs, 1 << 15, s));
  const auto one = power_spectrum(traces, {1024, Window::hann, 0.5, 1});
  const auto many = power_spectrum(traces, {1024, Window::hann, 0.5, 4});
  EXPECT_EQ(one.power, many.power);
}

TEST(Welch, Errors) {
  const std::vector<HomodyneTrace> none;
  EXPECT_THROW(power_spectrum(none, {}), std::invalid_argument);
  const std::vector<HomodyneTrace> short_one{shot_noise_trace(kFs, 100, 1)};
  EXPECT_THROW(power_spectrum(short_one, {}), std::invalid_argument);
  std::vector<HomodyneTrace> mixed{shot_noise_trace(kFs, 1024, 1), shot_noise_trace(2 * kFs, 1024, 1)};
  EXPECT_THROW(power_spectrum(mixed, {256, Window::rect, 0.0, 1}), std::invalid_argument);
  EXPECT_THROW(power_spectrum(short_one, {64, Window::rect, 1.0, 1}), std::invalid_argument);
}

TEST(Welch, ShotReferenceAndDb) {
  const std::vector<HomodyneTrace> a{shot_noise_trace(kFs, 4096, 1, 2.0)}, b{shot_noise_trace(kFs, 4096, 2)};
  auto est = power_spectrum(a, {256, Window::hann, 0.5, 1});
  EXPECT_THROW(est.db(), std::logic_error);
  EXPECT_THROW(band_average(est, 0.0, 1e6), std::invalid_argument);
  est = with_shot_reference(est, power_spectrum(b, {256, Window::hann, 0.5, 1}));
  const auto band = band_average(est, 1e6, 10e6);
  EXPECT_NEAR(band.db(), 3.01, 0.3);
  EXPECT_THROW(band_average(est, 30e6, 40e6), std::invalid_argument);
  EXPECT_THROW(with_shot_reference(est, power_spectrum(b, {128, Window::hann, 0.5, 1})), std::invalid_argument);

  const std::vector<std::string> pre{"config_hash abc"};
  const auto csv = est.to_csv(pre);
  EXPECT_EQ(csv.rfind("# config_hash abc\nfreq_hz,power,db,shot_ref,n_avg\n", 0), 0u);
  const auto j = est.to_json();
  EXPECT_EQ(j["power"].size(), est.power.size());
  EXPECT_EQ(j["n_averages"].get<std::size_t>(), est.n_averages);
  EXPECT_TRUE(j.contains("db"));
  EXPECT_EQ(parse_window(to_string(Window::rect)), Window::rect);
  EXPECT_THROW(parse_window("blackman"), std::invalid_argument);
}

TEST(Demodulate, PureToneLockInIdentities) {
  const double amp = 1.7, phase = 0.9;
  // 2 MHz at 5e7 S/s: 25 samples per period; 1000 samples = 40 periods.
  const auto t = tone(amp, 2e6, phase, 1000, true, phase);
  const auto in_phase = demodulate(t, 0.0);
  const auto quad = demodulate(t, kPi / 2);
  const double dc_i = std::accumulate(in_phase.samples.begin(), in_phase.samples.end(), 0.0) / 1000;
  const double dc_q = std::accumulate(quad.samples.begin(), quad.samples.end(), 0.0) / 1000;
  EXPECT_NEAR(dc_i, amp / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(dc_q, 0.0, 1e-12);
  EXPECT_THROW(demodulate(tone(1.0, 2e6, 0.0, 100, false), 0.0), std::invalid_argument);
}

TEST(Demodulate, ReferencePhaseFit) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int k = 0; k < 20; ++k) {
    const double p = u(rng);
    EXPECT_NEAR(std::remainder(estimate_reference_phase(beat_reference(2e6, p, kFs, 777), kFs) - p, 2 * kPi), 0.0, 1e-10);
  }
}

TEST(Demodulate, EnvironmentalLineMovesToBeatSidebands) {
  NoiseSpectrumModel m;
  m.pair = PairFeature{};
  m.lines.push_back({1e5, 1e6});
  std::vector<HomodyneTrace> direct{synthesize_trace(m, 0.0, kFs, std::size_t{1} << 20, 5)};
  auto est = power_spectrum(direct, {4096, Window::hann, 0.5, 1});
  const double df = est.freqs[1];
  auto peak_in = [&](const SpectrumEstimate& e, double lo, double hi) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < e.freqs.size(); ++k)
      if (e.freqs[k] >= lo && e.freqs[k] <= hi && (best == 0 || e.power[k] > e.power[best])) best = k;
    return best;
  };
  EXPECT_NEAR(est.freqs[peak_in(est, 20e3, 1e6)], 1e5, df);

  std::vector<HomodyneTrace> mixed{demodulate(direct[0], 0.0)};
  auto dm = power_spectrum(mixed, {4096, Window::hann, 0.5, 1});
  const auto lo = peak_in(dm, 1.5e6, 2.0e6), hi = peak_in(dm, 2.0e6, 2.5e6);
  EXPECT_NEAR(dm.freqs[lo], 1.9e6, df);
  EXPECT_NEAR(dm.freqs[hi], 2.1e6, df);
  EXPECT_GT(dm.power[lo], 10.0);
  // The baseband window stays at shot noise.
  dm.shot_ref.assign(dm.power.size(), 1.0);
  EXPECT_NEAR(band_average(dm, df, 250e3).db(), 0.0, 0.1);
}

TEST(Projection, MatchesProjectorAndChecksGrids) {
  const auto t = shot_noise_trace(kFs, 512, 3);
  auto with_ref = t;
  with_ref.reference = beat_reference(2e6, 0.3, kFs, 512);
  const auto mode = sample_mode(TemporalModeFn::gaussian(5e-6, 1e-6), 0.0, 1 / kFs, 512);
  const double a = project_temporal_mode(with_ref, mode, 0.2);
  const ModeProjector proj(*with_ref.reference, kFs, mode, 0.2);
  EXPECT_DOUBLE_EQ(a, proj(with_ref));
  // Explicit Riemann sum.
  double s = 0.0;
  for (std::size_t k = 0; k < 512; ++k) s += t.samples[k] * std::sqrt(2.0) * std::sin(2 * kPi * 2e6 * k / kFs + 0.5) * mode[k];
  EXPECT_NEAR(a, s / kFs, 1e-9 * std::abs(s / kFs) + 1e-15);
  EXPECT_THROW(project_temporal_mode(t, mode, 0.0), std::invalid_argument);
  const std::vector<double> shorter(100, 1.0);
  EXPECT_THROW(project_temporal_mode(with_ref, shorter, 0.0), std::invalid_argument);
}

TEST(Variance, EstimatorStatistics) {
  const std::vector<double> flat(10, 3.0);
  EXPECT_EQ(variance_estimate(flat).variance, 0.0);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::vector<double> x(1'000'000);
  for (double& v : x) v = g(rng);
  const auto e = variance_estimate(x);
  EXPECT_NEAR(e.standard_error, e.variance * std::sqrt(2.0 / 999'999), 1e-15);
  EXPECT_NEAR(e.variance, 1.0, 3 * e.standard_error);
  const std::span<const double> quarter(x.data(), 250'000);
  EXPECT_NEAR(variance_estimate(quarter).standard_error / e.standard_error, 2.0, 0.01);
  EXPECT_THROW(variance_estimate(std::vector<double>{1.0}), std::invalid_argument);
  QuadratureSampleSet set{{1.0, 2.0, 4.0}, 0.0, 0.0, "a_plus"};
  EXPECT_NEAR(variance_estimate(set).variance, 7.0 / 3.0, 1e-15);
  EXPECT_EQ(set.to_csv(), "index,value\n0,1\n1,2\n2,4\n");
}

TEST(Db, Conversions) {
  EXPECT_EQ(to_db(2.0, 2.0), 0.0);
  EXPECT_NEAR(to_db(0.5, 1.0), -3.0103, 1e-4);
  EXPECT_NEAR(to_db(0.25 * std::pow(10.0, -0.178), 0.25), -1.78, 1e-12);
  EXPECT_THROW(to_db(1.0, 0.0), std::invalid_argument);
}

TEST(PairwiseSum, AccurateAndOrderFixed) {
  std::vector<double> v(100001);
  long double ref = 0.0L;
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = 1.0 / (1.0 + k) + 1e8 * ((k % 2) ? 1 : -1);
    ref += v[k];
  }
  EXPECT_NEAR(pairwise_sum(v), static_cast<double>(ref), 1e-5);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}
