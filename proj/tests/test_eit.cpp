#include "oracles.hpp"

#include "sqmem/eit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace sqmem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * kPi;

EITParams base(double omega_mhz = 3.5, double gamma0_khz = 100.0) {
  EITParams p;
  p.optical_depth = 8.0;
  p.gamma = EITParams::rb87_d1_linewidth();
  p.gamma0 = kTwoPi * gamma0_khz * 1e3;
  p.omega = kTwoPi * omega_mhz * 1e6;
  return p;
}

EITParams bichromatic(double omega_mhz = 2.47) {
  EITParams p = base(omega_mhz);
  p.bichromatic = true;
  p.bichromatic_offset = kTwoPi * 2e6;
  return p;
}

// Half width at half maximum of |t|² around zero detuning.
double hwhm(const EITParams& p) {
  const double peak = transfer_function(p, 0.0).transmission();
  for (double d = 0.0; d < kTwoPi * 50e6; d += kTwoPi * 1e3) {
    if (transfer_function(p, d).transmission() < 0.5 * peak) return d;
  }
  return INFINITY;
}

}  // namespace

TEST(Transfer, MatchesClosedForm) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    EITParams p = base(10 * u(rng), 500 * u(rng));
    p.optical_depth = 20 * u(rng);
    p.control_detuning = kTwoPi * (u(rng) - 0.5) * 4e6;
    const double delta = kTwoPi * (u(rng) - 0.5) * 40e6;
    const auto expect = oracle::eit_t(p.optical_depth, p.gamma, p.gamma0, p.omega, delta, p.control_detuning);
    EXPECT_LT(std::abs(transfer_function(p, delta).t - expect), 1e-12);
  }
}

TEST(Transfer, TwoLevelLimit) {
  EITParams p = base(0.0);
  EXPECT_NEAR(std::abs(transfer_function(p, 0.0).t), std::exp(-4.0), 1e-15);
  p.optical_depth = 3.0;
  EXPECT_NEAR(std::abs(transfer_function(p, 0.0).t), std::exp(-1.5), 1e-15);
}

TEST(Transfer, DarkStateLimit) {
  EITParams p = base(3.5, 0.0);
  const auto s = transfer_function(p, 0.0);
  EXPECT_NEAR(std::abs(s.t), 1.0, 1e-15);
  EXPECT_NEAR(s.phase(), 0.0, 1e-15);
  p.control_detuning = kTwoPi * 0.7e6;
  EXPECT_NEAR(std::abs(transfer_function(p, p.control_detuning).t), 1.0, 1e-15);
}

TEST(Transfer, FarDetunedIsTransparent) {
  const auto p = base();
  EXPECT_NEAR(transfer_function(p, kTwoPi * 1e12).transmission(), 1.0, 1e-6);
  EXPECT_NEAR(transfer_function(p, -kTwoPi * 1e12).transmission(), 1.0, 1e-6);
}

TEST(Transfer, BoundedByOne) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int set = 0; set < 10; ++set) {
    EITParams p = base(8 * u(rng), 300 * u(rng));
    p.optical_depth = 30 * u(rng);
    p.control_detuning = kTwoPi * (u(rng) - 0.5) * 4e6;
    for (int k = 0; k < 1000; ++k) {
      const double delta = kTwoPi * (k - 500) * 2e4;
      const double m = std::abs(transfer_function(p, delta).t);
      ASSERT_LE(m, 1.0 + 1e-12);
      ASSERT_GE(m, std::exp(-p.optical_depth / 2) - 1e-12);
    }
  }
}

TEST(Transfer, ResonantControlPhasesCancel) {
  const auto p = base();
  for (double f : {0.05e6, 0.3e6, 1e6, 2e6, 5e6}) {
    const auto up = transfer_function(p, kTwoPi * f);
    const auto dn = transfer_function(p, -kTwoPi * f);
    EXPECT_NEAR(up.phase(), -dn.phase(), 1e-9);
    EXPECT_NEAR(up.transmission(), dn.transmission(), 1e-12);
  }
}

TEST(Transfer, WindowWidensWithRabiFrequency) {
  const double w1 = hwhm(base(1.0)), w2 = hwhm(base(2.0)), w4 = hwhm(base(4.0));
  EXPECT_LT(w1, w2);
  EXPECT_LT(w2, w4);
}

TEST(Channels, ZeroDepthIsIdentity) {
  std::mt19937_64 rng(3);
  const auto s = oracle::random_state(2, rng);
  const SidebandPair pair{0.0, 2e6, 0, 1};
  EITParams p = base();
  p.optical_depth = 0.0;
  EXPECT_LT((apply_monochromatic_eit(s, pair, p).cov() - s.cov()).cwiseAbs().maxCoeff(), 1e-15);
  EITParams b = bichromatic();
  b.optical_depth = 0.0;
  EXPECT_LT((apply_bichromatic_eit(s, pair, b, 0.0).cov() - s.cov()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Channels, MonochromaticUsesSidebandTransfers) {
  const auto in = SidebandInput::from_db(-1.78, 4.46, kPi / 2);
  auto p = base();
  p.control_detuning = kTwoPi * 0.5e6;
  const SidebandPair pair{0.0, 1.2e6, 0, 1};
  const auto out = apply_monochromatic_eit(in.state(), pair, p);
  const double eu = std::norm(oracle::eit_t(p.optical_depth, p.gamma, p.gamma0, p.omega, kTwoPi * 1.2e6, p.control_detuning));
  const double el = std::norm(oracle::eit_t(p.optical_depth, p.gamma, p.gamma0, p.omega, -kTwoPi * 1.2e6, p.control_detuning));
  const double n = 0.5 * (in.nu * std::cosh(2 * in.zeta.r()) - 1.0);
  EXPECT_NEAR(out.mode_cov(0)(0, 0), eu * (n + 0.5) / 2 + (1 - eu) / 4, 1e-13);
  EXPECT_NEAR(out.mode_cov(1)(1, 1), el * (n + 0.5) / 2 + (1 - el) / 4, 1e-13);
  EXPECT_THROW(apply_monochromatic_eit(in.state(), pair, bichromatic()), std::invalid_argument);
}

TEST(Channels, BichromaticAbsorbsMinusMode) {
  const auto p = bichromatic();
  const auto pm = apply_squeeze(apply_squeeze(vacuum_state(2), 0, SqueezeParam(0.5, kPi)), 1, SqueezeParam(0.5, 0.0));
  const auto out = apply_bichromatic_eit(pm, SidebandPair{0.0, 2e6, 0, 1}, p, 0.0);
  for (double th : {0.0, 0.5, kPi / 2}) EXPECT_NEAR(quadrature_variance(out, 1, th), 0.25, 1e-3);
  EXPECT_NEAR(minus_mode_transfer(p, 0.0).transmission(), std::exp(-8.0), 1e-15);
  EXPECT_THROW(apply_bichromatic_eit(pm, SidebandPair{0.0, 2e6, 0, 1}, base(), 0.0), std::invalid_argument);
}

TEST(Channels, PlusModeSeesRootTwoRabi) {
  const auto p = bichromatic(2.0);
  const auto expect = oracle::eit_t(p.optical_depth, p.gamma, p.gamma0, std::sqrt(2.0) * p.omega, kTwoPi * 0.1e6);
  EXPECT_LT(std::abs(plus_mode_transfer(p, kTwoPi * 0.1e6).t - expect), 1e-13);
}

TEST(Calibration, HitsTargetTransmission) {
  const auto p = calibrate_plus_transmission(bichromatic(3.5 / std::sqrt(2.0)), 0.75);
  EXPECT_NEAR(plus_mode_transfer(p, 0.0).transmission(), 0.75, 1e-9);
  EXPECT_GT(p.gamma0, 0.0);
  EXPECT_THROW(calibrate_plus_transmission(bichromatic(), 1.5), std::invalid_argument);
  // The dark state is lossless at γ₀ = 0, so only targets below e^{-d} are out of reach.
  EXPECT_EQ(calibrate_plus_transmission(bichromatic(0.01), 1.0).gamma0, 0.0);
  EXPECT_THROW(calibrate_plus_transmission(bichromatic(), 0.5 * std::exp(-8.0)), std::invalid_argument);
}

TEST(Scan, NoAtomsIsFlatAtInputLevel) {
  const auto in = SidebandInput::from_db(-1.78, 4.46, kPi / 2);
  EITParams p = base();
  p.optical_depth = 0.0;
  const auto grid = linear_grid(0.1e6, 3e6, 30);
  for (const auto& pt : spectrum_scan(in, p, grid, kPi / 2, Analysis::direct).points) {
    EXPECT_NEAR(pt.power_db, -1.78, 1e-10);
    EXPECT_EQ(pt.shot_ref, 0.25);
  }
}

TEST(Scan, PlusModeWindowCenteredAtZero) {
  const auto in = SidebandInput::from_db(-1.78, 4.46, kPi / 2);
  const auto p = calibrate_plus_transmission(bichromatic(), 0.75);
  const auto grid = linear_grid(-1e6, 1e6, 41);
  const auto curve = spectrum_scan(in, p, grid, kPi / 2, Analysis::plus_mode);
  std::size_t best = 0;
  for (std::size_t k = 0; k < curve.points.size(); ++k)
    if (curve.points[k].power < curve.points[best].power) best = k;
  EXPECT_EQ(best, 20u);
  for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(curve.points[k].power, curve.points[40 - k].power, 1e-12);
  EXPECT_LT(curve.points[20].power_db, -1.0);
}

TEST(Scan, DirectBichromaticRecoveryAtMostHalf) {
  // Pure input: only the a+ half of the gap comes back, plus the e^{-d} the a- mode
  // still transmits.
  const auto in = SidebandInput::from_db(-1.78, 1.78, kPi / 2);
  auto p = bichromatic(10.0);
  p.gamma0 = 0.0;
  const std::vector<double> probe{2e6};
  const double out = spectrum_scan(in, p, probe, kPi / 2, Analysis::direct).points[0].power;
  const double in_power = 0.25 * std::pow(10.0, -0.178);
  const double recovery = (0.25 - out) / (0.25 - in_power);
  EXPECT_LE(recovery, 0.5 * (1.0 + std::exp(-p.optical_depth)) + 1e-9);
  EXPECT_GT(recovery, 0.45);
}

TEST(Scan, DemodulatedViewsContinuousAtZeroOffset) {
  const auto in = SidebandInput::from_db(-1.78, 4.46, kPi / 2);
  const auto p = calibrate_plus_transmission(bichromatic(), 0.75);
  for (Analysis a : {Analysis::plus_mode, Analysis::minus_mode}) {
    for (double th : {0.0, 0.7, kPi / 2}) {
      const std::vector<double> g{-1e-3, 0.0, 1e-3};
      const auto c = spectrum_scan(in, p, g, th, a);
      EXPECT_NEAR(c.points[0].power, c.points[1].power, 1e-9);
      EXPECT_NEAR(c.points[2].power, c.points[1].power, 1e-9);
    }
  }
  const std::vector<double> g{2e6 - 1e-3, 2e6, 2e6 + 1e-3};
  const auto c = spectrum_scan(in, p, g, kPi / 2, Analysis::direct);
  EXPECT_NEAR(c.points[0].power, c.points[1].power, 1e-9);
}

TEST(Scan, DetunedControlExceedsShotNoise) {
  const auto in = SidebandInput::from_db(-1.78, 4.46, kPi / 2);
  auto p = calibrate_plus_transmission(bichromatic(3.5 / std::sqrt(2.0)), 0.75);
  p.bichromatic = false;
  p.omega = kTwoPi * 3.5e6;
  p.control_detuning = kTwoPi * 2e6;
  const std::vector<double> probe{2e6};
  for (int k = 0; k < 32; ++k) {
    EXPECT_GT(spectrum_scan(in, p, probe, kPi * k / 32, Analysis::direct).points[0].power_db, 0.0);
  }
}

TEST(Scan, ChannelOutputsArePhysical) {
  const auto in = SidebandInput::from_db(-1.78, 4.46, kPi / 2);
  const auto p = calibrate_plus_transmission(bichromatic(), 0.75);
  for (Analysis a : {Analysis::plus_mode, Analysis::minus_mode}) {
    const auto c = spectrum_scan(in, p, linear_grid(-1e6, 1e6, 21), 0.3, a);
    EXPECT_EQ(c.channel_outputs.size(), 21u);
    for (const auto& s : c.channel_outputs) EXPECT_GE(oracle::min_uncertainty_eigenvalue(s.cov()), -1e-9);
  }
}

TEST(Scan, RejectsBadGrids) {
  const auto in = SidebandInput::from_db(-1.78, 4.46, kPi / 2);
  const std::vector<double> empty;
  EXPECT_THROW(spectrum_scan(in, base(), empty, 0.0, Analysis::direct), std::invalid_argument);
  const std::vector<double> neg{-1e6};
  EXPECT_THROW(spectrum_scan(in, base(), neg, 0.0, Analysis::direct), std::invalid_argument);
  const std::vector<double> zero{0.0};
  EXPECT_THROW(spectrum_scan(in, base(), zero, 0.0, Analysis::plus_mode), std::invalid_argument);
}

TEST(Scan, CsvAndNames) {
  const auto in = SidebandInput::from_db(-1.78, 4.46, kPi / 2);
  const std::vector<double> g{1e6, 2e6};
  const std::vector<std::string> pre{"note"};
  const auto csv = spectrum_scan(in, base(), g, 0.0, Analysis::direct).to_csv(pre);
  EXPECT_EQ(csv.rfind("# note\ndelta_hz,power,power_db,shot_ref\n", 0), 0u);
  for (Analysis a : {Analysis::direct, Analysis::plus_mode, Analysis::minus_mode})
    EXPECT_EQ(parse_analysis(to_string(a)), a);
  EXPECT_THROW(parse_analysis("sideways"), std::invalid_argument);
  const auto grid = linear_grid(1.0, 2.0, 3);
  EXPECT_EQ(grid, (std::vector<double>{1.0, 1.5, 2.0}));
}
