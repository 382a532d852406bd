#include "oracles.hpp"

#include "sqmem/gaussian_state.hpp"

#include <gtest/gtest.h>

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <random>

using namespace sqmem;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix2d squeezer(double r, double phi) {
  Eigen::Matrix2d refl;
  refl << std::cos(phi), std::sin(phi), std::sin(phi), -std::cos(phi);
  return std::cosh(r) * Eigen::Matrix2d::Identity() - std::sinh(r) * refl;
}

Eigen::Matrix2d rotation(double phi) {
  Eigen::Matrix2d m;
  m << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return m;
}

// Monte-Carlo variances of x cos θ + p sin θ from 10⁶ draws of the mode block.
double sampled_variance(const Eigen::Matrix2d& cov, double theta, std::uint64_t seed) {
  const Eigen::Matrix2d l = cov.llt().matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const int n = 1'000'000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d z(g(rng), g(rng));
    const Eigen::Vector2d v = l * z;
    const double q = v(0) * std::cos(theta) + v(1) * std::sin(theta);
    sum += q;
    sum2 += q * q;
  }
  const double mean = sum / n;
  return sum2 / n - mean * mean;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(SqueezeParam, NormalizesPhaseAndRejectsNegativeMagnitude) {
  const SqueezeParam z(0.3, -kPi / 2);
  EXPECT_NEAR(z.phi(), 1.5 * kPi, 1e-15);
  EXPECT_NEAR(SqueezeParam(0.3, 4 * kPi + 0.1).phi(), 0.1, 1e-12);
  EXPECT_THROW(SqueezeParam(-0.1, 0.0), std::invalid_argument);
  EXPECT_NEAR(z.negated().phi(), kPi / 2, 1e-15);
}

TEST(Vacuum, CovarianceAndVariance) {
  const auto v1 = vacuum_state(1);
  EXPECT_EQ(v1.cov(), Eigen::Matrix2d::Identity() * 0.25);
  const auto v2 = vacuum_state(2);
  EXPECT_EQ(v2.cov(), Eigen::MatrixXd::Identity(4, 4) * 0.25);
  EXPECT_TRUE(v2.mean().isZero());
  for (double th : {0.0, 0.4, 1.3, 2.9}) EXPECT_DOUBLE_EQ(quadrature_variance(v1, 0, th), 0.25);
  EXPECT_THROW(vacuum_state(0), std::invalid_argument);
  EXPECT_NEAR(purity_determinant(v2), 1.0, 1e-12);
}

TEST(Squeeze, ZeroIsIdentity) {
  std::mt19937_64 rng(1);
  const auto s = oracle::random_state(2, rng);
  const auto out = apply_squeeze(s, 1, SqueezeParam(0.0, 1.2));
  EXPECT_LT(max_abs(out.cov() - s.cov()), 1e-15);
}

TEST(Squeeze, MatchesClosedFormCongruence) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = oracle::random_state(1, rng);
    const double r = 0.1 * trial, phi = 0.37 * trial;
    const auto out = apply_squeeze(s, 0, SqueezeParam(r, phi));
    const Eigen::Matrix2d m = squeezer(r, phi);
    EXPECT_LT(max_abs(out.cov() - m * s.cov() * m.transpose()), 1e-12);
    EXPECT_LT((out.mean() - m * s.mean()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Squeeze, AxisPinnedByMonteCarlo) {
  const double r = 0.4;
  const auto s = apply_squeeze(vacuum_state(1), 0, SqueezeParam(r, 0.0));
  const double vx = sampled_variance(s.cov(), 0.0, 11);
  const double vp = sampled_variance(s.cov(), kPi / 2, 12);
  // 10⁶ samples: relative standard error √(2/10⁶) ≈ 0.14 %.
  EXPECT_NEAR(vx / (std::exp(-2 * r) / 4), 1.0, 0.007);
  EXPECT_NEAR(vp / (std::exp(2 * r) / 4), 1.0, 0.007);
  EXPECT_NEAR(quadrature_variance(s, 0, 0.0), std::exp(-2 * r) / 4, 1e-15);
}

TEST(Squeeze, SqueezedAxisAtHalfPhase) {
  const double phi = 1.1;
  const auto s = apply_squeeze(vacuum_state(1), 0, SqueezeParam(0.5, phi));
  EXPECT_NEAR(quadrature_variance(s, 0, phi / 2), std::exp(-1.0) / 4, 1e-14);
  EXPECT_NEAR(quadrature_variance(s, 0, phi / 2 + kPi / 2), std::exp(1.0) / 4, 1e-14);
}

TEST(Squeeze, FromDbHitsAbstractLevel) {
  const auto z = SqueezeParam::from_db(-1.78, 0.0);
  const auto s = apply_squeeze(vacuum_state(1), 0, z);
  EXPECT_NEAR(quadrature_variance(s, 0, 0.0), 0.25 * std::pow(10.0, -0.178), 1e-14);
  EXPECT_NEAR(oracle::db(quadrature_variance(s, 0, 0.0)), -1.78, 1e-12);
}

TEST(TwoModeSqueeze, MarginalsAreThermal) {
  const double r = 0.7;
  const auto s = apply_two_mode_squeeze(vacuum_state(2), 0, 1, SqueezeParam(r, 0.9));
  for (std::size_t m : {0u, 1u}) {
    const Eigen::Matrix2d b = s.mode_cov(m);
    EXPECT_LT(max_abs(b - Eigen::Matrix2d::Identity() * std::cosh(2 * r) / 4), 1e-13);
  }
  EXPECT_NEAR(purity_determinant(s), 1.0, 1e-10);
  EXPECT_THROW(apply_two_mode_squeeze(vacuum_state(2), 1, 1, SqueezeParam(r, 0.0)), std::invalid_argument);
  EXPECT_LT(max_abs(apply_two_mode_squeeze(s, 0, 1, SqueezeParam(0.0, 0.0)).cov() - s.cov()), 1e-15);
}

TEST(TwoModeSqueeze, MarginalsMonteCarlo) {
  const double r = 0.5;
  const auto s = apply_two_mode_squeeze(vacuum_state(2), 0, 1, SqueezeParam(r, 0.0));
  const double v = sampled_variance(s.mode_cov(1), 0.3, 21);
  EXPECT_NEAR(v / (std::cosh(2 * r) / 4), 1.0, 0.007);
}

TEST(Beamsplitter, ZeroAngleAndInverse) {
  std::mt19937_64 rng(3);
  const auto s = oracle::random_state(3, rng);
  EXPECT_LT(max_abs(apply_beamsplitter(s, 0, 2, 0.0, 0.7).cov() - s.cov()), 1e-15);
  const auto back = apply_beamsplitter(apply_beamsplitter(s, 0, 2, kPi / 4, 0.0), 0, 2, -kPi / 4, 0.0);
  EXPECT_LT(max_abs(back.cov() - s.cov()), 1e-12);
  EXPECT_LT((back.mean() - s.mean()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Beamsplitter, MatchesModeTransformation) {
  std::mt19937_64 rng(4);
  const auto s = oracle::random_state(2, rng);
  const double t = 0.6, psi = 1.9;
  // a' = cos t a + e^{iψ} sin t b ; b' = -e^{-iψ} sin t a + cos t b.
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.block<2, 2>(0, 0) = std::cos(t) * Eigen::Matrix2d::Identity();
  m.block<2, 2>(0, 2) = std::sin(t) * rotation(psi);
  m.block<2, 2>(2, 0) = -std::sin(t) * rotation(-psi);
  m.block<2, 2>(2, 2) = std::cos(t) * Eigen::Matrix2d::Identity();
  const auto out = apply_beamsplitter(s, 0, 1, t, psi);
  EXPECT_LT(max_abs(out.cov() - m * s.cov() * m.transpose()), 1e-12);
}

TEST(Beamsplitter, PreservesPhysicalityOnRandomStates) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int k = 0; k < 100; ++k) {
    const auto out = apply_beamsplitter(oracle::random_state(2, rng), 0, 1, u(rng), u(rng));
    EXPECT_GE(oracle::min_uncertainty_eigenvalue(out.cov()), -1e-9);
  }
}

TEST(Phase, IdentityAndQuarterTurn) {
  std::mt19937_64 rng(6);
  const auto s = oracle::random_state(1, rng);
  EXPECT_LT(max_abs(apply_phase(s, 0, 0.0).cov() - s.cov()), 1e-15);
  EXPECT_LT(max_abs(apply_phase(s, 0, 2 * kPi).cov() - s.cov()), 1e-12);
  const auto sq = apply_squeeze(vacuum_state(1), 0, SqueezeParam(0.3, 0.0));
  const auto rot = apply_phase(sq, 0, kPi / 2);
  EXPECT_NEAR(quadrature_variance(rot, 0, 0.0), quadrature_variance(sq, 0, kPi / 2), 1e-14);
  EXPECT_NEAR(quadrature_variance(rot, 0, kPi / 2), quadrature_variance(sq, 0, 0.0), 1e-14);
  const Eigen::Matrix2d m = rotation(0.8);
  EXPECT_LT(max_abs(apply_phase(s, 0, 0.8).cov() - m * s.cov() * m.transpose()), 1e-13);
}

TEST(Loss, ClosedFormAndLimits) {
  const auto sq = apply_squeeze(vacuum_state(1), 0, SqueezeParam::from_db(-1.78, 0.0));
  const double v = 0.25 * std::pow(10.0, -0.178);
  const auto half = apply_loss(sq, 0, 0.5);
  EXPECT_NEAR(quadrature_variance(half, 0, 0.0), 0.5 * v + 0.125, 1e-15);
  EXPECT_NEAR(oracle::db(quadrature_variance(half, 0, 0.0)), -0.80, 0.01);
  EXPECT_LT(max_abs(apply_loss(sq, 0, 1.0).cov() - sq.cov()), 1e-15);
  EXPECT_LT(max_abs(apply_loss(sq, 0, 0.0).cov() - Eigen::Matrix2d::Identity() * 0.25), 1e-15);
  EXPECT_THROW(apply_loss(sq, 0, 1.1), std::invalid_argument);
  EXPECT_THROW(apply_loss(sq, 0, -0.1), std::invalid_argument);
}

TEST(Loss, CrossCovarianceAndMeanScaleBySqrtEta) {
  std::mt19937_64 rng(7);
  const auto s = oracle::random_state(2, rng);
  const auto out = apply_loss(s, 1, 0.36);
  EXPECT_LT(max_abs(out.cov().block<2, 2>(0, 2) - 0.6 * s.cov().block<2, 2>(0, 2)), 1e-14);
  EXPECT_NEAR(out.mean()(2), 0.6 * s.mean()(2), 1e-15);
}

// Loss as a beamsplitter against a vacuum ancilla, sampled.
TEST(Loss, MatchesBeamsplitterWithAncillaMonteCarlo) {
  const auto sq = apply_squeeze(vacuum_state(1), 0, SqueezeParam::from_db(-1.78, 0.0));
  Eigen::Matrix4d big = Eigen::Matrix4d::Identity() * 0.25;
  big.block<2, 2>(0, 0) = sq.cov();
  const auto mixed = apply_beamsplitter(CovarianceState(Eigen::Vector4d::Zero(), big), 0, 1, std::acos(std::sqrt(0.5)), 0.0);
  const double mc = sampled_variance(mixed.mode_cov(0), 0.0, 31);
  EXPECT_NEAR(mc / quadrature_variance(apply_loss(sq, 0, 0.5), 0, 0.0), 1.0, 0.007);
}

TEST(Quadrature, SecondMomentIncludesMean) {
  Eigen::Vector2d mean(0.3, -0.2);
  const CovarianceState s(mean, Eigen::Matrix2d::Identity() * 0.25);
  EXPECT_NEAR(quadrature_second_moment(s, 0, 0.0), 0.25 + 0.09, 1e-15);
  EXPECT_NEAR(quadrature_second_moment(s, 0, kPi / 2), 0.25 + 0.04, 1e-15);
}

TEST(Quadrature, PhaseAverageBoundedByGeometricMean) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 50; ++k) {
    const auto s = oracle::random_state(1, rng);
    double avg = 0.0;
    const int m = 256;
    for (int j = 0; j < m; ++j) avg += quadrature_variance(s, 0, kPi * j / m) / m;
    EXPECT_GE(avg + 1e-12, std::sqrt(s.cov().determinant()));
    EXPECT_GE(avg + 1e-12, 0.25);
  }
}

TEST(SqueezeParamsOf, RecoversZeta) {
  for (double phi : {0.0, 0.5, 2.0, 4.0, 6.0}) {
    const auto s = apply_squeeze(vacuum_state(1), 0, SqueezeParam(0.45, phi));
    const auto z = squeeze_params_of(s, 0);
    EXPECT_NEAR(z.r(), 0.45, 1e-12);
    EXPECT_NEAR(z.phi(), phi, 1e-10);
  }
  EXPECT_EQ(squeeze_params_of(vacuum_state(1), 0).phi(), 0.0);
}

TEST(Physicality, ThresholdAndEigenvalues) {
  EXPECT_NEAR(physicality_margin(vacuum_state(2)), 0.0, 1e-15);
  const CovarianceState bad(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity() * 0.2);
  EXPECT_FALSE(is_physical(bad));
  EXPECT_NEAR(physicality_margin(bad), oracle::min_uncertainty_eigenvalue(bad.cov()), 1e-15);
  EXPECT_THROW(thermal_state(1, 0.9), std::invalid_argument);
  const auto th = thermal_state(2, 3.0);
  const auto nu = symplectic_eigenvalues(th);
  for (Eigen::Index k = 0; k < nu.size(); ++k) EXPECT_NEAR(nu(k), 3.0, 1e-12);
}

TEST(Properties, UnitaryOpsPreservePurity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  auto s = vacuum_state(3);
  for (int k = 0; k < 30; ++k) {
    switch (k % 4) {
      case 0: s = apply_squeeze(s, k % 3, SqueezeParam(0.2, u(rng))); break;
      case 1: s = apply_two_mode_squeeze(s, k % 3, (k + 1) % 3, SqueezeParam(0.15, u(rng))); break;
      case 2: s = apply_beamsplitter(s, (k + 2) % 3, k % 3, u(rng), u(rng)); break;
      default: s = apply_phase(s, k % 3, u(rng)); break;
    }
    EXPECT_NEAR(purity_determinant(s), 1.0, 1e-9);
    EXPECT_LT(max_abs(s.cov() - s.cov().transpose()), 1e-12);
  }
}

TEST(Properties, RandomProgramsStayPhysical) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> op(0, 4), mode(0, 2), len(1, 10);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi), eta(0.0, 1.0), rr(0.0, 1.0);
  for (int prog = 0; prog < 1000; ++prog) {
    auto s = thermal_state(3, 1.0 + rr(rng));
    const int n = len(rng);
    for (int k = 0; k < n; ++k) {
      const std::size_t a = mode(rng);
      const std::size_t b = (a + 1 + mode(rng) % 2) % 3;
      switch (op(rng)) {
        case 0: s = apply_squeeze(s, a, SqueezeParam(rr(rng), u(rng))); break;
        case 1: s = apply_two_mode_squeeze(s, a, b, SqueezeParam(rr(rng), u(rng))); break;
        case 2: s = apply_beamsplitter(s, a, b, u(rng), u(rng)); break;
        case 3: s = apply_phase(s, a, u(rng)); break;
        default: s = apply_loss(s, a, eta(rng)); break;
      }
    }
    ASSERT_GE(oracle::min_uncertainty_eigenvalue(s.cov()), -1e-9) << "program " << prog;
    ASSERT_GE(symplectic_eigenvalues(s).minCoeff(), 1.0 - 1e-9);
  }
}

TEST(Errors, IndexOutOfRange) {
  const auto v = vacuum_state(2);
  EXPECT_THROW(apply_squeeze(v, 2, SqueezeParam(0.1, 0.0)), std::out_of_range);
  EXPECT_THROW(apply_phase(v, 5, 0.1), std::out_of_range);
  EXPECT_THROW(apply_beamsplitter(v, 0, 0, 0.1, 0.0), std::invalid_argument);
}
