#include "sqmem/gaussian_state.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqmem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_mode(const CovarianceState& state, std::size_t mode) {
  if (mode >= state.n_modes()) {
    throw std::out_of_range("mode index " + std::to_string(mode) + " out of range for " +
                            std::to_string(state.n_modes()) + "-mode state");
  }
}

void check_pair(const CovarianceState& state, std::size_t a, std::size_t b) {
  check_mode(state, a);
  check_mode(state, b);
  if (a == b) throw std::invalid_argument("two-mode operation needs distinct modes");
}

Eigen::Matrix2d rotation(double phi) {
  Eigen::Matrix2d m;
  m << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return m;
}

// Reflection-like block appearing in both squeezers.
Eigen::Matrix2d squeeze_block(double phi) {
  Eigen::Matrix2d m;
  m << std::cos(phi), std::sin(phi), std::sin(phi), -std::cos(phi);
  return m;
}

// Applies a symplectic matrix acting on the listed modes only.
CovarianceState congruence(const CovarianceState& state, std::initializer_list<std::size_t> modes,
                           const Eigen::MatrixXd& local) {
  const Eigen::Index dim = static_cast<Eigen::Index>(2 * state.n_modes());
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(dim, dim);
  std::size_t i = 0;
  for (std::size_t mi : modes) {
    std::size_t j = 0;
    for (std::size_t mj : modes) {
      s.block<2, 2>(2 * mi, 2 * mj) = local.block<2, 2>(2 * i, 2 * j);
      ++j;
    }
    ++i;
  }
  return CovarianceState(s * state.mean(), s * state.cov() * s.transpose());
}

}  // namespace

double normalize_angle(double phi) {
  double out = std::fmod(phi, kTwoPi);
  if (out < 0.0) out += kTwoPi;
  if (out >= kTwoPi) out = 0.0;
  return out;
}

SqueezeParam::SqueezeParam(double r, double phi) : r_(r), phi_(normalize_angle(phi)) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("squeezing magnitude must be finite and non-negative");
  }
}

SqueezeParam SqueezeParam::from_db(double squeezing_db, double phi) {
  // e^{-2r} = 10^{db/10}
  return {std::abs(squeezing_db) * std::log(10.0) / 20.0, phi};
}

CovarianceState::CovarianceState(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0 || mean_.size() % 2 != 0) {
    throw std::invalid_argument("mean vector must have even, non-zero length");
  }
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw std::invalid_argument("covariance dimension does not match mean vector");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

Eigen::Matrix2d CovarianceState::mode_cov(std::size_t mode) const {
  check_mode(*this, mode);
  return cov_.block<2, 2>(2 * mode, 2 * mode);
}

CovarianceState CovarianceState::marginal(std::initializer_list<std::size_t> modes) const {
  const auto k = static_cast<Eigen::Index>(modes.size());
  Eigen::VectorXd m(2 * k);
  Eigen::MatrixXd c(2 * k, 2 * k);
  Eigen::Index i = 0;
  for (std::size_t mi : modes) {
    check_mode(*this, mi);
    m.segment<2>(2 * i) = mean_.segment<2>(2 * mi);
    Eigen::Index j = 0;
    for (std::size_t mj : modes) {
      c.block<2, 2>(2 * i, 2 * j) = cov_.block<2, 2>(2 * mi, 2 * mj);
      ++j;
    }
    ++i;
  }
  return {m, c};
}

CovarianceState vacuum_state(std::size_t n_modes) { return thermal_state(n_modes, 1.0); }

CovarianceState thermal_state(std::size_t n_modes, double nu) {
  if (n_modes == 0) throw std::invalid_argument("a state needs at least one mode");
  if (!(nu >= 1.0)) throw std::invalid_argument("thermal variance below vacuum");
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  return {Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim) * (nu * kVacuumVariance)};
}

CovarianceState apply_squeeze(const CovarianceState& state, std::size_t mode,
                              const SqueezeParam& zeta) {
  check_mode(state, mode);
  Eigen::Matrix2d s = std::cosh(zeta.r()) * Eigen::Matrix2d::Identity() -
                      std::sinh(zeta.r()) * squeeze_block(zeta.phi());
  return congruence(state, {mode}, s);
}

CovarianceState apply_two_mode_squeeze(const CovarianceState& state, std::size_t mode_a,
                                       std::size_t mode_b, const SqueezeParam& zeta) {
  check_pair(state, mode_a, mode_b);
  const double c = std::cosh(zeta.r());
  const double s = std::sinh(zeta.r());
  const Eigen::Matrix2d off = -s * squeeze_block(zeta.phi());
  Eigen::Matrix4d m;
  m << c * Eigen::Matrix2d::Identity(), off, off, c * Eigen::Matrix2d::Identity();
  return congruence(state, {mode_a, mode_b}, m);
}

CovarianceState apply_beamsplitter(const CovarianceState& state, std::size_t mode_a,
                                   std::size_t mode_b, double mix_angle, double rel_phase) {
  check_pair(state, mode_a, mode_b);
  const double c = std::cos(mix_angle);
  const double s = std::sin(mix_angle);
  Eigen::Matrix4d m;
  m << c * Eigen::Matrix2d::Identity(), s * rotation(rel_phase), -s * rotation(-rel_phase),
      c * Eigen::Matrix2d::Identity();
  return congruence(state, {mode_a, mode_b}, m);
}

CovarianceState apply_phase(const CovarianceState& state, std::size_t mode, double phi) {
  check_mode(state, mode);
  return congruence(state, {mode}, rotation(phi));
}

CovarianceState apply_loss(const CovarianceState& state, std::size_t mode, double eta) {
  check_mode(state, mode);
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("loss transmission must lie in [0, 1]");
  }
  const double g = std::sqrt(eta);
  const auto i = static_cast<Eigen::Index>(2 * mode);
  Eigen::VectorXd mean = state.mean();
  Eigen::MatrixXd cov = state.cov();
  mean.segment<2>(i) *= g;
  cov.middleRows<2>(i) *= g;
  cov.middleCols<2>(i) *= g;
  cov.block<2, 2>(i, i) += (1.0 - eta) * kVacuumVariance * Eigen::Matrix2d::Identity();
  return {mean, cov};
}

double quadrature_variance(const CovarianceState& state, std::size_t mode, double theta) {
  const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
  return u.dot(state.mode_cov(mode) * u);
}

double quadrature_second_moment(const CovarianceState& state, std::size_t mode, double theta) {
  const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
  const double m = u.dot(state.mean().segment<2>(static_cast<Eigen::Index>(2 * mode)));
  return quadrature_variance(state, mode, theta) + m * m;
}

SqueezeParam squeeze_params_of(const CovarianceState& state, std::size_t mode) {
  // 4V = cosh 2r I - sinh 2r [[cos φ, sin φ], [sin φ, -cos φ]]
  const Eigen::Matrix2d v = 4.0 * state.mode_cov(mode);
  const double a = -0.5 * (v(0, 0) - v(1, 1));
  const double b = -0.5 * (v(0, 1) + v(1, 0));
  const double sinh2r = std::hypot(a, b);
  const double r = 0.5 * std::asinh(sinh2r);
  if (sinh2r < 1e-14) return {r, 0.0};
  return {r, std::atan2(b, a)};
}

Eigen::MatrixXd symplectic_form(std::size_t n_modes) {
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; k += 2) {
    omega(k, k + 1) = 1.0;
    omega(k + 1, k) = -1.0;
  }
  return omega;
}

double physicality_margin(const CovarianceState& state) {
  const Eigen::MatrixXcd h = state.cov().cast<std::complex<double>>() +
                             std::complex<double>(0.0, 0.25) *
                                 symplectic_form(state.n_modes()).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool is_physical(const CovarianceState& state, double tol) {
  return physicality_margin(state) >= -tol;
}

double purity_determinant(const CovarianceState& state) { return (4.0 * state.cov()).determinant(); }

Eigen::VectorXd symplectic_eigenvalues(const CovarianceState& state) {
  const Eigen::MatrixXd m = symplectic_form(state.n_modes()) * state.cov();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  std::vector<double> nu;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    if (solver.eigenvalues()(k).imag() > 0.0) nu.push_back(solver.eigenvalues()(k).imag());
  }
  // Degenerate numerical cases can produce pairs with a vanishing imaginary part.
  nu.resize(state.n_modes(), 0.0);
  std::sort(nu.begin(), nu.end());
  Eigen::VectorXd out(static_cast<Eigen::Index>(nu.size()));
  for (std::size_t k = 0; k < nu.size(); ++k) out(static_cast<Eigen::Index>(k)) = nu[k] / kVacuumVariance;
  return out;
}

}  // namespace sqmem
