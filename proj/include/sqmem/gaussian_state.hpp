#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <numbers>

namespace sqmem {

/// Vacuum variance of a single quadrature, X(θ) = (a† e^{iθ} + a e^{-iθ}) / 2.
inline constexpr double kVacuumVariance = 0.25;

/// Complex squeezing parameter ζ = r e^{iφ}; r ≥ 0 and φ kept in [0, 2π).
class SqueezeParam {
 public:
  SqueezeParam() = default;
  SqueezeParam(double r, double phi);

  /// r that puts the squeezed quadrature at `db` (negative) relative to vacuum.
  static SqueezeParam from_db(double squeezing_db, double phi);

  double r() const { return r_; }
  double phi() const { return phi_; }
  SqueezeParam negated() const { return {r_, phi_ + std::numbers::pi}; }

 private:
  double r_ = 0.0;
  double phi_ = 0.0;
};

double normalize_angle(double phi);

/// N-mode Gaussian state in (x1, p1, ..., xn, pn) ordering with x = (a + a†)/2,
/// p = (a - a†)/2i, so [x, p] = i/2 and the vacuum covariance is I/4.
///
/// Squeezing convention: the single-mode squeezer S(ζ) = exp[(ζ* a² - ζ a†²)/2]
/// maps a -> a cosh r - a† e^{iφ} sinh r. For φ = 0 the x quadrature (θ = 0) is
/// squeezed; in general the squeezed quadrature sits at θ = φ/2.
///
/// Every operation returns a new state and leaves its argument untouched.
class CovarianceState {
 public:
  CovarianceState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  std::size_t n_modes() const { return static_cast<std::size_t>(mean_.size() / 2); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

  /// 2x2 covariance block of one mode.
  Eigen::Matrix2d mode_cov(std::size_t mode) const;

  /// Reduced state on the listed modes, in the listed order.
  CovarianceState marginal(std::initializer_list<std::size_t> modes) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

CovarianceState vacuum_state(std::size_t n_modes);

/// Product of identical thermal states, each quadrature variance nu/4 (nu ≥ 1).
CovarianceState thermal_state(std::size_t n_modes, double nu);

CovarianceState apply_squeeze(const CovarianceState& state, std::size_t mode,
                              const SqueezeParam& zeta);

/// exp(ζ* a b - ζ a† b†): a -> a cosh r - b† e^{iφ} sinh r and symmetrically for b.
CovarianceState apply_two_mode_squeeze(const CovarianceState& state, std::size_t mode_a,
                                       std::size_t mode_b, const SqueezeParam& zeta);

/// a -> cos(t) a + e^{iψ} sin(t) b,  b -> -e^{-iψ} sin(t) a + cos(t) b.
CovarianceState apply_beamsplitter(const CovarianceState& state, std::size_t mode_a,
                                   std::size_t mode_b, double mix_angle, double rel_phase);

/// a -> e^{iφ} a, the phase picked up by a field multiplied by e^{iφ}.
CovarianceState apply_phase(const CovarianceState& state, std::size_t mode, double phi);

/// Pure-loss channel of intensity transmission eta (beamsplitter with a vacuum port).
CovarianceState apply_loss(const CovarianceState& state, std::size_t mode, double eta);

/// Var[x cos θ + p sin θ] of one mode.
double quadrature_variance(const CovarianceState& state, std::size_t mode, double theta);

/// <X(θ)²>, i.e. the variance plus the squared mean.
double quadrature_second_moment(const CovarianceState& state, std::size_t mode, double theta);

/// Recovers ζ from a single-mode pure squeezed vacuum block. For r ≈ 0 the phase is
/// meaningless and returned as 0.
SqueezeParam squeeze_params_of(const CovarianceState& state, std::size_t mode);

/// Standard symplectic form Ω = ⊕ [[0, 1], [-1, 0]].
Eigen::MatrixXd symplectic_form(std::size_t n_modes);

/// Minimum eigenvalue of the Hermitian matrix cov + (i/4) Ω. Physical states give ≥ 0.
double physicality_margin(const CovarianceState& state);

bool is_physical(const CovarianceState& state, double tol = 1e-9);

/// det(4 cov); equals 1 for pure states.
double purity_determinant(const CovarianceState& state);

/// Symplectic eigenvalues in units of the vacuum variance (all ≥ 1 when physical).
Eigen::VectorXd symplectic_eigenvalues(const CovarianceState& state);

}  // namespace sqmem
