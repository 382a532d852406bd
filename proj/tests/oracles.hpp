#pragma once

// Reference computations written against Eigen only, so library results can be
// compared with something that does not share their code.

#include "sqmem/gaussian_state.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <complex>
#include <random>

namespace oracle {

inline Eigen::MatrixXd omega(std::size_t n) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    w(2 * k, 2 * k + 1) = 1.0;
    w(2 * k + 1, 2 * k) = -1.0;
  }
  return w;
}

/// S = exp(Ω H) for a random symmetric H, applied to a random thermal product.
inline sqmem::CovarianceState random_state(std::size_t n, std::mt19937_64& rng, double scale = 0.6) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(1.0, 2.5);
  Eigen::MatrixXd h(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j) h(i, j) = g(rng);
  h = (0.5 * scale * (h + h.transpose())).eval();
  const Eigen::MatrixXd s = (omega(n) * h).exp();
  Eigen::VectorXd d(2 * n);
  for (std::size_t k = 0; k < n; ++k) d(2 * k) = d(2 * k + 1) = u(rng);
  Eigen::MatrixXd cov = 0.25 * s * d.asDiagonal() * s.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::VectorXd mean(2 * n);
  for (Eigen::Index i = 0; i < mean.size(); ++i) mean(i) = 0.5 * g(rng);
  return {mean, cov};
}

/// <(vᵀ r)²> for the quadrature vector r.
inline double second_moment(const sqmem::CovarianceState& s, const Eigen::VectorXd& v) {
  const double m = v.dot(s.mean());
  return v.dot(s.cov() * v) + m * m;
}

/// Smallest eigenvalue of cov + (i/4) Ω.
inline double min_uncertainty_eigenvalue(const Eigen::MatrixXd& cov) {
  const std::size_t n = static_cast<std::size_t>(cov.rows() / 2);
  const Eigen::MatrixXcd m = cov.cast<std::complex<double>>() +
                             std::complex<double>(0.0, 0.25) * omega(n).cast<std::complex<double>>();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

/// Λ-EIT amplitude transmission, every rate angular.
inline std::complex<double> eit_t(double d, double gamma, double gamma0, double omega_c, double delta,
                                  double delta_c = 0.0) {
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  const C two_photon = (delta - delta_c) + i * gamma0;
  const C chi = (d * gamma / 4.0) * two_photon / ((delta + i * gamma / 2.0) * two_photon - omega_c * omega_c);
  return std::exp(-i * chi);
}

/// Two-mode power of a ν-thermal two-mode squeezed pair (r) measured at the
/// squeezing phase after intensity losses eta_u, eta_l on the two sidebands.
inline double lossy_tmsv_power(double r, double nu, double eta_u, double eta_l) {
  const double n = 0.5 * (nu * std::cosh(2.0 * r) - 1.0);
  return 0.25 * ((eta_u + eta_l) * n + 1.0 - std::sqrt(eta_u * eta_l) * nu * std::sinh(2.0 * r));
}

inline double db(double power) { return 10.0 * std::log10(power / 0.25); }

}  // namespace oracle
