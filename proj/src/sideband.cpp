#include "sqmem/sideband.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sqmem {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd second_moments(const CovarianceState& state) {
  return state.cov() + state.mean() * state.mean().transpose();
}

}  // namespace

void SidebandPair::validate() const {
  if (!(offset_hz > 0.0)) throw std::invalid_argument("sideband offset must be positive");
  if (upper == lower) throw std::invalid_argument("sideband modes must be distinct");
}

CovarianceState to_pm_basis(const CovarianceState& state, const SidebandPair& pair) {
  pair.validate();
  return apply_phase(apply_beamsplitter(state, pair.upper, pair.lower, kPi / 4.0, 0.0), pair.lower,
                     kPi);
}

CovarianceState from_pm_basis(const CovarianceState& state, const SidebandPair& pair) {
  pair.validate();
  return apply_beamsplitter(apply_phase(state, pair.lower, -kPi), pair.upper, pair.lower,
                            -kPi / 4.0, 0.0);
}

std::pair<SqueezeParam, SqueezeParam> pm_squeeze_params(const SqueezeParam& zeta) {
  return {zeta, zeta.negated()};
}

double two_mode_quadrature_power(const CovarianceState& state, const SidebandPair& pair,
                                 double theta) {
  pair.validate();
  const Eigen::MatrixXd m = second_moments(state);
  const auto u = static_cast<Eigen::Index>(2 * pair.upper);
  const auto l = static_cast<Eigen::Index>(2 * pair.lower);
  const double upper_sq = m(u, u) + m(u + 1, u + 1);
  const double lower_sq = m(l, l) + m(l + 1, l + 1);
  // <a_u a_l> for commuting modes
  const double re_c = m(u, l) - m(u + 1, l + 1);
  const double im_c = m(u, l + 1) + m(u + 1, l);
  // <a_u† a_u> = <x²+p²> - 1/2 and <a_l a_l†> = <x²+p²> + 1/2; the halves cancel.
  return 0.25 * (upper_sq + lower_sq +
                 2.0 * (std::cos(2.0 * theta) * re_c + std::sin(2.0 * theta) * im_c));
}

double pm_quadrature_power(const CovarianceState& state, const SidebandPair& pair, double theta) {
  const CovarianceState pm = to_pm_basis(state, pair);
  return 0.5 * quadrature_second_moment(pm, pair.upper, theta) +
         0.5 * quadrature_second_moment(pm, pair.lower, theta + kPi / 2.0);
}

SidebandInput SidebandInput::from_db(double squeezing_db, double antisqueezing_db,
                                     double theta_sq) {
  if (squeezing_db > 0.0 || antisqueezing_db < 0.0) {
    throw std::invalid_argument("squeezing must be ≤ 0 dB and antisqueezing ≥ 0 dB");
  }
  const double s = std::pow(10.0, squeezing_db / 10.0);
  const double a = std::pow(10.0, antisqueezing_db / 10.0);
  const double nu = std::sqrt(s * a);
  if (nu < 1.0 - 1e-12) {
    throw std::invalid_argument("squeezing/antisqueezing pair violates the uncertainty bound");
  }
  SidebandInput in;
  in.zeta = SqueezeParam(0.25 * std::log(a / s), 2.0 * theta_sq);
  in.nu = std::max(nu, 1.0);
  return in;
}

CovarianceState SidebandInput::state() const {
  return apply_two_mode_squeeze(thermal_state(2, nu), 0, 1, zeta);
}

}  // namespace sqmem
