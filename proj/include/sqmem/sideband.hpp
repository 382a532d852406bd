#pragma once

#include "sqmem/gaussian_state.hpp"

#include <cstddef>
#include <utility>

namespace sqmem {

/// Two sideband modes at ω0 ± Δ inside a CovarianceState. The carrier is
/// bookkeeping only; all physics is expressed through offsets from it.
struct SidebandPair {
  double carrier_hz = 0.0;
  double offset_hz = 2.0e6;
  std::size_t upper = 0;
  std::size_t lower = 1;

  void validate() const;
};

/// Replaces the sideband modes (u, l) by a+ = (u + l)/√2 in the `upper` slot and
/// a- = (u - l)/√2 in the `lower` slot.
///
/// Realized as apply_beamsplitter(π/4, 0), which leaves -(u - l)/√2 in the lower
/// slot, followed by a π phase on that slot to fix the sign of a-.
CovarianceState to_pm_basis(const CovarianceState& state, const SidebandPair& pair);

/// Exact inverse of to_pm_basis.
CovarianceState from_pm_basis(const CovarianceState& state, const SidebandPair& pair);

/// Single-mode parameters of a+ and a- for a two-mode squeezer ζ: (ζ, -ζ).
std::pair<SqueezeParam, SqueezeParam> pm_squeeze_params(const SqueezeParam& zeta);

/// <X_Δ†(θ) X_Δ(θ)> with X_Δ(θ) = [a_l† e^{iθ} + a_u e^{-iθ}] / 2, evaluated directly
/// from the sideband-basis moments:
///   (1/4) [<a_u† a_u> + <a_l a_l†> + 2 Re(e^{-2iθ} <a_u a_l>)].
double two_mode_quadrature_power(const CovarianceState& state, const SidebandPair& pair,
                                 double theta);

/// ½<X+²(θ)> + ½<X-²(θ + π/2)> evaluated after the basis change; the same number as
/// two_mode_quadrature_power for every Gaussian state.
double pm_quadrature_power(const CovarianceState& state, const SidebandPair& pair, double theta);

/// Two-mode squeezed sideband input, optionally mixed. Built as a thermal state of
/// variance nu/4 on both sidebands followed by the two-mode squeezer ζ, so that the
/// power at the squeezing phase is nu e^{-2r}/4 and at the orthogonal phase nu e^{2r}/4.
struct SidebandInput {
  SqueezeParam zeta;
  double nu = 1.0;

  /// From the two-mode quadrature levels relative to shot noise. The squeezed
  /// two-mode quadrature sits at LO phase theta_sq (ζ phase = 2 theta_sq).
  static SidebandInput from_db(double squeezing_db, double antisqueezing_db, double theta_sq);

  double squeezing_phase() const { return 0.5 * zeta.phi(); }

  /// Two-mode state with the sidebands in modes (0, 1).
  CovarianceState state() const;
};

}  // namespace sqmem
