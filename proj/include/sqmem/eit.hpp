#pragma once

#include "sqmem/gaussian_state.hpp"
#include "sqmem/sideband.hpp"

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace sqmem {

/// Λ-system medium. All rates and frequencies are angular (rad/s).
///
/// `omega` is the control Rabi frequency. In bichromatic mode it is the Rabi
/// frequency of each of the two tones at ±Δ, and the a+ mode sees an effective
/// single-tone Rabi frequency √2·omega.
///
/// `bichromatic_offset` is Δ, the tone offset of a bichromatic control. It is also
/// the lock-in frequency for the demodulated (plus/minus) spectrum views.
struct EITParams {
  double optical_depth = 8.0;
  double gamma = 0.0;
  double gamma0 = 0.0;
  double omega = 0.0;
  double control_detuning = 0.0;
  bool bichromatic = false;
  double bichromatic_offset = 0.0;

  void validate() const;

  /// Rb D1 excited-state linewidth, 2π × 5.75 MHz.
  static double rb87_d1_linewidth();
};

struct TransferSample {
  double delta = 0.0;
  std::complex<double> t{1.0, 0.0};

  double transmission() const { return std::norm(t); }
  double phase() const { return std::arg(t); }
};

/// Weak-probe Λ-EIT amplitude transmission through optical depth d:
///
///   t(δ) = exp[ -i (dΓ/4) (δ₂ + iγ₀) / ((δ + iΓ/2)(δ₂ + iγ₀) - Ω²) ],  δ₂ = δ - δ_c
///
/// δ is the probe detuning from the |b>→|a> resonance and δ₂ the two-photon
/// detuning. Equivalently the exponent is -i(dΓ/4) / (δ + iΓ/2 - Ω²/(δ₂ + iγ₀)), whose
/// denominator always has imaginary part ≥ Γ/2, so |t| ≤ 1 and |t| ≥ e^{-d/2}.
/// Limits: Ω = 0 gives the two-level line with |t(0)| = e^{-d/2}; γ₀ = 0 at δ₂ = 0
/// gives the dark-state value t = 1.
TransferSample transfer_function(const EITParams& params, double delta);

/// Effective transfer of the a+ mode under bichromatic control, at baseband offset
/// f from the control beat (dark state present, Rabi frequency √2·omega).
TransferSample plus_mode_transfer(const EITParams& params, double baseband);

/// Effective transfer of the a- mode (no dark state, so the control drops out).
TransferSample minus_mode_transfer(const EITParams& params, double baseband);

/// Loss |t|² followed by the phase arg t on one mode.
CovarianceState apply_transfer(const CovarianceState& state, std::size_t mode,
                               const TransferSample& sample);

/// Each sideband of the pair picks up its own transfer t(±Δ).
CovarianceState apply_monochromatic_eit(const CovarianceState& state, const SidebandPair& pair,
                                        const EITParams& params);

/// `state` must already be in the ± basis (to_pm_basis), with a+ in pair.upper and
/// a- in pair.lower; this cannot be checked here. `baseband` is the offset of the
/// pair from the control beat frequency, rad/s.
CovarianceState apply_bichromatic_eit(const CovarianceState& state, const SidebandPair& pair,
                                      const EITParams& params, double baseband = 0.0);

/// Solves for γ₀ so that the a+ transmission at zero baseband offset equals
/// `target`, keeping every other parameter fixed. Returns the updated parameters.
EITParams calibrate_plus_transmission(EITParams params, double target);

enum class Analysis { direct, plus_mode, minus_mode };

std::string to_string(Analysis analysis);
Analysis parse_analysis(const std::string& name);

struct SpectrumPoint {
  double delta_hz = 0.0;
  double power = 0.0;
  double power_db = 0.0;
  double shot_ref = kVacuumVariance;
};

/// Modeled quadrature-noise spectrum versus offset. For `direct` the grid holds
/// sideband offsets δ; for the demodulated views it holds baseband offsets f from
/// the lock-in frequency Δ.
struct SpectrumCurve {
  Analysis analysis = Analysis::direct;
  double theta = 0.0;
  std::vector<SpectrumPoint> points;
  /// Every channel output produced while scanning, kept for physicality audits.
  std::vector<CovarianceState> channel_outputs;

  const SpectrumPoint& nearest(double delta_hz) const;
  /// CSV with columns delta_hz,power,power_db,shot_ref; `preamble` lines are
  /// written first, each prefixed with "# ".
  std::string to_csv(std::span<const std::string> preamble = {}) const;
};

/// For each grid value, builds the sideband input, sends it through the medium
/// (monochromatic or bichromatic per `params.bichromatic`) and reads out:
///   direct      two-mode quadrature power of the sidebands at ±δ
///   plus_mode   power after lock-in demodulation in phase with the control beat
///   minus_mode  power after demodulation at the orthogonal phase
///
/// Off-center offsets of the direct bichromatic view and of both demodulated views
/// couple two sideband pairs (Δ ± f); those points are computed on a four-mode state.
SpectrumCurve spectrum_scan(const SidebandInput& input, const EITParams& params,
                            std::span<const double> grid_hz, double theta, Analysis analysis);

/// Uniform grid of `points` values from start to stop inclusive.
std::vector<double> linear_grid(double start, double stop, std::size_t points);

}  // namespace sqmem
