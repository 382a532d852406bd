#include "sqmem/eit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sqmem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
using cd = std::complex<double>;

TransferSample lambda_response(double d, double gamma, double gamma0, double omega, double delta,
                               double two_photon) {
  const cd i(0.0, 1.0);
  cd response;
  if (omega == 0.0) {
    response = 1.0 / (delta + i * gamma / 2.0);
  } else {
    const cd ground = two_photon + i * gamma0;
    response = ground / ((delta + i * gamma / 2.0) * ground - omega * omega);
  }
  cd t = std::exp(-i * (d * gamma / 4.0) * response);
  // |t| ≤ 1 holds analytically; trim round-off.
  if (std::abs(t) > 1.0) t /= std::abs(t);
  return {delta, t};
}

struct GridCheck {
  double lo;
  double hi;
  const char* what;
};

void check_grid_value(double v, const GridCheck& range) {
  if (!(v > range.lo && v < range.hi)) {
    std::ostringstream msg;
    msg << range.what << " " << v << " Hz outside (" << range.lo << ", " << range.hi << ")";
    throw std::invalid_argument(msg.str());
  }
}

// Sideband modes for a demodulated offset f ≠ 0:
//   0: ω0+Δ+f  1: ω0-Δ-f  (two-mode squeezed pair, read by direct detection at Δ+f)
//   2: ω0+Δ-f  3: ω0-Δ+f  (the partner pair)
// The lock-in maps (0, 3) to baseband +f and (2, 1) to baseband -f.
constexpr SidebandPair kPairA{0.0, 1.0, 0, 3};
constexpr SidebandPair kPairB{0.0, 1.0, 2, 1};
constexpr SidebandPair kMeasured{0.0, 1.0, 0, 1};

CovarianceState four_mode_input(const SidebandInput& input) {
  CovarianceState s = thermal_state(4, input.nu);
  s = apply_two_mode_squeeze(s, 0, 1, input.zeta);
  return apply_two_mode_squeeze(s, 2, 3, input.zeta);
}

CovarianceState to_pm_four(const CovarianceState& s) {
  return to_pm_basis(to_pm_basis(s, kPairA), kPairB);
}

CovarianceState from_pm_four(const CovarianceState& s) {
  return from_pm_basis(from_pm_basis(s, kPairB), kPairA);
}

double demodulated_power(const CovarianceState& pm, Analysis analysis, double theta) {
  if (analysis == Analysis::plus_mode) {
    return two_mode_quadrature_power(pm, SidebandPair{0.0, 1.0, 0, 2}, theta);
  }
  // The orthogonal lock-in phase reads a-(A) together with -a-(B).
  return two_mode_quadrature_power(apply_phase(pm, 1, kPi), SidebandPair{0.0, 1.0, 3, 1}, theta);
}

CovarianceState bichromatic_four(const CovarianceState& pm, const EITParams& p, double f) {
  CovarianceState s = apply_transfer(pm, 0, plus_mode_transfer(p, f));
  s = apply_transfer(s, 3, minus_mode_transfer(p, f));
  s = apply_transfer(s, 2, plus_mode_transfer(p, -f));
  return apply_transfer(s, 1, minus_mode_transfer(p, -f));
}

CovarianceState monochromatic_four(const CovarianceState& s0, const EITParams& p, double big,
                                   double f) {
  CovarianceState s = apply_transfer(s0, 0, transfer_function(p, big + f));
  s = apply_transfer(s, 1, transfer_function(p, -big - f));
  s = apply_transfer(s, 2, transfer_function(p, big - f));
  return apply_transfer(s, 3, transfer_function(p, -big + f));
}

}  // namespace

double EITParams::rb87_d1_linewidth() { return kTwoPi * 5.75e6; }

void EITParams::validate() const {
  if (!(optical_depth >= 0.0)) throw std::invalid_argument("optical depth must be ≥ 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("excited-state linewidth must be > 0");
  if (!(gamma0 >= 0.0)) throw std::invalid_argument("ground-state decoherence must be ≥ 0");
  if (!(omega >= 0.0)) throw std::invalid_argument("Rabi frequency must be ≥ 0");
  if (!std::isfinite(control_detuning)) throw std::invalid_argument("control detuning not finite");
  if (bichromatic && !(bichromatic_offset > 0.0)) {
    throw std::invalid_argument("bichromatic control needs a positive tone offset");
  }
}

TransferSample transfer_function(const EITParams& p, double delta) {
  return lambda_response(p.optical_depth, p.gamma, p.gamma0, p.omega, delta,
                         delta - p.control_detuning);
}

TransferSample plus_mode_transfer(const EITParams& p, double baseband) {
  return lambda_response(p.optical_depth, p.gamma, p.gamma0, std::sqrt(2.0) * p.omega, baseband,
                         baseband - p.control_detuning);
}

TransferSample minus_mode_transfer(const EITParams& p, double baseband) {
  return lambda_response(p.optical_depth, p.gamma, p.gamma0, 0.0, baseband, baseband);
}

CovarianceState apply_transfer(const CovarianceState& state, std::size_t mode,
                               const TransferSample& sample) {
  const double eta = std::min(1.0, sample.transmission());
  return apply_phase(apply_loss(state, mode, eta), mode, sample.phase());
}

CovarianceState apply_monochromatic_eit(const CovarianceState& state, const SidebandPair& pair,
                                        const EITParams& params) {
  pair.validate();
  params.validate();
  if (params.bichromatic) throw std::invalid_argument("monochromatic channel given bichromatic control");
  const double delta = kTwoPi * pair.offset_hz;
  CovarianceState s = apply_transfer(state, pair.upper, transfer_function(params, delta));
  return apply_transfer(s, pair.lower, transfer_function(params, -delta));
}

CovarianceState apply_bichromatic_eit(const CovarianceState& state, const SidebandPair& pair,
                                      const EITParams& params, double baseband) {
  pair.validate();
  params.validate();
  if (!params.bichromatic) throw std::invalid_argument("bichromatic channel given single-tone control");
  CovarianceState s = apply_transfer(state, pair.upper, plus_mode_transfer(params, baseband));
  return apply_transfer(s, pair.lower, minus_mode_transfer(params, baseband));
}

EITParams calibrate_plus_transmission(EITParams params, double target) {
  params.validate();
  if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("target transmission must be in (0, 1]");
  auto eta_at = [&](double g0) {
    EITParams p = params;
    p.gamma0 = g0;
    return plus_mode_transfer(p, 0.0).transmission();
  };
  if (eta_at(0.0) <= target) {
    params.gamma0 = 0.0;
    return params;
  }
  double lo = params.gamma * 1e-12;
  double hi = params.gamma * 1e6;
  if (eta_at(hi) > target) throw std::invalid_argument("target transmission unreachable by γ₀ alone");
  if (eta_at(lo) < target) {
    lo = 0.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    if (eta_at(mid) > target) lo = mid; else hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  params.gamma0 = 0.5 * (lo + hi);
  return params;
}

std::string to_string(Analysis analysis) {
  switch (analysis) {
    case Analysis::direct: return "direct";
    case Analysis::plus_mode: return "plus_mode";
    case Analysis::minus_mode: return "minus_mode";
  }
  return "direct";
}

Analysis parse_analysis(const std::string& name) {
  if (name == "direct") return Analysis::direct;
  if (name == "plus_mode" || name == "plus") return Analysis::plus_mode;
  if (name == "minus_mode" || name == "minus") return Analysis::minus_mode;
  throw std::invalid_argument("unknown analysis '" + name + "'");
}

const SpectrumPoint& SpectrumCurve::nearest(double delta_hz) const {
  if (points.empty()) throw std::out_of_range("empty spectrum");
  return *std::min_element(points.begin(), points.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.delta_hz - delta_hz) < std::abs(b.delta_hz - delta_hz);
  });
}

std::string SpectrumCurve::to_csv(std::span<const std::string> preamble) const {
  std::ostringstream out;
  out.precision(12);
  for (const auto& line : preamble) out << "# " << line << '\n';
  out << "delta_hz,power,power_db,shot_ref\n";
  for (const auto& p : points) {
    out << p.delta_hz << ',' << p.power << ',' << p.power_db << ',' << p.shot_ref << '\n';
  }
  return out.str();
}

SpectrumCurve spectrum_scan(const SidebandInput& input, const EITParams& params,
                            std::span<const double> grid_hz, double theta, Analysis analysis) {
  params.validate();
  if (grid_hz.empty()) throw std::invalid_argument("spectrum scan needs a non-empty grid");
  const double big_hz = params.bichromatic_offset / kTwoPi;
  if (analysis != Analysis::direct && !(big_hz > 0.0)) {
    throw std::invalid_argument("demodulated views need a positive lock-in frequency");
  }

  SpectrumCurve curve;
  curve.analysis = analysis;
  curve.theta = theta;
  curve.points.reserve(grid_hz.size());

  for (double x : grid_hz) {
    double power = 0.0;
    if (analysis == Analysis::direct && !params.bichromatic) {
      check_grid_value(x, {0.0, INFINITY, "sideband offset"});
      const SidebandPair pair{0.0, x, 0, 1};
      const CovarianceState out = apply_monochromatic_eit(input.state(), pair, params);
      power = two_mode_quadrature_power(out, pair, theta);
      curve.channel_outputs.push_back(out);
    } else {
      // f is the offset from the lock-in frequency Δ.
      const double f_hz = analysis == Analysis::direct ? x - big_hz : x;
      if (analysis == Analysis::direct) {
        check_grid_value(x, {0.0, 2.0 * big_hz, "sideband offset"});
      } else {
        check_grid_value(x, {-big_hz, big_hz, "baseband offset"});
      }
      const double f = kTwoPi * f_hz;
      const double big = params.bichromatic_offset;

      if (f_hz == 0.0) {
        const SidebandPair pair{0.0, big_hz, 0, 1};
        CovarianceState pm = to_pm_basis(input.state(), pair);
        if (params.bichromatic) {
          pm = apply_bichromatic_eit(pm, pair, params, 0.0);
        } else {
          pm = to_pm_basis(apply_monochromatic_eit(input.state(), pair, params), pair);
        }
        const CovarianceState out = from_pm_basis(pm, pair);
        curve.channel_outputs.push_back(out);
        switch (analysis) {
          case Analysis::direct: power = two_mode_quadrature_power(out, pair, theta); break;
          case Analysis::plus_mode: power = quadrature_second_moment(pm, 0, theta); break;
          case Analysis::minus_mode: power = quadrature_second_moment(pm, 1, theta + kPi / 2.0); break;
        }
      } else {
        CovarianceState pm = to_pm_four(four_mode_input(input));
        if (params.bichromatic) {
          pm = bichromatic_four(pm, params, f);
        } else {
          pm = to_pm_four(monochromatic_four(four_mode_input(input), params, big, f));
        }
        const CovarianceState out = from_pm_four(pm);
        curve.channel_outputs.push_back(out);
        power = analysis == Analysis::direct ? two_mode_quadrature_power(out, kMeasured, theta)
                                             : demodulated_power(pm, analysis, theta);
      }
    }
    curve.points.push_back({x, power, 10.0 * std::log10(power / kVacuumVariance), kVacuumVariance});
  }
  return curve;
}

std::vector<double> linear_grid(double start, double stop, std::size_t points) {
  if (points == 0) throw std::invalid_argument("grid needs at least one point");
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = points == 1 ? start
                          : start + (stop - start) * static_cast<double>(k) /
                                        static_cast<double>(points - 1);
  }
  return grid;
}

}  // namespace sqmem
