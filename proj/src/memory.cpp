#include "sqmem/memory.hpp"

#include <cmath>
#include <stdexcept>

namespace sqmem {

namespace {

double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

void PulseExperiment::validate() const {
  input_envelope.validate();
  retrieved_envelope.validate();
  if (!(storage_time >= 0.0)) throw std::invalid_argument("storage time must be ≥ 0");
  if (!(memory_efficiency >= 0.0 && memory_efficiency <= 1.0)) {
    throw std::invalid_argument("memory efficiency must lie in [0, 1]");
  }
  if (!(storage_decoherence_rate >= 0.0)) throw std::invalid_argument("decoherence rate must be ≥ 0");
}

double total_efficiency(const PulseExperiment& experiment, const EITParams& eit) {
  experiment.validate();
  eit.validate();
  if (!eit.bichromatic) throw std::invalid_argument("storage needs bichromatic control");
  const double eta_plus = std::min(1.0, plus_mode_transfer(eit, 0.0).transmission());
  return eta_plus * experiment.memory_efficiency *
         std::exp(-experiment.storage_decoherence_rate * experiment.storage_time);
}

CovarianceState store_retrieve(const CovarianceState& state_pm, const SidebandPair& pair,
                               const PulseExperiment& experiment, const EITParams& eit) {
  pair.validate();
  const double eta = total_efficiency(experiment, eit);
  return apply_loss(apply_loss(state_pm, pair.upper, eta), pair.lower, 0.0);
}

double pulse_envelope(const TemporalModeFn& fn, double t) { return mode_value(fn, t); }

double loss_from_variances(double v_in, double v_out) {
  const double gap = v_in - kVacuumVariance;
  if (std::abs(gap) < 1e-15) throw std::invalid_argument("input at vacuum level carries no loss information");
  return (v_out - kVacuumVariance) / gap;
}

PureLossCalibration calibrate_pure_loss(double input_squeezing_db, double retrieved_squeezing_db,
                                        double retrieved_antisqueezing_db) {
  const double s_in = from_db(input_squeezing_db);
  const double s_out = from_db(retrieved_squeezing_db);
  const double a_out = from_db(retrieved_antisqueezing_db);
  if (!(s_in < s_out && s_out <= 1.0)) {
    throw std::invalid_argument("retrieved squeezing must lie between the input level and shot noise");
  }
  PureLossCalibration cal;
  cal.efficiency = (1.0 - s_out) / (1.0 - s_in);
  cal.input_antisqueezing_db = 10.0 * std::log10(1.0 + (a_out - 1.0) / cal.efficiency);
  return cal;
}

double memory_efficiency_for(double target_total, const PulseExperiment& experiment,
                             const EITParams& eit) {
  PulseExperiment unit = experiment;
  unit.memory_efficiency = 1.0;
  const double ceiling = total_efficiency(unit, eit);
  const double eta_m = target_total / ceiling;
  if (!(eta_m >= 0.0 && eta_m <= 1.0)) {
    throw std::invalid_argument("target efficiency exceeds what the EIT transmission allows");
  }
  return eta_m;
}

}  // namespace sqmem
