#pragma once

#include "sqmem/eit.hpp"
#include "sqmem/gaussian_state.hpp"
#include "sqmem/sideband.hpp"
#include "sqmem/temporal_mode.hpp"

namespace sqmem {

/// Write / store / read timing of a pulsed storage run, plus the phenomenological
/// loss budget of the memory. Times in seconds, rates in 1/s.
struct PulseExperiment {
  TemporalModeFn input_envelope = TemporalModeFn::gaussian(1.0e-6, 470e-9);
  double write_off_time = 2.0e-6;
  double storage_time = 3.0e-6;
  TemporalModeFn retrieved_envelope = TemporalModeFn::half_gaussian(5.0e-6, 470e-9);
  double memory_efficiency = 1.0;
  double storage_decoherence_rate = 0.0;

  /// Control turn-on for the read pulse.
  double read_on_time() const { return write_off_time + storage_time; }

  void validate() const;
};

/// Intensity transmission of the a+ mode through write, storage and read:
/// η₊(EIT) · η_m · exp(-rate · storage_time).
double total_efficiency(const PulseExperiment& experiment, const EITParams& eit);

/// Pure-attenuation memory. a+ (pair.upper) keeps its quadrature structure with
/// total_efficiency; a- (pair.lower), which has no dark state, comes back as vacuum.
CovarianceState store_retrieve(const CovarianceState& state_pm, const SidebandPair& pair,
                               const PulseExperiment& experiment, const EITParams& eit);

/// Normalized envelope value; 0 outside the function's support.
double pulse_envelope(const TemporalModeFn& fn, double t);

/// η solving V_out = η V_in + (1 - η)/4 for one quadrature.
double loss_from_variances(double v_in, double v_out);

/// Pure-loss calibration from the input squeezing and the retrieved squeezing and
/// antisqueezing (dB versus shot noise). `efficiency` reproduces the squeezed level;
/// `input_antisqueezing_db` is the input level that makes the same efficiency
/// reproduce the retrieved antisqueezing.
struct PureLossCalibration {
  double efficiency = 1.0;
  double input_antisqueezing_db = 0.0;
};
PureLossCalibration calibrate_pure_loss(double input_squeezing_db, double retrieved_squeezing_db,
                                        double retrieved_antisqueezing_db);

/// Memory efficiency η_m that yields `target_total` for the given EIT and decay.
double memory_efficiency_for(double target_total, const PulseExperiment& experiment,
                             const EITParams& eit);

}  // namespace sqmem
