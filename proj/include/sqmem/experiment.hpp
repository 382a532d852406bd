#pragma once

#include "sqmem/config.hpp"
#include "sqmem/dsp.hpp"
#include "sqmem/eit.hpp"
#include "sqmem/homodyne.hpp"
#include "sqmem/memory.hpp"
#include "sqmem/sideband.hpp"

#include "json.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sqmem {

/// Config values turned into model parameters, with every "auto" resolved.
struct Calibration {
  EITParams eit;
  SidebandInput input;
  double input_antisqueezing_db = 0.0;
  PulseExperiment pulse;
  /// Pure-loss efficiency that maps the input levels onto the retrieved ones.
  double fitted_total_efficiency = 1.0;
  /// η+ · η_m · e^{-rate T} actually used by the memory channel.
  double total_efficiency = 1.0;
};

/// Resolves the "auto" fields:
///   input.antisqueezing_db  input level that makes one pure-loss efficiency map the
///                           input squeezing and antisqueezing onto the retrieved pair
///   eit.gamma0_hz           a+ transmission at two-photon resonance equals
///                           eit.plus_transmission (single-tone control is treated as
///                           the equivalent a+ drive at the same total power)
///   pulse.memory_efficiency η_m giving the fitted total efficiency
Calibration calibrate(const ExperimentConfig& config);

nlohmann::json calibration_to_json(const Calibration& calibration);

/// Noise model of the continuous bichromatic measurement: a ± pair at the sideband
/// offset whose baseband gains follow the demodulated channel model, plus the
/// optional environmental line. Outside the pair band the record is shot noise.
NoiseSpectrumModel dsp_model(const ExperimentConfig& config, const Calibration& calibration);

struct DspTraces {
  std::vector<HomodyneTrace> signal;
  std::vector<HomodyneTrace> shot;
};

/// synthesis.n_traces signal traces at LO phase scan.theta and as many shot-noise
/// traces carrying the same beat reference.
DspTraces synthesize_dsp_traces(const ExperimentConfig& config, const Calibration& calibration,
                                unsigned threads);

struct DspSpectra {
  SpectrumEstimate direct;
  SpectrumEstimate plus_mode;
  SpectrumEstimate minus_mode;
};

/// Welch spectra of the raw and demodulated records, each referenced to the shot
/// traces processed the same way.
DspSpectra analyze_traces(std::span<const HomodyneTrace> signal, std::span<const HomodyneTrace> shot,
                          const ExperimentConfig& config, unsigned threads);

struct RunOptions {
  unsigned threads = 1;
  bool dump_samples = false;
};

struct RunReport {
  std::filesystem::path out_dir;
  std::vector<std::string> files;
  nlohmann::json summary;
};

/// Runs the configured stages and writes CSV/JSON results plus manifest.json into
/// out_dir. Output bytes depend only on the config. On any error the files written
/// so far are removed and the exception propagates; a channel output that fails the
/// physicality test raises NumericError.
RunReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                         const RunOptions& options = {});

/// output.dir if set, else $SQMEM_OUT_DIR, else ./sqmem_out.
std::filesystem::path default_output_dir(const ExperimentConfig& config);

}  // namespace sqmem
