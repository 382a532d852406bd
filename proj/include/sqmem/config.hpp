#pragma once

#include "sqmem/dsp.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sqmem {

enum class Preset { fig3_resonant, fig3_detuned_500k, fig3_detuned_2m, fig4, fig5, custom };

std::string to_string(Preset preset);
Preset parse_preset(const std::string& name);
const std::vector<Preset>& all_presets();

/// Work a run performs. `scan` evaluates the channel model on a frequency grid,
/// `dsp` synthesizes and analyzes continuous homodyne traces, `memory` runs the
/// pulsed storage experiment with synthesized pulse traces.
struct Stages {
  bool scan = false;
  bool dsp = false;
  bool memory = false;
};

/// Levels in dB relative to shot noise; frequencies in Hz (not rad/s); times in s.
/// Optional values are written "auto" in config files and filled by calibration.
struct ExperimentConfig {
  Preset experiment = Preset::custom;
  std::optional<std::uint64_t> seed;
  Stages stages;

  struct Input {
    double squeezing_db = -1.78;
    std::optional<double> antisqueezing_db;
    double theta_sq = 1.5707963267948966;
    double offset_hz = 2.0e6;
  } input;

  struct Eit {
    double optical_depth = 8.0;
    double gamma_hz = 5.75e6;
    std::optional<double> gamma0_hz;
    double omega_hz = 3.5e6;
    double control_detuning_hz = 0.0;
    bool bichromatic = false;
    /// Target a+ (or resonant dark-state) transmission used when gamma0 is auto.
    double plus_transmission = 0.75;
  } eit;

  struct Scan {
    double start_hz = 0.05e6;
    double stop_hz = 3.0e6;
    std::size_t points = 296;
    double baseband_span_hz = 1.0e6;
    std::size_t baseband_points = 201;
    double theta = 1.5707963267948966;
    std::size_t theta_points = 32;
    double probe_hz = 2.0e6;
  } scan;

  struct Pulse {
    double input_center = 1.0e-6;
    double input_fwhm = 470e-9;
    double write_off_time = 2.0e-6;
    double storage_time = 3.0e-6;
    double retrieved_fwhm = 470e-9;
    std::optional<double> memory_efficiency;
    double decoherence_rate = 0.0;
    double retrieved_squeezing_db = -0.44;
    double retrieved_antisqueezing_db = 1.80;
  } pulse;

  struct Synthesis {
    double sample_rate = 5.0e7;
    std::size_t n_samples = std::size_t{1} << 20;
    std::size_t n_traces = 2;
    double shot_level = 1.0;
    double beat_phase = 0.0;
    double bandwidth_hz = 1.0e6;
    std::size_t profile_points = 41;
    double line_hz = 1.0e5;
    double line_power = 0.0;
    double pulse_sample_rate = 1.0e8;
    std::size_t pulse_samples = 1024;
    std::size_t pulse_traces = 100000;
  } synthesis;

  struct Analysis {
    std::size_t segment_len = 4096;
    Window window = Window::hann;
    double overlap = 0.5;
    double band_hz = 250e3;
  } analysis;

  struct Output {
    std::string dir;
  } output;
};

/// A problem with one config field, e.g. {"pulse.memory_efficiency", "must lie in [0, 1]"}.
struct Diagnostic {
  std::string field;
  std::string message;
};

/// Built-in configuration of a preset (seed 42).
ExperimentConfig preset_config(Preset preset);

/// Parses INI text: top-level `experiment`, `seed` and `stages`, then [section] blocks
/// with key = value lines; ';' and '#' start comment lines. Keys not given keep the
/// defaults of the named experiment's preset, except `seed`, which must be present.
/// Syntax and value errors are appended to `diagnostics`.
ExperimentConfig parse_config(const std::string& text, std::vector<Diagnostic>& diagnostics);

/// Every invariant violation of a parsed config.
std::vector<Diagnostic> validate_config(const ExperimentConfig& config);

/// Reads, parses and validates a file. Throws IoError if it cannot be read.
std::vector<Diagnostic> validate_config_file(const std::filesystem::path& path);

/// Reads and parses a file, throwing ConfigError (listing every diagnostic) if it is
/// not valid.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical INI text listing every field. Parsing it gives back the same config.
std::string to_ini(const ExperimentConfig& config);

/// SHA-256 of the canonical text, excluding output.dir, as lowercase hex.
std::string config_hash(const ExperimentConfig& config);

/// {"section.key": "value"} for every field, values as in to_ini.
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& json);

nlohmann::json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics);

}  // namespace sqmem
