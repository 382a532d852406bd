// sqmem: run, synthesize, analyze and validate sideband-memory experiments.
//
// Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 I/O error.

#include "sqmem/config.hpp"
#include "sqmem/errors.hpp"
#include "sqmem/experiment.hpp"
#include "sqmem/trace_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using sqmem::ExperimentConfig;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> traces;
  unsigned threads = 1;
  std::string out;
  bool dump_samples = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--out", o.out, "Output directory (default: output.dir, then $SQMEM_OUT_DIR, then ./sqmem_out)");
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores); results do not depend on it")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--traces", o.traces, "Pulse traces per ensemble (synthesis.pulse_traces)")
      ->check(CLI::PositiveNumber);
}

void apply(ExperimentConfig& c, const Overrides& o) {
  if (o.seed) c.seed = o.seed;
  if (o.traces) c.synthesis.pulse_traces = *o.traces;
}

fs::path out_dir(const ExperimentConfig& c, const Overrides& o) {
  return o.out.empty() ? sqmem::default_output_dir(c) : fs::path(o.out);
}

void fail(const std::string& kind, const std::string& message,
          const nlohmann::json& diagnostics = nlohmann::json()) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  if (!diagnostics.is_null()) j["diagnostics"] = diagnostics;
  std::cerr << j.dump() << '\n';
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw sqmem::IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig load(const std::string& path, const Overrides& o) {
  std::vector<sqmem::Diagnostic> diagnostics;
  ExperimentConfig c = sqmem::parse_config(read_file(path), diagnostics);
  apply(c, o);
  if (diagnostics.empty()) diagnostics = sqmem::validate_config(c);
  if (!diagnostics.empty()) throw sqmem::ConfigError(sqmem::diagnostics_to_json(diagnostics).dump());
  return c;
}

void print_report(const sqmem::RunReport& report) {
  nlohmann::json j{{"out_dir", report.out_dir.string()}, {"files", report.files}, {"summary", report.summary}};
  std::cout << j.dump(2) << '\n';
}

// Writes files and removes them again if a later step fails.
class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw sqmem::IoError("cannot create " + dir_.string());
  }
  fs::path claim(const std::string& name) {
    if (fs::is_directory(dir_ / name)) throw sqmem::IoError("cannot write " + (dir_ / name).string());
    names_.push_back(name);
    return dir_ / name;
  }
  void text(const std::string& name, const std::string& content) {
    std::ofstream out(claim(name), std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw sqmem::IoError("cannot write " + (dir_ / name).string());
  }
  void discard() noexcept {
    std::error_code ec;
    for (const auto& n : names_) fs::remove(dir_ / n, ec);
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

template <class Fn>
void guarded(Writer& w, Fn&& fn) {
  try {
    fn();
  } catch (...) {
    w.discard();
    throw;
  }
}

int run_synth(const ExperimentConfig& c, const Overrides& o, bool csv) {
  const auto cal = sqmem::calibrate(c);
  const auto traces = sqmem::synthesize_dsp_traces(c, cal, o.threads);
  Writer w(out_dir(c, o));
  guarded(w, [&] {
    for (std::size_t k = 0; k < traces.signal.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "signal_%03zu", k);
      sqmem::write_trace(w.claim(std::string(name) + ".htrc"), traces.signal[k]);
      if (csv) w.text(std::string(name) + ".csv", sqmem::trace_to_csv(traces.signal[k]));
      std::snprintf(name, sizeof name, "shot_%03zu", k);
      sqmem::write_trace(w.claim(std::string(name) + ".htrc"), traces.shot[k]);
      if (csv) w.text(std::string(name) + ".csv", sqmem::trace_to_csv(traces.shot[k]));
    }
  });
  std::cout << nlohmann::json{{"files", w.names()}}.dump(2) << '\n';
  return kOk;
}

sqmem::SpectrumEstimate flat_reference(sqmem::SpectrumEstimate est, double level) {
  est.shot_ref.assign(est.power.size(), level);
  return est;
}

int run_analyze(const ExperimentConfig& c, const Overrides& o, const std::vector<std::string>& inputs,
                const std::vector<std::string>& shots) {
  std::vector<sqmem::HomodyneTrace> signal, shot;
  for (const auto& p : inputs) signal.push_back(sqmem::read_trace(p));
  for (const auto& p : shots) shot.push_back(sqmem::read_trace(p));
  const bool demod = std::all_of(signal.begin(), signal.end(), [](const auto& t) { return t.reference.has_value(); }) &&
                     std::all_of(shot.begin(), shot.end(), [](const auto& t) { return t.reference.has_value(); });

  sqmem::DspSpectra spectra;
  if (!shot.empty() && demod) {
    spectra = sqmem::analyze_traces(signal, shot, c, o.threads);
  } else {
    const sqmem::WelchOptions welch{c.analysis.segment_len, c.analysis.window, c.analysis.overlap, o.threads};
    auto estimate = [&](const std::vector<sqmem::HomodyneTrace>& s, const std::vector<sqmem::HomodyneTrace>& r) {
      const auto est = sqmem::power_spectrum(s, welch);
      return r.empty() ? flat_reference(est, c.synthesis.shot_level)
                       : sqmem::with_shot_reference(est, sqmem::power_spectrum(r, welch));
    };
    spectra.direct = estimate(signal, shot);
    if (demod) {
      auto mixed = [&](double offset) {
        std::vector<sqmem::HomodyneTrace> out;
        for (const auto& t : signal) out.push_back(sqmem::demodulate(t, offset));
        return out;
      };
      spectra.plus_mode = estimate(mixed(0.0), {});
      spectra.minus_mode = estimate(mixed(0.5 * std::numbers::pi), {});
    }
  }

  Writer w(out_dir(c, o));
  const std::vector<std::string> pre{"config_hash " + sqmem::config_hash(c), "experiment analyze"};
  guarded(w, [&] {
    w.text("spectrum_direct.csv", spectra.direct.to_csv(pre));
    w.text("spectrum_direct.json", nlohmann::json{{"config_hash", sqmem::config_hash(c)},
                                                  {"config", sqmem::config_to_json(c)},
                                                  {"spectrum", spectra.direct.to_json()}}
                                           .dump(2) + "\n");
    if (demod) {
      w.text("spectrum_plus_mode.csv", spectra.plus_mode.to_csv(pre));
      w.text("spectrum_minus_mode.csv", spectra.minus_mode.to_csv(pre));
    }
  });
  std::cout << nlohmann::json{{"files", w.names()}, {"n_averages", spectra.direct.n_averages}}.dump(2) << '\n';
  return kOk;
}

int run_validate(const std::string& path) {
  const auto diagnostics = sqmem::validate_config_file(path);
  nlohmann::json j{{"valid", diagnostics.empty()}, {"diagnostics", sqmem::diagnostics_to_json(diagnostics)}};
  std::cout << j.dump(2) << '\n';
  return diagnostics.empty() ? kOk : kConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sideband squeezed-vacuum memory simulator"};
  app.require_subcommand(1);

  Overrides sim_o, rep_o, syn_o, ana_o;
  std::string sim_cfg, syn_cfg, ana_cfg, val_cfg, preset;
  std::vector<std::string> inputs, shots;
  bool csv = false;

  auto* sim = app.add_subcommand("simulate", "Run the experiment described by a config file");
  sim->add_option("--config", sim_cfg, "Config file")->required();
  add_common(sim, sim_o);
  sim->add_flag("--dump-samples", sim_o.dump_samples, "Also write every projected pulse quadrature");

  auto* rep = app.add_subcommand("reproduce", "Run a built-in preset");
  std::vector<std::string> names;
  for (auto p : sqmem::all_presets()) names.push_back(sqmem::to_string(p));
  rep->add_option("preset", preset, "Preset name")->required()->check(CLI::IsMember(names));
  add_common(rep, rep_o);
  rep->add_flag("--dump-samples", rep_o.dump_samples, "Also write every projected pulse quadrature");

  auto* syn = app.add_subcommand("synth", "Write synthesized signal and shot-noise traces (.htrc)");
  syn->add_option("--config", syn_cfg, "Config file")->required();
  add_common(syn, syn_o);
  syn->add_flag("--csv", csv, "Also write each trace as CSV");

  auto* ana = app.add_subcommand("analyze", "Welch and lock-in spectra of .htrc traces");
  ana->add_option("--config", ana_cfg, "Config file (analysis section)")->required();
  add_common(ana, ana_o);
  ana->add_option("--shot", shots, "Shot-noise traces for the reference (default: synthesis.shot_level)");
  ana->add_option("inputs", inputs, "Signal traces (.htrc)")->required();

  auto* val = app.add_subcommand("validate", "Check a config file and list every violation");
  val->add_option("--config", val_cfg, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*sim) {
      const auto c = load(sim_cfg, sim_o);
      print_report(sqmem::run_experiment(c, out_dir(c, sim_o), {sim_o.threads, sim_o.dump_samples}));
    } else if (*rep) {
      auto c = sqmem::preset_config(sqmem::parse_preset(preset));
      apply(c, rep_o);
      print_report(sqmem::run_experiment(c, out_dir(c, rep_o), {rep_o.threads, rep_o.dump_samples}));
    } else if (*syn) {
      return run_synth(load(syn_cfg, syn_o), syn_o, csv);
    } else if (*ana) {
      return run_analyze(load(ana_cfg, ana_o), ana_o, inputs, shots);
    } else if (*val) {
      return run_validate(val_cfg);
    }
    return kOk;
  } catch (const sqmem::ConfigError& e) {
    const auto parsed = nlohmann::json::parse(e.what(), nullptr, false);
    if (parsed.is_array()) fail("config", "invalid configuration", parsed);
    else fail("config", e.what());
    return kConfig;
  } catch (const sqmem::IoError& e) {
    fail("io", e.what());
    return kIo;
  } catch (const sqmem::NumericError& e) {
    fail("numeric", e.what());
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    fail("config", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    fail("numeric", e.what());
    return kNumeric;
  }
}
