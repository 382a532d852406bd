#include "sqmem/config.hpp"

#include "sqmem/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

namespace sqmem {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return v;
  const double d = parse_double(s);
  if (d < 0.0 || d != std::floor(d) || d > 1.8e19) {
    throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
  }
  return static_cast<std::uint64_t>(d);
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string format_stages(const Stages& s) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(s.scan, "scan");
  add(s.dsp, "dsp");
  add(s.memory, "memory");
  return out.empty() ? "none" : out;
}

Stages parse_stages(const std::string& text) {
  Stages s;
  if (text == "none") return s;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item == "scan") s.scan = true;
    else if (item == "dsp") s.dsp = true;
    else if (item == "memory") s.memory = true;
    else throw std::invalid_argument("unknown stage '" + item + "' (expected scan, dsp, memory)");
  }
  return s;
}

struct Field {
  std::string path;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class Access>
Field real(std::string path, Access acc) {
  return {std::move(path), [acc](const ExperimentConfig& c) { return format_double(acc(c)); },
          [acc](ExperimentConfig& c, const std::string& v) { acc(c) = parse_double(v); }};
}

template <class Access>
Field count(std::string path, Access acc) {
  return {std::move(path), [acc](const ExperimentConfig& c) { return std::to_string(acc(c)); },
          [acc](ExperimentConfig& c, const std::string& v) {
            acc(c) = static_cast<std::size_t>(parse_unsigned(v));
          }};
}

template <class Access>
Field flag(std::string path, Access acc) {
  return {std::move(path), [acc](const ExperimentConfig& c) { return std::string(acc(c) ? "true" : "false"); },
          [acc](ExperimentConfig& c, const std::string& v) { acc(c) = parse_bool(v); }};
}

template <class Access>
Field automatic(std::string path, Access acc) {
  return {std::move(path),
          [acc](const ExperimentConfig& c) {
            const auto& v = acc(c);
            return v ? format_double(*v) : std::string("auto");
          },
          [acc](ExperimentConfig& c, const std::string& v) {
            if (v == "auto") acc(c).reset();
            else acc(c) = parse_double(v);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"experiment", [](const ExperimentConfig& c) { return to_string(c.experiment); },
                 [](ExperimentConfig& c, const std::string& v) { c.experiment = parse_preset(v); }});
    f.push_back({"seed",
                 [](const ExperimentConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); },
                 [](ExperimentConfig& c, const std::string& v) { c.seed = parse_unsigned(v); }});
    f.push_back({"stages", [](const ExperimentConfig& c) { return format_stages(c.stages); },
                 [](ExperimentConfig& c, const std::string& v) { c.stages = parse_stages(v); }});

    f.push_back(real("input.squeezing_db", [](auto& c) -> auto& { return c.input.squeezing_db; }));
    f.push_back(automatic("input.antisqueezing_db", [](auto& c) -> auto& { return c.input.antisqueezing_db; }));
    f.push_back(real("input.theta_sq", [](auto& c) -> auto& { return c.input.theta_sq; }));
    f.push_back(real("input.offset_hz", [](auto& c) -> auto& { return c.input.offset_hz; }));

    f.push_back(real("eit.optical_depth", [](auto& c) -> auto& { return c.eit.optical_depth; }));
    f.push_back(real("eit.gamma_hz", [](auto& c) -> auto& { return c.eit.gamma_hz; }));
    f.push_back(automatic("eit.gamma0_hz", [](auto& c) -> auto& { return c.eit.gamma0_hz; }));
    f.push_back(real("eit.omega_hz", [](auto& c) -> auto& { return c.eit.omega_hz; }));
    f.push_back(real("eit.control_detuning_hz", [](auto& c) -> auto& { return c.eit.control_detuning_hz; }));
    f.push_back(flag("eit.bichromatic", [](auto& c) -> auto& { return c.eit.bichromatic; }));
    f.push_back(real("eit.plus_transmission", [](auto& c) -> auto& { return c.eit.plus_transmission; }));

    f.push_back(real("scan.start_hz", [](auto& c) -> auto& { return c.scan.start_hz; }));
    f.push_back(real("scan.stop_hz", [](auto& c) -> auto& { return c.scan.stop_hz; }));
    f.push_back(count("scan.points", [](auto& c) -> auto& { return c.scan.points; }));
    f.push_back(real("scan.baseband_span_hz", [](auto& c) -> auto& { return c.scan.baseband_span_hz; }));
    f.push_back(count("scan.baseband_points", [](auto& c) -> auto& { return c.scan.baseband_points; }));
    f.push_back(real("scan.theta", [](auto& c) -> auto& { return c.scan.theta; }));
    f.push_back(count("scan.theta_points", [](auto& c) -> auto& { return c.scan.theta_points; }));
    f.push_back(real("scan.probe_hz", [](auto& c) -> auto& { return c.scan.probe_hz; }));

    f.push_back(real("pulse.input_center", [](auto& c) -> auto& { return c.pulse.input_center; }));
    f.push_back(real("pulse.input_fwhm", [](auto& c) -> auto& { return c.pulse.input_fwhm; }));
    f.push_back(real("pulse.write_off_time", [](auto& c) -> auto& { return c.pulse.write_off_time; }));
    f.push_back(real("pulse.storage_time", [](auto& c) -> auto& { return c.pulse.storage_time; }));
    f.push_back(real("pulse.retrieved_fwhm", [](auto& c) -> auto& { return c.pulse.retrieved_fwhm; }));
    f.push_back(automatic("pulse.memory_efficiency", [](auto& c) -> auto& { return c.pulse.memory_efficiency; }));
    f.push_back(real("pulse.decoherence_rate", [](auto& c) -> auto& { return c.pulse.decoherence_rate; }));
    f.push_back(real("pulse.retrieved_squeezing_db", [](auto& c) -> auto& { return c.pulse.retrieved_squeezing_db; }));
    f.push_back(real("pulse.retrieved_antisqueezing_db", [](auto& c) -> auto& { return c.pulse.retrieved_antisqueezing_db; }));

    f.push_back(real("synthesis.sample_rate", [](auto& c) -> auto& { return c.synthesis.sample_rate; }));
    f.push_back(count("synthesis.n_samples", [](auto& c) -> auto& { return c.synthesis.n_samples; }));
    f.push_back(count("synthesis.n_traces", [](auto& c) -> auto& { return c.synthesis.n_traces; }));
    f.push_back(real("synthesis.shot_level", [](auto& c) -> auto& { return c.synthesis.shot_level; }));
    f.push_back(real("synthesis.beat_phase", [](auto& c) -> auto& { return c.synthesis.beat_phase; }));
    f.push_back(real("synthesis.bandwidth_hz", [](auto& c) -> auto& { return c.synthesis.bandwidth_hz; }));
    f.push_back(count("synthesis.profile_points", [](auto& c) -> auto& { return c.synthesis.profile_points; }));
    f.push_back(real("synthesis.line_hz", [](auto& c) -> auto& { return c.synthesis.line_hz; }));
    f.push_back(real("synthesis.line_power", [](auto& c) -> auto& { return c.synthesis.line_power; }));
    f.push_back(real("synthesis.pulse_sample_rate", [](auto& c) -> auto& { return c.synthesis.pulse_sample_rate; }));
    f.push_back(count("synthesis.pulse_samples", [](auto& c) -> auto& { return c.synthesis.pulse_samples; }));
    f.push_back(count("synthesis.pulse_traces", [](auto& c) -> auto& { return c.synthesis.pulse_traces; }));

    f.push_back(count("analysis.segment_len", [](auto& c) -> auto& { return c.analysis.segment_len; }));
    f.push_back({"analysis.window", [](const ExperimentConfig& c) { return to_string(c.analysis.window); },
                 [](ExperimentConfig& c, const std::string& v) { c.analysis.window = parse_window(v); }});
    f.push_back(real("analysis.overlap", [](auto& c) -> auto& { return c.analysis.overlap; }));
    f.push_back(real("analysis.band_hz", [](auto& c) -> auto& { return c.analysis.band_hz; }));

    f.push_back({"output.dir", [](const ExperimentConfig& c) { return c.output.dir; },
                 [](ExperimentConfig& c, const std::string& v) { c.output.dir = v; }});
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& path) {
  for (const auto& f : fields()) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

std::string section_of(const std::string& path) {
  const auto dot = path.find('.');
  return dot == std::string::npos ? std::string() : path.substr(0, dot);
}

std::string ini_text(const ExperimentConfig& config, bool with_output) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    const std::string sec = section_of(f.path);
    if (!with_output && sec == "output") continue;
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    const std::string key = sec.empty() ? f.path : f.path.substr(sec.size() + 1);
    const std::string value = f.get(config);
    if (f.path == "seed" && value.empty()) continue;
    out << key << " = " << value << '\n';
  }
  return out.str();
}

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

std::string to_string(Preset preset) {
  switch (preset) {
    case Preset::fig3_resonant: return "fig3_resonant";
    case Preset::fig3_detuned_500k: return "fig3_detuned_500k";
    case Preset::fig3_detuned_2m: return "fig3_detuned_2m";
    case Preset::fig4: return "fig4";
    case Preset::fig5: return "fig5";
    case Preset::custom: return "custom";
  }
  return "custom";
}

Preset parse_preset(const std::string& name) {
  for (Preset p : all_presets()) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

const std::vector<Preset>& all_presets() {
  static const std::vector<Preset> presets{Preset::fig3_resonant, Preset::fig3_detuned_500k,
                                           Preset::fig3_detuned_2m, Preset::fig4, Preset::fig5,
                                           Preset::custom};
  return presets;
}

ExperimentConfig preset_config(Preset preset) {
  ExperimentConfig c;
  c.experiment = preset;
  c.seed = 42;
  switch (preset) {
    case Preset::fig3_resonant:
    case Preset::fig3_detuned_500k:
    case Preset::fig3_detuned_2m:
      c.stages.scan = true;
      c.eit.control_detuning_hz = preset == Preset::fig3_resonant      ? 0.0
                                  : preset == Preset::fig3_detuned_500k ? 0.5e6
                                                                        : 2.0e6;
      break;
    case Preset::fig4:
    case Preset::custom:
      c.stages.scan = true;
      c.stages.dsp = preset == Preset::fig4;
      c.eit.bichromatic = true;
      // Same total control power as the single-tone presets, split over two tones.
      c.eit.omega_hz = 3.5e6 / std::sqrt(2.0);
      c.scan.start_hz = 0.1e6;
      c.scan.stop_hz = 3.9e6;
      c.scan.points = 381;
      break;
    case Preset::fig5:
      c.stages.memory = true;
      c.eit.bichromatic = true;
      c.eit.omega_hz = 3.5e6 / std::sqrt(2.0);
      break;
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text, std::vector<Diagnostic>& diagnostics) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    diagnostics.push_back({"line " + std::to_string(e.line()), e.message()});
    return ExperimentConfig{};
  }

  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      entries.emplace_back(key, node.data());
    } else {
      for (const auto& [sub, leaf] : node) {
        if (!leaf.empty()) {
          diagnostics.push_back({key + "." + sub, "nested sections are not supported"});
          continue;
        }
        entries.emplace_back(key + "." + sub, leaf.data());
      }
    }
  }

  ExperimentConfig config;
  const auto experiment = tree.get_optional<std::string>("experiment");
  if (!experiment) {
    diagnostics.push_back({"experiment", "required"});
  } else {
    try {
      config = preset_config(parse_preset(*experiment));
    } catch (const std::invalid_argument& e) {
      diagnostics.push_back({"experiment", e.what()});
    }
  }
  config.seed.reset();

  for (const auto& [path, value] : entries) {
    const Field* field = find_field(path);
    if (!field) {
      diagnostics.push_back({path, "unknown key"});
      continue;
    }
    try {
      field->set(config, value);
    } catch (const std::invalid_argument& e) {
      diagnostics.push_back({path, e.what()});
    }
  }
  return config;
}

std::vector<Diagnostic> validate_config(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  auto require = [&](bool ok, const char* field, const char* message) {
    if (!ok) d.push_back({field, message});
  };

  require(c.seed.has_value(), "seed", "required; runs are never seeded from the clock");

  require(c.input.squeezing_db <= 0.0, "input.squeezing_db", "must be ≤ 0 dB");
  if (c.input.antisqueezing_db) {
    require(*c.input.antisqueezing_db >= 0.0, "input.antisqueezing_db", "must be ≥ 0 dB");
    require(*c.input.antisqueezing_db + c.input.squeezing_db >= -1e-12, "input.antisqueezing_db",
            "below the uncertainty bound set by input.squeezing_db");
  }
  require(c.input.offset_hz > 0.0, "input.offset_hz", "must be > 0");

  require(c.eit.optical_depth >= 0.0, "eit.optical_depth", "must be ≥ 0");
  require(c.eit.gamma_hz > 0.0, "eit.gamma_hz", "must be > 0");
  if (c.eit.gamma0_hz) require(*c.eit.gamma0_hz >= 0.0, "eit.gamma0_hz", "must be ≥ 0");
  require(c.eit.omega_hz >= 0.0, "eit.omega_hz", "must be ≥ 0");
  require(std::isfinite(c.eit.control_detuning_hz), "eit.control_detuning_hz", "must be finite");
  require(c.eit.plus_transmission > 0.0 && c.eit.plus_transmission <= 1.0, "eit.plus_transmission",
          "must lie in (0, 1]");
  if (!c.eit.gamma0_hz) require(c.eit.omega_hz > 0.0, "eit.gamma0_hz", "auto calibration needs eit.omega_hz > 0");

  require(c.scan.points >= 1, "scan.points", "must be ≥ 1");
  require(c.scan.stop_hz >= c.scan.start_hz, "scan.stop_hz", "must be ≥ scan.start_hz");
  require(c.scan.start_hz > 0.0, "scan.start_hz", "must be > 0");
  if (c.eit.bichromatic) {
    require(c.scan.stop_hz < 2.0 * c.input.offset_hz, "scan.stop_hz",
            "bichromatic direct scan must stay below twice input.offset_hz");
    require(c.scan.baseband_span_hz > 0.0 && c.scan.baseband_span_hz < c.input.offset_hz,
            "scan.baseband_span_hz", "must lie in (0, input.offset_hz)");
  }
  require(c.scan.baseband_points >= 1, "scan.baseband_points", "must be ≥ 1");
  require(c.scan.theta_points >= 1, "scan.theta_points", "must be ≥ 1");
  require(c.scan.probe_hz > 0.0, "scan.probe_hz", "must be > 0");

  require(c.pulse.input_fwhm > 0.0, "pulse.input_fwhm", "must be > 0");
  require(c.pulse.retrieved_fwhm > 0.0, "pulse.retrieved_fwhm", "must be > 0");
  require(c.pulse.storage_time >= 0.0, "pulse.storage_time", "must be ≥ 0");
  if (c.pulse.memory_efficiency) {
    require(*c.pulse.memory_efficiency >= 0.0 && *c.pulse.memory_efficiency <= 1.0,
            "pulse.memory_efficiency", "must lie in [0, 1]");
  }
  require(c.pulse.decoherence_rate >= 0.0, "pulse.decoherence_rate", "must be ≥ 0");
  require(c.pulse.retrieved_squeezing_db > c.input.squeezing_db && c.pulse.retrieved_squeezing_db < 0.0,
          "pulse.retrieved_squeezing_db", "must lie between input.squeezing_db and 0 dB");
  require(c.pulse.retrieved_antisqueezing_db > 0.0, "pulse.retrieved_antisqueezing_db", "must be > 0 dB");

  require(c.synthesis.sample_rate > 0.0, "synthesis.sample_rate", "must be > 0");
  require(is_power_of_two(c.synthesis.n_samples), "synthesis.n_samples", "must be a power of two ≥ 2");
  require(c.synthesis.n_traces >= 1, "synthesis.n_traces", "must be ≥ 1");
  require(c.synthesis.shot_level > 0.0, "synthesis.shot_level", "must be > 0");
  require(c.synthesis.bandwidth_hz > 0.0 && c.synthesis.bandwidth_hz < c.input.offset_hz,
          "synthesis.bandwidth_hz", "must lie in (0, input.offset_hz)");
  require(c.input.offset_hz + c.synthesis.bandwidth_hz < 0.5 * c.synthesis.sample_rate,
          "synthesis.sample_rate", "Nyquist frequency must exceed input.offset_hz + synthesis.bandwidth_hz");
  require(c.synthesis.profile_points >= 2, "synthesis.profile_points", "must be ≥ 2");
  require(c.synthesis.line_hz >= 0.0, "synthesis.line_hz", "must be ≥ 0");
  require(c.synthesis.line_power >= 0.0, "synthesis.line_power", "must be ≥ 0");
  require(c.synthesis.pulse_sample_rate > 2.0 * c.input.offset_hz, "synthesis.pulse_sample_rate",
          "must exceed twice input.offset_hz");
  require(c.synthesis.pulse_samples >= 2, "synthesis.pulse_samples", "must be ≥ 2");
  require(c.synthesis.pulse_traces >= 2, "synthesis.pulse_traces", "must be ≥ 2");

  require(c.analysis.segment_len >= 2 && c.analysis.segment_len <= c.synthesis.n_samples,
          "analysis.segment_len", "must lie in [2, synthesis.n_samples]");
  require(c.analysis.overlap >= 0.0 && c.analysis.overlap < 1.0, "analysis.overlap", "must lie in [0, 1)");
  require(c.analysis.band_hz > 0.0 && c.analysis.band_hz < c.synthesis.bandwidth_hz, "analysis.band_hz",
          "must lie in (0, synthesis.bandwidth_hz)");

  if ((c.stages.dsp || c.stages.memory) && !c.eit.bichromatic) {
    d.push_back({"stages", "dsp and memory stages need eit.bichromatic = true"});
  }
  if (c.stages.memory) {
    const double read_on = c.pulse.write_off_time + c.pulse.storage_time;
    const double window = static_cast<double>(c.synthesis.pulse_samples) / c.synthesis.pulse_sample_rate;
    require(read_on > 0.0 && read_on < window, "synthesis.pulse_samples",
            "pulse record must cover the read pulse turn-on");
  }
  return d;
}

std::vector<Diagnostic> validate_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  std::vector<Diagnostic> d;
  const ExperimentConfig config = parse_config(buf.str(), d);
  if (d.empty()) d = validate_config(config);
  return d;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  std::vector<Diagnostic> d;
  ExperimentConfig config = parse_config(buf.str(), d);
  if (d.empty()) d = validate_config(config);
  if (!d.empty()) throw ConfigError(diagnostics_to_json(d).dump());
  return config;
}

std::string to_ini(const ExperimentConfig& config) { return ini_text(config, true); }

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = ini_text(config, false);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) {
    const std::string value = f.get(config);
    if (f.path == "seed" && value.empty()) continue;
    j[f.path] = value;
  }
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& json) {
  std::ostringstream root, sections;
  std::string current;
  // Field order groups keys by section, as the INI reader requires.
  for (const auto& f : fields()) {
    if (!json.contains(f.path)) continue;
    const std::string value = json.at(f.path).get<std::string>();
    const std::string sec = section_of(f.path);
    if (sec.empty()) {
      root << f.path << " = " << value << '\n';
      continue;
    }
    if (sec != current) {
      sections << '[' << sec << "]\n";
      current = sec;
    }
    sections << f.path.substr(sec.size() + 1) << " = " << value << '\n';
  }
  for (const auto& [key, value] : json.items()) {
    if (!find_field(key)) throw ConfigError("unknown key '" + key + "' in config echo");
  }
  std::vector<Diagnostic> d;
  ExperimentConfig config = parse_config(root.str() + sections.str(), d);
  if (!d.empty()) throw ConfigError(diagnostics_to_json(d).dump());
  return config;
}

nlohmann::json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& d : diagnostics) list.push_back({{"field", d.field}, {"message", d.message}});
  return list;
}

}  // namespace sqmem
