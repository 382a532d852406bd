#include "sqmem/experiment.hpp"

#include "sqmem/errors.hpp"
#include "sqmem/parallel.hpp"
#include "sqmem/random.hpp"
#include "sqmem/version.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

namespace sqmem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

// Seed purposes, one independent ensemble each.
constexpr std::uint64_t kDspSignal = 1;
constexpr std::uint64_t kDspShot = 2;
constexpr std::uint64_t kPulseBase = 16;

void check_physical(const CovarianceState& state, const std::string& where) {
  if (!is_physical(state)) {
    std::ostringstream msg;
    msg << "unphysical state after " << where << " (margin " << physicality_margin(state) << ")";
    throw NumericError(msg.str());
  }
}

void check_curve(const SpectrumCurve& curve, const std::string& where) {
  for (const auto& s : curve.channel_outputs) check_physical(s, where);
}

class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, std::vector<std::string> preamble)
      : dir_(std::move(dir)), preamble_(std::move(preamble)) {
    std::error_code ec;
    created_ = !std::filesystem::exists(dir_);
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  const std::vector<std::string>& preamble() const { return preamble_; }
  const std::vector<std::string>& files() const { return files_; }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    files_.push_back(name);
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
  }

  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  void discard() noexcept {
    std::error_code ec;
    for (const auto& f : files_) std::filesystem::remove(dir_ / f, ec);
    if (created_ && std::filesystem::is_empty(dir_, ec)) std::filesystem::remove(dir_, ec);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> preamble_;
  std::vector<std::string> files_;
  bool created_ = false;
};

SpectrumCurve scan(const Calibration& cal, std::span<const double> grid, double theta, Analysis a) {
  SpectrumCurve curve = spectrum_scan(cal.input, cal.eit, grid, theta, a);
  check_curve(curve, to_string(a) + " scan");
  return curve;
}

std::vector<std::string> with_line(std::vector<std::string> pre, const std::string& line) {
  pre.push_back(line);
  return pre;
}

std::string theta_label(double theta) {
  std::ostringstream s;
  s.precision(17);
  s << "theta " << theta;
  return s.str();
}

nlohmann::json run_scan(const ExperimentConfig& c, const Calibration& cal, OutputDir& out) {
  nlohmann::json summary;
  const double theta = c.scan.theta;
  const double theta_anti = normalize_angle(theta + 0.5 * kPi);
  const auto grid = linear_grid(c.scan.start_hz, c.scan.stop_hz, c.scan.points);

  std::vector<std::pair<Analysis, std::vector<double>>> views{{Analysis::direct, grid}};
  if (c.eit.bichromatic) {
    const auto bb = linear_grid(-c.scan.baseband_span_hz, c.scan.baseband_span_hz, c.scan.baseband_points);
    views.emplace_back(Analysis::plus_mode, bb);
    views.emplace_back(Analysis::minus_mode, bb);
  }
  for (const auto& [analysis, g] : views) {
    const std::string name = to_string(analysis);
    const auto sq = scan(cal, g, theta, analysis);
    const auto anti = scan(cal, g, theta_anti, analysis);
    out.write(name + ".csv", sq.to_csv(with_line(out.preamble(), theta_label(theta))));
    out.write(name + "_antisqueezed.csv", anti.to_csv(with_line(out.preamble(), theta_label(theta_anti))));
  }

  // Power at the probe offset (direct) and at zero baseband offset (demodulated).
  const std::vector<double> probe{c.scan.probe_hz};
  const std::vector<double> zero{0.0};
  const auto direct_sq = scan(cal, probe, theta, Analysis::direct);
  const auto direct_anti = scan(cal, probe, theta_anti, Analysis::direct);
  summary["probe_hz"] = c.scan.probe_hz;
  summary["direct_db"] = direct_sq.points[0].power_db;
  summary["direct_antisqueezed_db"] = direct_anti.points[0].power_db;
  const double input_power = two_mode_quadrature_power(cal.input.state(), SidebandPair{}, theta);
  summary["input_db"] = 10.0 * std::log10(input_power / kVacuumVariance);
  summary["direct_recovery"] = (kVacuumVariance - direct_sq.points[0].power) / (kVacuumVariance - input_power);
  if (c.eit.bichromatic) {
    summary["plus_mode_db"] = scan(cal, zero, theta, Analysis::plus_mode).points[0].power_db;
    summary["minus_mode_db"] = scan(cal, zero, theta, Analysis::minus_mode).points[0].power_db;
    summary["plus_transmission"] = plus_mode_transfer(cal.eit, 0.0).transmission();
    summary["minus_transmission"] = minus_mode_transfer(cal.eit, 0.0).transmission();
  }

  std::ostringstream sweep;
  sweep.precision(12);
  for (const auto& line : out.preamble()) sweep << "# " << line << '\n';
  sweep << "# probe_hz " << c.scan.probe_hz << '\n';
  sweep << "theta,power,power_db\n";
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = 0; k < c.scan.theta_points; ++k) {
    const double th = kPi * static_cast<double>(k) / static_cast<double>(c.scan.theta_points);
    const auto pt = scan(cal, probe, th, Analysis::direct).points[0];
    sweep << th << ',' << pt.power << ',' << pt.power_db << '\n';
    lo = std::min(lo, pt.power_db);
    hi = std::max(hi, pt.power_db);
  }
  out.write("theta_sweep.csv", sweep.str());
  summary["theta_sweep_min_db"] = lo;
  summary["theta_sweep_max_db"] = hi;
  return summary;
}

nlohmann::json spectrum_json(const ExperimentConfig& c, const SpectrumEstimate& est, const std::string& view) {
  nlohmann::json j;
  j["config_hash"] = config_hash(c);
  j["config"] = config_to_json(c);
  j["view"] = view;
  j["segment_len"] = c.analysis.segment_len;
  j["window"] = to_string(c.analysis.window);
  j["overlap"] = c.analysis.overlap;
  j["spectrum"] = est.to_json();
  return j;
}

nlohmann::json run_dsp(const ExperimentConfig& c, const Calibration& cal, OutputDir& out, unsigned threads) {
  const DspTraces traces = synthesize_dsp_traces(c, cal, threads);
  const DspSpectra spectra = analyze_traces(traces.signal, traces.shot, c, threads);
  const std::vector<std::pair<std::string, const SpectrumEstimate*>> views{
      {"direct", &spectra.direct}, {"plus_mode", &spectra.plus_mode}, {"minus_mode", &spectra.minus_mode}};
  const auto pre = with_line(out.preamble(), theta_label(c.scan.theta));
  nlohmann::json summary;
  const double df = spectra.direct.freqs.at(1);
  for (const auto& [name, est] : views) {
    out.write("dsp_" + name + ".csv", est->to_csv(pre));
    out.write_json("dsp_" + name + ".json", spectrum_json(c, *est, name));
    const BandPower band = name == "direct"
                               ? band_average(*est, c.input.offset_hz - c.analysis.band_hz,
                                              c.input.offset_hz + c.analysis.band_hz)
                               : band_average(*est, df, c.analysis.band_hz);
    summary[name + "_band_db"] = band.db();
    summary[name + "_band_bins"] = band.bins;
  }
  summary["n_averages"] = spectra.direct.n_averages;
  return summary;
}

struct PulseRow {
  std::string mode;
  double theta;
  VarianceEstimate estimate;
  double shot_level;
  double model_db;
};

nlohmann::json run_memory(const ExperimentConfig& c, const Calibration& cal, OutputDir& out,
                          const RunOptions& options) {
  const SidebandPair pair{0.0, c.input.offset_hz, 0, 1};
  const CovarianceState pm_in = to_pm_basis(cal.input.state(), pair);
  check_physical(pm_in, "basis change");
  const CovarianceState retrieved = store_retrieve(pm_in, pair, cal.pulse, cal.eit);
  check_physical(retrieved, "storage and retrieval");

  const double fs = c.synthesis.pulse_sample_rate;
  const std::size_t n = c.synthesis.pulse_samples;
  const std::vector<double> envelope = sample_mode(cal.pulse.retrieved_envelope, 0.0, 1.0 / fs, n);

  std::ostringstream env;
  env.precision(12);
  for (const auto& line : out.preamble()) env << "# " << line << '\n';
  env << "t,input_envelope,retrieved_envelope,retrieved_sampled\n";
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / fs;
    env << t << ',' << pulse_envelope(cal.pulse.input_envelope, t) << ','
        << pulse_envelope(cal.pulse.retrieved_envelope, t) << ',' << envelope[k] << '\n';
  }
  out.write("envelopes.csv", env.str());

  const double theta_sq = normalize_angle(c.input.theta_sq);
  const double theta_anti = normalize_angle(c.input.theta_sq - 0.5 * kPi);
  std::vector<PulseRow> rows;
  nlohmann::json summary;

  struct Ensemble {
    std::string label;
    double theta;
    double plus_gain;
    double minus_gain;
  };
  std::vector<Ensemble> ensembles;
  for (double th : {theta_sq, theta_anti}) {
    const auto [gp, gm] = pulse_gains(retrieved, th);
    ensembles.push_back({"", th, gp, gm});
  }
  ensembles.push_back({"shot", theta_sq, 1.0, 1.0});

  for (std::size_t e = 0; e < ensembles.size(); ++e) {
    const auto& ens = ensembles[e];
    const PulseTraceSynth synth(envelope, fs, c.input.offset_hz, c.synthesis.beat_phase,
                                c.synthesis.shot_level, ens.plus_gain, ens.minus_gain);
    const std::uint64_t seed = derive_seed(*c.seed, kPulseBase + e, 0);
    const std::size_t count = c.synthesis.pulse_traces;
    QuadratureSampleSet plus{std::vector<double>(count), ens.theta, 0.0, "a_plus"};
    QuadratureSampleSet minus{std::vector<double>(count), ens.theta, 0.5 * kPi, "a_minus"};
    const ModeProjector project_plus(synth.reference(), fs, envelope, plus.demod_phase);
    const ModeProjector project_minus(synth.reference(), fs, envelope, minus.demod_phase);
    parallel_for(count, options.threads, [&](std::size_t i) {
      const HomodyneTrace tr = synth.trace(ens.theta, seed, i);
      plus.values[i] = project_plus(tr);
      minus.values[i] = project_minus(tr);
    });
    const std::string prefix = ens.label.empty() ? "" : ens.label + "_";
    rows.push_back({prefix + "a_plus", ens.theta, variance_estimate(plus), synth.shot_projection_level(true),
                    10.0 * std::log10(ens.plus_gain)});
    rows.push_back({prefix + "a_minus", ens.theta, variance_estimate(minus), synth.shot_projection_level(false),
                    10.0 * std::log10(ens.minus_gain)});
    if (options.dump_samples) {
      std::ostringstream tag;
      tag << prefix << "theta" << e;
      const auto pre = with_line(out.preamble(), theta_label(ens.theta));
      out.write("samples_" + tag.str() + "_a_plus.csv", plus.to_csv(pre));
      out.write("samples_" + tag.str() + "_a_minus.csv", minus.to_csv(pre));
    }
  }

  std::ostringstream csv;
  csv.precision(12);
  for (const auto& line : out.preamble()) csv << "# " << line << '\n';
  csv << "mode,theta,variance,standard_error,shot_level,db,db_error,model_db,n_traces\n";
  nlohmann::json measured = nlohmann::json::array();
  for (const auto& r : rows) {
    const double db = to_db(r.estimate.variance, r.shot_level);
    const double db_err = 10.0 / std::log(10.0) * r.estimate.standard_error / r.estimate.variance;
    csv << r.mode << ',' << r.theta << ',' << r.estimate.variance << ',' << r.estimate.standard_error << ','
        << r.shot_level << ',' << db << ',' << db_err << ',' << r.model_db << ',' << c.synthesis.pulse_traces
        << '\n';
    measured.push_back({{"mode", r.mode}, {"theta", r.theta}, {"db", db}, {"db_error", db_err}, {"model_db", r.model_db}});
  }
  out.write("variances.csv", csv.str());

  // One loss value per quadrature, from the measured a+ levels.
  const double s_in = kVacuumVariance * std::pow(10.0, c.input.squeezing_db / 10.0);
  const double a_in = kVacuumVariance * std::pow(10.0, cal.input_antisqueezing_db / 10.0);
  const double s_out = kVacuumVariance * std::pow(10.0, to_db(rows[0].estimate.variance, rows[0].shot_level) / 10.0);
  const double a_out = kVacuumVariance * std::pow(10.0, to_db(rows[2].estimate.variance, rows[2].shot_level) / 10.0);
  summary["measured"] = measured;
  summary["efficiency_squeezed_quadrature"] = loss_from_variances(s_in, s_out);
  summary["efficiency_antisqueezed_quadrature"] = loss_from_variances(a_in, a_out);
  summary["model_plus_squeezed_db"] = rows[0].model_db;
  summary["model_plus_antisqueezed_db"] = rows[2].model_db;
  return summary;
}

}  // namespace

Calibration calibrate(const ExperimentConfig& c) {
  Calibration cal;
  const PureLossCalibration pure =
      calibrate_pure_loss(c.input.squeezing_db, c.pulse.retrieved_squeezing_db, c.pulse.retrieved_antisqueezing_db);
  cal.fitted_total_efficiency = pure.efficiency;
  cal.input_antisqueezing_db = c.input.antisqueezing_db.value_or(pure.input_antisqueezing_db);
  cal.input = SidebandInput::from_db(c.input.squeezing_db, cal.input_antisqueezing_db, c.input.theta_sq);

  EITParams& p = cal.eit;
  p.optical_depth = c.eit.optical_depth;
  p.gamma = kTwoPi * c.eit.gamma_hz;
  p.omega = kTwoPi * c.eit.omega_hz;
  p.control_detuning = kTwoPi * c.eit.control_detuning_hz;
  p.bichromatic = c.eit.bichromatic;
  p.bichromatic_offset = kTwoPi * c.input.offset_hz;
  if (c.eit.gamma0_hz) {
    p.gamma0 = kTwoPi * *c.eit.gamma0_hz;
  } else {
    EITParams ref = p;
    ref.control_detuning = 0.0;
    if (!ref.bichromatic) {
      ref.bichromatic = true;
      ref.omega = p.omega / std::sqrt(2.0);
    }
    p.gamma0 = calibrate_plus_transmission(ref, c.eit.plus_transmission).gamma0;
  }
  p.validate();

  PulseExperiment& pulse = cal.pulse;
  pulse.input_envelope = TemporalModeFn::gaussian(c.pulse.input_center, c.pulse.input_fwhm);
  pulse.write_off_time = c.pulse.write_off_time;
  pulse.storage_time = c.pulse.storage_time;
  pulse.retrieved_envelope = TemporalModeFn::half_gaussian(c.pulse.write_off_time + c.pulse.storage_time,
                                                           c.pulse.retrieved_fwhm);
  pulse.storage_decoherence_rate = c.pulse.decoherence_rate;
  if (c.eit.bichromatic) {
    pulse.memory_efficiency = c.pulse.memory_efficiency
                                  ? *c.pulse.memory_efficiency
                                  : memory_efficiency_for(pure.efficiency, pulse, p);
    cal.total_efficiency = total_efficiency(pulse, p);
  }
  return cal;
}

nlohmann::json calibration_to_json(const Calibration& cal) {
  nlohmann::json j;
  j["gamma_hz"] = cal.eit.gamma / kTwoPi;
  j["gamma0_hz"] = cal.eit.gamma0 / kTwoPi;
  j["omega_hz"] = cal.eit.omega / kTwoPi;
  j["optical_depth"] = cal.eit.optical_depth;
  j["control_detuning_hz"] = cal.eit.control_detuning / kTwoPi;
  j["input_antisqueezing_db"] = cal.input_antisqueezing_db;
  j["input_squeeze_r"] = cal.input.zeta.r();
  j["input_thermal_nu"] = cal.input.nu;
  j["fitted_total_efficiency"] = cal.fitted_total_efficiency;
  if (cal.eit.bichromatic) {
    j["plus_transmission"] = plus_mode_transfer(cal.eit, 0.0).transmission();
    j["minus_transmission"] = minus_mode_transfer(cal.eit, 0.0).transmission();
    j["memory_efficiency"] = cal.pulse.memory_efficiency;
    j["total_efficiency"] = cal.total_efficiency;
  }
  return j;
}

NoiseSpectrumModel dsp_model(const ExperimentConfig& c, const Calibration& cal) {
  if (!c.eit.bichromatic) throw ConfigError("the dsp stage needs bichromatic control");
  PairFeature pair;
  pair.delta_hz = c.input.offset_hz;
  pair.beat_phase = c.synthesis.beat_phase;
  pair.bandwidth_hz = c.synthesis.bandwidth_hz;
  pair.profile.clear();
  for (double f : linear_grid(0.0, c.synthesis.bandwidth_hz, c.synthesis.profile_points)) {
    const std::vector<double> grid{f};
    auto gain = [&](Analysis a) {
      return quadrature_matrix([&](double th) {
        return scan(cal, grid, th, a).points[0].power / kVacuumVariance;
      });
    };
    pair.profile.push_back({f, gain(Analysis::plus_mode), gain(Analysis::minus_mode)});
  }
  NoiseSpectrumModel model;
  model.shot_level = c.synthesis.shot_level;
  model.pair = std::move(pair);
  if (c.synthesis.line_power > 0.0) model.lines.push_back({c.synthesis.line_hz, c.synthesis.line_power});
  return model;
}

DspTraces synthesize_dsp_traces(const ExperimentConfig& c, const Calibration& cal, unsigned threads) {
  const NoiseSpectrumModel model = dsp_model(c, cal);
  const std::size_t count = c.synthesis.n_traces;
  DspTraces out;
  out.signal.resize(count);
  out.shot.resize(count);
  parallel_for(2 * count, threads, [&](std::size_t i) {
    const std::size_t k = i / 2;
    if (i % 2 == 0) {
      out.signal[k] = synthesize_trace(model, c.scan.theta, c.synthesis.sample_rate, c.synthesis.n_samples,
                                       derive_seed(*c.seed, kDspSignal, k));
    } else {
      HomodyneTrace shot = shot_noise_trace(c.synthesis.sample_rate, c.synthesis.n_samples,
                                            derive_seed(*c.seed, kDspShot, k), c.synthesis.shot_level);
      shot.lo_phase = c.scan.theta;
      shot.reference = beat_reference(c.input.offset_hz, c.synthesis.beat_phase, c.synthesis.sample_rate,
                                      c.synthesis.n_samples);
      out.shot[k] = std::move(shot);
    }
  });
  return out;
}

DspSpectra analyze_traces(std::span<const HomodyneTrace> signal, std::span<const HomodyneTrace> shot,
                          const ExperimentConfig& c, unsigned threads) {
  const WelchOptions welch{c.analysis.segment_len, c.analysis.window, c.analysis.overlap, threads};
  auto demod_all = [&](std::span<const HomodyneTrace> traces, double offset) {
    std::vector<HomodyneTrace> out(traces.size());
    parallel_for(traces.size(), threads, [&](std::size_t i) { out[i] = demodulate(traces[i], offset); });
    return out;
  };
  auto referenced = [&](std::span<const HomodyneTrace> s, std::span<const HomodyneTrace> r) {
    return with_shot_reference(power_spectrum(s, welch), power_spectrum(r, welch));
  };
  DspSpectra out;
  out.direct = referenced(signal, shot);
  out.plus_mode = referenced(demod_all(signal, 0.0), demod_all(shot, 0.0));
  out.minus_mode = referenced(demod_all(signal, 0.5 * kPi), demod_all(shot, 0.5 * kPi));
  return out;
}

RunReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                         const RunOptions& options) {
  const auto diagnostics = validate_config(config);
  if (!diagnostics.empty()) throw ConfigError(diagnostics_to_json(diagnostics).dump());

  const std::string hash = config_hash(config);
  OutputDir out(out_dir, {"config_hash " + hash, "experiment " + to_string(config.experiment)});
  try {
    const Calibration cal = calibrate(config);
    nlohmann::json summary = nlohmann::json::object();
    if (config.stages.scan) summary["scan"] = run_scan(config, cal, out);
    if (config.stages.dsp) summary["dsp"] = run_dsp(config, cal, out, options.threads);
    if (config.stages.memory) summary["memory"] = run_memory(config, cal, out, options);

    nlohmann::json manifest;
    manifest["library_version"] = kLibraryVersion;
    manifest["config_hash"] = hash;
    manifest["experiment"] = to_string(config.experiment);
    manifest["config"] = config_to_json(config);
    manifest["config_ini"] = to_ini(config);
    manifest["calibration"] = calibration_to_json(cal);
    manifest["summary"] = summary;
    auto files = out.files();
    std::sort(files.begin(), files.end());
    manifest["files"] = files;
    out.write_json("manifest.json", manifest);

    RunReport report{out_dir, out.files(), summary};
    return report;
  } catch (const std::invalid_argument& e) {
    out.discard();
    throw ConfigError(e.what());
  } catch (...) {
    out.discard();
    throw;
  }
}

std::filesystem::path default_output_dir(const ExperimentConfig& config) {
  if (!config.output.dir.empty()) return config.output.dir;
  if (const char* env = std::getenv("SQMEM_OUT_DIR"); env && *env) return env;
  return "sqmem_out";
}

}  // namespace sqmem
