#include "sqmem/dsp.hpp"

#include "sqmem/fft.hpp"
#include "sqmem/parallel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sqmem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> window_samples(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::hann) {
    // Periodic Hann, the usual choice for Welch averaging.
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n));
    }
  }
  return w;
}

void write_preamble(std::ostream& out, std::span<const std::string> preamble) {
  for (const auto& line : preamble) out << "# " << line << '\n';
}

}  // namespace

std::string to_string(Window window) { return window == Window::hann ? "hann" : "rect"; }

Window parse_window(const std::string& name) {
  if (name == "hann") return Window::hann;
  if (name == "rect") return Window::rect;
  throw std::invalid_argument("unknown window '" + name + "'");
}

std::vector<double> SpectrumEstimate::db() const {
  if (shot_ref.size() != power.size()) throw std::logic_error("spectrum has no shot-noise reference");
  std::vector<double> out(power.size());
  for (std::size_t k = 0; k < power.size(); ++k) out[k] = to_db(power[k], shot_ref[k]);
  return out;
}

std::string SpectrumEstimate::to_csv(std::span<const std::string> preamble) const {
  std::ostringstream out;
  out.precision(12);
  write_preamble(out, preamble);
  out << "freq_hz,power,db,shot_ref,n_avg\n";
  const bool has_ref = shot_ref.size() == power.size();
  for (std::size_t k = 0; k < power.size(); ++k) {
    out << freqs[k] << ',' << power[k] << ',';
    if (has_ref && shot_ref[k] > 0.0) out << to_db(power[k], shot_ref[k]);
    out << ',';
    if (has_ref) out << shot_ref[k];
    out << ',' << n_averages << '\n';
  }
  return out.str();
}

nlohmann::json SpectrumEstimate::to_json() const {
  nlohmann::json j;
  j["freq_hz"] = freqs;
  j["power"] = power;
  j["n_averages"] = n_averages;
  if (shot_ref.size() == power.size()) {
    j["shot_ref"] = shot_ref;
    j["db"] = db();
  }
  return j;
}

double estimate_reference_phase(const BeatReference& reference, double sample_rate) {
  double ss = 0.0, cc = 0.0, sc = 0.0, rs = 0.0, rc = 0.0;
  for (std::size_t k = 0; k < reference.samples.size(); ++k) {
    const double arg = kTwoPi * reference.delta_hz * static_cast<double>(k) / sample_rate;
    const double s = std::sin(arg), c = std::cos(arg), r = reference.samples[k];
    ss += s * s;
    cc += c * c;
    sc += s * c;
    rs += r * s;
    rc += r * c;
  }
  const double det = ss * cc - sc * sc;
  if (!(std::abs(det) > 0.0)) throw std::invalid_argument("reference too short to fit its phase");
  const double a = (rs * cc - rc * sc) / det;
  const double b = (rc * ss - rs * sc) / det;
  return std::atan2(b, a);
}

HomodyneTrace demodulate(const HomodyneTrace& trace, double phase_offset) {
  if (!trace.reference) throw std::invalid_argument("demodulation needs a reference channel");
  trace.validate();
  const double phase = estimate_reference_phase(*trace.reference, trace.sample_rate) + phase_offset;
  HomodyneTrace out = trace;
  const double omega = kTwoPi * trace.reference->delta_hz / trace.sample_rate;
  for (std::size_t k = 0; k < out.samples.size(); ++k) {
    out.samples[k] *= std::sqrt(2.0) * std::sin(omega * static_cast<double>(k) + phase);
  }
  return out;
}

SpectrumEstimate power_spectrum(std::span<const HomodyneTrace> traces, const WelchOptions& options) {
  if (traces.empty()) throw std::invalid_argument("power spectrum needs at least one trace");
  const std::size_t len = options.segment_len;
  if (len < 2) throw std::invalid_argument("segment length must be ≥ 2");
  if (!(options.overlap >= 0.0 && options.overlap < 1.0)) throw std::invalid_argument("overlap must lie in [0, 1)");
  const double fs = traces.front().sample_rate;
  for (const auto& t : traces) {
    if (t.sample_rate != fs) throw std::invalid_argument("traces have different sample rates");
    if (t.samples.size() < len) throw std::invalid_argument("segment longer than a trace");
  }
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(len) * (1.0 - options.overlap))));
  const auto window = window_samples(options.window, len);
  double w2 = 0.0;
  for (double w : window) w2 += w * w;
  const std::size_t bins = len / 2 + 1;

  std::vector<std::vector<double>> sums(traces.size(), std::vector<double>(bins, 0.0));
  std::vector<std::size_t> counts(traces.size(), 0);
  parallel_for(traces.size(), options.threads, [&](std::size_t i) {
    RealFft& fft = thread_fft(len);
    std::vector<double> seg(len);
    std::vector<std::complex<double>> spec(bins);
    const auto& x = traces[i].samples;
    for (std::size_t start = 0; start + len <= x.size(); start += step) {
      for (std::size_t k = 0; k < len; ++k) seg[k] = x[start + k] * window[k];
      fft.forward(seg, spec);
      for (std::size_t k = 0; k < bins; ++k) sums[i][k] += std::norm(spec[k]);
      ++counts[i];
    }
  });

  SpectrumEstimate est;
  for (std::size_t c : counts) est.n_averages += c;
  est.freqs.resize(bins);
  est.power.resize(bins);
  std::vector<double> column(traces.size());
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t i = 0; i < traces.size(); ++i) column[i] = sums[i][k];
    const double one_sided = (k == 0 || (len % 2 == 0 && k == bins - 1)) ? 1.0 : 2.0;
    est.freqs[k] = fs * static_cast<double>(k) / static_cast<double>(len);
    est.power[k] = one_sided * pairwise_sum(column) / (fs * w2 * static_cast<double>(est.n_averages));
  }
  return est;
}

SpectrumEstimate with_shot_reference(SpectrumEstimate signal, const SpectrumEstimate& shot) {
  if (signal.freqs != shot.freqs) throw std::invalid_argument("shot reference is on a different frequency grid");
  signal.shot_ref = shot.power;
  return signal;
}

double BandPower::db() const { return to_db(power, shot_ref); }

BandPower band_average(const SpectrumEstimate& estimate, double f_lo, double f_hi) {
  if (estimate.shot_ref.size() != estimate.power.size()) {
    throw std::invalid_argument("band average needs a shot-noise reference");
  }
  std::vector<double> p, s;
  for (std::size_t k = 0; k < estimate.freqs.size(); ++k) {
    if (estimate.freqs[k] >= f_lo && estimate.freqs[k] <= f_hi) {
      p.push_back(estimate.power[k]);
      s.push_back(estimate.shot_ref[k]);
    }
  }
  if (p.empty()) throw std::invalid_argument("no frequency bins inside the band");
  const double n = static_cast<double>(p.size());
  return {pairwise_sum(p) / n, pairwise_sum(s) / n, p.size()};
}

ModeProjector::ModeProjector(const BeatReference& reference, double sample_rate,
                             std::span<const double> mode, double demod_phase)
    : sample_rate_(sample_rate), kernel_(mode.size()) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be > 0");
  const double phase = estimate_reference_phase(reference, sample_rate) + demod_phase;
  const double omega = kTwoPi * reference.delta_hz / sample_rate;
  for (std::size_t k = 0; k < mode.size(); ++k) {
    kernel_[k] = std::sqrt(2.0) * std::sin(omega * static_cast<double>(k) + phase) * mode[k] / sample_rate;
  }
}

double ModeProjector::operator()(const HomodyneTrace& trace) const {
  if (trace.samples.size() != kernel_.size()) throw std::invalid_argument("mode and trace are on different grids");
  if (trace.sample_rate != sample_rate_) throw std::invalid_argument("trace sample rate differs from the projector's");
  double acc = 0.0;
  for (std::size_t k = 0; k < kernel_.size(); ++k) acc += trace.samples[k] * kernel_[k];
  return acc;
}

double project_temporal_mode(const HomodyneTrace& trace, std::span<const double> mode,
                             double demod_phase) {
  if (!trace.reference) throw std::invalid_argument("projection needs a reference channel");
  return ModeProjector(*trace.reference, trace.sample_rate, mode, demod_phase)(trace);
}

std::string QuadratureSampleSet::to_csv(std::span<const std::string> preamble) const {
  std::ostringstream out;
  out.precision(17);
  write_preamble(out, preamble);
  out << "index,value\n";
  for (std::size_t k = 0; k < values.size(); ++k) out << k << ',' << values[k] << '\n';
  return out.str();
}

VarianceEstimate variance_estimate(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("variance needs at least two samples");
  const double mean = pairwise_sum(values) / static_cast<double>(n);
  std::vector<double> dev(n);
  for (std::size_t k = 0; k < n; ++k) dev[k] = (values[k] - mean) * (values[k] - mean);
  const double var = pairwise_sum(dev) / static_cast<double>(n - 1);
  return {var, var * std::sqrt(2.0 / static_cast<double>(n - 1))};
}

VarianceEstimate variance_estimate(const QuadratureSampleSet& samples) {
  return variance_estimate(samples.values);
}

double to_db(double power, double shot_ref) {
  if (!(shot_ref > 0.0)) throw std::invalid_argument("shot reference must be > 0");
  return 10.0 * std::log10(power / shot_ref);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace sqmem
