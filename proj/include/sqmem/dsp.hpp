#pragma once

#include "sqmem/homodyne.hpp"

#include "json.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sqmem {

enum class Window { rect, hann };

std::string to_string(Window window);
Window parse_window(const std::string& name);

struct WelchOptions {
  std::size_t segment_len = 4096;
  Window window = Window::hann;
  double overlap = 0.5;
  unsigned threads = 1;
};

/// Averaged one-sided power spectral density. `shot_ref` is empty until a shot-noise
/// estimate has been attached with with_shot_reference.
struct SpectrumEstimate {
  std::vector<double> freqs;
  std::vector<double> power;
  std::size_t n_averages = 0;
  std::vector<double> shot_ref;

  /// 10 log10(power / shot_ref) per bin; needs shot_ref.
  std::vector<double> db() const;
  /// Columns freq_hz,power,db,shot_ref,n_avg; db and shot_ref are blank without a
  /// reference. `preamble` lines are written first, each prefixed with "# ".
  std::string to_csv(std::span<const std::string> preamble = {}) const;
  nlohmann::json to_json() const;
};

/// Phase φ of the recorded beat note, from a least-squares fit of
/// A sin(2πΔt) + B cos(2πΔt) to its samples.
double estimate_reference_phase(const BeatReference& reference, double sample_rate);

/// Lock-in mixing: x(t) · √2 sin(2πΔt + φ + phase_offset), with φ fitted from the
/// trace's reference channel. Offset 0 selects a+ and π/2 selects a-.
HomodyneTrace demodulate(const HomodyneTrace& trace, double phase_offset);

/// Welch estimate over every segment of every trace. P = 2|X|² / (fs Σw²) for the
/// interior bins and |X|² / (fs Σw²) at DC and Nyquist, so that with a rectangular
/// window the PSD summed over bins times the bin width is the mean square.
SpectrumEstimate power_spectrum(std::span<const HomodyneTrace> traces, const WelchOptions& options);

SpectrumEstimate with_shot_reference(SpectrumEstimate signal, const SpectrumEstimate& shot);

struct BandPower {
  double power = 0.0;
  double shot_ref = 0.0;
  std::size_t bins = 0;
  double db() const;
};

/// Mean power and mean shot reference over the bins with f_lo ≤ f ≤ f_hi.
BandPower band_average(const SpectrumEstimate& estimate, double f_lo, double f_hi);

/// Demodulates at `demod_phase` and integrates against `mode` (sampled on the trace
/// clock): dt · Σ x_k √2 sin(2πΔt_k + φ + demod_phase) mode_k.
double project_temporal_mode(const HomodyneTrace& trace, std::span<const double> mode,
                             double demod_phase);

/// project_temporal_mode with the reference phase fit and the demodulation kernel
/// computed once, for ensembles that share one clock and one beat reference.
class ModeProjector {
 public:
  ModeProjector(const BeatReference& reference, double sample_rate, std::span<const double> mode,
                double demod_phase);

  double operator()(const HomodyneTrace& trace) const;

 private:
  double sample_rate_;
  std::vector<double> kernel_;
};

struct QuadratureSampleSet {
  std::vector<double> values;
  double theta = 0.0;
  double demod_phase = 0.0;
  std::string mode_label;

  /// Columns index,value.
  std::string to_csv(std::span<const std::string> preamble = {}) const;
};

struct VarianceEstimate {
  double variance = 0.0;
  double standard_error = 0.0;
};

/// Unbiased sample variance with standard error Var · √(2 / (n - 1)).
VarianceEstimate variance_estimate(std::span<const double> values);
VarianceEstimate variance_estimate(const QuadratureSampleSet& samples);

double to_db(double power, double shot_ref);

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

}  // namespace sqmem
