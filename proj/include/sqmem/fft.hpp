#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace sqmem {

/// Real-input FFT of a fixed length backed by FFTW. Plans are created once per
/// object; an object must not be used from two threads at the same time.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }

  /// X[k] = Σ x[j] e^{-2πi jk/n}, k = 0..n/2.
  void forward(std::span<const double> x, std::span<std::complex<double>> out);
  /// Inverse of forward including the 1/n factor.
  void inverse(std::span<const std::complex<double>> spectrum, std::span<double> out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Per-thread cached transform of length n.
RealFft& thread_fft(std::size_t n);

std::vector<std::complex<double>> rfft(std::span<const double> x);
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n);

}  // namespace sqmem
