#include "sqmem/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace sqmem {

namespace {
// FFTW's planner is not thread-safe.
std::mutex planner_mutex;
}  // namespace

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 2) throw std::invalid_argument("FFT length must be ≥ 2");
  std::lock_guard lock(planner_mutex);
  impl_->real = fftw_alloc_real(n);
  impl_->spec = fftw_alloc_complex(n / 2 + 1);
  const int len = static_cast<int>(n);
  impl_->fwd = fftw_plan_dft_r2c_1d(len, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r_1d(len, impl_->spec, impl_->real, FFTW_ESTIMATE);
  if (!impl_->fwd || !impl_->inv) throw std::runtime_error("FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex);
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->inv);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

void RealFft::forward(std::span<const double> x, std::span<std::complex<double>> out) {
  if (x.size() != n_ || out.size() != n_ / 2 + 1) throw std::invalid_argument("FFT size mismatch");
  std::copy(x.begin(), x.end(), impl_->real);
  fftw_execute(impl_->fwd);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {impl_->spec[k][0], impl_->spec[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> spectrum, std::span<double> out) {
  if (spectrum.size() != n_ / 2 + 1 || out.size() != n_) throw std::invalid_argument("FFT size mismatch");
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    impl_->spec[k][0] = spectrum[k].real();
    impl_->spec[k][1] = spectrum[k].imag();
  }
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = impl_->real[j] * scale;
}

RealFft& thread_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  std::vector<std::complex<double>> out(x.size() / 2 + 1);
  thread_fft(x.size()).forward(x, out);
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n) {
  std::vector<double> out(n);
  thread_fft(n).inverse(spectrum, out);
  return out;
}

}  // namespace sqmem
