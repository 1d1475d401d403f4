#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <fftw3.h>

namespace biofet {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// One r2c/c2r plan pair for a fixed size, with owned buffers. FFTW plan
// creation is not thread-safe, so it is serialized; execution on the
// owned buffers is private to the instance.
class FftPlans {
 public:
  explicit FftPlans(std::size_t n) : n_(n) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    real_ = fftw_alloc_real(n);
    complex_ = fftw_alloc_complex(n / 2 + 1);
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, complex_,
                                    FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), complex_, real_,
                                     FFTW_ESTIMATE);
    if (!forward_ || !backward_)
      throw std::runtime_error("fftw plan creation failed");
  }
  ~FftPlans() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(complex_);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  std::size_t size() const { return n_; }
  double* real() { return real_; }
  fftw_complex* complex_buf() { return complex_; }
  void run_forward() { fftw_execute(forward_); }
  void run_backward() { fftw_execute(backward_); }

 private:
  std::size_t n_;
  double* real_;
  fftw_complex* complex_;
  fftw_plan forward_;
  fftw_plan backward_;
};

inline FftPlans& plans_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<FftPlans>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FftPlans>(n);
  return *slot;
}

} // namespace detail

// Forward real DFT: returns bins 0 .. n/2 (inclusive), unnormalized.
inline std::vector<std::complex<double>>
real_fft(const std::vector<double>& x) {
  auto& p = detail::plans_for(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p.real()[i] = x[i];
  p.run_forward();
  std::vector<std::complex<double>> out(x.size() / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = {p.complex_buf()[k][0], p.complex_buf()[k][1]};
  return out;
}

// Inverse of real_fft including the 1/n normalization.
inline std::vector<double>
real_ifft(const std::vector<std::complex<double>>& spectrum, std::size_t n) {
  if (spectrum.size() != n / 2 + 1)
    throw std::invalid_argument("real_ifft: spectrum size must be n/2 + 1");
  auto& p = detail::plans_for(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    p.complex_buf()[k][0] = spectrum[k].real();
    p.complex_buf()[k][1] = spectrum[k].imag();
  }
  p.run_backward();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = p.real()[i] / static_cast<double>(n);
  return out;
}

} // namespace biofet
