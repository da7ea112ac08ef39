#pragma once

// Thin FFTW wrapper for the periodic grids used throughout the library.
// Plans are cached per (dim, N, direction) and executed through the
// new-array interface, which FFTW documents as thread-safe.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace besov::fft {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = dim == 1 ? n : n * n;
    // Planning with FFTW_ESTIMATE does not touch the arrays.
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = dim == 1
                         ? fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, flags)
                         : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), in, out,
                                            sign, flags);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

inline void execute(int dim, std::size_t n, int sign, const Complex* in, Complex* out) {
  fftw_plan plan = PlanCache::instance().get(dim, n, sign);
  // fftw_execute_dft takes a non-const input pointer but does not modify
  // it for out-of-place plans.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace detail

/// Unnormalized forward DFT of real samples (row-major for dim 2).
inline Spectrum forward(std::span<const double> values, int dim, std::size_t n) {
  Spectrum in(values.begin(), values.end());
  Spectrum out(in.size());
  detail::execute(dim, n, FFTW_FORWARD, in.data(), out.data());
  return out;
}

/// Inverse DFT normalized by 1/N^dim, so inverse(forward(x)) == x.
inline Spectrum inverse(std::span<const Complex> spectrum, int dim, std::size_t n) {
  Spectrum out(spectrum.size());
  detail::execute(dim, n, FFTW_BACKWARD, spectrum.data(), out.data());
  double scale = 1.0 / static_cast<double>(spectrum.size());
  for (auto& v : out) v *= scale;
  return out;
}

/// Real part of the normalized inverse DFT.
inline std::vector<double> inverse_real(std::span<const Complex> spectrum, int dim,
                                        std::size_t n) {
  Spectrum c = inverse(spectrum, dim, n);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

/// Signed frequency index of DFT bin k: k for k < N/2, k - N otherwise.
inline long signed_index(std::size_t k, std::size_t n) {
  return k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

}  // namespace besov::fft
