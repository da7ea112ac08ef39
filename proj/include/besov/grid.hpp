#pragma once

// Sampled functions on the periodic box [-L, L)^n, n in {1, 2}.
//
// Grid point i along an axis sits at x_i = -L + i*h with h = 2L/N, so the
// origin is index N/2. Two-dimensional samples are row-major: index
// i*N + j holds the value at (x_i, x_j).

#include "besov/error.hpp"
#include "besov/fft.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace besov {

using Point = std::array<double, 2>;

class GridSpec {
 public:
  GridSpec(int dim, double extent, std::size_t points) : dim_(dim), extent_(extent), points_(points) {
    if (dim != 1 && dim != 2) throw InvalidArgument("grid dimension must be 1 or 2");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw InvalidArgument("grid extent must be positive");
    if (points < 16 || (points & (points - 1)) != 0)
      throw InvalidArgument("points per axis must be a power of two >= 16, got " +
                            std::to_string(points));
  }

  int dim() const noexcept { return dim_; }
  double extent() const noexcept { return extent_; }
  std::size_t points() const noexcept { return points_; }
  double spacing() const noexcept { return 2.0 * extent_ / static_cast<double>(points_); }
  double cell_volume() const noexcept { return std::pow(spacing(), dim_); }
  std::size_t size() const noexcept { return dim_ == 1 ? points_ : points_ * points_; }
  std::size_t origin_index() const noexcept { return points_ / 2; }

  double coordinate(std::size_t i) const noexcept {
    return -extent_ + static_cast<double>(i) * spacing();
  }

  /// Spatial point of flat sample index.
  Point point(std::size_t flat) const noexcept {
    if (dim_ == 1) return {coordinate(flat), 0.0};
    return {coordinate(flat / points_), coordinate(flat % points_)};
  }

  /// Angular frequency of DFT bin k along one axis.
  double frequency(std::size_t k) const noexcept {
    return std::numbers::pi * static_cast<double>(fft::signed_index(k, points_)) / extent_;
  }

  /// Angular frequency vector of flat DFT index.
  Point frequency_vector(std::size_t flat) const noexcept {
    if (dim_ == 1) return {frequency(flat), 0.0};
    return {frequency(flat / points_), frequency(flat % points_)};
  }

  /// Highest representable angular frequency, pi/h.
  double nyquist() const noexcept { return std::numbers::pi / spacing(); }

  friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
    return a.dim_ == b.dim_ && a.extent_ == b.extent_ && a.points_ == b.points_;
  }

  std::string describe() const {
    return std::to_string(dim_) + "D N=" + std::to_string(points_) + " L=" + std::to_string(extent_);
  }

 private:
  int dim_;
  double extent_;
  std::size_t points_;
};

/// Immutable sampled real function with periodic boundary.
class GridFunction {
 public:
  GridFunction(GridSpec spec, std::vector<double> values) : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.size())
      throw InvalidArgument("sample count " + std::to_string(values_.size()) +
                            " does not match grid " + spec_.describe());
    for (double v : values_)
      if (!std::isfinite(v)) throw InvalidArgument("grid function contains non-finite samples");
  }

  static GridFunction zeros(const GridSpec& spec) { return {spec, std::vector<double>(spec.size(), 0.0)}; }

  template <class Fn>
  static GridFunction sample(const GridSpec& spec, Fn&& fn) {
    std::vector<double> v(spec.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(spec.point(i));
    return {spec, std::move(v)};
  }

  const GridSpec& spec() const noexcept { return spec_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t flat) const noexcept { return values_[flat]; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Discrete integral h^n * sum of samples.
  double mass() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * spec_.cell_volume();
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  fft::Spectrum spectrum() const { return fft::forward(values_, spec_.dim(), spec_.points()); }

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  if (!(a.spec() == b.spec())) throw InvalidArgument("grid functions live on different grids");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  return {a.spec(), std::move(v)};
}

inline GridFunction operator*(double c, const GridFunction& a) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x *= c;
  return {a.spec(), std::move(v)};
}

/// Exponent p in [1, inf]; infinity is represented exactly.
class LpExponent {
 public:
  LpExponent(double value) : value_(value) {  // NOLINT: implicit from double is intended
    if (std::isnan(value) || value < 1.0)
      throw InvalidArgument("Lp exponent must be >= 1, got " + std::to_string(value));
  }
  static LpExponent infinity() { return {std::numeric_limits<double>::infinity()}; }

  double value() const noexcept { return value_; }
  bool is_infinite() const noexcept { return std::isinf(value_); }

  /// Conjugate exponent p' with 1/p + 1/p' = 1.
  LpExponent conjugate() const {
    if (is_infinite()) return {1.0};
    if (value_ == 1.0) return infinity();
    return {value_ / (value_ - 1.0)};
  }

  std::string str() const { return is_infinite() ? "inf" : std::to_string(value_); }

  friend bool operator==(LpExponent a, LpExponent b) noexcept { return a.value_ == b.value_; }

 private:
  double value_;
};

/// Discrete L^p norm: (h^n sum |f_i|^p)^(1/p), or max |f_i| for p = inf.
inline double lp_norm(std::span<const double> values, double cell_volume, LpExponent p) {
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  if (p.is_infinite() || peak == 0.0) return peak;
  double e = p.value();
  double sum = 0.0;
  if (e == 1.0) {
    for (double v : values) sum += std::abs(v);
    return sum * cell_volume;
  }
  if (e == 2.0) {
    for (double v : values) sum += (v / peak) * (v / peak);
    return peak * std::sqrt(sum * cell_volume);
  }
  for (double v : values) sum += std::pow(std::abs(v) / peak, e);
  return peak * std::pow(sum * cell_volume, 1.0 / e);
}

inline double lp_norm(const GridFunction& f, LpExponent p) {
  return lp_norm(f.values(), f.spec().cell_volume(), p);
}

enum class ConvolutionMethod { fft, direct };

namespace detail {

inline std::size_t wrap(long i, std::size_t n) {
  long m = static_cast<long>(n);
  long r = i % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

}  // namespace detail

/// Circular convolution of spectrum F (of f) with g, returned in space and
/// scaled by h^n so it discretizes the integral of f(x - y) g(y) dy.
inline GridFunction convolve_spectrum(const GridSpec& spec, const fft::Spectrum& f_hat,
                                      const fft::Spectrum& g_hat) {
  fft::Spectrum prod(f_hat.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = f_hat[k] * g_hat[k];
  std::vector<double> cyc = fft::inverse_real(prod, spec.dim(), spec.points());
  // With x_i = -L + ih, the product f(x_i - y_k) g(y_k) uses sample index
  // i - k + N/2, i.e. the cyclic result shifted by N/2 on every axis.
  const std::size_t n = spec.points();
  const std::size_t half = n / 2;
  const double dv = spec.cell_volume();
  std::vector<double> out(cyc.size());
  if (spec.dim() == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = dv * cyc[(i + half) % n];
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out[i * n + j] = dv * cyc[((i + half) % n) * n + (j + half) % n];
  }
  return {spec, std::move(out)};
}

/// Periodic convolution f * g on a shared grid.
inline GridFunction convolve(const GridFunction& f, const GridFunction& g,
                             ConvolutionMethod method = ConvolutionMethod::fft) {
  if (!(f.spec() == g.spec()))
    throw InvalidArgument("convolution operands live on different grids: " + f.spec().describe() +
                          " vs " + g.spec().describe());
  const GridSpec& spec = f.spec();
  if (method == ConvolutionMethod::fft) return convolve_spectrum(spec, f.spectrum(), g.spectrum());

  const std::size_t n = spec.points();
  const long half = static_cast<long>(n / 2);
  const double dv = spec.cell_volume();
  std::vector<double> out(spec.size(), 0.0);
  if (spec.dim() == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += f[detail::wrap(static_cast<long>(i) - static_cast<long>(k) + half, n)] * g[k];
      out[i] = dv * acc;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          std::size_t row = detail::wrap(static_cast<long>(i) - static_cast<long>(k) + half, n) * n;
          for (std::size_t l = 0; l < n; ++l)
            acc += f[row + detail::wrap(static_cast<long>(j) - static_cast<long>(l) + half, n)] *
                   g[k * n + l];
        }
        out[i * n + j] = dv * acc;
      }
  }
  return {spec, std::move(out)};
}

/// How rescale_kernel reads the kernel between samples.
enum class Interpolation {
  nearest,  ///< piecewise constant; keeps jumps sharp
  cubic,    ///< Catmull-Rom cubic convolution
};

namespace detail {

inline double catmull_rom(double t, double p0, double p1, double p2, double p3) {
  return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

// Reads samples at fractional index positions; outside the box the kernel is zero.
class KernelReader {
 public:
  explicit KernelReader(const GridFunction& rho) : rho_(rho), n_(static_cast<long>(rho.spec().points())) {}

  double value(std::array<double, 2> u, Interpolation interp) const {
    if (interp == Interpolation::nearest) {
      long i = std::lround(u[0]);
      long j = rho_.spec().dim() == 2 ? std::lround(u[1]) : 0;
      return at(i, j);
    }
    if (rho_.spec().dim() == 1) {
      long i = static_cast<long>(std::floor(u[0]));
      double t = u[0] - static_cast<double>(i);
      return catmull_rom(t, at(i - 1, 0), at(i, 0), at(i + 1, 0), at(i + 2, 0));
    }
    long i = static_cast<long>(std::floor(u[0]));
    long j = static_cast<long>(std::floor(u[1]));
    double ti = u[0] - static_cast<double>(i);
    double tj = u[1] - static_cast<double>(j);
    std::array<double, 4> rows{};
    for (int a = 0; a < 4; ++a) {
      long r = i - 1 + a;
      rows[a] = catmull_rom(tj, at(r, j - 1), at(r, j), at(r, j + 1), at(r, j + 2));
    }
    return catmull_rom(ti, rows[0], rows[1], rows[2], rows[3]);
  }

 private:
  double at(long i, long j) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_) return 0.0;
    return rho_.spec().dim() == 1 ? rho_[static_cast<std::size_t>(i)]
                                  : rho_[static_cast<std::size_t>(i * n_ + j)];
  }

  const GridFunction& rho_;
  long n_;
};

/// Smallest per-axis count of grid lines carrying samples above threshold.
inline std::size_t support_extent_points(const GridFunction& f, double threshold) {
  const GridSpec& spec = f.spec();
  const std::size_t n = spec.points();
  std::vector<char> rows(n, 0), cols(n, 0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (std::abs(f[k]) <= threshold) continue;
    if (spec.dim() == 1) {
      rows[k] = 1;
    } else {
      rows[k / n] = 1;
      cols[k % n] = 1;
    }
  }
  auto count = [](const std::vector<char>& v) {
    std::size_t c = 0;
    for (char x : v) c += x;
    return c;
  };
  return spec.dim() == 1 ? count(rows) : std::min(count(rows), count(cols));
}

}  // namespace detail

/// Tolerance on the relative mass drift accepted by rescale_kernel.
inline constexpr double kRescaleMassTolerance = 1e-3;
/// Minimum number of grid points per axis a rescaled kernel must occupy.
inline constexpr std::size_t kMinSupportPoints = 4;

/// Samples rho_eps(x) = eps^-n rho(x / eps) by reading rho between its samples.
/// Throws ResolutionError when the shrunk kernel covers fewer than four grid
/// points per axis or its discrete mass drifts by more than 1e-3 (relative to
/// |mass|, or to the L1 norm for kernels with vanishing mass).
inline GridFunction rescale_kernel(const GridFunction& rho, double eps,
                                   Interpolation interp = Interpolation::cubic) {
  if (!(eps > 0.0)) throw InvalidArgument("rescale factor must be positive");
  if (eps > 1.0) throw InvalidArgument("rescale factor must not exceed 1");
  if (eps == 1.0) return rho;

  const GridSpec& spec = rho.spec();
  const double h = spec.spacing();
  const double L = spec.extent();
  const double amp = std::pow(eps, -spec.dim());
  detail::KernelReader reader(rho);
  std::vector<double> out(spec.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    Point x = spec.point(k);
    std::array<double, 2> u{(x[0] / eps + L) / h, (x[1] / eps + L) / h};
    out[k] = amp * reader.value(u, interp);
  }
  GridFunction scaled(spec, std::move(out));

  const double peak = scaled.max_abs();
  if (peak == 0.0 ||
      detail::support_extent_points(scaled, 1e-12 * peak) < kMinSupportPoints)
    throw ResolutionError("kernel rescaled to eps=" + std::to_string(eps) +
                          " covers fewer than 4 grid points per axis on " + spec.describe());

  const double m0 = rho.mass();
  const double l1 = lp_norm(rho, 1.0);
  const double ref = std::abs(m0) > kRescaleMassTolerance * l1 ? std::abs(m0) : l1;
  const double drift = std::abs(scaled.mass() - m0);
  if (drift > kRescaleMassTolerance * ref)
    throw ResolutionError("kernel rescaled to eps=" + std::to_string(eps) +
                          " lost mass (drift " + std::to_string(drift / ref) + " relative)");
  return scaled;
}

}  // namespace besov
