#pragma once

// Closed-form kernel families: isotropic Gaussians, axis-aligned cubes
// (normalized indicators) and the radial C-infinity bump. Each family
// provides point values, grid sampling, its Fourier symbol defect
// 1 - rho^(xi) and raw moments.

#include "besov/error.hpp"
#include "besov/grid.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace besov {

/// (2 pi v)^(-n/2) exp(-|x - c|^2 / (2v)), truncated beyond 8 sigma per axis.
struct GaussianKernel {
  double variance = 1.0;
  std::vector<double> center{0.0};
};

/// (1/|A|) 1_A for the box A = prod (lo_i, hi_i).
struct CubeKernel {
  std::vector<double> lo{-0.5};
  std::vector<double> hi{0.5};
};

/// C exp(-1 / (1 - |x|^2 / r^2)) on the ball of radius r, unit mass.
struct BumpKernel {
  double radius = 1.0;
  int dim = 1;
};

using AnalyticKernel = std::variant<GaussianKernel, CubeKernel, BumpKernel>;

inline constexpr double kGaussianTruncation = 8.0;

namespace detail {

template <class Fn>
double gauss_panels(Fn&& fn, double a, double b, int panels) {
  double sum = 0.0;
  double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p)
    sum += boost::math::quadrature::gauss<double, 20>::integrate(fn, a + p * w, a + (p + 1) * w);
  return sum;
}

inline double bump_profile(double s2) { return s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0; }

/// Integral of s^power exp(-1/(1-s^2)) over [0, 1].
inline double bump_radial_integral(int power) {
  return gauss_panels([power](double s) { return std::pow(s, power) * bump_profile(s * s); }, 0.0,
                      1.0, 16);
}

inline double bump_normalization(const BumpKernel& b) {
  if (b.dim == 1) return 1.0 / (b.radius * 2.0 * bump_radial_integral(0));
  return 1.0 / (b.radius * b.radius * 2.0 * std::numbers::pi * bump_radial_integral(1));
}

// 1 - sin(u)/u without cancellation.
inline double one_minus_sinc(double u) {
  double u2 = u * u;
  if (std::abs(u) < 0.1)
    return u2 * (1.0 / 6.0 - u2 * (1.0 / 120.0 - u2 * (1.0 / 5040.0 - u2 / 362880.0)));
  return 1.0 - std::sin(u) / u;
}

// 1 - J0(x) without cancellation.
inline double one_minus_j0(double x) {
  double q = x * x / 4.0;
  if (std::abs(x) < 0.1) return q * (1.0 - q * (0.25 - q * (1.0 / 36.0 - q / 576.0)));
  return 1.0 - std::cyl_bessel_j(0.0, x);
}

// 1 - e^{-i theta}.
inline std::complex<double> one_minus_phase(double theta) {
  double s = std::sin(0.5 * theta);
  return {2.0 * s * s, std::sin(theta)};
}

inline double double_factorial(int k) {
  double r = 1.0;
  for (int i = k; i > 1; i -= 2) r *= i;
  return r;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

inline int kernel_dim(const AnalyticKernel& k) {
  return std::visit(
      [](const auto& x) -> int {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) return static_cast<int>(x.center.size());
        else if constexpr (std::is_same_v<T, CubeKernel>) return static_cast<int>(x.lo.size());
        else return x.dim;
      },
      k);
}

inline std::string kernel_kind(const AnalyticKernel& k) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) return "gaussian";
        else if constexpr (std::is_same_v<T, CubeKernel>) return "cube";
        else return "bump";
      },
      k);
}

/// Throws InvalidArgument on degenerate parameters.
inline void validate(const AnalyticKernel& k) {
  int dim = kernel_dim(k);
  if (dim != 1 && dim != 2) throw InvalidArgument("kernel dimension must be 1 or 2");
  std::visit(
      [](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          if (!(x.variance > 0.0) || !std::isfinite(x.variance))
            throw InvalidArgument("gaussian variance must be positive");
        } else if constexpr (std::is_same_v<T, CubeKernel>) {
          if (x.lo.size() != x.hi.size()) throw InvalidArgument("cube corners differ in dimension");
          for (std::size_t i = 0; i < x.lo.size(); ++i)
            if (!(x.hi[i] > x.lo[i])) throw InvalidArgument("cube must have positive volume");
        } else {
          if (!(x.radius > 0.0)) throw InvalidArgument("bump radius must be positive");
        }
      },
      k);
}

/// The same family at scale eps: rho_eps(x) = eps^-n rho(x / eps).
inline AnalyticKernel scaled(const AnalyticKernel& k, double eps) {
  return std::visit(
      [eps](auto x) -> AnalyticKernel {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          x.variance *= eps * eps;
          for (double& c : x.center) c *= eps;
        } else if constexpr (std::is_same_v<T, CubeKernel>) {
          for (double& v : x.lo) v *= eps;
          for (double& v : x.hi) v *= eps;
        } else {
          x.radius *= eps;
        }
        return x;
      },
      k);
}

/// True when rho(-x) == rho(x), so the symbol is real and even.
inline bool is_even(const AnalyticKernel& k) {
  return std::visit(
      [](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          for (double c : x.center)
            if (c != 0.0) return false;
          return true;
        } else if constexpr (std::is_same_v<T, CubeKernel>) {
          for (std::size_t i = 0; i < x.lo.size(); ++i)
            if (x.lo[i] != -x.hi[i]) return false;
          return true;
        } else {
          return true;
        }
      },
      k);
}

/// Axis-aligned bounding box of the (numerical) support, per axis [lo, hi].
inline std::vector<std::array<double, 2>> support_box(const AnalyticKernel& k) {
  return std::visit(
      [](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        std::vector<std::array<double, 2>> box;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          double r = kGaussianTruncation * std::sqrt(x.variance);
          for (double c : x.center) box.push_back({c - r, c + r});
        } else if constexpr (std::is_same_v<T, CubeKernel>) {
          for (std::size_t i = 0; i < x.lo.size(); ++i) box.push_back({x.lo[i], x.hi[i]});
        } else {
          for (int i = 0; i < x.dim; ++i) box.push_back({-x.radius, x.radius});
        }
        return box;
      },
      k);
}

/// Point value of the density.
inline double density(const AnalyticKernel& k, Point x) {
  return std::visit(
      [&x](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          const int n = static_cast<int>(g.center.size());
          const double cut = kGaussianTruncation * std::sqrt(g.variance);
          double r2 = 0.0;
          for (int i = 0; i < n; ++i) {
            double d = x[i] - g.center[i];
            if (std::abs(d) > cut) return 0.0;
            r2 += d * d;
          }
          return std::pow(2.0 * std::numbers::pi * g.variance, -0.5 * n) *
                 std::exp(-r2 / (2.0 * g.variance));
        } else if constexpr (std::is_same_v<T, CubeKernel>) {
          double vol = 1.0;
          for (std::size_t i = 0; i < g.lo.size(); ++i) {
            if (x[i] <= g.lo[i] || x[i] >= g.hi[i]) return 0.0;
            vol *= g.hi[i] - g.lo[i];
          }
          return 1.0 / vol;
        } else {
          double r2 = x[0] * x[0] + (g.dim == 2 ? x[1] * x[1] : 0.0);
          return detail::bump_normalization(g) * detail::bump_profile(r2 / (g.radius * g.radius));
        }
      },
      k);
}

/// Samples an analytic kernel on the grid. Cubes are sampled by exact
/// per-axis cell coverage so the discrete mass is exactly one; smooth
/// families are sampled pointwise. Throws InvalidArgument when the support
/// leaves the box or the dimensions disagree.
inline GridFunction sample_analytic(const AnalyticKernel& k, const GridSpec& spec) {
  validate(k);
  if (kernel_dim(k) != spec.dim())
    throw InvalidArgument("kernel dimension " + std::to_string(kernel_dim(k)) +
                          " does not match grid dimension " + std::to_string(spec.dim()));
  const double h = spec.spacing();
  const double L = spec.extent();
  for (const auto& [lo, hi] : support_box(k))
    if (lo < -L + h || hi > L - h)
      throw InvalidArgument(kernel_kind(k) + " kernel support [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] exceeds the domain [-L, L) with L=" +
                            std::to_string(L));

  if (const auto* cube = std::get_if<CubeKernel>(&k)) {
    const std::size_t n = spec.points();
    std::vector<std::vector<double>> cov(cube->lo.size(), std::vector<double>(n));
    double vol = 1.0;
    for (std::size_t a = 0; a < cube->lo.size(); ++a) {
      vol *= cube->hi[a] - cube->lo[a];
      for (std::size_t i = 0; i < n; ++i) {
        double x = spec.coordinate(i);
        double len = std::min(cube->hi[a], x + 0.5 * h) - std::max(cube->lo[a], x - 0.5 * h);
        cov[a][i] = std::max(0.0, len) / h;
      }
    }
    std::vector<double> v(spec.size());
    for (std::size_t flat = 0; flat < v.size(); ++flat) {
      if (spec.dim() == 1) v[flat] = cov[0][flat] / vol;
      else v[flat] = cov[0][flat / n] * cov[1][flat % n] / vol;
    }
    return {spec, std::move(v)};
  }
  return GridFunction::sample(spec, [&k](Point x) { return density(k, x); });
}

/// Samples rho_eps analytically (the family re-evaluated at scale eps).
inline GridFunction sample_analytic(const AnalyticKernel& k, const GridSpec& spec, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("scale must be positive");
  return sample_analytic(scaled(k, eps), spec);
}

/// 1 - rho^(t) for the Fourier transform rho^(t) = integral rho(y) e^{-i t.y} dy,
/// evaluated without cancellation for small |t|.
inline std::complex<double> symbol_defect(const AnalyticKernel& k, Point t) {
  using C = std::complex<double>;
  return std::visit(
      [&t](const auto& g) -> C {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          double t2 = 0.0, theta = 0.0;
          for (std::size_t i = 0; i < g.center.size(); ++i) {
            t2 += t[i] * t[i];
            theta += g.center[i] * t[i];
          }
          double decay = std::exp(-0.5 * g.variance * t2);
          double one_minus_decay = -std::expm1(-0.5 * g.variance * t2);
          return C(one_minus_decay, 0.0) + decay * detail::one_minus_phase(theta);
        } else if constexpr (std::is_same_v<T, CubeKernel>) {
          C total(0.0, 0.0);
          for (std::size_t i = 0; i < g.lo.size(); ++i) {
            double width = g.hi[i] - g.lo[i];
            double mid = 0.5 * (g.hi[i] + g.lo[i]);
            double u = 0.5 * width * t[i];
            double sinc = 1.0 - detail::one_minus_sinc(u);
            C d = C(detail::one_minus_sinc(u), 0.0) + sinc * detail::one_minus_phase(mid * t[i]);
            // 1 - (1-a)(1-b) = a + b - ab
            total = total + d - total * d;
          }
          return total;
        } else {
          double tr = std::sqrt(t[0] * t[0] + (g.dim == 2 ? t[1] * t[1] : 0.0));
          if (tr == 0.0) return C(0.0, 0.0);
          const double c = detail::bump_normalization(g);
          const double r = g.radius;
          // Panels scale with the number of oscillations across the support.
          int panels = 8 + static_cast<int>(std::ceil(tr * r / 12.0));
          if (g.dim == 1) {
            auto f = [&](double y) {
              double s = std::sin(0.5 * tr * y);
              return 2.0 * s * s * detail::bump_profile(y * y / (r * r));
            };
            return C(2.0 * c * detail::gauss_panels(f, 0.0, r, panels), 0.0);
          }
          auto f = [&](double u) {
            return detail::one_minus_j0(tr * u) * detail::bump_profile(u * u / (r * r)) * u;
          };
          return C(2.0 * std::numbers::pi * c * detail::gauss_panels(f, 0.0, r, panels), 0.0);
        }
      },
      k);
}

/// Raw moment integral y_1^a y_2^b rho(y) dy in closed (or
/// semi-analytic, for the bump) form. `powers` has one entry per axis.
inline double raw_moment(const AnalyticKernel& k, std::array<int, 2> powers) {
  return std::visit(
      [&powers](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          double prod = 1.0;
          for (std::size_t a = 0; a < g.center.size(); ++a) {
            int p = powers[a];
            double c = g.center[a];
            double sum = 0.0;
            for (int i = 0; i <= p; i += 2)
              sum += detail::binomial(p, i) * std::pow(c, p - i) * std::pow(g.variance, i / 2) *
                     detail::double_factorial(i - 1);
            prod *= sum;
          }
          return prod;
        } else if constexpr (std::is_same_v<T, CubeKernel>) {
          double prod = 1.0;
          for (std::size_t a = 0; a < g.lo.size(); ++a) {
            int p = powers[a];
            double lo = g.lo[a], hi = g.hi[a];
            prod *= (std::pow(hi, p + 1) - std::pow(lo, p + 1)) / ((p + 1) * (hi - lo));
          }
          return prod;
        } else {
          const double c = detail::bump_normalization(g);
          const double r = g.radius;
          if (g.dim == 1) {
            int p = powers[0];
            if (p % 2) return 0.0;
            return c * std::pow(r, p + 1) * 2.0 * detail::bump_radial_integral(p);
          }
          int a = powers[0], b = powers[1];
          if (a % 2 || b % 2) return 0.0;
          double angular = 2.0 * std::tgamma(0.5 * (a + 1)) * std::tgamma(0.5 * (b + 1)) /
                           std::tgamma(0.5 * (a + b + 2));
          return c * std::pow(r, a + b + 2) * angular * detail::bump_radial_integral(a + b + 1);
        }
      },
      k);
}

}  // namespace besov
