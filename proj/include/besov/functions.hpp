#pragma once

// Test-function generators: Gaussians, windowed |x|^alpha bumps, windowed
// band-limited randoms, lacunary sums, derivative-of-Gaussian, zero.
//
// synthesize() can band-limit a generator: it samples on a fine reference
// grid and keeps only frequencies below a cutoff, so the result is the same
// continuous function on every grid whose Nyquist exceeds that cutoff.

#include "besov/error.hpp"
#include "besov/fft.hpp"
#include "besov/grid.hpp"
#include "besov/littlewood_paley.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace besov {

/// exp(-|x - c|^2 / (2 v)), unnormalized.
struct GaussianFunction {
  double variance = 1.0;
  std::vector<double> center;
};

/// |x|^alpha exp(-|x|^2 / (2 w)). In B^s_{2,2} exactly for s < alpha + 1/2 (1D).
struct PowerBump {
  double alpha = 0.5;
  double window = 1.0;
};

/// sum_k a_k cos(omega_k . x + phi_k) exp(-|x|^2 / (2 w)), |omega_k| <= band.
struct RandomBand {
  std::uint64_t seed = 1;
  double band = 6.0;
  int terms = 8;
  double window = 1.0;
};

/// sum_{k >= 0, 2^k <= top} 2^{-alpha k} cos(2^k x_1) exp(-|x|^2 / (2 w)).
struct Lacunary {
  double alpha = 0.5;
  double top = 0.0;  ///< highest frequency; 0 picks a quarter of the Nyquist frequency
  double window = 1.0;
};

/// d/dx_1 of exp(-|x|^2 / (2 v)); mean zero.
struct GaussianDerivative {
  double variance = 1.0;
};

struct ZeroFunction {};

using FunctionGenerator =
    std::variant<GaussianFunction, PowerBump, RandomBand, Lacunary, GaussianDerivative, ZeroFunction>;

namespace detail {

inline double radius2(Point x, int dim) { return x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0); }

struct RandomTerms {
  std::vector<double> amp, phase;
  std::vector<Point> omega;
};

inline RandomTerms random_terms(const RandomBand& r, int dim) {
  std::mt19937_64 gen(r.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomTerms t;
  for (int k = 0; k < r.terms; ++k) {
    double w = r.band * u(gen);
    double dir = dim == 2 ? 2.0 * std::numbers::pi * u(gen) : 0.0;
    t.omega.push_back({w * std::cos(dir), w * std::sin(dir)});
    t.phase.push_back(2.0 * std::numbers::pi * u(gen));
    t.amp.push_back(2.0 * u(gen) - 1.0);
  }
  return t;
}

}  // namespace detail

inline std::string generator_kind(const FunctionGenerator& g) {
  static const char* names[] = {"gaussian", "power_bump", "random_band", "lacunary", "gaussian_derivative", "zero"};
  return names[g.index()];
}

/// Smoothness s* with f in B^s_{2,q} for s < s*, when known and finite.
inline std::optional<double> known_smoothness(const FunctionGenerator& g) {
  if (const auto* b = std::get_if<PowerBump>(&g)) return b->alpha + 0.5;
  if (const auto* l = std::get_if<Lacunary>(&g)) return l->alpha;
  return std::nullopt;
}

/// Point evaluator for a generator on grids of dimension `dim`.
inline std::function<double(Point)> evaluator(const FunctionGenerator& g, const GridSpec& spec) {
  const int dim = spec.dim();
  return std::visit(
      [&](const auto& x) -> std::function<double(Point)> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, GaussianFunction>) {
          if (!(x.variance > 0.0)) throw InvalidArgument("gaussian variance must be positive");
          Point c{0.0, 0.0};
          for (std::size_t i = 0; i < x.center.size() && i < 2; ++i) c[i] = x.center[i];
          const double v = x.variance;
          return [c, v, dim](Point p) { return std::exp(-detail::radius2({p[0] - c[0], p[1] - c[1]}, dim) / (2.0 * v)); };
        } else if constexpr (std::is_same_v<T, PowerBump>) {
          if (!(x.alpha > 0.0) || !(x.window > 0.0)) throw InvalidArgument("power bump needs alpha > 0 and window > 0");
          return [x, dim](Point p) {
            double r2 = detail::radius2(p, dim);
            return std::pow(r2, 0.5 * x.alpha) * std::exp(-r2 / (2.0 * x.window));
          };
        } else if constexpr (std::is_same_v<T, RandomBand>) {
          if (!(x.band > 0.0) || x.terms < 1 || !(x.window > 0.0))
            throw InvalidArgument("random band needs band > 0, terms >= 1 and window > 0");
          auto t = detail::random_terms(x, dim);
          const double w = x.window;
          return [t, w, dim](Point p) {
            double v = 0.0;
            for (std::size_t k = 0; k < t.amp.size(); ++k)
              v += t.amp[k] * std::cos(t.omega[k][0] * p[0] + t.omega[k][1] * p[1] + t.phase[k]);
            return v * std::exp(-detail::radius2(p, dim) / (2.0 * w));
          };
        } else if constexpr (std::is_same_v<T, Lacunary>) {
          if (!(x.alpha > 0.0) || !(x.window > 0.0)) throw InvalidArgument("lacunary sum needs alpha > 0 and window > 0");
          const double top = x.top > 0.0 ? x.top : 0.25 * spec.nyquist();
          std::vector<double> freq, amp;
          for (int k = 0; std::ldexp(1.0, k) <= top; ++k) {
            freq.push_back(std::ldexp(1.0, k));
            amp.push_back(std::exp2(-x.alpha * k));
          }
          const double w = x.window;
          return [freq, amp, w, dim](Point p) {
            double v = 0.0;
            for (std::size_t k = 0; k < freq.size(); ++k) v += amp[k] * std::cos(freq[k] * p[0]);
            return v * std::exp(-detail::radius2(p, dim) / (2.0 * w));
          };
        } else if constexpr (std::is_same_v<T, GaussianDerivative>) {
          if (!(x.variance > 0.0)) throw InvalidArgument("gaussian variance must be positive");
          const double v = x.variance;
          return [v, dim](Point p) { return -p[0] / v * std::exp(-detail::radius2(p, dim) / (2.0 * v)); };
        } else {
          return [](Point) { return 0.0; };
        }
      },
      g);
}

/// Reference grid used for band-limited synthesis.
inline GridSpec reference_grid(const GridSpec& spec) {
  const std::size_t n = spec.dim() == 1 ? std::max<std::size_t>(spec.points(), 1 << 16)
                                        : std::max<std::size_t>(spec.points(), 1024);
  return GridSpec(spec.dim(), spec.extent(), n);
}

/// Samples `g` on `spec`. With a cutoff, the result is the band-limited
/// function with spectrum f^(xi) * zeta^(|xi| / cutoff), computed from a
/// fine reference grid (zeta^ = 1 below 1.1, 0 above 1.9).
inline GridFunction synthesize(const FunctionGenerator& g, const GridSpec& spec,
                               std::optional<double> cutoff = std::nullopt) {
  if (!cutoff) return GridFunction::sample(spec, evaluator(g, spec));
  if (!(*cutoff > 0.0)) throw InvalidArgument("band-limit cutoff must be positive");
  if (1.9 * *cutoff >= spec.nyquist())
    throw ResolutionError("band-limit cutoff " + std::to_string(*cutoff) + " is not resolved on " + spec.describe());
  const GridSpec ref = reference_grid(spec);
  const GridFunction fine = GridFunction::sample(ref, evaluator(g, ref));
  const fft::Spectrum big = fine.spectrum();
  const std::size_t n = spec.points(), nr = ref.points();
  const double scale = std::pow(static_cast<double>(n) / static_cast<double>(nr), spec.dim());
  auto weight = [&](long k1, long k2) {
    double r = std::numbers::pi / spec.extent() * std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
    return smooth::falloff(r / *cutoff, 1.1, 1.9);
  };
  auto ref_index = [nr](long k) { return static_cast<std::size_t>(k < 0 ? k + static_cast<long>(nr) : k); };
  fft::Spectrum out(spec.size(), 0.0);
  if (spec.dim() == 1) {
    for (std::size_t k = 0; k < n; ++k) {
      long s = fft::signed_index(k, n);
      out[k] = scale * weight(s, 0) * big[ref_index(s)];
    }
  } else {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        long sa = fft::signed_index(a, n), sb = fft::signed_index(b, n);
        out[a * n + b] = scale * weight(sa, sb) * big[ref_index(sa) * nr + ref_index(sb)];
      }
  }
  return {spec, fft::inverse_real(out, spec.dim(), n)};
}

}  // namespace besov
