#pragma once

// Inhomogeneous Littlewood-Paley decomposition on the periodic grid and the
// Besov seminorm/norm built from it.
//
// The low-pass profile zeta^ is radial, equal to 1 on |xi| <= 1 + delta_in
// and 0 on |xi| >= 2 - delta_out. Band j >= 1 uses
// phi^(2^{1-j} xi) = zeta^(2^{-j} xi) - zeta^(2^{1-j} xi), so the bands
// telescope to zeta^(2^{-J} xi).

#include "besov/error.hpp"
#include "besov/fft.hpp"
#include "besov/grid.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <unordered_map>
#include <vector>

namespace besov {

struct BesovParams {
  double s = 1.0;
  LpExponent p = 2.0;
  LpExponent q = 2.0;

  BesovParams() = default;
  BesovParams(double s_, LpExponent p_, LpExponent q_) : s(s_), p(p_), q(q_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("smoothness s must be positive");
  }
};

namespace smooth {

inline double bump_density(double t) { return (t <= 0.0 || t >= 1.0) ? 0.0 : std::exp(-1.0 / (t * (1.0 - t))); }

inline double bump_integral(double a, double b) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  constexpr int panels = 8;
  double w = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) sum += GL::integrate(bump_density, a + p * w, a + (p + 1) * w);
  return sum;
}

/// Normalized integral of exp(-1/(u(1-u))): 0 at u <= 0, 1 at u >= 1,
/// flat to all orders at both ends.
inline double step(double u) {
  static const double total = bump_integral(0.0, 1.0);
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  // Integrate over the shorter side for accuracy near the ends.
  if (u <= 0.5) return bump_integral(0.0, u) / total;
  return 1.0 - bump_integral(u, 1.0) / total;
}

/// 1 on t <= a, 0 on t >= b, smooth decreasing in between.
inline double falloff(double t, double a, double b) {
  if (t <= a) return 1.0;
  if (t >= b) return 0.0;
  return 1.0 - step((t - a) / (b - a));
}

}  // namespace smooth

namespace detail {

/// Evaluates a radial profile at every grid frequency, once per distinct radius.
inline std::vector<double> radial_on_grid(const GridSpec& spec, const std::function<double(double)>& profile) {
  const std::size_t n = spec.points();
  const double w0 = std::numbers::pi / spec.extent();
  std::vector<double> out(spec.size());
  if (spec.dim() == 1) {
    for (std::size_t k = 0; k < n; ++k)
      out[k] = profile(w0 * std::abs(static_cast<double>(fft::signed_index(k, n))));
    return out;
  }
  std::unordered_map<long, double> cache;
  for (std::size_t a = 0; a < n; ++a) {
    long ka = fft::signed_index(a, n);
    for (std::size_t b = 0; b < n; ++b) {
      long kb = fft::signed_index(b, n);
      long key = ka * ka + kb * kb;
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, profile(w0 * std::sqrt(static_cast<double>(key)))).first;
      out[a * n + b] = it->second;
    }
  }
  return out;
}

}  // namespace detail

/// Spatial samples of the function whose Fourier transform is `symbol`
/// (continuous convention f^(xi) = integral f(x) e^{-i x.xi} dx).
inline GridFunction spatial_from_symbol(const GridSpec& spec, const std::vector<double>& symbol) {
  const std::size_t n = spec.points();
  fft::Spectrum s(symbol.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    // e^{i xi x_i} with x_i = -L + ih contributes the phase (-1)^k per axis.
    long parity = spec.dim() == 1 ? fft::signed_index(k, n)
                                  : fft::signed_index(k / n, n) + fft::signed_index(k % n, n);
    s[k] = (parity % 2 == 0 ? 1.0 : -1.0) * symbol[k];
  }
  std::vector<double> v = fft::inverse_real(s, spec.dim(), n);
  const double scale = 1.0 / spec.cell_volume();
  for (double& x : v) x *= scale;
  return {spec, std::move(v)};
}

inline constexpr double kDefaultDeltaIn = 0.1;
inline constexpr double kDefaultDeltaOut = 0.1;
/// A truncated seminorm is reported converged when the last band carries
/// less than this share of the sum.
inline constexpr double kTruncationShareLimit = 0.05;

/// Dyadic filter bank realized on the grid's frequency lattice.
class FilterBank {
 public:
  /// Largest J with the top band 2^{J-1} < |xi| < 2^{J+1} inside half the
  /// Nyquist frequency: J = floor(log2(N pi / (8 L))).
  static int nyquist_levels(const GridSpec& spec) {
    double v = static_cast<double>(spec.points()) * std::numbers::pi / (8.0 * spec.extent());
    return v < 1.0 ? -1 : static_cast<int>(std::floor(std::log2(v)));
  }

  FilterBank(const GridSpec& spec, double delta_in, double delta_out, int levels)
      : spec_(spec), delta_in_(delta_in), delta_out_(delta_out), levels_(levels) {
    zeta_hat_ = detail::radial_on_grid(spec_, [this](double r) { return zeta(r); });
    phi_hat_ = detail::radial_on_grid(spec_, [this](double r) { return phi(r); });
    psi_hat_ = detail::radial_on_grid(spec_, [](double r) { return psi(r); });
  }

  const GridSpec& spec() const noexcept { return spec_; }
  double delta_in() const noexcept { return delta_in_; }
  double delta_out() const noexcept { return delta_out_; }
  int levels() const noexcept { return levels_; }

  /// Radial profiles as functions of |xi|.
  double zeta(double r) const { return smooth::falloff(r, 1.0 + delta_in_, 2.0 - delta_out_); }
  double phi(double r) const { return zeta(0.5 * r) - zeta(r); }
  /// Auxiliary filter: 1 on [0.95, 4.2], 0 outside (0.8, 5.0), so 1 on supp phi^ and 0 at the origin.
  static double psi(double r) {
    if (r <= 0.8 || r >= 5.0) return 0.0;
    if (r < 0.95) return smooth::step((r - 0.8) / 0.15);
    return smooth::falloff(r, 4.2, 5.0);
  }

  /// Multiplier of band j on |xi| = r: zeta^ for j = 0, phi^(2^{1-j} r) otherwise.
  double band(int j, double r) const { return j == 0 ? zeta(r) : phi(std::ldexp(r, 1 - j)); }

  const std::vector<double>& zeta_hat() const noexcept { return zeta_hat_; }
  const std::vector<double>& phi_hat() const noexcept { return phi_hat_; }
  const std::vector<double>& psi_hat() const noexcept { return psi_hat_; }

  /// Band multiplier sampled on the grid frequencies.
  std::vector<double> band_on_grid(int j) const {
    if (j == 0) return zeta_hat_;
    if (j == 1) return phi_hat_;
    return detail::radial_on_grid(spec_, [this, j](double r) { return band(j, r); });
  }

  /// zeta^ + sum_{j=1..J} band_j at radius r (equals 1 for r <= 2^J).
  double partition(double r) const {
    double sum = zeta(r);
    for (int j = 1; j <= levels_; ++j) sum += band(j, r);
    return sum;
  }

  GridFunction psi_function() const { return spatial_from_symbol(spec_, psi_hat_); }

 private:
  GridSpec spec_;
  double delta_in_;
  double delta_out_;
  int levels_;
  std::vector<double> zeta_hat_, phi_hat_, psi_hat_;
};

/// Builds the bank. `levels` defaults to the Nyquist limit and may be set
/// lower to pin the truncation across grids. Throws ResolutionError when
/// fewer than three levels fit.
inline FilterBank build_filter_bank(const GridSpec& spec, double delta_in = kDefaultDeltaIn,
                                    double delta_out = kDefaultDeltaOut,
                                    std::optional<int> levels = std::nullopt) {
  if (!(delta_in > 0.0) || !(delta_out > 0.0) || 1.0 + delta_in >= 2.0 - delta_out)
    throw InvalidArgument("transition window needs 0 < delta_in, 0 < delta_out and 1 + delta_in < 2 - delta_out");
  int max_levels = FilterBank::nyquist_levels(spec);
  if (max_levels < 3)
    throw ResolutionError("grid " + spec.describe() + " too coarse for a 3-level filter bank");
  int j = levels.value_or(max_levels);
  if (j < 3 || j > max_levels)
    throw InvalidArgument("filter bank levels must lie in [3, " + std::to_string(max_levels) + "]");
  return FilterBank(spec, delta_in, delta_out, j);
}

struct LPDecomposition {
  std::vector<GridFunction> pieces;  ///< f_0 .. f_J
};

inline LPDecomposition lp_decompose(const GridFunction& f, const FilterBank& bank) {
  if (!(f.spec() == bank.spec()))
    throw InvalidArgument("function grid " + f.spec().describe() + " differs from filter bank grid " +
                          bank.spec().describe());
  const fft::Spectrum f_hat = f.spectrum();
  LPDecomposition d;
  d.pieces.reserve(bank.levels() + 1);
  fft::Spectrum work(f_hat.size());
  for (int j = 0; j <= bank.levels(); ++j) {
    std::vector<double> m = bank.band_on_grid(j);
    for (std::size_t k = 0; k < work.size(); ++k) work[k] = f_hat[k] * m[k];
    d.pieces.emplace_back(f.spec(), fft::inverse_real(work, f.spec().dim(), f.spec().points()));
  }
  return d;
}

struct SeminormResult {
  double value = 0.0;
  std::vector<double> terms;  ///< 2^{sj} ||f_j||_p
  double last_term_share = 0.0;
  bool converged = true;
};

inline SeminormResult besov_seminorm(const LPDecomposition& d, const BesovParams& params) {
  SeminormResult r;
  for (std::size_t j = 0; j < d.pieces.size(); ++j)
    r.terms.push_back(std::exp2(params.s * static_cast<double>(j)) * lp_norm(d.pieces[j], params.p));
  if (params.q.is_infinite()) {
    for (double t : r.terms) r.value = std::max(r.value, t);
    r.last_term_share = r.value > 0.0 ? r.terms.back() / r.value : 0.0;
  } else {
    const double q = params.q.value();
    double peak = 0.0;
    for (double t : r.terms) peak = std::max(peak, t);
    if (peak > 0.0) {
      double sum = 0.0;
      for (double t : r.terms) sum += std::pow(t / peak, q);
      r.value = peak * std::pow(sum, 1.0 / q);
      r.last_term_share = std::pow(r.terms.back() / peak, q) / sum;
    }
  }
  r.converged = r.last_term_share < kTruncationShareLimit;
  return r;
}

/// |f|_{B^s_{p,q}} truncated at the bank's top level.
inline SeminormResult besov_seminorm(const GridFunction& f, const FilterBank& bank, const BesovParams& params) {
  return besov_seminorm(lp_decompose(f, bank), params);
}

struct NormResult {
  double value = 0.0;
  double lp = 0.0;
  SeminormResult seminorm;
};

/// Combines ||f||_p and the seminorm in l^q: (||f||_p^q + |f|^q)^{1/q}.
inline double combine_lq(double a, double b, LpExponent q) {
  if (q.is_infinite()) return std::max(a, b);
  double peak = std::max(a, b);
  if (peak == 0.0) return 0.0;
  double e = q.value();
  return peak * std::pow(std::pow(a / peak, e) + std::pow(b / peak, e), 1.0 / e);
}

inline NormResult besov_norm(const GridFunction& f, const FilterBank& bank, const BesovParams& params) {
  NormResult r;
  r.lp = lp_norm(f, params.p);
  r.seminorm = besov_seminorm(f, bank, params);
  r.value = combine_lq(r.lp, r.seminorm.value, params.q);
  return r;
}

}  // namespace besov
