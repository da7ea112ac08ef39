#pragma once

// Mollifier approximation rates: eps -> ||f - f*rho_eps||_p profiles, the
// rate functional integral_0^1 eps^{-sq-1} ||f - f*rho_eps||_p^q d eps, the
// single-test-function admissibility test, power-law fits, and the
// ||rho * psi_eps||_1 vanishing diagnostic.

#include "besov/error.hpp"
#include "besov/fft.hpp"
#include "besov/grid.hpp"
#include "besov/kernels.hpp"
#include "besov/littlewood_paley.hpp"
#include "besov/parallel.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace besov {

/// Dyadic blocks [2^{-j-1}, 2^{-j}], j = 0..j_max-1, each sampled at m
/// geometrically spaced points.
struct EpsilonGrid {
  int j_max = 8;
  int m = 4;

  EpsilonGrid() = default;
  EpsilonGrid(int j_max_, int m_) : j_max(j_max_), m(m_) { validate(); }

  void validate() const {
    if (j_max < 3) throw InvalidArgument("epsilon grid needs j_max >= 3");
    if (m < 1) throw InvalidArgument("epsilon grid needs at least one sample per block");
  }

  /// Block endpoints and interior points 2^{-(j + k/m)}, ending at 2^{-j_max}; strictly decreasing.
  std::vector<double> dyadic_nodes() const {
    std::vector<double> e;
    for (int j = 0; j < j_max; ++j)
      for (int k = 0; k < m; ++k) e.push_back(std::exp2(-(j + static_cast<double>(k) / m)));
    e.push_back(std::exp2(-j_max));
    return e;
  }

  /// Log-midpoints 2^{-(j + (k + 1/2)/m)} of the m sub-cells of every block.
  std::vector<double> midpoint_nodes() const {
    std::vector<double> e;
    for (int j = 0; j < j_max; ++j)
      for (int k = 0; k < m; ++k) e.push_back(std::exp2(-(j + (k + 0.5) / m)));
    return e;
  }

  double smallest() const { return std::exp2(-j_max); }
};

/// How f * rho_eps is formed.
enum class MollifyRoute {
  automatic,  ///< symbol when the kernel has one, else grid
  symbol,     ///< multiply the spectrum of f by rho^(eps xi)
  grid,       ///< sample rho_eps on the grid and convolve
};

/// A function together with its DFT, reused across scales.
struct PreparedFunction {
  GridFunction f;
  fft::Spectrum spectrum;

  explicit PreparedFunction(GridFunction g) : f(std::move(g)), spectrum(f.spectrum()) {}
};

/// 1 - rho^(eps xi) at every grid frequency. Even kernels are evaluated
/// once per (|k1|, |k2|) and mirrored.
inline fft::Spectrum defect_on_grid(const MollifierSpec& rho, const GridSpec& spec, double eps) {
  fft::Spectrum d(spec.size());
  const std::size_t n = spec.points();
  if (!rho.is_even()) {
    for (std::size_t k = 0; k < d.size(); ++k) {
      Point xi = spec.frequency_vector(k);
      d[k] = rho.symbol_defect({eps * xi[0], eps * xi[1]});
    }
    return d;
  }
  auto mirror = [n](std::size_t k) { return k == 0 || k == n / 2 ? k : std::min(k, n - k); };
  if (spec.dim() == 1) {
    for (std::size_t k = 0; k <= n / 2; ++k) d[k] = rho.symbol_defect({eps * std::abs(spec.frequency(k)), 0.0});
    for (std::size_t k = n / 2 + 1; k < n; ++k) d[k] = d[n - k];
    return d;
  }
  for (std::size_t a = 0; a <= n / 2; ++a)
    for (std::size_t b = 0; b <= n / 2; ++b)
      d[a * n + b] = rho.symbol_defect({eps * std::abs(spec.frequency(a)), eps * std::abs(spec.frequency(b))});
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a > n / 2 || b > n / 2) d[a * n + b] = d[mirror(a) * n + mirror(b)];
  return d;
}

/// Applies g -> g - g * rho_eps on one grid.
class Mollifier {
 public:
  Mollifier(const MollifierSpec& rho, const GridSpec& spec, MollifyRoute route = MollifyRoute::automatic)
      : rho_(rho), spec_(spec) {
    if (rho.dim() != spec.dim())
      throw InvalidArgument("kernel '" + rho.id() + "' is " + std::to_string(rho.dim()) + "D but the grid is " +
                            std::to_string(spec.dim()) + "D");
    use_symbol_ = route == MollifyRoute::symbol || (route == MollifyRoute::automatic && rho.has_symbol());
    if (use_symbol_ && !rho.has_symbol())
      throw InvalidArgument("kernel '" + rho.id() + "' has no closed-form symbol");
  }

  const MollifierSpec& kernel() const noexcept { return rho_; }
  const GridSpec& spec() const noexcept { return spec_; }
  bool uses_symbol() const noexcept { return use_symbol_; }

  /// 1 - rho^(eps xi) on the grid frequencies.
  fft::Spectrum defect_on_grid(double eps) const { return besov::defect_on_grid(rho_, spec_, eps); }

  /// Spectrum of rho_eps sampled on the grid (grid route).
  fft::Spectrum kernel_spectrum(double eps) const {
    GridFunction k = rho_.sample(spec_, eps);
    if (!rho_.sampled()) {
      const double peak = k.max_abs();
      if (peak == 0.0 || detail::support_extent_points(k, 1e-12 * peak) < kMinSupportPoints)
        throw ResolutionError("kernel '" + rho_.id() + "' at eps=" + std::to_string(eps) +
                              " covers fewer than 4 grid points per axis on " + spec_.describe());
    }
    return k.spectrum();
  }

  /// g - g * rho_eps for every prepared function, sharing the per-scale work.
  std::vector<GridFunction> residuals(const std::vector<PreparedFunction>& fs, double eps) const {
    std::vector<GridFunction> out;
    out.reserve(fs.size());
    if (use_symbol_) {
      const fft::Spectrum d = defect_on_grid(eps);
      fft::Spectrum work(spec_.size());
      for (const auto& f : fs) {
        check(f);
        for (std::size_t k = 0; k < work.size(); ++k) work[k] = f.spectrum[k] * d[k];
        out.emplace_back(spec_, fft::inverse_real(work, spec_.dim(), spec_.points()));
      }
      return out;
    }
    const fft::Spectrum kh = kernel_spectrum(eps);
    for (const auto& f : fs) {
      check(f);
      out.push_back(f.f - convolve_spectrum(spec_, f.spectrum, kh));
    }
    return out;
  }

  GridFunction residual(const PreparedFunction& f, double eps) const {
    return std::move(residuals({f}, eps).front());
  }

  /// f * rho_eps.
  GridFunction mollify(const PreparedFunction& f, double eps) const { return f.f - residual(f, eps); }

  std::vector<double> deviations(const std::vector<PreparedFunction>& fs, double eps, LpExponent p) const {
    std::vector<double> out;
    for (const auto& r : residuals(fs, eps)) out.push_back(lp_norm(r, p));
    return out;
  }

  double deviation(const PreparedFunction& f, double eps, LpExponent p) const {
    return lp_norm(residual(f, eps), p);
  }

 private:
  void check(const PreparedFunction& f) const {
    if (!(f.f.spec() == spec_))
      throw InvalidArgument("function grid " + f.f.spec().describe() + " differs from " + spec_.describe());
  }

  MollifierSpec rho_;
  GridSpec spec_;
  bool use_symbol_ = true;
};

/// Deviation table for several functions at several scales: result[e][f].
inline std::vector<std::vector<double>> deviation_table(const Mollifier& mol, const std::vector<PreparedFunction>& fs,
                                                        const std::vector<double>& epsilons, LpExponent p) {
  std::vector<std::vector<double>> table(epsilons.size());
  parallel_for(epsilons.size(), [&](std::size_t e) { table[e] = mol.deviations(fs, epsilons[e], p); });
  return table;
}

struct RateProfile {
  std::vector<double> epsilons;    ///< strictly decreasing
  std::vector<double> deviations;  ///< ||f - f*rho_eps||_p >= 0
  LpExponent p = 2.0;
  std::string kernel_id;
  std::string function_id;

  void validate() const {
    if (epsilons.size() != deviations.size()) throw InvalidArgument("profile columns differ in length");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      if (!(epsilons[i] > 0.0)) throw InvalidArgument("profile epsilon must be positive");
      if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw InvalidArgument("profile epsilons must strictly decrease");
      if (!(deviations[i] >= 0.0) || !std::isfinite(deviations[i]))
        throw InvalidArgument("profile deviations must be finite and non-negative");
    }
  }
};

/// ||f - f*rho_eps||_p at the grid's dyadic nodes (all via the same route).
inline RateProfile rate_profile(const GridFunction& f, const MollifierSpec& rho, LpExponent p, const EpsilonGrid& grid,
                                std::string function_id = "f", MollifyRoute route = MollifyRoute::automatic) {
  grid.validate();
  Mollifier mol(rho, f.spec(), route);
  std::vector<PreparedFunction> fs;
  fs.emplace_back(f);
  RateProfile prof;
  prof.epsilons = grid.dyadic_nodes();
  auto table = deviation_table(mol, fs, prof.epsilons, p);
  for (const auto& row : table) prof.deviations.push_back(row.front());
  prof.p = p;
  prof.kernel_id = rho.id();
  prof.function_id = std::move(function_id);
  return prof;
}

// ---------------------------------------------------------------------------
// Rate functional

struct FunctionalResult {
  double value = 0.0;               ///< integral_0^1 eps^{-sq-1} D^q (or sup eps^{-s} D for q = inf)
  std::vector<double> block_values;  ///< contribution of each dyadic block
  double tail_share = 0.0;          ///< last block / total
  double lp = 0.0;                  ///< ||f||_p
  double norm = 0.0;                ///< (||f||_p^q + value)^{1/q}

  bool converged() const { return tail_share < kTruncationShareLimit; }
};

/// Block-sum quadrature from deviations at grid.midpoint_nodes(): each
/// sub-cell holds D constant and integrates eps^{-sq-1} exactly.
inline FunctionalResult functional_from_midpoints(const std::vector<double>& deviations, double lp,
                                                  const BesovParams& params, const EpsilonGrid& grid) {
  if (deviations.size() != static_cast<std::size_t>(grid.j_max * grid.m))
    throw InvalidArgument("deviation count does not match the epsilon grid");
  FunctionalResult r;
  r.lp = lp;
  const double s = params.s;
  r.block_values.assign(grid.j_max, 0.0);
  if (params.q.is_infinite()) {
    for (int j = 0; j < grid.j_max; ++j)
      for (int k = 0; k < grid.m; ++k) {
        double eps = std::exp2(-(j + (k + 0.5) / grid.m));
        r.block_values[j] = std::max(r.block_values[j], std::pow(eps, -s) * deviations[j * grid.m + k]);
      }
    for (double b : r.block_values) r.value = std::max(r.value, b);
    r.tail_share = r.value > 0.0 ? r.block_values.back() / r.value : 0.0;
    r.norm = std::max(lp, r.value);
    return r;
  }
  const double q = params.q.value();
  const double sq = s * q;
  for (int j = 0; j < grid.j_max; ++j)
    for (int k = 0; k < grid.m; ++k) {
      double hi = std::exp2(-(j + static_cast<double>(k) / grid.m));
      double lo = std::exp2(-(j + static_cast<double>(k + 1) / grid.m));
      double weight = (std::pow(lo, -sq) - std::pow(hi, -sq)) / sq;
      r.block_values[j] += weight * std::pow(deviations[j * grid.m + k], q);
    }
  for (double b : r.block_values) r.value += b;
  r.tail_share = r.value > 0.0 ? r.block_values.back() / r.value : 0.0;
  r.norm = std::pow(std::pow(lp, q) + r.value, 1.0 / q);
  return r;
}

/// Geometric-grid quadrature from deviations at grid.dyadic_nodes(): the
/// integrand eps^{-sq-1} D^q is interpolated as a power law between
/// consecutive nodes (exact on pure power laws). Finite q only.
inline double functional_from_dyadic_nodes(const std::vector<double>& epsilons, const std::vector<double>& deviations,
                                           const BesovParams& params) {
  if (params.q.is_infinite()) throw InvalidArgument("geometric quadrature is defined for finite q");
  if (epsilons.size() != deviations.size() || epsilons.size() < 2)
    throw InvalidArgument("need matching epsilon/deviation columns");
  const double q = params.q.value();
  const double sq = params.s * q;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < epsilons.size(); ++i) {
    double ea = epsilons[i], eb = epsilons[i + 1];  // ea > eb
    double ga = std::pow(ea, -sq - 1.0) * std::pow(deviations[i], q);
    double gb = std::pow(eb, -sq - 1.0) * std::pow(deviations[i + 1], q);
    if (ga <= 0.0 || gb <= 0.0) {
      total += 0.5 * (ga + gb) * (ea - eb);
      continue;
    }
    double gamma = std::log(gb / ga) / std::log(eb / ea);
    double ratio = eb / ea;
    if (std::abs(gamma + 1.0) < 1e-12) total += ga * ea * std::log(ea / eb);
    else total += ga * ea / (gamma + 1.0) * (1.0 - std::pow(ratio, gamma + 1.0));
  }
  return total;
}

/// Rate functional integral_0^1 eps^{-sq-1} ||f - f*rho_eps||_p^q d eps, truncated at 2^{-j_max}.
inline FunctionalResult mollifier_functional(const GridFunction& f, const MollifierSpec& rho, const BesovParams& params,
                                             const EpsilonGrid& grid, MollifyRoute route = MollifyRoute::automatic) {
  grid.validate();
  Mollifier mol(rho, f.spec(), route);
  std::vector<PreparedFunction> fs;
  fs.emplace_back(f);
  std::vector<double> devs;
  for (const auto& row : deviation_table(mol, fs, grid.midpoint_nodes(), params.p)) devs.push_back(row.front());
  return functional_from_midpoints(devs, lp_norm(f, params.p), params, grid);
}

/// Same integral by the geometric-grid route, for cross-checking.
inline double mollifier_functional_direct(const GridFunction& f, const MollifierSpec& rho, const BesovParams& params,
                                          const EpsilonGrid& grid, MollifyRoute route = MollifyRoute::automatic) {
  RateProfile prof = rate_profile(f, rho, params.p, grid, "f", route);
  return functional_from_dyadic_nodes(prof.epsilons, prof.deviations, params);
}

// ---------------------------------------------------------------------------
// Single test function criterion

/// Share of the running sum the last block may carry for a converged verdict.
inline constexpr double kEtaTailShareLimit = 0.01;

struct EtaTestReport {
  double s = 0.0;
  std::vector<double> epsilons;                   ///< sample points in [1/2, 1]
  std::vector<std::vector<double>> terms;         ///< [eps][j] = 2^{sj} ||eta - eta*rho_{2^-j eps}||_1
  std::vector<std::vector<double>> partial_sums;  ///< running sums over j
  std::vector<double> tail_shares;                ///< last term / final sum per eps
  bool converged = false;
};

/// Evaluates S_eps = sum_{j<=J} 2^{sj} ||eta - eta*rho_{2^-j eps}||_1 at m
/// points eps in [1/2, 1]; converged iff the last block is below 1% of the
/// sum at every sampled eps.
inline EtaTestReport eta_test(const MollifierSpec& rho, const GridFunction& eta, double s, int J, int m,
                              MollifyRoute route = MollifyRoute::automatic) {
  if (!(s > 0.0)) throw InvalidArgument("s must be positive");
  if (J < 1 || m < 1) throw InvalidArgument("eta test needs J >= 1 and m >= 1");
  const double mean = eta.mass();
  if (!(std::abs(mean) > 1e-10 * std::max(1.0, lp_norm(eta, 1.0))))
    throw InvalidArgument("test function must have non-zero integral");

  Mollifier mol(rho, eta.spec(), route);
  std::vector<PreparedFunction> fs;
  fs.emplace_back(eta);
  EtaTestReport r;
  r.s = s;
  for (int k = 0; k < m; ++k) r.epsilons.push_back(std::exp2(-(k + 0.5) / m));

  std::vector<double> scales;
  for (double e : r.epsilons)
    for (int j = 0; j <= J; ++j) scales.push_back(std::ldexp(e, -j));
  auto table = deviation_table(mol, fs, scales, 1.0);

  r.converged = true;
  for (int k = 0; k < m; ++k) {
    std::vector<double> terms, sums;
    double acc = 0.0;
    for (int j = 0; j <= J; ++j) {
      double t = std::exp2(s * j) * table[k * (J + 1) + j].front();
      terms.push_back(t);
      acc += t;
      sums.push_back(acc);
    }
    double share = acc > 0.0 ? terms.back() / acc : 0.0;
    r.tail_shares.push_back(share);
    if (!(share < kEtaTailShareLimit)) r.converged = false;
    r.terms.push_back(std::move(terms));
    r.partial_sums.push_back(std::move(sums));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Power-law fits

/// Deviations at or below this level are floating-point noise.
inline constexpr double kDeviationFloor = 1e-13;

struct FitRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;  ///< natural log of the prefactor
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least squares on (log eps, log deviation) over the fit range. Needs at
/// least five points above the floating floor.
inline PowerLawFit decay_exponent(const RateProfile& profile, FitRange range) {
  profile.validate();
  if (!(range.lo > 0.0) || !(range.hi >= range.lo)) throw InvalidArgument("fit range must satisfy 0 < lo <= hi");
  std::vector<double> xs, ys;
  std::size_t in_range = 0;
  for (std::size_t i = 0; i < profile.epsilons.size(); ++i) {
    double e = profile.epsilons[i];
    if (e < range.lo * (1.0 - 1e-12) || e > range.hi * (1.0 + 1e-12)) continue;
    ++in_range;
    if (profile.deviations[i] <= kDeviationFloor) continue;
    xs.push_back(std::log(e));
    ys.push_back(std::log(profile.deviations[i]));
  }
  if (xs.size() < 5) {
    if (in_range >= 5)
      throw FitError("deviations at the floating-point floor: only " + std::to_string(xs.size()) + " of " +
                     std::to_string(in_range) + " points exceed 1e-13");
    throw FitError("need at least 5 profile points in the fit range, found " + std::to_string(in_range));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  PowerLawFit fit;
  fit.points = xs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------
// ||rho * psi_eps||_1 for mean-zero psi

struct KeylemDiagnostic {
  std::vector<std::pair<double, double>> entries;  ///< (eps, ||rho * psi_eps||_1)
  double decreasing_fraction = 0.0;                ///< share of consecutive decreases
};

inline KeylemDiagnostic keylem_diagnostic(const MollifierSpec& rho, const GridFunction& psi, const EpsilonGrid& grid) {
  grid.validate();
  const GridSpec& spec = psi.spec();
  const double l1 = lp_norm(psi, 1.0);
  if (std::abs(psi.mass()) > 1e-10 * std::max(1.0, l1))
    throw InvalidArgument("psi must have vanishing integral (discrete mean " + std::to_string(psi.mass()) + ")");
  if (rho.dim() != spec.dim()) throw InvalidArgument("kernel and psi differ in dimension");

  KeylemDiagnostic d;
  const auto eps = grid.dyadic_nodes();
  d.entries.resize(eps.size());
  if (l1 == 0.0) {
    for (std::size_t i = 0; i < eps.size(); ++i) d.entries[i] = {eps[i], 0.0};
    return d;
  }

  fft::Spectrum rho_hat;  // rho^ on the grid frequencies (symbol route) or DFT of samples
  const bool symbol = rho.has_symbol();
  if (symbol) {
    rho_hat = defect_on_grid(rho, spec, 1.0);
    for (auto& v : rho_hat) v = 1.0 - v;
  } else {
    rho_hat = rho.sample(spec).spectrum();
  }
  parallel_for(eps.size(), [&](std::size_t i) {
    GridFunction psi_e = rescale_kernel(psi, eps[i], Interpolation::cubic);
    fft::Spectrum ph = psi_e.spectrum();
    double v;
    if (symbol) {
      for (std::size_t k = 0; k < ph.size(); ++k) ph[k] *= rho_hat[k];
      v = lp_norm(fft::inverse_real(ph, spec.dim(), spec.points()), spec.cell_volume(), 1.0);
    } else {
      v = lp_norm(convolve_spectrum(spec, rho_hat, ph), 1.0);
    }
    d.entries[i] = {eps[i], v};
  });
  std::size_t dec = 0;
  for (std::size_t i = 1; i < d.entries.size(); ++i)
    if (d.entries[i].second < d.entries[i - 1].second) ++dec;
  d.decreasing_fraction = d.entries.size() > 1 ? static_cast<double>(dec) / (d.entries.size() - 1) : 0.0;
  return d;
}

}  // namespace besov
