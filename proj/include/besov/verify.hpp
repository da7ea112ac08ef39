#pragma once

// Numerical experiments: two-sided and one-sided rate/Besov comparisons over
// a function family, Taylor-rate checks, Schur kernel bounds and the suite
// runner that aggregates them into named PASS/FAIL checks.

#include "besov/error.hpp"
#include "besov/functions.hpp"
#include "besov/grid.hpp"
#include "besov/kernels.hpp"
#include "besov/littlewood_paley.hpp"
#include "besov/rate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace besov::verify {

// ---------------------------------------------------------------------------
// Function family

struct FamilyMember {
  std::string id;
  GridFunction f;
  std::optional<double> known_smoothness;
};

class FunctionFamily {
 public:
  explicit FunctionFamily(std::vector<FamilyMember> members) : members_(std::move(members)) {
    if (members_.empty()) throw InvalidArgument("function family is empty");
    for (const auto& m : members_) {
      if (!(m.f.spec() == members_.front().f.spec()))
        throw InvalidArgument("family member '" + m.id + "' lives on a different grid");
      if (m.known_smoothness && !(*m.known_smoothness > 0.0 && *m.known_smoothness < 2.0))
        throw InvalidArgument("known smoothness of '" + m.id + "' must lie in (0, 2)");
    }
  }

  const std::vector<FamilyMember>& members() const noexcept { return members_; }
  const GridSpec& spec() const noexcept { return members_.front().f.spec(); }
  std::size_t size() const noexcept { return members_.size(); }

 private:
  std::vector<FamilyMember> members_;
};

struct NamedGenerator {
  std::string id;
  FunctionGenerator generator;
};

/// Three Gaussians, three windowed |x|^alpha bumps, four band-limited randoms.
inline std::vector<NamedGenerator> default_family_generators() {
  std::vector<NamedGenerator> g;
  for (double v : {0.25, 0.5, 1.0}) {
    std::ostringstream id;
    id << "gaussian_v" << v;
    g.push_back({id.str(), GaussianFunction{v, {}}});
  }
  for (double a : {0.3, 0.5, 0.7}) {
    std::ostringstream id;
    id << "power_bump_a" << a;
    g.push_back({id.str(), PowerBump{a, 1.0}});
  }
  for (std::uint64_t seed = 1; seed <= 4; ++seed)
    g.push_back({"random_band_" + std::to_string(seed), RandomBand{seed, 6.0, 8, 1.0}});
  return g;
}

/// Samples every generator on `spec`, band-limited at `cutoff` when given.
inline FunctionFamily build_family(const std::vector<NamedGenerator>& gens, const GridSpec& spec,
                                   std::optional<double> cutoff = std::nullopt) {
  std::vector<FamilyMember> members;
  for (const auto& g : gens) members.push_back({g.id, synthesize(g.generator, spec, cutoff), known_smoothness(g.generator)});
  return FunctionFamily(std::move(members));
}

/// Band limit matching a bank with `levels` levels: everything the truncated
/// LP sum sees (|xi| < 2^{levels+1}) is kept exactly.
inline double family_cutoff(int levels) { return std::ldexp(1.0, levels + 1); }

// ---------------------------------------------------------------------------
// Kernel battery

inline constexpr double kMixtureVariance = 0.04;
inline constexpr double kMixtureCenters[3] = {-0.6, 0.1, 0.8};
inline constexpr double kMixtureSolveTolerance = 1e-12;

/// Three Gaussians (variance 0.04, centers -0.6, 0.1, 0.8) whose signed
/// weights zero every moment below k0: rows are M_0 = 1, M_k = 0 for
/// 0 < k < k0, then M_1 = 0.25 (k0 = 1) or M_2 = -0.05 (k0 = 2) to fill
/// the system.
inline MollifierSpec moment_engineered_mixture(int k0) {
  if (k0 < 1 || k0 > 3) throw InvalidArgument("engineered mixtures exist for k0 in {1, 2, 3}");
  const double v = kMixtureVariance;
  auto moment_row = [v](int k) {
    Eigen::RowVector3d r;
    for (int i = 0; i < 3; ++i) {
      double c = kMixtureCenters[i];
      r[i] = k == 0 ? 1.0 : k == 1 ? c : c * c + v;
    }
    return r;
  };
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  for (int k = 0; k < 3; ++k) a.row(k) = moment_row(k);
  b << 1.0, 0.0, 0.0;
  if (k0 == 1) b[1] = 0.25;
  if (k0 == 2) b[2] = -0.05;
  Eigen::Vector3d w = a.fullPivLu().solve(b);
  if ((a * w - b).lpNorm<Eigen::Infinity>() > kMixtureSolveTolerance)
    throw KernelHypothesisError("moment system for the k0=" + std::to_string(k0) + " mixture is ill-conditioned");
  MixtureKernel mix;
  for (int i = 0; i < 3; ++i) mix.components.push_back({w[i], GaussianKernel{v, {kMixtureCenters[i]}}});
  return MollifierSpec(KernelForm{std::move(mix)}, "mixture_k0_" + std::to_string(k0));
}

struct BatteryKernel {
  MollifierSpec rho;
  int expected_k0;
};

/// 1D battery: centered cube, shifted cube, Gaussian, bump, engineered mixtures.
inline std::vector<BatteryKernel> standard_battery() {
  return {
      {MollifierSpec::analytic(CubeKernel{{-0.5}, {0.5}}, "centered_cube"), 2},
      {MollifierSpec::analytic(CubeKernel{{0.0}, {1.0}}, "shifted_cube"), 1},
      {MollifierSpec::analytic(GaussianKernel{0.25, {0.0}}, "gaussian"), 2},
      {MollifierSpec::analytic(BumpKernel{1.0, 1}, "bump"), 2},
      {moment_engineered_mixture(1), 1},
      {moment_engineered_mixture(2), 2},
      {moment_engineered_mixture(3), 3},
  };
}

inline const BatteryKernel& battery_kernel(const std::vector<BatteryKernel>& battery, const std::string& id) {
  for (const auto& b : battery)
    if (b.rho.id() == id) return b;
  throw InvalidArgument("no battery kernel named '" + id + "'");
}

// ---------------------------------------------------------------------------
// Ratio experiments

/// Midpoint deviations of every family member for one kernel.
struct DeviationTable {
  std::string kernel_id;
  LpExponent p = 2.0;
  std::vector<std::vector<double>> deviations;  ///< [member][midpoint node]
};

inline DeviationTable deviation_table(const FunctionFamily& family, const MollifierSpec& rho, LpExponent p,
                                      const EpsilonGrid& grid, MollifyRoute route = MollifyRoute::automatic) {
  grid.validate();
  Mollifier mol(rho, family.spec(), route);
  std::vector<PreparedFunction> fs;
  for (const auto& m : family.members()) fs.emplace_back(m.f);
  auto table = besov::deviation_table(mol, fs, grid.midpoint_nodes(), p);
  DeviationTable t{rho.id(), p, std::vector<std::vector<double>>(family.size())};
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) t.deviations[i].push_back(row[i]);
  return t;
}

struct MemberRatio {
  std::string id;
  double besov_q = 0.0;     ///< ||f||_{B^s_{p,q}}^q from the LP side
  double lp_q = 0.0;        ///< ||f||_p^q
  double functional = 0.0;  ///< rate functional
  double ratio = 0.0;       ///< besov_q / (lp_q + functional)
  bool excluded = false;    ///< both sides vanish
  double lp_last_term_share = 0.0;
  double functional_tail_share = 0.0;
};

struct RatioReport {
  std::string kernel_id;
  BesovParams params;
  std::vector<MemberRatio> members;
  double min_ratio = 0.0;
  double max_ratio = 0.0;

  double spread() const { return min_ratio > 0.0 ? max_ratio / min_ratio : std::numeric_limits<double>::infinity(); }
};

/// Ratios besov^q / (lp^q + functional) per member (q = inf uses sup forms).
inline RatioReport ratio_report(const FunctionFamily& family, const DeviationTable& devs, const BesovParams& params,
                                const FilterBank& bank, const EpsilonGrid& grid) {
  if (devs.deviations.size() != family.size()) throw InvalidArgument("deviation table does not match the family");
  if (!(devs.p == params.p)) throw InvalidArgument("deviation table was computed for a different p");
  RatioReport r;
  r.kernel_id = devs.kernel_id;
  r.params = params;
  r.min_ratio = std::numeric_limits<double>::infinity();
  const bool qinf = params.q.is_infinite();
  auto power = [&](double x) { return qinf ? x : std::pow(x, params.q.value()); };
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& m = family.members()[i];
    NormResult norm = besov_norm(m.f, bank, params);
    FunctionalResult fr = functional_from_midpoints(devs.deviations[i], norm.lp, params, grid);
    MemberRatio mr;
    mr.id = m.id;
    mr.besov_q = power(norm.value);
    mr.lp_q = power(norm.lp);
    mr.functional = fr.value;
    mr.lp_last_term_share = norm.seminorm.last_term_share;
    mr.functional_tail_share = fr.tail_share;
    const double denom = qinf ? std::max(mr.lp_q, mr.functional) : mr.lp_q + mr.functional;
    if (denom == 0.0 && mr.besov_q == 0.0) {
      mr.excluded = true;
    } else {
      mr.ratio = denom > 0.0 ? mr.besov_q / denom : std::numeric_limits<double>::infinity();
      r.min_ratio = std::min(r.min_ratio, mr.ratio);
      r.max_ratio = std::max(r.max_ratio, mr.ratio);
    }
    r.members.push_back(mr);
  }
  if (!std::isfinite(r.min_ratio)) r.min_ratio = 0.0;
  return r;
}

inline constexpr double kEquivalenceCap = 100.0;
inline constexpr double kOneSidedCap = 1e3;
inline constexpr double kRefinementLimit = 0.10;

struct EtaOptions {
  GridSpec grid{1, 16.0, 4096};
  int levels = 16;
  int samples = 4;
  double eta_variance = 1.0;
};

/// The default test function: a unit-variance Gaussian on the eta grid.
inline GridFunction default_eta(const EtaOptions& o, int dim) {
  GridSpec g(dim, o.grid.extent(), dim == 1 ? o.grid.points() : std::min<std::size_t>(o.grid.points(), 256));
  return synthesize(GaussianFunction{o.eta_variance, {}}, g);
}

struct EquivalenceReport {
  RatioReport ratios;
  MomentOrder k0;
  bool predicted_admissible = false;  ///< s < k0
  EtaTestReport eta;
  double cap = kEquivalenceCap;
  bool passed = false;
  std::string verdict;  ///< "equivalent", "inadmissible" or a failure description
};

/// Both sides of the two-sided equivalence over the family, plus the
/// single-test-function criterion for (rho, s). Passes when the outcome
/// matches the moment prediction: an admissible pair must converge in the
/// eta test and keep max/min ratio within the cap; an inadmissible pair must
/// be flagged by the eta test.
inline EquivalenceReport equivalence_experiment(const FunctionFamily& family, const MollifierSpec& rho,
                                                const BesovParams& params, const FilterBank& bank,
                                                const EpsilonGrid& grid, const EtaOptions& eta = {},
                                                double cap = kEquivalenceCap,
                                                const DeviationTable* precomputed = nullptr) {
  EquivalenceReport r;
  r.cap = cap;
  r.ratios = ratio_report(family, precomputed ? *precomputed : deviation_table(family, rho, params.p, grid), params,
                          bank, grid);
  r.k0 = smallest_nonzero_moment(rho);
  r.predicted_admissible = r.k0.infinite || params.s < r.k0.k;
  r.eta = eta_test(rho, default_eta(eta, rho.dim()), params.s, eta.levels, eta.samples);
  if (!r.eta.converged) {
    r.verdict = "inadmissible";
    r.passed = !r.predicted_admissible;
  } else if (r.ratios.spread() > cap) {
    r.verdict = "ratio spread exceeds cap";
    r.passed = false;
  } else {
    r.verdict = "equivalent";
    r.passed = r.predicted_admissible;
  }
  return r;
}

struct OneSidedReport {
  RatioReport ratios;
  double cap = kOneSidedCap;
  bool passed = false;
};

/// besov^q <= C (lp^q + functional) across the family with one C, for any
/// unit-mass kernel: passes when every ratio is finite and max/min <= cap.
inline OneSidedReport one_sided_experiment(const FunctionFamily& family, const MollifierSpec& rho,
                                           const BesovParams& params, const FilterBank& bank, const EpsilonGrid& grid,
                                           double cap = kOneSidedCap, const DeviationTable* precomputed = nullptr) {
  OneSidedReport r;
  r.cap = cap;
  r.ratios = ratio_report(family, precomputed ? *precomputed : deviation_table(family, rho, params.p, grid), params,
                          bank, grid);
  bool finite = true;
  for (const auto& m : r.ratios.members)
    if (!m.excluded && !std::isfinite(m.ratio)) finite = false;
  r.passed = finite && r.ratios.spread() <= cap;
  return r;
}

struct RefinementReport {
  std::vector<std::pair<std::string, double>> changes;  ///< member id, |r_fine / r_coarse - 1|
  double max_change = 0.0;
  bool passed = false;
};

inline RefinementReport refinement_stability(const RatioReport& coarse, const RatioReport& fine,
                                             double limit = kRefinementLimit) {
  if (coarse.members.size() != fine.members.size()) throw InvalidArgument("reports cover different families");
  RefinementReport r;
  for (std::size_t i = 0; i < coarse.members.size(); ++i) {
    const auto& a = coarse.members[i];
    const auto& b = fine.members[i];
    if (a.id != b.id) throw InvalidArgument("reports list members in a different order");
    if (a.excluded || b.excluded) continue;
    double c = std::abs(b.ratio / a.ratio - 1.0);
    r.changes.emplace_back(a.id, c);
    r.max_change = std::max(r.max_change, c);
  }
  r.passed = r.max_change < limit;
  return r;
}

// ---------------------------------------------------------------------------
// Taylor rate

inline constexpr double kTaylorSlopeTolerance = 0.15;

inline FitRange default_taylor_range() { return {std::exp2(-7.0), std::exp2(-2.0)}; }

struct TaylorReport {
  std::string kernel_id;
  RateProfile profile;
  PowerLawFit fit;
  MomentOrder k0;
  double constant = 0.0;  ///< mean of deviation / eps^k0 over the fit range
  bool passed = false;
};

/// Slope of eps -> ||eta - eta*rho_eps||_1 against the smallest non-zero moment.
inline TaylorReport taylor_rate_check(const MollifierSpec& rho, const GridFunction& eta, const EpsilonGrid& grid,
                                      FitRange range = default_taylor_range(),
                                      double tolerance = kTaylorSlopeTolerance) {
  TaylorReport r;
  r.kernel_id = rho.id();
  r.profile = rate_profile(eta, rho, 1.0, grid, "eta");
  r.fit = decay_exponent(r.profile, range);
  r.k0 = smallest_nonzero_moment(rho);
  if (r.k0.infinite) return r;
  double acc = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < r.profile.epsilons.size(); ++i) {
    double e = r.profile.epsilons[i];
    if (e < range.lo * (1.0 - 1e-12) || e > range.hi * (1.0 + 1e-12)) continue;
    acc += r.profile.deviations[i] / std::pow(e, r.k0.k);
    ++count;
  }
  r.constant = count > 0 ? acc / count : 0.0;
  r.passed = std::abs(r.fit.slope - r.k0.k) <= tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Schur bound

using Matrix = std::vector<std::vector<double>>;

struct SchurBound {
  double m1 = 0.0;  ///< max row sum
  double m2 = 0.0;  ///< max column sum
  double bound = 0.0;
};

/// ||T||_{l^p -> l^p} <= M1^{1/p'} M2^{1/p} for (Tx)_j = sum_l K[j][l] x_l.
inline SchurBound schur_bound(const Matrix& k, LpExponent p) {
  if (k.empty() || k.front().empty()) throw InvalidArgument("kernel matrix is empty");
  const std::size_t cols = k.front().size();
  std::vector<double> col(cols, 0.0);
  SchurBound b;
  for (const auto& row : k) {
    if (row.size() != cols) throw InvalidArgument("kernel matrix rows differ in length");
    double sum = 0.0;
    for (std::size_t l = 0; l < cols; ++l) {
      if (!(row[l] >= 0.0) || !std::isfinite(row[l]))
        throw InvalidArgument("Schur bound needs finite non-negative entries (pass |kernel|)");
      sum += row[l];
      col[l] += row[l];
    }
    b.m1 = std::max(b.m1, sum);
  }
  for (double c : col) b.m2 = std::max(b.m2, c);
  if (p.is_infinite()) b.bound = b.m1;
  else if (p.value() == 1.0) b.bound = b.m2;
  else b.bound = std::pow(b.m1, 1.0 - 1.0 / p.value()) * std::pow(b.m2, 1.0 / p.value());
  return b;
}

namespace detail {

inline std::vector<double> apply(const Matrix& k, const std::vector<double>& x) {
  std::vector<double> y(k.size(), 0.0);
  for (std::size_t j = 0; j < k.size(); ++j)
    for (std::size_t l = 0; l < x.size(); ++l) y[j] += k[j][l] * x[l];
  return y;
}

inline std::vector<double> apply_transpose(const Matrix& k, const std::vector<double>& y) {
  std::vector<double> x(k.front().size(), 0.0);
  for (std::size_t j = 0; j < k.size(); ++j)
    for (std::size_t l = 0; l < x.size(); ++l) x[l] += k[j][l] * y[j];
  return x;
}

inline double vec_norm(const std::vector<double>& v, double p) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x) / peak, p);
  return peak * std::pow(s, 1.0 / p);
}

}  // namespace detail

/// Lower estimate of ||K||_{l^p -> l^p} for a non-negative matrix: exact for
/// p = 1 (best basis vector) and p = inf (all-ones vector), otherwise the
/// nonlinear power iteration x <- (K^T (Kx)^{p-1})^{p'-1}.
inline double operator_norm_estimate(const Matrix& k, LpExponent p, int iterations = 500, double tol = 1e-14) {
  schur_bound(k, p);  // validates
  const std::size_t cols = k.front().size();
  if (p.is_infinite()) {
    double best = 0.0;
    for (double v : detail::apply(k, std::vector<double>(cols, 1.0))) best = std::max(best, v);
    return best;
  }
  const double pv = p.value();
  if (pv == 1.0) {
    double best = 0.0;
    for (std::size_t l = 0; l < cols; ++l) {
      double s = 0.0;
      for (const auto& row : k) s += row[l];
      best = std::max(best, s);
    }
    return best;
  }
  const double pc = pv / (pv - 1.0);
  std::vector<double> x(cols, 1.0);
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double nx = detail::vec_norm(x, pv);
    if (nx == 0.0) break;
    for (double& v : x) v /= nx;
    std::vector<double> y = detail::apply(k, x);
    double next = detail::vec_norm(y, pv);
    bool done = std::abs(next - est) <= tol * std::max(1.0, next);
    est = std::max(est, next);
    if (done) break;
    for (double& v : y) v = std::pow(v, pv - 1.0);
    x = detail::apply_transpose(k, y);
    for (double& v : x) v = std::pow(v, pc - 1.0);
  }
  return est;
}

inline Matrix random_nonnegative_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix k(rows, std::vector<double>(cols));
  for (auto& row : k)
    for (double& v : row) {
      // Mix dense and sparse-ish rows so the two sums differ.
      double x = u(gen);
      v = x < 0.3 ? 0.0 : x * x * 4.0;
    }
  return k;
}

/// alpha_k = sup over the sampled eps of the eta-test term at level k, k = 1..J.
inline std::vector<double> proof_kernel_alphas(const EtaTestReport& r) {
  std::vector<double> alpha;
  if (r.terms.empty()) return alpha;
  for (std::size_t j = 1; j < r.terms.front().size(); ++j) {
    double a = 0.0;
    for (const auto& row : r.terms) a = std::max(a, row[j]);
    alpha.push_back(a);
  }
  return alpha;
}

/// kappa(j, l) = 2^{s(j-l)} for l >= j and alpha_{j-l} for l < j (zero
/// beyond the measured alphas), on a size x size block.
inline Matrix proof_kernel(double s, const std::vector<double>& alpha, std::size_t size) {
  Matrix k(size, std::vector<double>(size, 0.0));
  for (std::size_t j = 0; j < size; ++j)
    for (std::size_t l = 0; l < size; ++l) {
      if (l >= j) k[j][l] = std::exp2(s * (static_cast<double>(j) - static_cast<double>(l)));
      else if (j - l <= alpha.size()) k[j][l] = alpha[j - l - 1];
    }
  return k;
}

// ---------------------------------------------------------------------------
// Vanishing diagnostic check

inline constexpr double kKeylemDropLimit = 0.05;

struct KeylemCheck {
  std::string kernel_id;
  KeylemDiagnostic diagnostic;
  double ratio = 0.0;  ///< value at the smallest eps / value at eps = 1
  bool passed = false;
};

inline KeylemCheck keylem_check(const MollifierSpec& rho, const GridFunction& psi, const EpsilonGrid& grid,
                                double limit = kKeylemDropLimit) {
  KeylemCheck c;
  c.kernel_id = rho.id();
  c.diagnostic = keylem_diagnostic(rho, psi, grid);
  const double first = c.diagnostic.entries.front().second;
  const double last = c.diagnostic.entries.back().second;
  c.ratio = first > 0.0 ? last / first : 0.0;
  c.passed = first > 0.0 && c.ratio < limit;
  return c;
}

// ---------------------------------------------------------------------------
// Suite

struct CheckResult {
  std::string group;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SummaryRow {
  std::string kernel_id;
  double s = 0.0;
  MomentOrder k0;
  double slope = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::string verdict;
};

struct SuiteOptions {
  std::size_t points = 1024;  ///< family grid (refinement doubles it)
  double extent = 8.0;
  std::string filter;  ///< run only checks whose group or name contains this
  bool inject_broken_kernel = false;
  std::size_t taylor_points = 4096;
  double taylor_extent = 16.0;
  std::size_t keylem_points = 16384;
  double keylem_extent = 16.0;
  int schur_matrices = 200;
  std::size_t schur_size = 30;
  std::uint64_t seed = 20240611;
};

struct SuiteResult {
  std::vector<CheckResult> checks;
  std::vector<SummaryRow> summary;
  std::vector<TaylorReport> taylor;
  std::vector<EquivalenceReport> equivalence;
  std::vector<OneSidedReport> one_sided;
  double seconds = 0.0;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
  }
};

namespace detail {

inline std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

class SuiteRunner {
 public:
  SuiteRunner(const SuiteOptions& o, SuiteResult& r) : opt_(o), res_(r) {}

  bool selected(const std::string& group, const std::string& name = "") const {
    if (opt_.filter.empty()) return true;
    return group.find(opt_.filter) != std::string::npos ||
           (!name.empty() && (group + "." + name).find(opt_.filter) != std::string::npos);
  }

  /// Runs one check; exceptions become failures carrying the message.
  void check(const std::string& group, const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
    if (!selected(group, name)) return;
    auto t0 = std::chrono::steady_clock::now();
    CheckResult c{group, name, false, "", 0.0};
    try {
      auto [ok, detail] = fn();
      c.passed = ok;
      c.detail = std::move(detail);
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("error: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res_.checks.push_back(std::move(c));
  }

 private:
  const SuiteOptions& opt_;
  SuiteResult& res_;
};

}  // namespace detail

inline SuiteResult run_suite(const SuiteOptions& opt) {
  using detail::fmt;
  const auto t_start = std::chrono::steady_clock::now();
  SuiteResult res;
  detail::SuiteRunner suite(opt, res);
  const auto battery = standard_battery();

  if (opt.inject_broken_kernel)
    suite.check("kernel_hypothesis", "broken_mass_0.9", [] {
      MollifierSpec bad(KernelForm{AnalyticKernel{CubeKernel{{-0.5}, {0.5}}}}, "broken_mass_0.9", 0.9);
      return std::pair{false, "kernel with mass " + fmt(bad.nominal_mass()) + " was accepted"};
    });

  // Taylor rates.
  std::map<std::string, double> slopes;
  if (suite.selected("taylor")) {
    GridSpec g(1, opt.taylor_extent, opt.taylor_points);
    GridFunction eta = synthesize(GaussianFunction{1.0, {}}, g);
    for (const auto& b : battery)
      suite.check("taylor", b.rho.id(), [&] {
        TaylorReport t = taylor_rate_check(b.rho, eta, EpsilonGrid(8, 4));
        slopes[b.rho.id()] = t.fit.slope;
        bool ok = t.passed && !t.k0.infinite && t.k0.k == b.expected_k0;
        std::string d = "slope " + fmt(t.fit.slope) + ", k0 " + t.k0.str() + " (expected " +
                        std::to_string(b.expected_k0) + "), r2 " + fmt(t.fit.r2);
        res.taylor.push_back(std::move(t));
        return std::pair{ok, d};
      });
  }

  // Moments.
  suite.check("moments", "centered_cube_second_moment_quadrature", [] {
    auto rho = MollifierSpec::analytic(CubeKernel{{-0.5}, {0.5}}, "centered_cube");
    double v = moment_tensor(rho, 2, GridSpec(1, 4.0, 4096), MomentMethod::quadrature).at({0, 0});
    return std::pair{std::abs(v - 1.0 / 12.0) <= 1e-6, "M2 = " + fmt(v, 17)};
  });
  suite.check("moments", "centered_box_fractional_s1", [] {
    auto rho = MollifierSpec::analytic(CubeKernel{{-0.5}, {0.5}}, "centered_cube");
    double v = fractional_moment(rho, 1.0, GridSpec(1, 4.0, 4096));
    return std::pair{std::abs(v - 0.25) <= 1e-6, "value " + fmt(v, 17)};
  });
  suite.check("moments", "battery_k0", [&] {
    std::string d;
    bool ok = true;
    for (const auto& b : battery) {
      MomentOrder k0 = smallest_nonzero_moment(b.rho);
      AdmissibilityVerdict v = classify_admissibility(b.rho, analyze_moments(b.rho, GridSpec(1, 8.0, 8192)));
      bool match = !k0.infinite && k0.k == b.expected_k0 && v.upper && *v.upper == b.expected_k0;
      ok = ok && match;
      d += b.rho.id() + "=" + k0.str() + " ";
    }
    return std::pair{ok, d};
  });

  // Cube dichotomy and eta-test agreement across the battery.
  std::map<std::pair<std::string, double>, bool> eta_verdicts;
  if (suite.selected("dichotomy") || suite.selected("admissibility")) {
    EtaOptions eo;
    GridFunction eta1 = default_eta(eo, 1);
    GridFunction eta2 = synthesize(GaussianFunction{2.0, {0.25}}, eo.grid);
    struct Case {
      const char* kernel;
      double s;
      bool converge;
    };
    for (const Case& c : {Case{"centered_cube", 1.5, true}, Case{"shifted_cube", 0.5, true},
                          Case{"shifted_cube", 1.5, false}, Case{"centered_cube", 2.5, false}})
      suite.check("dichotomy", std::string(c.kernel) + "_s" + fmt(c.s), [&] {
        EtaTestReport r = eta_test(battery_kernel(battery, c.kernel).rho, eta1, c.s, eo.levels, eo.samples);
        double worst = *std::max_element(r.tail_shares.begin(), r.tail_shares.end());
        return std::pair{r.converged == c.converge, std::string(r.converged ? "converged" : "diverged") +
                                                        ", max tail share " + fmt(worst)};
      });
    for (const auto& b : battery)
      for (double s : {0.5, 1.5})
        suite.check("admissibility", b.rho.id() + "_s" + fmt(s), [&] {
          bool a = eta_test(b.rho, eta1, s, eo.levels, eo.samples).converged;
          bool a2 = eta_test(b.rho, eta2, s, eo.levels, eo.samples).converged;
          eta_verdicts[{b.rho.id(), s}] = a;
          bool predicted = s < b.expected_k0;
          return std::pair{a == predicted && a == a2, std::string(a ? "converged" : "diverged") + " (second eta " +
                                                          (a2 ? "converged" : "diverged") + "), predicted " +
                                                          (predicted ? "admissible" : "inadmissible")};
        });
  }

  // Vanishing diagnostic.
  if (suite.selected("keylem")) {
    GridSpec g(1, opt.keylem_extent, opt.keylem_points);
    GridFunction psi = synthesize(GaussianDerivative{1.0}, g);
    for (const auto& b : battery)
      suite.check("keylem", b.rho.id(), [&] {
        KeylemCheck k = keylem_check(b.rho, psi, EpsilonGrid(8, 4));
        return std::pair{k.passed, "ratio " + fmt(k.ratio) + ", decreasing fraction " +
                                       fmt(k.diagnostic.decreasing_fraction)};
      });
  }

  // Schur dominance.
  if (suite.selected("schur")) {
    suite.check("schur", "identity", [] {
      Matrix id(10, std::vector<double>(10, 0.0));
      for (std::size_t i = 0; i < 10; ++i) id[i][i] = 1.0;
      bool ok = true;
      for (LpExponent p : {LpExponent(1.0), LpExponent(2.0), LpExponent::infinity()})
        ok = ok && std::abs(schur_bound(id, p).bound - 1.0) < 1e-15;
      return std::pair{ok, std::string("bound 1 for p in {1, 2, inf}")};
    });
    suite.check("schur", "geometric_toeplitz", [] {
      Matrix k(20, std::vector<double>(20));
      for (int j = 0; j < 20; ++j)
        for (int l = 0; l < 20; ++l) k[j][l] = std::exp2(-std::abs(j - l));
      SchurBound b = schur_bound(k, 2.0);
      double est = operator_norm_estimate(k, 2.0);
      return std::pair{std::abs(b.m1 - b.m2) < 1e-14 && std::abs(b.bound - b.m1) < 1e-14 && est <= b.bound * (1 + 1e-6),
                       "bound " + fmt(b.bound, 12) + ", power iteration " + fmt(est, 12)};
    });
    suite.check("schur", "random_dominance", [&] {
      std::mt19937_64 gen(opt.seed);
      double worst = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < opt.schur_matrices; ++i) {
        Matrix k = random_nonnegative_matrix(opt.schur_size, opt.schur_size, gen);
        for (LpExponent p : {LpExponent(1.0), LpExponent(2.0), LpExponent::infinity()}) {
          double b = schur_bound(k, p).bound;
          worst = std::max(worst, operator_norm_estimate(k, p) / b - 1.0);
        }
      }
      return std::pair{worst <= 1e-6, "max (estimate / bound - 1) = " + fmt(worst)};
    });
    suite.check("schur", "proof_kernel_gaussian", [&] {
      EtaOptions eo;
      auto r = eta_test(battery_kernel(battery, "gaussian").rho, default_eta(eo, 1), 0.7, eo.levels, eo.samples);
      auto alpha = proof_kernel_alphas(r);
      Matrix k = proof_kernel(0.7, alpha, 40);
      SchurBound b = schur_bound(k, 2.0);
      double est = operator_norm_estimate(k, 2.0);
      return std::pair{std::isfinite(b.bound) && est <= b.bound * (1 + 1e-6),
                       "M1 " + fmt(b.m1) + ", M2 " + fmt(b.m2) + ", bound " + fmt(b.bound) + ", estimate " + fmt(est)};
    });
  }

  // Ratio experiments on the family, at N and 2N.
  if (suite.selected("equivalence") || suite.selected("one_sided")) {
    GridSpec coarse(1, opt.extent, opt.points);
    GridSpec fine(1, opt.extent, 2 * opt.points);
    const int levels = FilterBank::nyquist_levels(coarse);
    const EpsilonGrid eg(std::max(3, levels), 4);
    const double cutoff = family_cutoff(levels);
    const auto gens = default_family_generators();
    struct Level {
      FunctionFamily family;
      FilterBank bank;
    };
    std::vector<Level> grids;
    for (const GridSpec& g : {coarse, fine})
      grids.push_back({build_family(gens, g, cutoff), build_filter_bank(g, kDefaultDeltaIn, kDefaultDeltaOut, levels)});

    // Deviations depend on (grid, kernel) only; p = 2 throughout.
    std::map<std::pair<std::size_t, std::string>, DeviationTable> cache;
    auto devs = [&](std::size_t level, const MollifierSpec& rho) -> const DeviationTable& {
      auto key = std::pair{level, rho.id()};
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, deviation_table(grids[level].family, rho, 2.0, eg)).first;
      return it->second;
    };
    auto ratios = [&](std::size_t level, const MollifierSpec& rho, const BesovParams& params) {
      return ratio_report(grids[level].family, devs(level, rho), params, grids[level].bank, eg);
    };

    if (suite.selected("one_sided"))
      for (const auto& b : battery)
        for (double s : {0.5, 1.5})
          suite.check("one_sided", b.rho.id() + "_s" + fmt(s), [&] {
            BesovParams params(s, 2.0, 2.0);
            OneSidedReport rep = one_sided_experiment(grids[0].family, b.rho, params, grids[0].bank, eg, kOneSidedCap,
                                                      &devs(0, b.rho));
            RefinementReport ref = refinement_stability(rep.ratios, ratios(1, b.rho, params));
            auto it = slopes.find(b.rho.id());
            auto ev = eta_verdicts.find({b.rho.id(), s});
            res.summary.push_back({b.rho.id(), s, smallest_nonzero_moment(b.rho),
                                   it == slopes.end() ? std::nan("") : it->second, rep.ratios.min_ratio,
                                   rep.ratios.max_ratio,
                                   ev == eta_verdicts.end() ? (s < b.expected_k0 ? "admissible (predicted)"
                                                                                 : "inadmissible (predicted)")
                                                            : (ev->second ? "admissible" : "inadmissible")});
            std::string d = "max/min " + fmt(rep.ratios.spread()) + " (cap " + fmt(rep.cap) + "), refinement change " +
                            fmt(ref.max_change);
            bool ok = rep.passed && ref.passed;
            res.one_sided.push_back(std::move(rep));
            return std::pair{ok, d};
          });

    if (suite.selected("equivalence")) {
      struct Case {
        const char* kernel;
        double s;
      };
      for (const Case& c : {Case{"gaussian", 0.7}, Case{"centered_cube", 0.7}, Case{"shifted_cube", 1.5}})
        suite.check("equivalence", std::string(c.kernel) + "_s" + fmt(c.s), [&] {
          const MollifierSpec& rho = battery_kernel(battery, c.kernel).rho;
          BesovParams params(c.s, 2.0, 2.0);
          EquivalenceReport rep =
              equivalence_experiment(grids[0].family, rho, params, grids[0].bank, eg, {}, kEquivalenceCap, &devs(0, rho));
          std::string d = rep.verdict + ", max/min " + fmt(rep.ratios.spread());
          bool ok = rep.passed;
          if (rep.predicted_admissible) {
            RefinementReport ref = refinement_stability(rep.ratios, ratios(1, rho, params));
            d += ", refinement change " + fmt(ref.max_change);
            ok = ok && ref.passed;
          }
          res.equivalence.push_back(std::move(rep));
          return std::pair{ok, d};
        });
    }
  }

  // Infrastructure oracles.
  if (suite.selected("infrastructure")) {
    suite.check("infrastructure", "fft_vs_direct", [&] {
      std::mt19937_64 gen(opt.seed);
      std::normal_distribution<double> nd;
      double worst = 0.0;
      for (std::size_t n : {16, 32, 64, 128})
        for (int dim : {1, 2}) {
          if (dim == 2 && n > 64) continue;
          GridSpec g(dim, 3.0, n);
          std::vector<double> a(g.size()), b(g.size());
          for (auto& v : a) v = nd(gen);
          for (auto& v : b) v = nd(gen);
          GridFunction fa(g, a), fb(g, b);
          GridFunction x = convolve(fa, fb, ConvolutionMethod::fft);
          GridFunction y = convolve(fa, fb, ConvolutionMethod::direct);
          worst = std::max(worst, lp_norm(x - y, 2.0) / lp_norm(y, 2.0));
        }
      return std::pair{worst <= 1e-10, "max relative difference " + fmt(worst)};
    });
    suite.check("infrastructure", "partition_of_unity", [&] {
      FilterBank bank = build_filter_bank(GridSpec(1, 16.0, 4096));
      std::mt19937_64 gen(opt.seed);
      std::uniform_real_distribution<double> u(0.0, std::ldexp(1.0, bank.levels()));
      double worst = 0.0;
      for (int i = 0; i < 1000; ++i) worst = std::max(worst, std::abs(bank.partition(u(gen)) - 1.0));
      return std::pair{worst <= 1e-12, "max residual " + fmt(worst) + " over J=" + std::to_string(bank.levels())};
    });
    suite.check("infrastructure", "power_law_recovery", [] {
      double worst = 0.0;
      for (double k : {0.5, 1.0, 2.0, 3.0}) {
        RateProfile p;
        p.p = 1.0;
        p.epsilons = EpsilonGrid(8, 4).dyadic_nodes();
        for (double e : p.epsilons) p.deviations.push_back(0.7 * std::pow(e, k));
        worst = std::max(worst, std::abs(decay_exponent(p, {std::exp2(-8.0), 1.0}).slope - k));
      }
      return std::pair{worst <= 1e-10, "max slope error " + fmt(worst)};
    });
  }

  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace besov::verify
