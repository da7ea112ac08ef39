#include "besov/report.hpp"
#include "besov/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace besov;
using namespace besov::verify;

namespace {

MollifierSpec cube(double lo, double hi, std::string id = "cube") {
  return MollifierSpec::analytic(CubeKernel{{lo}, {hi}}, std::move(id));
}

struct SmallFamily {
  GridSpec grid{1, 8.0, 1024};
  FilterBank bank = build_filter_bank(grid);
  FunctionFamily family =
      build_family(default_family_generators(), grid, family_cutoff(FilterBank::nyquist_levels(grid)));
  EpsilonGrid eps{FilterBank::nyquist_levels(grid), 4};
};

const SmallFamily& small_family() {
  static const SmallFamily f;
  return f;
}

}  // namespace

TEST(Family, DefaultGenerators) {
  const auto& f = small_family();
  EXPECT_EQ(f.family.size(), 10u);
  EXPECT_EQ(f.family.members()[3].known_smoothness.value(), 0.8);
}

TEST(Family, RejectsMixedGridsAndBadSmoothness) {
  GridFunction a = GridFunction::zeros(GridSpec(1, 8.0, 256)), b = GridFunction::zeros(GridSpec(1, 8.0, 512));
  EXPECT_THROW(FunctionFamily({{"a", a, {}}, {"b", b, {}}}), InvalidArgument);
  EXPECT_THROW(FunctionFamily({{"a", a, 2.5}}), InvalidArgument);
  EXPECT_THROW(FunctionFamily({}), InvalidArgument);
}

TEST(Mixture, MomentsMatchTargets) {
  GridSpec g(1, 8.0, 8192);
  auto m1 = moment_engineered_mixture(1);
  auto m2 = moment_engineered_mixture(2);
  auto m3 = moment_engineered_mixture(3);
  EXPECT_NEAR(moment_tensor(m1, 1, g).at({0}), 0.25, 1e-12);
  EXPECT_NEAR(moment_tensor(m2, 1, g).at({0}), 0.0, 1e-12);
  EXPECT_NEAR(moment_tensor(m2, 2, g).at({0, 0}), -0.05, 1e-12);
  EXPECT_NEAR(moment_tensor(m3, 2, g).at({0, 0}), 0.0, 1e-12);
  EXPECT_GT(std::abs(moment_tensor(m3, 3, g).at({0, 0, 0})), 1e-3);
  EXPECT_NEAR(m3.nominal_mass(), 1.0, 1e-12);
  EXPECT_THROW(moment_engineered_mixture(4), InvalidArgument);
}

TEST(Battery, IdsAreUnique) {
  auto b = standard_battery();
  EXPECT_EQ(b.size(), 7u);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j < b.size(); ++j) EXPECT_NE(b[i].rho.id(), b[j].rho.id());
  EXPECT_EQ(battery_kernel(b, "shifted_cube").expected_k0, 1);
  EXPECT_THROW(battery_kernel(b, "nope"), InvalidArgument);
}

TEST(RatioReport, ZeroMemberExcluded) {
  GridSpec g(1, 8.0, 256);
  FunctionFamily fam({{"zero", GridFunction::zeros(g), {}}, {"g", synthesize(GaussianFunction{1.0, {}}, g), {}}});
  EpsilonGrid eg(5, 2);
  BesovParams par(0.7, 2.0, 2.0);
  auto rep = ratio_report(fam, deviation_table(fam, cube(-0.5, 0.5), 2.0, eg), par, build_filter_bank(g), eg);
  EXPECT_TRUE(rep.members[0].excluded);
  EXPECT_FALSE(rep.members[1].excluded);
  EXPECT_EQ(rep.min_ratio, rep.max_ratio);
  EXPECT_EQ(rep.spread(), 1.0);
}

TEST(RatioReport, RejectsMismatchedTable) {
  const auto& f = small_family();
  auto table = deviation_table(f.family, cube(-0.5, 0.5), 2.0, f.eps);
  EXPECT_THROW(ratio_report(f.family, table, {0.7, 1.0, 2.0}, f.bank, f.eps), InvalidArgument);
}

TEST(Equivalence, GaussianKernelEquivalent) {
  const auto& f = small_family();
  MollifierSpec rho = MollifierSpec::analytic(GaussianKernel{0.25, {0.0}}, "gaussian");
  auto r = equivalence_experiment(f.family, rho, {0.7, 2.0, 2.0}, f.bank, f.eps);
  EXPECT_TRUE(r.passed) << r.verdict;
  EXPECT_EQ(r.verdict, "equivalent");
  EXPECT_GE(r.ratios.min_ratio, 0.01);
  EXPECT_LE(r.ratios.max_ratio, 100.0);
}

TEST(Equivalence, ShiftedCubeFlaggedAboveOne) {
  const auto& f = small_family();
  auto r = equivalence_experiment(f.family, cube(0.0, 1.0), {1.5, 2.0, 2.0}, f.bank, f.eps);
  EXPECT_FALSE(r.predicted_admissible);
  EXPECT_EQ(r.verdict, "inadmissible");
  EXPECT_TRUE(r.passed);
}

TEST(OneSided, HoldsBelowAndAboveThreshold) {
  const auto& f = small_family();
  for (double s : {0.5, 1.5}) {
    auto r = one_sided_experiment(f.family, cube(0.0, 1.0), {s, 2.0, 2.0}, f.bank, f.eps);
    EXPECT_TRUE(r.passed) << s << " spread " << r.ratios.spread();
  }
}

TEST(Refinement, StableUnderDoubling) {
  const auto& f = small_family();
  GridSpec fine(1, 8.0, 2048);
  const int levels = FilterBank::nyquist_levels(f.grid);
  FunctionFamily fam2 = build_family(default_family_generators(), fine, family_cutoff(levels));
  FilterBank bank2 = build_filter_bank(fine, kDefaultDeltaIn, kDefaultDeltaOut, levels);
  BesovParams par(0.5, 2.0, 2.0);
  MollifierSpec rho = cube(-0.5, 0.5);
  auto a = ratio_report(f.family, deviation_table(f.family, rho, 2.0, f.eps), par, f.bank, f.eps);
  auto b = ratio_report(fam2, deviation_table(fam2, rho, 2.0, f.eps), par, bank2, f.eps);
  auto r = refinement_stability(a, b);
  EXPECT_TRUE(r.passed) << r.max_change;
  EXPECT_EQ(r.changes.size(), 10u);
}

TEST(Refinement, RejectsDifferentFamilies) {
  RatioReport a, b;
  a.members.push_back({});
  EXPECT_THROW(refinement_stability(a, b), InvalidArgument);
}

TEST(Taylor, SlopesMatchK0) {
  GridSpec g(1, 16.0, 4096);
  GridFunction eta = synthesize(GaussianFunction{1.0, {}}, g);
  for (const auto& b : standard_battery()) {
    auto r = taylor_rate_check(b.rho, eta, EpsilonGrid(8, 4));
    EXPECT_TRUE(r.passed) << b.rho.id() << " slope " << r.fit.slope;
    EXPECT_GT(r.constant, 0.0);
  }
}

TEST(Keylem, BatteryDrops) {
  GridSpec g(1, 16.0, 16384);
  GridFunction psi = synthesize(GaussianDerivative{1.0}, g);
  for (const auto& b : standard_battery()) {
    auto c = keylem_check(b.rho, psi, EpsilonGrid(8, 4));
    EXPECT_TRUE(c.passed) << b.rho.id() << " ratio " << c.ratio;
    EXPECT_LT(c.diagnostic.entries.back().second, c.diagnostic.entries.front().second);
  }
}

TEST(Schur, IdentityAndToeplitz) {
  Matrix id(5, std::vector<double>(5, 0.0));
  for (int i = 0; i < 5; ++i) id[i][i] = 1.0;
  for (LpExponent p : {LpExponent(1.0), LpExponent(1.5), LpExponent(2.0), LpExponent::infinity()}) {
    EXPECT_DOUBLE_EQ(schur_bound(id, p).bound, 1.0);
    EXPECT_NEAR(operator_norm_estimate(id, p), 1.0, 1e-12);
  }
  // Symmetric geometric Toeplitz kernel: both sums equal, bound = row sum.
  Matrix t(40, std::vector<double>(40));
  for (int j = 0; j < 40; ++j)
    for (int l = 0; l < 40; ++l) t[j][l] = std::exp2(-std::abs(j - l));
  auto b = schur_bound(t, 2.0);
  EXPECT_DOUBLE_EQ(b.m1, b.m2);
  EXPECT_LE(operator_norm_estimate(t, 2.0), b.bound * (1.0 + 1e-12));
  EXPECT_LT(b.bound, 3.0);
}

TEST(Schur, ExactAtEndpoints) {
  std::mt19937_64 gen(1);
  Matrix k = random_nonnegative_matrix(12, 9, gen);
  auto b1 = schur_bound(k, 1.0), binf = schur_bound(k, LpExponent::infinity());
  EXPECT_NEAR(operator_norm_estimate(k, 1.0), b1.bound, 1e-12 * b1.bound);
  EXPECT_NEAR(operator_norm_estimate(k, LpExponent::infinity()), binf.bound, 1e-12 * binf.bound);
}

TEST(Schur, DominatesRandomMatrices) {
  std::mt19937_64 gen(20240611);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix k = random_nonnegative_matrix(15, 15, gen);
    for (LpExponent p : {LpExponent(1.3), LpExponent(2.0), LpExponent(4.0)})
      EXPECT_LE(operator_norm_estimate(k, p), schur_bound(k, p).bound * (1.0 + 1e-9));
  }
}

TEST(Schur, RejectsNegativeEntries) {
  EXPECT_THROW(schur_bound({{1.0, -0.5}, {0.0, 1.0}}, 2.0), InvalidArgument);
  EXPECT_THROW(schur_bound({}, 2.0), InvalidArgument);
  EXPECT_THROW(schur_bound({{1.0, 0.0}, {1.0}}, 2.0), InvalidArgument);
}

TEST(Schur, ProofKernelFromEtaTest) {
  GridSpec g(1, 16.0, 4096);
  GridFunction eta = synthesize(GaussianFunction{1.0, {}}, g);
  MollifierSpec rho = MollifierSpec::analytic(GaussianKernel{1.0, {0.0}}, "g");
  auto rep = eta_test(rho, eta, 0.7, 16, 4);
  auto alpha = proof_kernel_alphas(rep);
  ASSERT_EQ(alpha.size(), 16u);
  Matrix k = proof_kernel(0.7, alpha, 30);
  EXPECT_DOUBLE_EQ(k[3][3], 1.0);
  EXPECT_DOUBLE_EQ(k[3][5], std::exp2(-1.4));
  EXPECT_DOUBLE_EQ(k[5][3], alpha[1]);
  EXPECT_LE(operator_norm_estimate(k, 2.0), schur_bound(k, 2.0).bound * (1.0 + 1e-9));
  EXPECT_TRUE(std::isfinite(schur_bound(k, 2.0).bound));
}

TEST(Suite, FilterSelectsTaylorOnly) {
  SuiteOptions o;
  o.filter = "taylor";
  auto r = run_suite(o);
  ASSERT_EQ(r.checks.size(), standard_battery().size());
  for (const auto& c : r.checks) {
    EXPECT_EQ(c.group, "taylor");
    EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  }
  EXPECT_TRUE(r.passed());
}

TEST(Suite, InjectedBrokenKernelNamed) {
  SuiteOptions o;
  o.filter = "kernel_hypothesis";
  o.inject_broken_kernel = true;
  auto r = run_suite(o);
  ASSERT_EQ(r.checks.size(), 1u);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.failures(), 1u);
  EXPECT_EQ(r.checks[0].name, "broken_mass_0.9");
  EXPECT_NE(r.checks[0].detail.find("normalized"), std::string::npos);
}

TEST(Suite, EmptyFilterMatchesNothing) {
  SuiteOptions o;
  o.filter = "no_such_group";
  EXPECT_TRUE(run_suite(o).checks.empty());
}

TEST(Report, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) EXPECT_EQ(std::stod(report::number(v)), v);
  EXPECT_EQ(report::number(INFINITY), "\"inf\"");
  EXPECT_EQ(report::number(NAN), "null");
  EXPECT_EQ(report::csv_number(-INFINITY), "-inf");
}

TEST(Report, DumpIsDeterministicAndFlat) {
  report::json j;
  j["b"] = 0.1;
  j["a"] = report::json::array({1.0, 2.5});
  j["c"] = {{"x", true}};
  std::string s = report::dump(j);
  EXPECT_EQ(s, report::dump(j));
  EXPECT_NE(s.find("\"a\": [1, 2.5]"), std::string::npos);
  EXPECT_LT(s.find("\"b\""), s.find("\"a\""));  // insertion order kept
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos);
}

TEST(Report, ProfileCsvRoundTrip) {
  RateProfile p;
  p.epsilons = {1.0, 0.5, 0.25};
  p.deviations = {0.3, 1.0 / 7.0, 1e-17};
  std::stringstream ss;
  report::write_profile_csv(ss, p);
  RateProfile q = report::read_profile_csv(ss);
  EXPECT_EQ(q.epsilons, p.epsilons);
  EXPECT_EQ(q.deviations, p.deviations);
  std::istringstream bad("eps,dev\n1,2\n");
  EXPECT_THROW(report::read_profile_csv(bad), InvalidArgument);
}

TEST(Report, JunitEscapesAndCounts) {
  SuiteResult r;
  r.checks.push_back({"g", "ok", true, "", 0.1});
  r.checks.push_back({"g", "bad", false, "a < b & \"c\"", 0.2});
  std::ostringstream os;
  report::write_junit(os, r);
  std::string x = os.str();
  EXPECT_NE(x.find("tests=\"2\" failures=\"1\""), std::string::npos);
  EXPECT_NE(x.find("a &lt; b &amp; &quot;c&quot;"), std::string::npos);
}
