#include "besov/fft.hpp"
#include "besov/functions.hpp"
#include "besov/littlewood_paley.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace besov;

namespace {

constexpr double kPi = std::numbers::pi;

// L = 2 pi makes every integer angular frequency periodic on the grid.
GridSpec torus(int dim = 1, std::size_t n = 256) { return GridSpec(dim, 2.0 * kPi, n); }

GridFunction cosine(const GridSpec& g, double w) {
  return GridFunction::sample(g, [w](Point x) { return std::cos(w * x[0]); });
}

double l2(const GridFunction& f) { return lp_norm(f, 2.0); }

}  // namespace

TEST(FilterBank, ZetaFlatRegions) {
  FilterBank bank = build_filter_bank(torus());
  EXPECT_EQ(bank.zeta(0.0), 1.0);
  EXPECT_EQ(bank.zeta(1.1), 1.0);
  EXPECT_EQ(bank.zeta(1.9), 0.0);
  EXPECT_EQ(bank.zeta(3.0), 0.0);
  for (double r = 0.0; r < 3.0; r += 0.01) {
    EXPECT_GE(bank.zeta(r), 0.0);
    EXPECT_LE(bank.zeta(r), 1.0);
  }
}

TEST(FilterBank, PhiSupportAndPsi) {
  FilterBank bank = build_filter_bank(torus());
  EXPECT_EQ(bank.phi(0.5), 0.0);
  EXPECT_EQ(bank.phi(1.0), 0.0);
  EXPECT_EQ(bank.phi(4.0), 0.0);
  EXPECT_GT(bank.phi(2.0), 0.0);
  EXPECT_EQ(FilterBank::psi(0.0), 0.0);
  for (double r = 1.0; r <= 4.0; r += 0.01) {
    if (bank.phi(r) > 0.0) EXPECT_EQ(FilterBank::psi(r), 1.0) << r;
  }
}

TEST(FilterBank, PartitionOfUnityAtRandomFrequencies) {
  FilterBank bank = build_filter_bank(torus());
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, std::ldexp(1.0, bank.levels()));
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) worst = std::max(worst, std::abs(bank.partition(u(gen)) - 1.0));
  EXPECT_LT(worst, 1e-12);
}

TEST(FilterBank, LevelsFromNyquist) {
  GridSpec g = torus(1, 256);
  FilterBank bank = build_filter_bank(g);
  EXPECT_EQ(bank.levels(), 4);
  EXPECT_LE(std::ldexp(4.0, bank.levels() - 1), g.nyquist());
}

TEST(FilterBank, RejectsBadParameters) {
  EXPECT_THROW(build_filter_bank(torus(), 0.5, 0.6), InvalidArgument);
  EXPECT_THROW(build_filter_bank(torus(), 0.0, 0.1), InvalidArgument);
  EXPECT_THROW(build_filter_bank(GridSpec(1, 100.0, 16)), ResolutionError);
}

TEST(LpDecompose, ConstantLivesInBandZero) {
  GridSpec g = torus();
  GridFunction f(g, std::vector<double>(g.size(), 3.0));
  auto d = lp_decompose(f, build_filter_bank(g));
  EXPECT_LT((d.pieces[0] - f).max_abs(), 1e-12);
  for (std::size_t j = 1; j < d.pieces.size(); ++j) EXPECT_LT(d.pieces[j].max_abs(), 1e-12);
}

TEST(LpDecompose, LowFrequencyLivesInBandZero) {
  GridSpec g = torus();
  GridFunction f = cosine(g, 0.5);
  auto d = lp_decompose(f, build_filter_bank(g));
  EXPECT_LT((d.pieces[0] - f).max_abs(), 1e-12);
  for (std::size_t j = 1; j < d.pieces.size(); ++j) EXPECT_LT(d.pieces[j].max_abs(), 1e-12);
}

TEST(LpDecompose, CosineSplitsOverAdjacentBands) {
  GridSpec g = torus();
  auto d = lp_decompose(cosine(g, 3.0), build_filter_bank(g));
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < d.pieces.size(); ++j)
    if (d.pieces[j].max_abs() > 1e-12) active.push_back(j);
  ASSERT_LE(active.size(), 2u);
  ASSERT_GE(active.size(), 1u);
  if (active.size() == 2) EXPECT_EQ(active[1], active[0] + 1);
  for (std::size_t j : active) EXPECT_TRUE(j == 1 || j == 2);
}

TEST(LpDecompose, PiecesHaveAnnulusSupport) {
  GridSpec g = torus(1, 512);
  std::mt19937 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(gen);
  FilterBank bank = build_filter_bank(g);
  auto d = lp_decompose(GridFunction(g, v), bank);
  for (std::size_t j = 1; j < d.pieces.size(); ++j) {
    fft::Spectrum s = d.pieces[j].spectrum();
    const double lo = std::ldexp(1.0, static_cast<int>(j) - 1), hi = std::ldexp(4.0, static_cast<int>(j) - 1);
    for (std::size_t k = 0; k < g.size(); ++k) {
      double r = std::abs(g.frequency(k));
      if (r <= lo || r >= hi) EXPECT_LT(std::abs(s[k]), 1e-9) << "j=" << j << " r=" << r;
    }
  }
}

TEST(LpDecompose, PiecesReconstructBandLimitedProjection) {
  GridSpec g = torus(2, 128);
  std::mt19937 gen(4);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(gen);
  GridFunction f(g, v);
  FilterBank bank = build_filter_bank(g);
  auto d = lp_decompose(f, bank);
  std::vector<double> sum(g.size(), 0.0);
  for (const auto& p : d.pieces)
    for (std::size_t i = 0; i < g.size(); ++i) sum[i] += p[i];
  // Telescoping: the pieces add up to f filtered by zeta(|xi| / 2^J).
  const double top = std::ldexp(1.0, bank.levels());
  fft::Spectrum s = f.spectrum();
  for (std::size_t k = 0; k < g.size(); ++k) {
    Point w = g.frequency_vector(k);
    s[k] *= bank.zeta(std::hypot(w[0], w[1]) / top);
  }
  GridFunction proj(g, fft::inverse_real(s, 2, g.points()));
  EXPECT_LT(l2(GridFunction(g, sum) - proj), 1e-10 * l2(proj));
}

TEST(LpDecompose, RejectsOtherGrid) {
  FilterBank bank = build_filter_bank(torus(1, 256));
  EXPECT_THROW(lp_decompose(GridFunction::zeros(torus(1, 512)), bank), InvalidArgument);
}

TEST(BesovSeminorm, ZeroFunction) {
  GridSpec g = torus();
  FilterBank bank = build_filter_bank(g);
  EXPECT_EQ(besov_seminorm(GridFunction::zeros(g), bank, {1.0, 2.0, 2.0}).value, 0.0);
  EXPECT_EQ(besov_norm(GridFunction::zeros(g), bank, {1.0, 2.0, 2.0}).value, 0.0);
}

TEST(BesovSeminorm, SingleBandFunction) {
  // cos(8x) sits where the third band symbol equals one and all others vanish.
  GridSpec g = torus();
  FilterBank bank = build_filter_bank(g);
  GridFunction f = cosine(g, 8.0);
  auto d = lp_decompose(f, bank);
  EXPECT_LT((d.pieces[3] - f).max_abs(), 1e-12);
  double value = besov_seminorm(f, bank, {1.0, 2.0, 2.0}).value;
  EXPECT_NEAR(value, 8.0 * l2(f), 1e-8 * value);
}

TEST(BesovSeminorm, Homogeneous) {
  GridSpec g = torus();
  FilterBank bank = build_filter_bank(g);
  GridFunction f = synthesize(GaussianFunction{0.5, {}}, g);
  for (LpExponent q : {LpExponent(1.0), LpExponent(2.0), LpExponent::infinity()}) {
    BesovParams par(0.8, 2.0, q);
    EXPECT_NEAR(besov_seminorm(2.0 * f, bank, par).value, 2.0 * besov_seminorm(f, bank, par).value, 1e-12);
  }
}

TEST(BesovSeminorm, NondecreasingInS) {
  GridSpec g = torus(1, 1024);
  FilterBank bank = build_filter_bank(g);
  GridFunction f = synthesize(PowerBump{0.5, 1.0}, g);
  double prev = 0.0;
  for (double s : {0.3, 0.7, 1.1, 1.9}) {
    double v = besov_seminorm(f, bank, {s, 2.0, 2.0}).value;
    EXPECT_GE(v, prev) << s;
    prev = v;
  }
}

TEST(BesovNorm, BandZeroOnlyReducesToLp) {
  GridSpec g = torus();
  FilterBank bank = build_filter_bank(g);
  GridFunction f = cosine(g, 0.5);
  for (LpExponent q : {LpExponent(1.0), LpExponent(2.0), LpExponent::infinity()}) {
    BesovParams par(1.0, 2.0, q);
    NormResult r = besov_norm(f, bank, par);
    EXPECT_NEAR(r.seminorm.value, l2(f), 1e-12);  // only j = 0 contributes 2^0 ||f_0||
    EXPECT_NEAR(r.value, combine_lq(l2(f), l2(f), q), 1e-12);
  }
}

TEST(BesovNorm, TwoBanksAgreeUpToConstant) {
  GridSpec g(1, 8.0, 1024);
  FilterBank a = build_filter_bank(g), b = build_filter_bank(g, 0.25, 0.3);
  std::vector<FunctionGenerator> family{
      GaussianFunction{0.25, {}}, GaussianFunction{1.0, {}}, GaussianFunction{0.5, {0.5}},
      PowerBump{0.3, 1.0},        PowerBump{0.7, 1.0},       RandomBand{1, 6.0, 8, 1.0},
      RandomBand{2, 6.0, 8, 1.0}, RandomBand{3, 6.0, 8, 1.0}, Lacunary{0.5, 16.0, 1.0},
      GaussianDerivative{1.0}};
  BesovParams par(0.7, 2.0, 2.0);
  double lo = INFINITY, hi = 0.0;
  for (const auto& gen : family) {
    GridFunction f = synthesize(gen, g);
    double r = besov_norm(f, a, par).value / besov_norm(f, b, par).value;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_GE(lo, 0.5);
  EXPECT_LE(hi, 2.0);
  EXPECT_LE(hi / lo, 4.0);
}

TEST(BesovNorm, SeminormConvergenceFlag) {
  GridSpec g(1, 8.0, 1024);
  FilterBank bank = build_filter_bank(g);
  EXPECT_TRUE(besov_seminorm(synthesize(GaussianFunction{1.0, {}}, g), bank, {0.7, 2.0, 2.0}).converged);
  std::mt19937 gen(9);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(gen);
  EXPECT_FALSE(besov_seminorm(GridFunction(g, v), bank, {1.5, 2.0, 2.0}).converged);
}
