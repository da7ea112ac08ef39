#include "besov/functions.hpp"
#include "besov/grid.hpp"
#include "besov/io.hpp"
#include "besov/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace besov;

namespace {

GridFunction random_function(const GridSpec& spec, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(spec.size());
  for (auto& x : v) x = d(gen);
  return {spec, v};
}

double max_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

MollifierSpec cube(double lo, double hi) { return MollifierSpec::analytic(CubeKernel{{lo}, {hi}}, "cube"); }

}  // namespace

TEST(GridSpec, RejectsBadShapes) {
  EXPECT_THROW(GridSpec(3, 1.0, 64), InvalidArgument);
  EXPECT_THROW(GridSpec(1, 0.0, 64), InvalidArgument);
  EXPECT_THROW(GridSpec(1, 1.0, 100), InvalidArgument);
  EXPECT_THROW(GridSpec(1, 1.0, 8), InvalidArgument);
  EXPECT_NO_THROW(GridSpec(2, 1.0, 16));
}

TEST(GridSpec, OriginAndFrequencies) {
  GridSpec g(1, 4.0, 64);
  EXPECT_DOUBLE_EQ(g.coordinate(g.origin_index()), 0.0);
  EXPECT_DOUBLE_EQ(g.coordinate(0), -4.0);
  EXPECT_DOUBLE_EQ(g.frequency(1), std::numbers::pi / 4.0);
  EXPECT_DOUBLE_EQ(g.frequency(63), -std::numbers::pi / 4.0);
  EXPECT_DOUBLE_EQ(std::abs(g.frequency(32)), g.nyquist());
}

TEST(GridFunction, RejectsWrongLengthAndNonFinite) {
  GridSpec g(1, 1.0, 16);
  EXPECT_THROW(GridFunction(g, std::vector<double>(15, 0.0)), InvalidArgument);
  std::vector<double> v(16, 0.0);
  v[3] = std::nan("");
  EXPECT_THROW(GridFunction(g, v), InvalidArgument);
  v[3] = INFINITY;
  EXPECT_THROW(GridFunction(g, v), InvalidArgument);
}

TEST(LpNorm, ConstantOnUnitBox) {
  for (int dim : {1, 2}) {
    GridSpec g(dim, 1.0, 64);
    GridFunction one(g, std::vector<double>(g.size(), 1.0));
    EXPECT_NEAR(lp_norm(one, 2.0), std::pow(2.0, dim / 2.0), 1e-12);
    EXPECT_NEAR(lp_norm(one, 1.0), std::pow(2.0, dim), 1e-12);
    EXPECT_DOUBLE_EQ(lp_norm(one, LpExponent::infinity()), 1.0);
  }
}

TEST(LpNorm, ZeroFunction) {
  GridFunction z = GridFunction::zeros(GridSpec(2, 3.0, 32));
  for (LpExponent p : {LpExponent(1.0), LpExponent(2.0), LpExponent(3.5), LpExponent::infinity()})
    EXPECT_EQ(lp_norm(z, p), 0.0);
}

TEST(LpNorm, GaussianL1) {
  GridSpec g(1, 16.0, 4096);
  GridFunction f = GridFunction::sample(g, [](Point x) { return std::exp(-x[0] * x[0] / 2.0); });
  EXPECT_NEAR(lp_norm(f, 1.0), std::sqrt(2.0 * std::numbers::pi), 1e-8);
}

TEST(LpExponent, RejectsBelowOne) {
  EXPECT_THROW(LpExponent(0.5), InvalidArgument);
  EXPECT_TRUE(LpExponent::infinity().is_infinite());
}

TEST(Convolve, DeltaIsIdentity) {
  for (int dim : {1, 2}) {
    GridSpec g(dim, 2.0, 32);
    GridFunction f = random_function(g, 7);
    std::vector<double> d(g.size(), 0.0);
    std::size_t o = g.origin_index();
    d[dim == 1 ? o : o * g.points() + o] = 1.0 / g.cell_volume();
    GridFunction delta(g, d);
    for (auto m : {ConvolutionMethod::fft, ConvolutionMethod::direct})
      EXPECT_LT(max_diff(convolve(f, delta, m), f), 1e-12);
  }
}

TEST(Convolve, BoxesGiveHat) {
  GridSpec g(1, 4.0, 1024);
  auto box = [](Point x) { return std::abs(x[0]) < 0.5 ? 1.0 : (std::abs(x[0]) == 0.5 ? 0.5 : 0.0); };
  GridFunction b = GridFunction::sample(g, box);
  GridFunction hat = convolve(b, b);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.coordinate(i);
    err = std::max(err, std::abs(hat[i] - std::max(0.0, 1.0 - std::abs(x))));
  }
  // Trapezoid corners cost h/2 at the kinks only.
  EXPECT_LE(err, 0.5 * g.spacing() + 1e-12);
  EXPECT_NEAR(hat[g.origin_index()], 1.0, g.spacing());
}

TEST(Convolve, FftMatchesDirectOnRandom64) {
  GridSpec g(1, 1.0, 64);
  GridFunction f = random_function(g, 1), k = random_function(g, 2);
  GridFunction a = convolve(f, k, ConvolutionMethod::fft), b = convolve(f, k, ConvolutionMethod::direct);
  EXPECT_LT(max_diff(a, b), 1e-10 * b.max_abs());
}

TEST(Convolve, FftMatchesDirectUpTo128) {
  for (int dim : {1, 2})
    for (std::size_t n : {16u, 32u, 64u, 128u}) {
      if (dim == 2 && n > 64) continue;
      GridSpec g(dim, 1.5, n);
      GridFunction f = random_function(g, 3 + n), k = random_function(g, 5 + n);
      GridFunction a = convolve(f, k, ConvolutionMethod::fft), b = convolve(f, k, ConvolutionMethod::direct);
      EXPECT_LT(max_diff(a, b), 1e-10 * b.max_abs()) << dim << "D N=" << n;
    }
}

TEST(Convolve, Commutes) {
  GridSpec g(2, 2.0, 32);
  GridFunction f = random_function(g, 11), k = random_function(g, 12);
  GridFunction a = convolve(f, k), b = convolve(k, f);
  EXPECT_LT(max_diff(a, b), 1e-12 * a.max_abs());
}

TEST(Convolve, YoungInequality) {
  GridSpec g(1, 8.0, 512);
  GridFunction rho = cube(-0.5, 0.5).sample(g);
  for (unsigned seed = 0; seed < 5; ++seed) {
    GridFunction f = random_function(g, seed);
    GridFunction c = convolve(f, rho);
    for (LpExponent p : {LpExponent(1.0), LpExponent(2.0), LpExponent::infinity()})
      EXPECT_LE(lp_norm(c, p), lp_norm(f, p) * lp_norm(rho, 1.0) * (1.0 + 1e-9));
  }
}

TEST(Convolve, RejectsMismatchedGrids) {
  EXPECT_THROW(convolve(GridFunction::zeros(GridSpec(1, 1.0, 16)), GridFunction::zeros(GridSpec(1, 2.0, 16))),
               InvalidArgument);
}

TEST(RescaleKernel, BoxHalvesWidthKeepsMass) {
  GridSpec g(1, 2.0, 1024);
  GridFunction box = cube(-0.5, 0.5).sample(g);
  GridFunction half = rescale_kernel(box, 0.5, Interpolation::nearest);
  EXPECT_NEAR(half.mass(), 1.0, 1e-3);
  EXPECT_NEAR(half[g.origin_index()], 2.0, 1e-12);
  EXPECT_EQ(half[g.origin_index() + 200], 0.0);  // x = 0.39 lies outside (-1/4, 1/4)
}

TEST(RescaleKernel, GaussianQuarterScale) {
  GridSpec g(1, 16.0, 8192);
  MollifierSpec gauss = MollifierSpec::analytic(GaussianKernel{1.0, {0.0}}, "g");
  GridFunction r = rescale_kernel(gauss.sample(g), 0.25, Interpolation::cubic);
  EXPECT_NEAR(r.mass(), 1.0, 1e-3);
  double m2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) m2 += g.coordinate(i) * g.coordinate(i) * r[i] * g.spacing();
  EXPECT_NEAR(m2, 1.0 / 16.0, 1e-4);
}

TEST(RescaleKernel, IdentityAndErrors) {
  GridSpec g(1, 2.0, 256);
  GridFunction box = cube(-0.5, 0.5).sample(g);
  GridFunction same = rescale_kernel(box, 1.0);
  EXPECT_EQ(max_diff(same, box), 0.0);
  EXPECT_THROW(rescale_kernel(box, 0.0), InvalidArgument);
  EXPECT_THROW(rescale_kernel(box, 1.5), InvalidArgument);
  EXPECT_THROW(rescale_kernel(box, 1.0 / 128.0), ResolutionError);
}

TEST(KernelSampling, CenteredCubeMass) {
  for (int dim : {1, 2}) {
    GridSpec g(dim, 2.0, dim == 1 ? 4096 : 256);
    std::vector<double> lo(dim, -0.5), hi(dim, 0.5);
    GridFunction s = MollifierSpec::analytic(CubeKernel{lo, hi}, "c").sample(g);
    EXPECT_NEAR(s.mass(), 1.0, 1e-12);
  }
}

TEST(KernelSampling, ShiftedCubeFirstMoment) {
  GridSpec g(2, 2.0, 512);
  GridFunction s = MollifierSpec::analytic(CubeKernel{{0.0, 0.0}, {1.0, 1.0}}, "c").sample(g);
  double mass = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Point y = g.point(i);
    mass += s[i] * g.cell_volume();
    m1 += y[0] * s[i] * g.cell_volume();
    m2 += y[1] * s[i] * g.cell_volume();
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(m1, 0.5, 1e-6);
  EXPECT_NEAR(m2, 0.5, 1e-6);
}

TEST(KernelSampling, TruncatedGaussianMass) {
  GridSpec g(1, 16.0, 8192);
  GridFunction s = MollifierSpec::analytic(GaussianKernel{1.0, {0.0}}, "g").sample(g);
  EXPECT_NEAR(s.mass(), 1.0, 1e-10);
}

TEST(Bgf, RoundTrip) {
  for (int dim : {1, 2}) {
    GridSpec g(dim, 3.5, 32);
    GridFunction f = random_function(g, 99);
    GridFunction back = io::decode_bgf(io::encode_bgf(f));
    EXPECT_TRUE(back.spec() == g);
    EXPECT_EQ(max_diff(back, f), 0.0);
  }
}

TEST(Bgf, HeaderLayout) {
  GridFunction f = GridFunction::zeros(GridSpec(1, 2.0, 16));
  auto bytes = io::encode_bgf(f);
  ASSERT_EQ(bytes.size(), 16u + 4 + 4 + 8 + 16 * 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "BGF1");
}

TEST(Bgf, RejectsCorruptInput) {
  auto bytes = io::encode_bgf(GridFunction::zeros(GridSpec(1, 2.0, 16)));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(io::decode_bgf(bad_magic), InvalidArgument);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 8);
  EXPECT_THROW(io::decode_bgf(truncated), InvalidArgument);
}

TEST(Csv, OneAndTwoDimensional) {
  std::istringstream one("1\n2\n3\n4\n5\n6\n7\n8\n9\n10\n11\n12\n13\n14\n15\n16\n");
  GridFunction f = io::parse_csv(one, 2.0);
  EXPECT_EQ(f.spec().dim(), 1);
  EXPECT_EQ(f[15], 16.0);
  std::ostringstream two;
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) two << r * 16 + c << (c == 15 ? "\n" : ",");
  std::istringstream in(two.str());
  GridFunction g = io::parse_csv(in, 1.0);
  EXPECT_EQ(g.spec().dim(), 2);
  EXPECT_EQ(g[17], 17.0);
}

TEST(Csv, RejectsNonPowerOfTwo) {
  std::istringstream in("1\n2\n3\n");
  EXPECT_THROW(io::parse_csv(in, 1.0), InvalidArgument);
}

TEST(Synthesize, BandLimitedMatchesAcrossResolutions) {
  PowerBump gen{0.3, 1.0};
  GridSpec coarse(1, 8.0, 1024), fine(1, 8.0, 2048);
  GridFunction a = synthesize(gen, coarse, 64.0), b = synthesize(gen, fine, 64.0);
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[2 * i]));
  EXPECT_LT(err, 1e-12);
}

TEST(Synthesize, UnresolvedCutoffIsResolutionError) {
  GridSpec g(1, 8.0, 256);
  EXPECT_THROW(synthesize(GaussianFunction{}, g, g.nyquist()), ResolutionError);
}
