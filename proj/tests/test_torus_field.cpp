#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "conslaw/torus_field.hpp"

using namespace conslaw;

namespace {

ScalarField random_field(const TorusGrid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(g.cell_count());
  for (double& x : v) x = d(rng);
  return ScalarField(g, std::move(v));
}

double naive_sum(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

}  // namespace

TEST(MakeGrid, OneDimensional) {
  const auto g = make_grid(1, 4);
  EXPECT_EQ(g.cell_count(), 4u);
  EXPECT_EQ(g.cell_size(), 0.25);
}

TEST(MakeGrid, TwoDimensional) {
  const auto g = make_grid(2, 8);
  EXPECT_EQ(g.cell_count(), 64u);
  EXPECT_EQ(g.cell_size(), 0.125);
  EXPECT_EQ(g.cell_count() * g.cell_volume(), 1.0);
}

TEST(MakeGrid, RejectsBadInput) {
  try {
    make_grid(3, 8);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported dimension"), std::string::npos);
  }
  EXPECT_THROW(make_grid(1, 1), InputError);
}

TEST(MakeGrid, PeriodicWrap) {
  const auto g = make_grid(2, 5);
  EXPECT_EQ(g.wrap(-1), 4);
  EXPECT_EQ(g.wrap(5), 0);
  EXPECT_EQ(g.neighbor(g.index(4, 2), 0, 1), g.index(0, 2));
  EXPECT_EQ(g.neighbor(g.index(1, 0), 1, -1), g.index(1, 4));
}

TEST(IntervalType, RequiresOrderedEndpoints) {
  EXPECT_THROW(Interval(1.0, 1.0), InputError);
  EXPECT_EQ(Interval(-0.5, 1.5).length(), 2.0);
}

TEST(ScalarFieldType, RejectsNonFiniteAndWrongLength) {
  const auto g = make_grid(1, 4);
  EXPECT_THROW(ScalarField(g, std::vector<double>{1, 2, 3}), InputError);
  EXPECT_THROW(ScalarField(g, std::vector<double>{1, 2, NAN, 4}), InputError);
}

TEST(Mean, Constant) {
  for (int dim : {1, 2}) EXPECT_EQ(mean(ScalarField(make_grid(dim, 12), 0.7)), 0.7);
}

TEST(Mean, SineSamplesVanish) {
  const auto g = make_grid(1, 256);
  const auto u = sample_midpoint(g, [](double x) { return std::sin(2.0 * std::numbers::pi * x); });
  EXPECT_NEAR(mean(u), 0.0, 1e-15);
}

TEST(Mean, MatchesNaiveOracle) {
  std::mt19937_64 rng(1);
  for (int dim : {1, 2}) {
    const auto g = make_grid(dim, dim == 1 ? 1000 : 40);
    const auto u = random_field(g, rng);
    EXPECT_NEAR(mean(u), naive_sum(u.values()) * g.cell_volume(), 1e-12);
  }
}

TEST(Mean, ShiftInvariantExactly) {
  std::mt19937_64 rng(2);
  const auto g = make_grid(2, 17);
  const auto u = random_field(g, rng);
  for (int s : {1, 5, -3, 16})
    for (int axis : {0, 1}) EXPECT_EQ(mean(shift_cells(u, s, axis)), mean(u));
}

TEST(Mean, Linear) {
  std::mt19937_64 rng(3);
  const auto g = make_grid(1, 300);
  const auto u = random_field(g, rng), v = random_field(g, rng);
  const double a = 1.7, b = -0.4;
  std::vector<double> w(g.cell_count());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = a * u[i] + b * v[i];
  EXPECT_NEAR(mean(ScalarField(g, w)), a * mean(u) + b * mean(v), 1e-12);
}

TEST(LpDistance, Basics) {
  const auto g = make_grid(2, 6);
  std::mt19937_64 rng(4);
  const auto u = random_field(g, rng);
  EXPECT_EQ(lp_distance(u, u, 1.0), 0.0);
  EXPECT_EQ(lp_distance(ScalarField(g, 1.0), ScalarField(g, 0.0), 1.0), 1.0);
  EXPECT_THROW(lp_distance(u, ScalarField(make_grid(2, 7)), 1.0), InputError);
  EXPECT_THROW(lp_distance(u, u, 0.5), InputError);
}

TEST(LpDistance, MatchesNaiveOracle) {
  std::mt19937_64 rng(5);
  const auto g = make_grid(1, 777);
  const auto u = random_field(g, rng), v = random_field(g, rng);
  for (double p : {1.0, 2.0, 3.5}) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.cell_count(); ++i) s += std::pow(std::abs(u[i] - v[i]), p) * g.cell_volume();
    EXPECT_NEAR(lp_distance(u, v, p), std::pow(s, 1.0 / p), 1e-12) << "p=" << p;
  }
}

TEST(LpDistance, TriangleInequality) {
  std::mt19937_64 rng(6);
  const auto g = make_grid(2, 16);
  for (int k = 0; k < 50; ++k) {
    const auto u = random_field(g, rng), v = random_field(g, rng), w = random_field(g, rng);
    for (double p : {1.0, 2.0, 4.0})
      EXPECT_LE(lp_distance(u, w, p), lp_distance(u, v, p) + lp_distance(v, w, p) + 1e-12);
  }
}

TEST(BvSeminorm, ConstantAndIndicator) {
  EXPECT_EQ(bv_seminorm(ScalarField(make_grid(2, 9), 3.0)), 0.0);
  const auto g = make_grid(1, 64);
  const auto u = sample_midpoint(g, [](double x) { return x < 0.5 ? 1.0 : 0.0; });
  EXPECT_EQ(bv_seminorm(u), 2.0);
}

TEST(BvSeminorm, SineMatchesNaiveOracle) {
  const auto g = make_grid(1, 256);
  const auto u = sample_midpoint(g, [](double x) { return std::sin(2.0 * std::numbers::pi * x); });
  std::vector<double> jumps;
  for (int i = 0; i < 256; ++i) jumps.push_back(std::abs(u[g.wrap(i + 1)] - u[i]));
  // Exact reduction equals the correctly rounded naive total.
  EXPECT_EQ(bv_seminorm(u), exact_sum(jumps));
  EXPECT_NEAR(bv_seminorm(u), naive_sum(jumps), 1e-13);
}

TEST(BvSeminorm, ShiftAndSignInvariant) {
  std::mt19937_64 rng(7);
  const auto g = make_grid(2, 11);
  const auto u = random_field(g, rng);
  std::vector<double> neg(u.values().begin(), u.values().end());
  for (double& x : neg) x = -x;
  EXPECT_EQ(bv_seminorm(ScalarField(g, neg)), bv_seminorm(u));
  EXPECT_EQ(bv_seminorm(shift_cells(u, 4, 0)), bv_seminorm(u));
  EXPECT_EQ(bv_seminorm(shift_cells(u, -2, 1)), bv_seminorm(u));
}

TEST(Summation, PairwiseMatchesNaiveAndIsDeterministic) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1, 1);
  for (std::size_t n : {1u, 2u, 3u, 5u, 17u, 1000u}) {
    std::vector<double> xs(n);
    for (double& x : xs) x = d(rng);
    EXPECT_NEAR(pairwise_sum(xs), naive_sum(xs), 1e-13);
    EXPECT_EQ(pairwise_sum(xs), pairwise_sum(xs));
  }
}

TEST(Summation, ExactSumIsPermutationInvariant) {
  std::vector<double> xs{1e16, 1.0, -1e16, 3.0, 1e-3};
  const double s = exact_sum(xs);
  EXPECT_EQ(s, 4.001);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(xs.begin(), xs.end(), rng);
    EXPECT_EQ(exact_sum(xs), s);
  }
}

TEST(FieldCsv, RoundTrip) {
  std::mt19937_64 rng(10);
  for (int dim : {1, 2}) {
    const auto u = random_field(make_grid(dim, 7), rng);
    std::stringstream ss;
    write_field_csv(ss, u);
    const auto v = read_field_csv(ss);
    EXPECT_TRUE(v.grid() == u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(v[i], u[i]);
  }
}

TEST(FieldCsv, HeaderFormat) {
  std::stringstream ss;
  write_field_csv(ss, ScalarField(make_grid(2, 3), 0.5));
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "# 2,3");
  std::getline(ss, line);
  EXPECT_EQ(line, "0,0.5");
}

TEST(FieldCsv, RejectsMalformed) {
  std::stringstream bad("# 1,4\n0,1\n1,2\n");
  EXPECT_THROW(read_field_csv(bad), InputError);
  std::stringstream nohdr("0,1\n");
  EXPECT_THROW(read_field_csv(nohdr), InputError);
}
