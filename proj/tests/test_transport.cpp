#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "phflow/transport.hpp"
#include "support.hpp"

using namespace phflow;

namespace {

std::vector<Point2> random_diagram(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> out(n);
  for (auto& p : out) {
    const double b = u(rng);
    p = {b, b + u(rng)};
  }
  return out;
}

/// Minimum over all permutations of the mean squared distance (n = m).
double brute_force_cost(const DiagramMeasure& a, const DiagramMeasure& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += squared_distance(a[i], b[perm[i]]);
    best = std::min(best, c / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST(DiagramMeasure, RejectsBelowDiagonal) {
  EXPECT_THROW(DiagramMeasure({{1.0, 0.5}}), Error);
  EXPECT_NO_THROW(DiagramMeasure({{1.0, 1.0}}));
}

TEST(Sinkhorn, SingletonToSingleton) {
  const auto plan = sinkhorn_plan(DiagramMeasure({{0.0, 1.0}}), DiagramMeasure({{0.3, 0.4}}), 1e-3, 10000, 1e-9);
  ASSERT_EQ(plan.rows(), 1u);
  EXPECT_NEAR(plan(0, 0), 1.0, 1e-12);
}

TEST(Sinkhorn, IdenticalTwoPointSets) {
  const DiagramMeasure a({{0.0, 1.0}, {0.5, 2.0}});
  const auto plan = sinkhorn_plan(a, a, 1e-3, 10000, 1e-9);
  EXPECT_NEAR(plan(0, 0), 0.5, 1e-3);
  EXPECT_NEAR(plan(1, 1), 0.5, 1e-3);
  EXPECT_LT(plan(0, 1), 1e-3);
  EXPECT_LT(plan(1, 0), 1e-3);
}

TEST(Sinkhorn, MarginalsFiveBySeven) {
  const DiagramMeasure a(random_diagram(5, 1)), b(random_diagram(7, 2));
  const auto plan = sinkhorn_plan(a, b, 1e-3, 10000, 1e-9);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(plan.row_sum(i), 1.0 / 5, 1e-6);
  for (std::size_t j = 0; j < 7; ++j) EXPECT_NEAR(plan.col_sum(j), 1.0 / 7, 1e-6);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 7; ++j) EXPECT_GE(plan(i, j), 0.0);
}

TEST(Sinkhorn, Deterministic) {
  const DiagramMeasure a(random_diagram(6, 3)), b(random_diagram(4, 4));
  const auto p = sinkhorn_plan(a, b, 1e-3, 10000, 1e-9);
  const auto q = sinkhorn_plan(a, b, SinkhornOptions{});
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(p(i, j), q(i, j));
}

TEST(Sinkhorn, ConvergenceErrorCarriesViolation) {
  const DiagramMeasure a(random_diagram(6, 5)), b(random_diagram(6, 6));
  try {
    sinkhorn_plan(a, b, 1e-3, 1, 1e-15);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::convergence);
    EXPECT_GT(e.marginal_violation(), 0.0);
  }
}

TEST(Sinkhorn, BadArguments) {
  const DiagramMeasure a(random_diagram(3, 5));
  EXPECT_THROW(sinkhorn_plan(a, a, 0.0, 100, 1e-9), Error);
  EXPECT_THROW(sinkhorn_plan(a, DiagramMeasure{}, 1e-3, 100, 1e-9), Error);
}

TEST(Sinkhorn, ApproachesExactCost) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DiagramMeasure a(random_diagram(5, 10 + seed)), b(random_diagram(6, 20 + seed));
    const double exact = exact_plan(a, b).cost(a, b);
    for (double reg : {1e-1, 1e-2, 1e-3}) {
      const double c = sinkhorn_plan(a, b, reg, 10000, 1e-9).cost(a, b);
      EXPECT_GE(c, exact - 1e-9);
      EXPECT_LE(c - exact, 5 * reg * std::log(30.0));
    }
  }
}

TEST(ExactPlan, SinglePairing) {
  const DiagramMeasure a({{0.0, 0.0}}), b({{1.0, 1.0}});
  const auto plan = exact_plan(a, b);
  EXPECT_DOUBLE_EQ(plan(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(plan.cost(a, b), 2.0);
}

TEST(ExactPlan, AntiDiagonal) {
  const DiagramMeasure a({{0.0, 0.0}, {1.0, 1.0}}), b({{1.0, 1.0}, {0.0, 0.0}});
  const auto plan = exact_plan(a, b);
  EXPECT_DOUBLE_EQ(plan(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(plan(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(plan(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(plan.cost(a, b), 0.0);
}

TEST(ExactPlan, MatchesPermutationBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DiagramMeasure a(random_diagram(4, 100 + seed)), b(random_diagram(4, 200 + seed));
    const auto plan = exact_plan(a, b);
    EXPECT_NEAR(plan.cost(a, b), brute_force_cost(a, b), 1e-12);
    // A scaled permutation matrix.
    for (std::size_t i = 0; i < 4; ++i) {
      int nonzero = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        if (plan(i, j) != 0.0) {
          ++nonzero;
          EXPECT_DOUBLE_EQ(plan(i, j), 0.25);
        }
      }
      EXPECT_EQ(nonzero, 1);
    }
  }
}

TEST(ExactPlan, UnequalSizesHaveUniformMarginals) {
  const DiagramMeasure a(random_diagram(4, 1)), b(random_diagram(6, 2));
  const auto plan = exact_plan(a, b);
  EXPECT_LT(plan.marginal_violation(), 1e-12);
}

TEST(ExactPlan, SizeGuard) {
  const DiagramMeasure a(random_diagram(101, 1)), b(random_diagram(100, 2));
  try {
    exact_plan(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::too_large);
  }
}

TEST(Barycenter, IdentityPlan) {
  const DiagramMeasure z(random_diagram(3, 7));
  TransportPlan plan(3, 3);
  for (std::size_t i = 0; i < 3; ++i) plan(i, i) = 1.0 / 3;
  const auto x = barycenter_targets(plan, z);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(x[i], z[i]);
}

TEST(Barycenter, Midpoint) {
  const auto x = barycenter_targets(TransportPlan(1, 2, {0.5, 0.5}), DiagramMeasure({{0, 1}, {0, 3}}));
  EXPECT_DOUBLE_EQ(x[0][0], 0.0);
  EXPECT_DOUBLE_EQ(x[0][1], 2.0);
}

TEST(Barycenter, TwoByThree) {
  const auto x = barycenter_targets(TransportPlan(2, 3, {0.3, 0.2, 0.0, 0.0, 0.1, 0.4}),
                                    DiagramMeasure({{0, 1}, {0, 2}, {0, 4}}));
  EXPECT_NEAR(x[0][1], 1.4, 1e-12);
  EXPECT_NEAR(x[1][1], 3.6, 1e-12);
  EXPECT_EQ(x[0][0], 0.0);
}

TEST(Barycenter, ZeroRowIsDegenerate) {
  try {
    barycenter_targets(TransportPlan(2, 1, {1.0, 0.0}), DiagramMeasure({{0, 1}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_plan);
  }
}

TEST(Barycenter, ColumnPermutationInvariance) {
  const DiagramMeasure z(random_diagram(4, 9));
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  TransportPlan plan(3, 4), permuted(3, 4);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) plan(i, j) = u(rng);
  std::vector<Point2> zp(4);
  for (std::size_t j = 0; j < 4; ++j) {
    zp[j] = z[perm[j]];
    for (std::size_t i = 0; i < 3; ++i) permuted(i, j) = plan(i, perm[j]);
  }
  const auto a = barycenter_targets(plan, z);
  const auto b = barycenter_targets(permuted, DiagramMeasure(zp));
  for (std::size_t i = 0; i < 3; ++i)
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(a[i][k], b[i][k], 1e-14);
}

TEST(Barycenter, ClampsBelowDiagonal) {
  EXPECT_EQ(clamp_to_upper_half({1.0, 0.0}), (Point2{0.5, 0.5}));
  EXPECT_EQ(clamp_to_upper_half({0.0, 1.0}), (Point2{0.0, 1.0}));
}

TEST(McCann, Endpoints) {
  const auto x = random_diagram(3, 1), y = random_diagram(3, 2);
  EXPECT_EQ(mccann_interpolate(x, y, 0.0), x);
  EXPECT_EQ(mccann_interpolate(x, y, 1.0), y);
}

TEST(McCann, Midpoint) {
  const std::vector<Point2> x{{0, 0}}, y{{2, 4}};
  EXPECT_EQ(mccann_interpolate(x, y, 0.5), (std::vector<Point2>{{1, 2}}));
}

TEST(McCann, Errors) {
  const auto x = random_diagram(3, 1), y = random_diagram(2, 2);
  try {
    mccann_interpolate(x, y, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
  EXPECT_THROW(mccann_interpolate(x, x, 1.5), Error);
}

TEST(McCann, GeodesicProperty) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 1 + seed % 6;
    const DiagramMeasure x(random_diagram(n, seed)), z(random_diagram(n, seed + 50));
    const auto x1 = barycenter_targets(exact_plan(x, z), z);
    const double full = w2_distance(x, DiagramMeasure(x1));
    for (double t : {0.25, 0.5, 0.75}) {
      const DiagramMeasure yt(mccann_interpolate(x.points(), x1, t));
      EXPECT_NEAR(w2_distance(x, yt), t * full, 1e-8);
    }
  }
}

TEST(W2, Identity) {
  const DiagramMeasure a(random_diagram(4, 3));
  EXPECT_NEAR(w2_distance(a, a), 0.0, 1e-12);
}

TEST(W2, Singletons) { EXPECT_DOUBLE_EQ(w2_distance(DiagramMeasure({{0, 0}}), DiagramMeasure({{3, 4}})), 5.0); }

TEST(W2, SymmetricTriangleInequality) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DiagramMeasure a(random_diagram(4, seed)), b(random_diagram(4, seed + 10)), c(random_diagram(4, seed + 20));
    EXPECT_NEAR(w2_distance(a, b), w2_distance(b, a), 1e-12);
    EXPECT_LE(w2_distance(a, c), w2_distance(a, b) + w2_distance(b, c) + 1e-12);
  }
}

TEST(SlicedW2, IdentityIsZero) {
  const auto a = random_diagram(6, 1);
  const auto s = sliced_w2(a, a, 32, 7);
  EXPECT_EQ(s.value, 0.0);
  for (const auto& g : s.grad_a) EXPECT_EQ(g, (Point2{0.0, 0.0}));
}

TEST(SlicedW2, SinglePointExpectation) {
  const std::vector<Point2> a{{1.0, 0.0}}, b{{0.0, 0.0}};
  EXPECT_NEAR(sliced_w2(a, b, 20000, 3).value, 0.5, 0.01);
}

TEST(SlicedW2, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = random_diagram(10, seed), b = random_diagram(10, seed + 30);
    const auto dirs = sliced_directions(16, seed);
    const auto s = sliced_w2(a, b, dirs);
    std::vector<double> flat, analytic;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (int k = 0; k < 2; ++k) {
        flat.push_back(a[i][k]);
        analytic.push_back(s.grad_a[i][k]);
      }
    auto f = [&](const std::vector<double>& x) {
      std::vector<Point2> pts(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) pts[i] = {x[2 * i], x[2 * i + 1]};
      return sliced_w2(pts, b, dirs).value;
    };
    EXPECT_LT(testing_support::relative_error(analytic, testing_support::central_difference(f, flat, 1e-7)), 1e-4);
  }
}

TEST(SlicedW2, TranslationInvariantAndNonnegative) {
  auto a = random_diagram(5, 1), b = random_diagram(5, 2);
  const double v = sliced_w2(a, b, 64, 3).value;
  EXPECT_GE(v, 0.0);
  for (auto* pts : {&a, &b})
    for (auto& p : *pts) {
      p[0] += 0.7;
      p[1] -= 1.3;
    }
  EXPECT_NEAR(sliced_w2(a, b, 64, 3).value, v, 1e-12);
}

TEST(SlicedW2, Deterministic) {
  const auto a = random_diagram(5, 1), b = random_diagram(5, 2);
  EXPECT_EQ(sliced_w2(a, b, 64, 3).value, sliced_w2(a, b, 64, 3).value);
}

TEST(SlicedW2, CardinalityMismatch) {
  try {
    sliced_w2(random_diagram(3, 1), random_diagram(4, 1), 8, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
}

TEST(MinCostAssignment, RectangularBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t rows = 3, cols = 5;
    std::vector<double> cost(rows * cols);
    for (double& c : cost) c = u(rng);
    const auto match = min_cost_assignment(rows, cols, cost);
    double got = 0.0;
    std::vector<int> used(cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      ASSERT_GE(match[r], 0);
      EXPECT_EQ(used[static_cast<std::size_t>(match[r])]++, 0);
      got += cost[r * cols + static_cast<std::size_t>(match[r])];
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < cols; ++a)
      for (std::size_t b = 0; b < cols; ++b)
        for (std::size_t c = 0; c < cols; ++c)
          if (a != b && b != c && a != c) best = std::min(best, cost[a] + cost[cols + b] + cost[2 * cols + c]);
    EXPECT_NEAR(got, best, 1e-12);
  }
}
