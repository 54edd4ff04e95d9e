#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles/betti_oracle.hpp"
#include "phflow/persistence.hpp"
#include "support.hpp"

using namespace phflow;
using testing_support::random_cloud;
using testing_support::sorted_pairs;

namespace {

using Pairs = std::vector<std::pair<double, double>>;

FilteredComplex unit_square() {
  return build_rips(PointCloud::planar({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 2, 2.0);
}

}  // namespace

TEST(Reduction, SingleVertex) {
  const FilteredComplex c(1, {Simplex::vertex(0)}, {0.0});
  for (const auto& pairing : {reduce_boundary_matrix(c), reduce_coboundary_matrix(c)}) {
    EXPECT_TRUE(pairing.pairs.empty());
    EXPECT_EQ(pairing.essential, (std::vector<Index>{0}));
  }
}

TEST(Reduction, TwoVerticesOneEdge) {
  const FilteredComplex c(2, {Simplex::vertex(0), Simplex::vertex(1), Simplex::edge(0, 1)}, {0.0, 0.0, 1.0});
  const auto pairing = reduce_boundary_matrix(c);
  ASSERT_EQ(pairing.pairs.size(), 1u);
  EXPECT_EQ(c.at_rank(pairing.pairs[0].first), c.vertex_id(1));
  EXPECT_EQ(c.at_rank(pairing.pairs[0].second), c.edge_id(0, 1));
  EXPECT_EQ(pairing.essential.size(), 1u);
}

TEST(Reduction, UnitSquareWithDiagonals) {
  const auto c = unit_square();
  ASSERT_EQ(c.size(), 14u);
  const auto h1 = extract_diagram(reduce_boundary_matrix(c), c, 1);
  ASSERT_EQ(h1.size(), 1u);
  EXPECT_DOUBLE_EQ(h1.points[0].birth, 1.0);
  EXPECT_DOUBLE_EQ(h1.points[0].death, std::sqrt(2.0));
  EXPECT_EQ(sorted_pairs(h1), oracle::diagram(c, 1));
}

TEST(Reduction, PairingInvariants) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto c = build_rips(random_cloud(8, seed), 2, 0.8);
    const auto pairing = reduce_boundary_matrix(c);
    std::vector<int> seen(c.size(), 0);
    for (const auto& [b, d] : pairing.pairs) {
      EXPECT_LT(b, d);
      EXPECT_EQ(c.simplex(c.at_rank(d)).dim, c.simplex(c.at_rank(b)).dim + 1);
      ++seen[b];
      ++seen[d];
    }
    for (Index e : pairing.essential) ++seen[e];
    for (int s : seen) EXPECT_EQ(s, 1);
  }
}

TEST(Reduction, BothRoutesAgree) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 4 + seed % 9;
    const auto c = build_rips(random_cloud(n, seed), seed % 2 ? 2 : 1, seed % 3 ? 0.6 : 10.0);
    const auto a = reduce_boundary_matrix(c);
    const auto b = reduce_coboundary_matrix(c);
    EXPECT_EQ(a.pairs, b.pairs) << "seed " << seed;
    EXPECT_EQ(a.essential, b.essential) << "seed " << seed;
  }
}

TEST(Reduction, BothRoutesAgreeWithTies) {
  // Integer grid points produce many equal distances.
  std::vector<std::array<double, 2>> pts;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) pts.push_back({double(i), double(j)});
  const auto c = build_rips(PointCloud::planar(pts), 2, 2.0);
  EXPECT_EQ(reduce_boundary_matrix(c).pairs, reduce_coboundary_matrix(c).pairs);
  EXPECT_EQ(sorted_pairs(extract_diagram(reduce_boundary_matrix(c), c, 1)), oracle::diagram(c, 1));
  EXPECT_EQ(sorted_pairs(extract_diagram(reduce_boundary_matrix(c), c, 0)), oracle::diagram(c, 0));
}

TEST(Reduction, MatchesOracle) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 3 + seed % 6;
    const auto c = build_rips(random_cloud(n, 1000 + seed), 2, std::numeric_limits<double>::infinity());
    const auto pairing = reduce_boundary_matrix(c);
    for (int p = 0; p <= 1; ++p) EXPECT_EQ(sorted_pairs(extract_diagram(pairing, c, p)), oracle::diagram(c, p)) << seed;
  }
}

TEST(Reduction, Deterministic) {
  const auto c = build_rips(random_cloud(10, 3), 2, 0.5);
  const auto a = reduce_boundary_matrix(c);
  const auto b = reduce_boundary_matrix(c);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_EQ(a.essential, b.essential);
}

TEST(Reduction, MissingFaceIsStructural) {
  // Triangle present without its edge (1,2).
  try {
    FilteredComplex c(3,
                      {Simplex::vertex(0), Simplex::vertex(1), Simplex::vertex(2), Simplex::edge(0, 1),
                       Simplex::edge(0, 2), Simplex::triangle(0, 1, 2)},
                      {0, 0, 0, 1, 1, 1});
    reduce_boundary_matrix(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::structural);
  }
}

TEST(ExtractDiagram, CollinearH0) {
  const auto c = build_rips(PointCloud::planar({{0, 0}, {1, 0}, {3, 0}}), 2, 4.0);
  const auto h0 = extract_diagram(reduce_boundary_matrix(c), c, 0);
  EXPECT_EQ(sorted_pairs(h0), (Pairs{{0.0, 1.0}, {0.0, 2.0}}));
}

TEST(ExtractDiagram, UnitSquareH1) {
  const auto c = unit_square();
  EXPECT_EQ(sorted_pairs(extract_diagram(reduce_coboundary_matrix(c), c, 1)), (Pairs{{1.0, std::sqrt(2.0)}}));
}

TEST(ExtractDiagram, EquilateralTriangleHasNoH1) {
  const double h = std::sqrt(3.0) / 2.0;
  const auto c = build_rips(PointCloud::planar({{0, 0}, {1, 0}, {0.5, h}}), 2, 2.0);
  EXPECT_TRUE(extract_diagram(reduce_boundary_matrix(c), c, 1).empty());
}

TEST(ExtractDiagram, ProvenanceMatchesValues) {
  const auto c = build_rips(random_cloud(9, 21), 2, 0.7);
  for (int p = 0; p <= 1; ++p)
    for (const auto& pt : extract_diagram(reduce_boundary_matrix(c), c, p).points) {
      EXPECT_EQ(pt.birth, c.value(pt.birth_simplex));
      EXPECT_EQ(pt.death, c.value(pt.death_simplex));
      EXPECT_EQ(c.simplex(pt.birth_simplex).dim, p);
      EXPECT_EQ(c.simplex(pt.death_simplex).dim, p + 1);
      EXPECT_GT(pt.death - pt.birth, kZeroPersistence);
    }
}

TEST(ExtractDiagram, InvalidDegree) {
  const auto c2 = unit_square();
  const auto c1 = build_rips(random_cloud(4, 1), 1, 2.0);
  for (auto [c, p] : {std::pair{&c2, -1}, std::pair{&c2, 2}, std::pair{&c1, 1}}) {
    try {
      extract_diagram(reduce_boundary_matrix(*c), *c, p);
      FAIL() << p;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::invalid_degree);
    }
  }
}

TEST(ExtractDiagram, H0CountConnected) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 5 + seed;
    const auto cloud = random_cloud(n, seed);
    const auto c = build_rips(cloud, 1, default_max_radius(pairwise_distances(cloud)));
    const auto pairing = reduce_boundary_matrix(c);
    std::size_t h0_pairs = 0;
    for (const auto& [b, d] : pairing.pairs) h0_pairs += c.simplex(c.at_rank(b)).dim == 0;
    EXPECT_EQ(h0_pairs, n - 1);
  }
}

TEST(ExtractDiagram, Stability) {
  const double delta = 1e-3;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cloud = random_cloud(10, seed);
    auto moved = cloud;
    std::mt19937_64 rng(seed + 77);
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI), radius(0.0, delta);
    for (std::size_t i = 0; i < moved.size(); ++i) {
      const double a = angle(rng), r = radius(rng);
      moved.point(i)[0] += r * std::cos(a);
      moved.point(i)[1] += r * std::sin(a);
    }
    const auto c = build_rips(cloud, 2, 10.0);
    const auto c2 = rips_filtration_values(moved, c);
    for (Index id = 0; id < c.size(); ++id) EXPECT_LE(std::abs(c2.value(id) - c.value(id)), 2 * delta + 1e-15);
    // H0 deaths are MST edge lengths; the sorted list moves by at most 2 delta entrywise.
    auto h0a = sorted_pairs(compute_diagrams(c, 0)[0]);
    auto h0b = sorted_pairs(compute_diagrams(build_rips(moved, 2, 10.0), 0)[0]);
    ASSERT_EQ(h0a.size(), h0b.size());
    std::vector<double> da, db;
    for (auto& p : h0a) da.push_back(p.second);
    for (auto& p : h0b) db.push_back(p.second);
    std::sort(da.begin(), da.end());
    std::sort(db.begin(), db.end());
    for (std::size_t k = 0; k < da.size(); ++k) EXPECT_LE(std::abs(da[k] - db[k]), 2 * delta + 1e-15);
  }
}

TEST(ComputeDiagrams, StableIdsSurviveResort) {
  auto cloud = random_cloud(8, 5);
  const auto c = build_rips(cloud, 2, 10.0);
  cloud.point(0)[0] += 0.3;
  const auto moved = rips_filtration_values(cloud, c);
  const auto dgms = compute_diagrams(moved, 1);
  for (const auto& dgm : dgms)
    for (const auto& pt : dgm.points) {
      EXPECT_EQ(pt.birth, moved.value(pt.birth_simplex));
      EXPECT_EQ(pt.death, moved.value(pt.death_simplex));
    }
}
