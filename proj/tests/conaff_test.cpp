#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nbrefine/conaff.hpp"
#include "nbrefine/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace nbr;

namespace {

EmbeddingMatrix block_pairs() {
  return testutil::unit_rows({{1, 0}, {0.981, 0.196}, {0, 1}, {0.196, 0.981}});
}

EmbeddingMatrix angles_deg(std::initializer_list<double> degrees) {
  oracle::Rows rows;
  for (double a : degrees) {
    const double rad = a * std::numbers::pi / 180.0;
    rows.push_back({std::cos(rad), std::sin(rad)});
  }
  return testutil::unit_rows(rows);
}

std::vector<std::size_t> list_of(const NeighborList& nl, std::size_t q) {
  auto s = nl.indices(q);
  return {s.begin(), s.end()};
}

}  // namespace

TEST(ReciprocalAdjacency, BlockPairs) {
  const auto a = reciprocal_adjacency(block_pairs(), 2, true);
  const double want[4][4] = {{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1}};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_EQ(a(i, j), want[i][j]) << i << "," << j;
  }
}

TEST(ReciprocalAdjacency, OneSidedMembershipIsHalf) {
  const auto a = reciprocal_adjacency(angles_deg({0, 10, 15}), 2, true);
  EXPECT_EQ(a(0, 1), 0.5);
  EXPECT_EQ(a(1, 0), 0.5);
  EXPECT_EQ(a(1, 2), 1.0);
  EXPECT_EQ(a(0, 2), 0.0);
}

TEST(ReciprocalAdjacency, SingleRow) {
  const auto a = reciprocal_adjacency(testutil::unit_rows({{2, 1}}), 1, true);
  EXPECT_EQ(a.size(), 1u);
  EXPECT_EQ(a(0, 0), 1.0);
}

TEST(ReciprocalAdjacency, Errors) {
  EXPECT_THROW(reciprocal_adjacency(block_pairs(), 0, true), ConfigError);
  EXPECT_THROW(reciprocal_adjacency(block_pairs(), 5, true), ConfigError);
  EXPECT_THROW(reciprocal_adjacency(block_pairs(), 4, false), ConfigError);
}

TEST(ReciprocalAdjacency, SymmetricDiscreteUnitDiagonal) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    const std::size_t k1 = 1 + rng() % n;
    const auto a = reciprocal_adjacency(testutil::random_unit(n, 1 + rng() % 8, rng), k1, true);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(a(i, i), 1.0);
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_EQ(a(i, j), a(j, i));
        EXPECT_TRUE(a(i, j) == 0.0 || a(i, j) == 0.5 || a(i, j) == 1.0);
      }
    }
  }
}

TEST(ReciprocalAdjacency, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    const bool self = rng() % 2 == 0;
    const std::size_t k1 = 1 + rng() % (self ? n : n - 1);
    const auto f = testutil::random_unit(n, 1 + rng() % 8, rng);
    const auto a = reciprocal_adjacency(f, k1, self);
    const auto ref = oracle::reciprocal_adjacency(testutil::to_rows(f.data()), k1, self);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) ASSERT_EQ(a(i, j), ref[i][j]);
    }
  }
}

TEST(BuildGraph, SelfLoopWhenK2IsOne) {
  std::mt19937_64 rng(23);
  const auto f = testutil::random_unit(15, 4, rng);
  const auto g = build_graph(f, reciprocal_adjacency(f, 5, true), 1);
  for (std::size_t i = 0; i < 15; ++i) {
    ASSERT_EQ(g.edges[i].size(), 1u);
    EXPECT_EQ(g.edges[i][0].target, i);
    EXPECT_EQ(g.edges[i][0].weight, 1.0);
  }
}

TEST(BuildGraph, BlockPairEdges) {
  const auto f = block_pairs();
  const auto g = build_graph(f, reciprocal_adjacency(f, 2, true), 2);
  ASSERT_EQ(g.edges[0].size(), 2u);
  EXPECT_EQ(g.edges[0][0].target, 0u);
  EXPECT_EQ(g.edges[0][1].target, 1u);
  EXPECT_NEAR(g.edges[0][0].weight, 1.0, 1e-15);
  // (0.981, 0.196) is normalized before the product, so the weight is 0.98062.
  EXPECT_NEAR(g.edges[0][1].weight, 0.9806191034530959, 1e-15);
  EXPECT_NEAR(g.edges[0][1].weight, 0.981, 1e-3);
}

TEST(BuildGraph, FullFanOut) {
  std::mt19937_64 rng(24);
  const auto f = testutil::random_unit(9, 3, rng);
  const auto g = build_graph(f, reciprocal_adjacency(f, 9, true), 9);
  for (const auto& out : g.edges) {
    ASSERT_EQ(out.size(), 9u);
    std::vector<bool> hit(9, false);
    for (const Edge& e : out) {
      hit[e.target] = true;
      EXPECT_GE(e.weight, -1.0);
      EXPECT_LE(e.weight, 1.0);
    }
    EXPECT_EQ(std::count(hit.begin(), hit.end(), true), 9);
  }
}

TEST(BuildGraph, K2AboveK1Rejected) {
  const auto f = block_pairs();
  EXPECT_THROW(build_graph(f, reciprocal_adjacency(f, 2, true), 3), ConfigError);
}

TEST(Propagate, ZeroLayersIsIdentity) {
  std::mt19937_64 rng(25);
  const auto f = testutil::random_unit(20, 5, rng);
  const auto a = reciprocal_adjacency(f, 6, true);
  const auto h = propagate(build_graph(f, a, 3), {2.0, 0, false});
  EXPECT_EQ(h.h, a.encodings());
}

TEST(Propagate, SelfLoopDoublesFeatures) {
  std::mt19937_64 rng(26);
  const auto f = testutil::random_unit(20, 5, rng);
  const auto a = reciprocal_adjacency(f, 6, true);
  for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
    const auto h = propagate(build_graph(f, a, 1), {alpha, 1, false});
    for (std::size_t i = 0; i < 20; ++i) {
      for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(h.h(i, j), 2.0 * a(i, j));
    }
    // Uniform scaling leaves the ranking untouched.
    for (std::size_t q = 0; q < 20; ++q) {
      EXPECT_EQ(list_of(conaff_neighbors(h, 8, true), q),
                list_of(conaff_neighbors({a.encodings()}, 8, true), q));
    }
  }
}

TEST(Propagate, SingleNodeDoublesPerLayer) {
  const auto f = testutil::unit_rows({{1, 1}});
  const auto g = build_graph(f, reciprocal_adjacency(f, 1, true), 1);
  const auto h = propagate(g, {1.0, 2, false});
  EXPECT_EQ(h.h(0, 0), 4.0);
}

TEST(Propagate, MatchesDenseOracle) {
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    const std::size_t k1 = 1 + rng() % n;
    const std::size_t k2 = 1 + rng() % k1;
    const double alpha = std::uniform_real_distribution<double>(0.0, 4.0)(rng);
    const std::size_t layers = rng() % 4;
    const auto f = testutil::random_unit(n, 1 + rng() % 6, rng);
    const auto a = reciprocal_adjacency(f, k1, true);
    const auto h = propagate(build_graph(f, a, k2), {alpha, layers, false});
    const auto x = testutil::to_rows(f.data());
    const auto ref = oracle::propagate(x, oracle::reciprocal_adjacency(x, k1, true), k2, true,
                                       alpha, layers);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        ASSERT_NEAR(h.h(i, j), ref[i][j], 1e-9 * (1.0 + std::abs(ref[i][j])));
      }
    }
  }
}

TEST(Propagate, AntiCorrelatedEdgesContributeNothing) {
  // Two antipodal points with k2 = 2: the cross edge has weight -1.
  const auto f = testutil::unit_rows({{1, 0}, {-1, 0}});
  const auto g = build_graph(f, reciprocal_adjacency(f, 2, true), 2);
  EXPECT_EQ(g.edges[0][1].weight, -1.0);
  const auto h = propagate(g, {0.5, 1, false});
  EXPECT_EQ(h.h(0, 0), 2.0);
  EXPECT_EQ(h.h(0, 1), 2.0);
}

TEST(Propagate, LinearInNodeScale) {
  std::mt19937_64 rng(28);
  const auto f = testutil::random_unit(25, 4, rng);
  auto g = build_graph(f, reciprocal_adjacency(f, 8, true), 3);
  const auto base = propagate(g, {2.0, 2, false});
  const double c = 3.5;
  for (double& v : g.nodes.values()) v *= c;
  const auto scaled = propagate(g, {2.0, 2, false});
  for (std::size_t i = 0; i < base.h.values().size(); ++i) {
    EXPECT_NEAR(scaled.h.values()[i], c * base.h.values()[i], 1e-12 * (1 + base.h.values()[i]));
  }
  const auto r1 = conaff_neighbors(base, 6, true);
  const auto r2 = conaff_neighbors(scaled, 6, true);
  for (std::size_t q = 0; q < 25; ++q) {
    // Ranks agree up to exact ties, which scaling can reorder only through rounding.
    auto s1 = r1.scores(q);
    auto s2 = r2.scores(q);
    for (std::size_t r = 0; r < 6; ++r) EXPECT_NEAR(s2[r], c * c * s1[r], 1e-9 * (1 + s2[r]));
  }
}

TEST(ConAffNeighbors, BlockPairsAtZeroLayers) {
  const auto f = block_pairs();
  const RefinedFeatures h{reciprocal_adjacency(f, 2, true).encodings()};
  const auto nl = conaff_neighbors(h, 2, true);
  EXPECT_EQ(list_of(nl, 0), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(nl.scores(0)[1], 2.0);
  EXPECT_EQ(nl.space(), NeighborSpace::kConAff);
}

TEST(ConAffNeighbors, TotalTieKeepsSelfThenIndexOrder) {
  const RefinedFeatures h{Matrix::from_rows({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}})};
  const auto nl = conaff_neighbors(h, 2, true);
  EXPECT_EQ(list_of(nl, 0), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(list_of(nl, 1), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(list_of(nl, 2), (std::vector<std::size_t>{0, 2}));
}

TEST(ConAffNeighbors, SingleNode) {
  const auto nl = conaff_neighbors({Matrix::from_rows({{1.0}})}, 1, true);
  EXPECT_EQ(list_of(nl, 0), (std::vector<std::size_t>{0}));
  EXPECT_THROW(conaff_neighbors({Matrix::from_rows({{1.0}})}, 2, true), ConfigError);
}

TEST(RefineAndRetrieve, EqualsStepwiseComposition) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = testutil::random_unit(40, 6, rng);
    const NeighborConfig ncfg{10, 10, 2, true};
    const PropagationConfig pcfg{2.0, 1 + static_cast<std::size_t>(trial % 3), trial % 2 == 1};
    const auto a = reciprocal_adjacency(f, ncfg.k1, ncfg.include_self);
    const auto g = build_graph(f, a, ncfg.k2);
    const auto h = propagate(g, pcfg);
    const auto stepwise = conaff_neighbors(h, ncfg.k, ncfg.include_self, pcfg.normalize_refined);
    EXPECT_EQ(refine_and_retrieve(f, ncfg, pcfg), stepwise);
  }
}

TEST(RefineAndRetrieve, StandardNeighborSettingsAccepted) {
  std::mt19937_64 rng(30);
  const auto f = testutil::random_unit(64, 8, rng);
  EXPECT_EQ(refine_and_retrieve(f, {10, 10, 2, true}, {}).k(), 10u);
  EXPECT_EQ(refine_and_retrieve(f, {20, 30, 10, true}, {}).k(), 20u);
}

TEST(RefineAndRetrieve, SingleSample) {
  const auto nl = refine_and_retrieve(testutil::unit_rows({{0.2, 0.9}}), {1, 1, 1, true}, {});
  EXPECT_EQ(list_of(nl, 0), (std::vector<std::size_t>{0}));
}

TEST(RefineAndRetrieve, ZeroLayersRanksRawEncodings) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    const std::size_t k1 = 1 + rng() % n;
    const std::size_t k2 = 1 + rng() % k1;
    const std::size_t k = 1 + rng() % n;
    const auto f = testutil::random_unit(n, 1 + rng() % 8, rng);
    const auto nl = refine_and_retrieve(f, {k, k1, k2, true}, {2.0, 0, false});
    const auto enc = oracle::reciprocal_adjacency(testutil::to_rows(f.data()), k1, true);
    const auto ref = oracle::topk(enc, k, true);
    for (std::size_t q = 0; q < n; ++q) ASSERT_EQ(list_of(nl, q), ref[q]);
  }
}

TEST(RefineAndRetrieve, PermutationEquivariantUpToTies) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng() % 30;
    const auto raw = testutil::random_rows(n, 6, rng);
    const auto perm = testutil::random_permutation(n, rng);
    oracle::Rows permuted(n);
    for (std::size_t i = 0; i < n; ++i) permuted[i] = raw[perm[i]];
    const NeighborConfig ncfg{8, 10, 3, true};
    const auto a = refine_and_retrieve(testutil::unit_rows(raw), ncfg, {});
    const auto b = refine_and_retrieve(testutil::unit_rows(permuted), ncfg, {});
    for (std::size_t i = 0; i < n; ++i) {
      auto sa = a.scores(perm[i]);
      auto sb = b.scores(i);
      for (std::size_t r = 0; r < ncfg.k; ++r) ASSERT_NEAR(sa[r], sb[r], 1e-9);
      // Neighbors strictly above the cutoff score are forced; ties at the cutoff are not.
      const double cutoff = sa[ncfg.k - 1] + 1e-9;
      std::vector<std::size_t> want, got;
      for (std::size_t r = 0; r < ncfg.k; ++r) {
        if (sa[r] > cutoff) want.push_back(a.indices(perm[i])[r]);
        if (sb[r] > cutoff) got.push_back(perm[b.indices(i)[r]]);
      }
      std::sort(want.begin(), want.end());
      std::sort(got.begin(), got.end());
      EXPECT_EQ(got, want);
    }
  }
}
