#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "hyperinject/error.hpp"
#include "hyperinject/hypergraph.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace hyperinject;
using Edges = std::vector<std::vector<int>>;

namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<int>(values.size()), 1);
  int i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

}  // namespace

TEST(Hypergraph, DegreesAndIncidence) {
  const Hypergraph h(4, {{2, 0}, {0, 1, 3}});
  EXPECT_EQ(h.edge(0), (std::vector<int>{0, 2}));
  EXPECT_EQ(h.node_degrees(), (std::vector<int>{2, 1, 1, 1}));
  EXPECT_EQ(h.edge_degrees(), (std::vector<int>{2, 3}));
  EXPECT_EQ(h.node_edges(0), (std::vector<int>{0, 1}));
  EXPECT_TRUE(h.contains(3, 1));
  EXPECT_FALSE(h.contains(3, 0));
  const Matrix dense = Matrix(h.incidence());
  EXPECT_EQ(dense, testkit::dense_incidence(4, {{0, 2}, {0, 1, 3}}));
}

TEST(Hypergraph, RejectsInvalidEdges) {
  EXPECT_THROW(Hypergraph(3, {{0}}), Error);
  EXPECT_THROW(Hypergraph(3, {{0, 0}}), Error);
  EXPECT_THROW(Hypergraph(3, {{0, 3}}), Error);
}

TEST(Hypergraph, JsonRoundTrip) {
  const Hypergraph h(5, {{0, 1}, {1, 2, 4}, {0, 1}});
  EXPECT_EQ(hypergraph_from_json(to_json(h)), h);
}

TEST(Knn, HandComputedLine) {
  const Hypergraph h = build_knn(column({0, 1, 10}), 1);
  ASSERT_EQ(h.num_edges(), 3);
  EXPECT_EQ(h.edge(0), (std::vector<int>{0, 1}));
  EXPECT_EQ(h.edge(1), (std::vector<int>{0, 1}));
  EXPECT_EQ(h.edge(2), (std::vector<int>{1, 2}));
}

TEST(Knn, IdenticalFeaturesTieBreak) {
  const Hypergraph h = build_knn(column({5, 5, 5}), 1);
  EXPECT_EQ(h.edge(0), (std::vector<int>{0, 1}));
  EXPECT_EQ(h.edge(1), (std::vector<int>{0, 1}));
  EXPECT_EQ(h.edge(2), (std::vector<int>{0, 2}));
  for (int d : h.edge_degrees()) EXPECT_EQ(d, 2);
}

TEST(Knn, MatchesBruteForce) {
  const auto ds = testkit::blob_dataset(60, 8, 3, 4);
  const int k = 5;
  const Hypergraph h = build_knn(ds.features, k);
  ASSERT_EQ(h.num_edges(), 60);
  for (int i = 0; i < 60; ++i) {
    std::vector<std::pair<double, int>> d;
    for (int j = 0; j < 60; ++j) {
      if (j != i) d.emplace_back((ds.features.row(i) - ds.features.row(j)).squaredNorm(), j);
    }
    std::sort(d.begin(), d.end());
    std::vector<int> expect{i};
    for (int t = 0; t < k; ++t) expect.push_back(d[t].second);
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(h.edge(i), expect) << "node " << i;
  }
}

TEST(Knn, BudgetAndConfigErrors) {
  try {
    build_knn(column({0, 1, 2}), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Budget);
  }
  EXPECT_THROW(build_knn(column({0, 1, 2}), 0), Error);
}

TEST(Hor, PathFirstOrder) {
  const Hypergraph h = build_hor({{0, 1}, {1, 2}}, 3, 1);
  ASSERT_EQ(h.num_edges(), 3);
  EXPECT_EQ(h.edge(0), (std::vector<int>{0, 1}));
  EXPECT_EQ(h.edge(1), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(h.edge(2), (std::vector<int>{1, 2}));
}

TEST(Hor, IsolatedNodeHasNoHyperedge) {
  const Hypergraph h = build_hor({{0, 1}}, 3, 1);
  EXPECT_EQ(h.num_edges(), 2);
  EXPECT_EQ(h.node_degrees()[2], 0);
}

TEST(Hor, TriangleSecondOrder) {
  const Hypergraph h = build_hor({{0, 1}, {1, 2}, {2, 0}}, 3, 2);
  ASSERT_EQ(h.num_edges(), 3);
  for (int e = 0; e < 3; ++e) EXPECT_EQ(h.edge(e), (std::vector<int>{0, 1, 2}));
}

TEST(Hor, SecondOrderPath) {
  const Hypergraph h = build_hor({{0, 1}, {1, 2}, {2, 3}}, 4, 2);
  EXPECT_EQ(h.edge(0), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(h.edge(3), (std::vector<int>{1, 2, 3}));
}

TEST(L1, TwoNodesPadded) {
  for (double g : {0.05, 0.5, 0.95}) {
    const Hypergraph h = build_l1(column({0, 3}), g);
    ASSERT_EQ(h.num_edges(), 2);
    EXPECT_EQ(h.edge(0), (std::vector<int>{0, 1}));
    EXPECT_EQ(h.edge(1), (std::vector<int>{0, 1}));
  }
}

TEST(L1, QuantileRadius) {
  const Hypergraph h = build_l1(column({0, 1, 100}), 0.5);
  EXPECT_EQ(h.edge(0), (std::vector<int>{0, 1}));
}

TEST(L1, NearOneQuantileCoversAll) {
  // Every node has two farthest nodes at the same distance, so a quantile
  // just below 1 already reaches the maximum.
  const Hypergraph h = build_l1(column({0, 0, 1, 2, 2}), 0.999);
  for (int e = 0; e < h.num_edges(); ++e) EXPECT_EQ(h.edge(e).size(), 5u) << e;
}

TEST(L1, BinaryFeaturesMatchBruteForce) {
  testkit::CorpusSpec spec;
  spec.class_sizes = {15, 15};
  spec.vocabulary = 40;
  spec.topic_words = 8;
  spec.citations = 10;
  const auto ds = testkit::synthetic_corpus(spec);
  const double gamma = 0.1;
  const Hypergraph h = build_l1(ds.features, gamma);
  const int n = ds.num_nodes();
  for (int i = 0; i < n; ++i) {
    std::vector<double> dist(n);
    std::vector<double> sorted;
    for (int j = 0; j < n; ++j) {
      dist[j] = (ds.features.row(i) - ds.features.row(j)).cwiseAbs().sum();
      if (j != i) sorted.push_back(dist[j]);
    }
    std::sort(sorted.begin(), sorted.end());
    const double pos = gamma * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double radius = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    std::set<int> expect{i};
    int nearest = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (dist[j] <= radius) expect.insert(j);
      if (nearest < 0 || dist[j] < dist[nearest]) nearest = j;
    }
    if (expect.size() == 1) expect.insert(nearest);
    EXPECT_EQ(h.edge(i), std::vector<int>(expect.begin(), expect.end())) << "node " << i;
  }
}

TEST(CliqueExpand, Examples) {
  using P = std::vector<std::pair<int, int>>;
  EXPECT_EQ(clique_expand(Hypergraph(3, {{0, 1, 2}})), (P{{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_EQ(clique_expand(Hypergraph(4, {{0, 1}, {2, 3}})), (P{{0, 1}, {2, 3}}));
  EXPECT_EQ(clique_expand(Hypergraph(3, {{0, 1}, {1, 2}})), (P{{0, 1}, {1, 2}}));
}
