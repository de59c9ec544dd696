#include "hyperinject/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "hyperinject/error.hpp"

namespace hyperinject {
namespace {

constexpr Eigen::Index kGramBlock = 1024;

// Visits squared Euclidean distances row-block by row-block through the Gram
// matrix, so memory stays at block x n. Calls fn(i, row_of_distances).
template <typename Fn>
void for_each_sq_distance_row(const Matrix& x, Fn&& fn) {
  const Eigen::Index n = x.rows();
  const Vector norms = x.rowwise().squaredNorm();
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Eigen::Index start = 0; start < n; start += kGramBlock) {
    const Eigen::Index len = std::min(kGramBlock, n - start);
    const Matrix gram = x.middleRows(start, len) * x.transpose();
    for (Eigen::Index r = 0; r < len; ++r) {
      const Eigen::Index i = start + r;
      for (Eigen::Index j = 0; j < n; ++j) {
        double d = norms[i] + norms[j] - 2.0 * gram(r, j);
        // Cancellation noise must not break exact ties.
        if (d <= 1e-12 * (norms[i] + norms[j])) d = 0.0;
        row[static_cast<std::size_t>(j)] = d;
      }
      fn(static_cast<int>(i), row);
    }
  }
}

bool is_binary(const Matrix& x) {
  return (x.array() == 0.0 || x.array() == 1.0).all();
}

double interpolated_quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace

Hypergraph::Hypergraph(int num_nodes, std::vector<std::vector<int>> hyperedges)
    : num_nodes_(num_nodes), edges_(std::move(hyperedges)) {
  if (num_nodes < 0) throw Error(ErrorKind::Schema, "negative node count");
  node_edges_.assign(static_cast<std::size_t>(num_nodes), {});
  node_degrees_.assign(static_cast<std::size_t>(num_nodes), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto& members = edges_[e];
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
      throw Error(ErrorKind::Schema,
                  "hyperedge " + std::to_string(e) + " lists a node twice");
    }
    if (members.size() < 2) {
      throw Error(ErrorKind::Schema,
                  "hyperedge " + std::to_string(e) + " has fewer than two nodes");
    }
    if (members.front() < 0 || members.back() >= num_nodes) {
      throw Error(ErrorKind::Schema,
                  "hyperedge " + std::to_string(e) + " references an unknown node");
    }
    for (int v : members) {
      node_edges_[static_cast<std::size_t>(v)].push_back(static_cast<int>(e));
      ++node_degrees_[static_cast<std::size_t>(v)];
    }
  }
}

std::vector<int> Hypergraph::edge_degrees() const {
  std::vector<int> out;
  out.reserve(edges_.size());
  for (const auto& members : edges_) out.push_back(static_cast<int>(members.size()));
  return out;
}

bool Hypergraph::contains(int node, int e) const {
  const auto& members = edge(e);
  return std::binary_search(members.begin(), members.end(), node);
}

SparseMatrix Hypergraph::incidence() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    for (int v : edges_[e]) triplets.emplace_back(v, static_cast<int>(e), 1.0);
  }
  SparseMatrix h(num_nodes_, num_edges());
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

Hypergraph build_knn(const Matrix& features, int k) {
  const int n = static_cast<int>(features.rows());
  if (k < 1) throw Error(ErrorKind::Config, "K must be >= 1");
  if (k >= n) {
    throw Error(ErrorKind::Budget, "K=" + std::to_string(k) + " needs more than " +
                                       std::to_string(n) + " nodes");
  }
  std::vector<std::vector<int>> edges(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  for_each_sq_distance_row(features, [&](int i, const std::vector<double>& dist) {
    std::iota(order.begin(), order.end(), 0);
    // Put self last so it never wins a tie.
    std::swap(order[static_cast<std::size_t>(i)], order.back());
    auto less = [&](int a, int b) {
      if (a == i) return false;
      if (b == i) return true;
      const double da = dist[static_cast<std::size_t>(a)];
      const double db = dist[static_cast<std::size_t>(b)];
      return da < db || (da == db && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), less);
    auto& members = edges[static_cast<std::size_t>(i)];
    members.assign(order.begin(), order.begin() + k);
    members.push_back(i);
  });
  return Hypergraph(n, std::move(edges));
}

Hypergraph build_hor(const std::vector<std::pair<int, int>>& edges, int num_nodes,
                     int order) {
  if (order < 1) throw Error(ErrorKind::Config, "HOR order must be >= 1");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(num_nodes));
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes) {
      throw Error(ErrorKind::Schema, "edge endpoint out of range");
    }
    if (a == b) continue;
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  std::vector<std::vector<int>> hyperedges;
  std::vector<int> depth(static_cast<std::size_t>(num_nodes), -1);
  for (int s = 0; s < num_nodes; ++s) {
    std::vector<int> visited{s};
    depth[static_cast<std::size_t>(s)] = 0;
    for (std::size_t head = 0; head < visited.size(); ++head) {
      const int u = visited[head];
      if (depth[static_cast<std::size_t>(u)] == order) continue;
      for (int w : adj[static_cast<std::size_t>(u)]) {
        if (depth[static_cast<std::size_t>(w)] < 0) {
          depth[static_cast<std::size_t>(w)] = depth[static_cast<std::size_t>(u)] + 1;
          visited.push_back(w);
        }
      }
    }
    for (int v : visited) depth[static_cast<std::size_t>(v)] = -1;
    if (visited.size() >= 2) hyperedges.push_back(std::move(visited));
  }
  return Hypergraph(num_nodes, std::move(hyperedges));
}

Hypergraph build_l1(const Matrix& features, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorKind::Config, "gamma must lie in (0, 1)");
  }
  const int n = static_cast<int>(features.rows());
  std::vector<std::vector<int>> edges;
  if (n < 2) return Hypergraph(n, {});

  auto emit = [&](int i, const std::vector<double>& dist) {
    std::vector<double> others;
    others.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(dist[static_cast<std::size_t>(j)]);
    }
    const double radius = interpolated_quantile(others, gamma);
    std::vector<int> members{i};
    int nearest = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = dist[static_cast<std::size_t>(j)];
      if (d <= radius) members.push_back(j);
      if (nearest < 0 || d < dist[static_cast<std::size_t>(nearest)]) nearest = j;
    }
    if (members.size() < 2) members.push_back(nearest);
    edges.push_back(std::move(members));
  };

  if (is_binary(features)) {
    // For 0/1 vectors the L1 and squared Euclidean distances coincide.
    for_each_sq_distance_row(features, emit);
  } else {
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        dist[static_cast<std::size_t>(j)] = (features.row(i) - features.row(j)).cwiseAbs().sum();
      }
      emit(i, dist);
    }
  }
  return Hypergraph(n, std::move(edges));
}

std::vector<std::pair<int, int>> clique_expand(const Hypergraph& h) {
  std::set<std::pair<int, int>> pairs;
  for (const auto& members : h.edges()) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        pairs.emplace(members[a], members[b]);
      }
    }
  }
  return {pairs.begin(), pairs.end()};
}

nlohmann::json to_json(const Hypergraph& h) {
  return {{"num_nodes", h.num_nodes()}, {"hyperedges", h.edges()}};
}

Hypergraph hypergraph_from_json(const nlohmann::json& doc) {
  return Hypergraph(doc.at("num_nodes").get<int>(),
                    doc.at("hyperedges").get<std::vector<std::vector<int>>>());
}

}  // namespace hyperinject
