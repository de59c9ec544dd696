#include "hyperinject/elite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "hyperinject/error.hpp"

namespace hyperinject {
namespace {

using Adjacency = std::vector<std::vector<int>>;

Adjacency expansion_adjacency(const Hypergraph& h) {
  Adjacency adj(static_cast<std::size_t>(h.num_nodes()));
  for (auto [u, v] : clique_expand(h)) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

int argmax_lowest(const std::vector<double>& scores) {
  int best = -1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (best < 0 || scores[i] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

EliteSelection selection_for(const Hypergraph& h, int node) {
  EliteSelection sel;
  sel.elite_node = node;
  sel.elite_hyperedges = h.node_edges(node);
  return sel;
}

// Highest score among non-isolated nodes.
int pick_elite(const Hypergraph& h, const std::vector<double>& scores) {
  int best = -1;
  for (int i = 0; i < h.num_nodes(); ++i) {
    if (h.node_degrees()[static_cast<std::size_t>(i)] == 0) continue;
    if (best < 0 || scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }
  if (best < 0) throw Error(ErrorKind::NoElite, "every node is isolated; no elite node exists");
  return best;
}

}  // namespace

CycleStats cycle_ratio(const Hypergraph& h) {
  const int n = h.num_nodes();
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& members : h.edges()) {
    for (int i : members) {
      for (int j : members) triplets.emplace_back(i, j, 1.0);
    }
  }
  CycleStats stats;
  stats.cycle_matrix.resize(n, n);
  stats.cycle_matrix.setFromTriplets(triplets.begin(), triplets.end());
  stats.ratios.assign(static_cast<std::size_t>(n), 0.0);

  Vector diag = Vector::Zero(n);
  for (int i = 0; i < n; ++i) diag[i] = stats.cycle_matrix.coeff(i, i);
  for (int i = 0; i < n; ++i) {
    double p = 0.0;
    for (SparseMatrix::InnerIterator it(stats.cycle_matrix, i); it; ++it) {
      const double cjj = diag[it.col()];
      if (cjj > 0.0 && it.value() > 0.0) p += it.value() / cjj;
    }
    stats.ratios[static_cast<std::size_t>(i)] = p;
  }
  return stats;
}

EliteSelection select_elite(const Hypergraph& h, const CycleStats& stats) {
  if (static_cast<int>(stats.ratios.size()) != h.num_nodes()) {
    throw Error(ErrorKind::Dimension, "cycle stats do not match the hypergraph");
  }
  int best = -1;
  for (std::size_t i = 0; i < stats.ratios.size(); ++i) {
    if (stats.ratios[i] <= 0.0) continue;
    if (best < 0 || stats.ratios[i] > stats.ratios[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw Error(ErrorKind::NoElite, "every node is isolated; no elite node exists");
  return selection_for(h, best);
}

std::vector<int> budget_subset(const EliteSelection& sel, const Hypergraph& h, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::Config, "eta must lie in (0, 1]");
  const int omega = sel.omega();
  if (omega == 0) throw Error(ErrorKind::Budget, "elite selection has no hyperedges");
  const long rounded = std::lround(eta * static_cast<double>(omega));
  const int count = static_cast<int>(std::clamp<long>(rounded, 1, omega));
  std::vector<int> ranked = sel.elite_hyperedges;
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    const auto sa = h.edge(a).size();
    const auto sb = h.edge(b).size();
    return sa > sb || (sa == sb && a < b);
  });
  ranked.resize(static_cast<std::size_t>(count));
  return ranked;
}

const char* to_string(EliteMethod method) {
  switch (method) {
    case EliteMethod::CycleRatio: return "cycle_ratio";
    case EliteMethod::Degree: return "degree";
    case EliteMethod::Betweenness: return "betweenness";
    case EliteMethod::Eigenvector: return "eigenvector";
    case EliteMethod::PageRank: return "pagerank";
  }
  return "?";
}

EliteMethod parse_elite_method(const std::string& name) {
  for (auto m : {EliteMethod::CycleRatio, EliteMethod::Degree, EliteMethod::Betweenness,
                 EliteMethod::Eigenvector, EliteMethod::PageRank}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorKind::Config, "unknown elite method '" + name + "'");
}

std::vector<double> degree_centrality(const Hypergraph& h) {
  const auto adj = expansion_adjacency(h);
  std::vector<double> out;
  out.reserve(adj.size());
  for (const auto& list : adj) out.push_back(static_cast<double>(list.size()));
  return out;
}

std::vector<double> betweenness_centrality(const Hypergraph& h) {
  // Brandes (2001), unweighted.
  const auto adj = expansion_adjacency(h);
  const int n = h.num_nodes();
  std::vector<double> cb(static_cast<std::size_t>(n), 0.0);
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<double> sigma(static_cast<std::size_t>(n)), delta(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();
    stack.clear();
    dist[static_cast<std::size_t>(s)] = 0;
    sigma[static_cast<std::size_t>(s)] = 1.0;
    std::queue<int> queue;
    queue.push(s);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop();
      stack.push_back(v);
      for (int w : adj[static_cast<std::size_t>(v)]) {
        auto& dw = dist[static_cast<std::size_t>(w)];
        if (dw < 0) {
          dw = dist[static_cast<std::size_t>(v)] + 1;
          queue.push(w);
        }
        if (dw == dist[static_cast<std::size_t>(v)] + 1) {
          sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(v)];
          preds[static_cast<std::size_t>(w)].push_back(v);
        }
      }
    }
    while (!stack.empty()) {
      const int w = stack.back();
      stack.pop_back();
      for (int v : preds[static_cast<std::size_t>(w)]) {
        delta[static_cast<std::size_t>(v)] += sigma[static_cast<std::size_t>(v)] /
                                              sigma[static_cast<std::size_t>(w)] *
                                              (1.0 + delta[static_cast<std::size_t>(w)]);
      }
      if (w != s) cb[static_cast<std::size_t>(w)] += delta[static_cast<std::size_t>(w)];
    }
  }
  // Each unordered pair was counted from both ends.
  for (auto& c : cb) c /= 2.0;
  return cb;
}

std::vector<double> eigenvector_centrality(const Hypergraph& h, bool* restricted) {
  const auto adj = expansion_adjacency(h);
  const int n = h.num_nodes();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (restricted) *restricted = false;

  // Connected components among non-isolated nodes.
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<int> comp_size;
  for (int s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0 || adj[static_cast<std::size_t>(s)].empty()) continue;
    const int id = static_cast<int>(comp_size.size());
    int size = 0;
    std::vector<int> frontier{s};
    comp[static_cast<std::size_t>(s)] = id;
    while (!frontier.empty()) {
      const int v = frontier.back();
      frontier.pop_back();
      ++size;
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = id;
          frontier.push_back(w);
        }
      }
    }
    comp_size.push_back(size);
  }
  if (comp_size.empty()) return out;
  // Component ids are assigned in order of their lowest node, so max_element
  // picks the lowest-indexed component among equal sizes.
  const int keep = static_cast<int>(
      std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());
  if (comp_size.size() > 1 && restricted) *restricted = true;

  std::vector<int> nodes;
  for (int v = 0; v < n; ++v) {
    if (comp[static_cast<std::size_t>(v)] == keep) nodes.push_back(v);
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0), y(static_cast<std::size_t>(n), 0.0);
  for (int v : nodes) x[static_cast<std::size_t>(v)] = 1.0 / std::sqrt(static_cast<double>(nodes.size()));
  // Power iteration on A + I: same eigenvectors, no oscillation on bipartite
  // components.
  for (int iter = 0; iter < 10000; ++iter) {
    double norm = 0.0;
    for (int v : nodes) {
      double s = x[static_cast<std::size_t>(v)];
      for (int w : adj[static_cast<std::size_t>(v)]) s += x[static_cast<std::size_t>(w)];
      y[static_cast<std::size_t>(v)] = s;
      norm += s * s;
    }
    norm = std::sqrt(norm);
    double change = 0.0;
    for (int v : nodes) {
      const double nv = y[static_cast<std::size_t>(v)] / norm;
      change = std::max(change, std::abs(nv - x[static_cast<std::size_t>(v)]));
      x[static_cast<std::size_t>(v)] = nv;
    }
    if (change < 1e-8) break;
  }
  for (int v : nodes) out[static_cast<std::size_t>(v)] = x[static_cast<std::size_t>(v)];
  return out;
}

std::vector<double> pagerank(const Hypergraph& h, double damping, double tol) {
  const auto adj = expansion_adjacency(h);
  const int n = h.num_nodes();
  if (n == 0) return {};
  const double base = 1.0 / static_cast<double>(n);
  std::vector<double> rank(static_cast<std::size_t>(n), base), next(static_cast<std::size_t>(n));
  for (int iter = 0; iter < 10000; ++iter) {
    double dangling = 0.0;
    for (int v = 0; v < n; ++v) {
      if (adj[static_cast<std::size_t>(v)].empty()) dangling += rank[static_cast<std::size_t>(v)];
    }
    const double teleport = (1.0 - damping) * base + damping * dangling * base;
    std::fill(next.begin(), next.end(), teleport);
    for (int v = 0; v < n; ++v) {
      const auto& list = adj[static_cast<std::size_t>(v)];
      if (list.empty()) continue;
      const double share = damping * rank[static_cast<std::size_t>(v)] / static_cast<double>(list.size());
      for (int w : list) next[static_cast<std::size_t>(w)] += share;
    }
    double change = 0.0;
    for (int v = 0; v < n; ++v) {
      change += std::abs(next[static_cast<std::size_t>(v)] - rank[static_cast<std::size_t>(v)]);
    }
    rank.swap(next);
    if (change < tol) break;
  }
  return rank;
}

EliteSelection centrality_elite(const Hypergraph& h, EliteMethod method) {
  std::vector<double> scores;
  bool restricted = false;
  switch (method) {
    case EliteMethod::Degree: scores = degree_centrality(h); break;
    case EliteMethod::Betweenness: scores = betweenness_centrality(h); break;
    case EliteMethod::Eigenvector: scores = eigenvector_centrality(h, &restricted); break;
    case EliteMethod::PageRank: scores = pagerank(h); break;
    case EliteMethod::CycleRatio:
      throw Error(ErrorKind::Config, "cycle_ratio is not a clique-expansion centrality");
  }
  EliteSelection sel = selection_for(h, pick_elite(h, scores));
  sel.restricted_to_largest_component = restricted;
  return sel;
}

EliteSelection choose_elite(const Hypergraph& h, EliteMethod method) {
  if (method == EliteMethod::CycleRatio) return select_elite(h, cycle_ratio(h));
  return centrality_elite(h, method);
}

nlohmann::json to_json(const CycleStats& stats) {
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < stats.cycle_matrix.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(stats.cycle_matrix, i); it; ++it) {
      entries.push_back({it.row(), it.col(), static_cast<long long>(it.value())});
    }
  }
  return {{"num_nodes", stats.cycle_matrix.rows()},
          {"cycle_matrix", entries},
          {"ratios", stats.ratios}};
}

nlohmann::json to_json(const EliteSelection& sel) {
  return {{"elite_node", sel.elite_node},
          {"elite_hyperedges", sel.elite_hyperedges},
          {"omega", sel.omega()},
          {"restricted_to_largest_component", sel.restricted_to_largest_component}};
}

}  // namespace hyperinject
