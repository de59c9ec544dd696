#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hyperinject/hypergraph.hpp"
#include "hyperinject/types.hpp"

namespace hyperinject {

// Co-membership counts C = H H^T and the cycle ratio
//   p_i = sum_j C_ij / C_jj   over nodes j with C_jj > 0 (j = i included).
struct CycleStats {
  SparseMatrix cycle_matrix;
  std::vector<double> ratios;
};

CycleStats cycle_ratio(const Hypergraph& h);

struct EliteSelection {
  int elite_node = -1;
  std::vector<int> elite_hyperedges;  // ascending hyperedge indices
  // Set when eigenvector centrality had to be restricted to the largest
  // connected component of the clique expansion.
  bool restricted_to_largest_component = false;

  int omega() const { return static_cast<int>(elite_hyperedges.size()); }
};

// Highest ratio wins, lowest index on ties. Throws Error(NoElite) when every
// node is isolated.
EliteSelection select_elite(const Hypergraph& h, const CycleStats& stats);

// Picks max(1, round(eta * omega)) elite hyperedges, largest first, lower
// index on ties. Returned in that ranked order.
std::vector<int> budget_subset(const EliteSelection& sel, const Hypergraph& h, double eta);

enum class EliteMethod { CycleRatio, Degree, Betweenness, Eigenvector, PageRank };

const char* to_string(EliteMethod method);
EliteMethod parse_elite_method(const std::string& name);

// Scores on the clique expansion. isolated nodes score 0 everywhere.
std::vector<double> degree_centrality(const Hypergraph& h);
std::vector<double> betweenness_centrality(const Hypergraph& h);
// `restricted` is set when the expansion is disconnected and only the largest
// component was scored.
std::vector<double> eigenvector_centrality(const Hypergraph& h, bool* restricted = nullptr);
std::vector<double> pagerank(const Hypergraph& h, double damping = 0.85, double tol = 1e-8);

EliteSelection centrality_elite(const Hypergraph& h, EliteMethod method);

// Dispatches cycle ratio or one of the centralities.
EliteSelection choose_elite(const Hypergraph& h, EliteMethod method);

nlohmann::json to_json(const CycleStats& stats);
nlohmann::json to_json(const EliteSelection& sel);

}  // namespace hyperinject
