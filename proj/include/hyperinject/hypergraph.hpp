#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "hyperinject/types.hpp"

namespace hyperinject {

// Binary incidence structure H (nodes x hyperedges). Hyperedges keep their
// construction order and duplicates are preserved. Member lists are sorted.
// Immutable after construction; degrees always agree with the member lists.
class Hypergraph {
 public:
  Hypergraph() = default;

  // Throws Error(Schema) if a hyperedge has fewer than two distinct members
  // or references a node outside [0, num_nodes).
  Hypergraph(int num_nodes, std::vector<std::vector<int>> hyperedges);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<int>& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
  const std::vector<std::vector<int>>& edges() const { return edges_; }

  // Hyperedge indices containing `node`, ascending.
  const std::vector<int>& node_edges(int node) const {
    return node_edges_[static_cast<std::size_t>(node)];
  }

  // D_V and D_E diagonals.
  const std::vector<int>& node_degrees() const { return node_degrees_; }
  std::vector<int> edge_degrees() const;

  bool contains(int node, int e) const;

  SparseMatrix incidence() const;

  bool operator==(const Hypergraph& other) const {
    return num_nodes_ == other.num_nodes_ && edges_ == other.edges_;
  }

 private:
  int num_nodes_ = 0;
  std::vector<std::vector<int>> edges_;
  std::vector<std::vector<int>> node_edges_;
  std::vector<int> node_degrees_;
};

// One hyperedge per node: the node and its K nearest neighbours by Euclidean
// distance. Ties go to the lower node index.
Hypergraph build_knn(const Matrix& features, int k);

// One hyperedge per node: the node and every node within `order` hops of it in
// the undirected graph. Isolated nodes produce no hyperedge.
Hypergraph build_hor(const std::vector<std::pair<int, int>>& edges, int num_nodes,
                     int order);

// One hyperedge per node: the node and all nodes whose L1 distance lies within
// the gamma-quantile (linear interpolation) of that node's distances to the
// others. Hyperedges left with a single member get the L1-nearest neighbour.
Hypergraph build_l1(const Matrix& features, double gamma);

// Pairwise graph: u-v adjacent iff they share a hyperedge. Pairs are (u < v),
// sorted, without duplicates.
std::vector<std::pair<int, int>> clique_expand(const Hypergraph& h);

nlohmann::json to_json(const Hypergraph& h);
Hypergraph hypergraph_from_json(const nlohmann::json& doc);

}  // namespace hyperinject
