#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hyperinject/types.hpp"

namespace hyperinject {

// Node-classification data in Planetoid layout. Row i of `features`, entry i
// of `labels` and entry i of `node_ids` all describe the same node.
struct Dataset {
  std::vector<std::string> node_ids;
  Matrix features;                       // num_nodes x num_features
  std::vector<int> labels;                // dense ids in [0, num_classes)
  std::vector<std::string> class_names;   // class_names[label] = original string
  std::vector<std::pair<int, int>> edges; // node indices, file order
  std::size_t dropped_edges = 0;          // cites lines with an unknown id

  int num_nodes() const { return static_cast<int>(node_ids.size()); }
  int num_features() const { return static_cast<int>(features.cols()); }
  int num_classes() const { return static_cast<int>(class_names.size()); }

  bool operator==(const Dataset& other) const;
};

// Reads `<id> <f_1> ... <f_F> <label>` lines and `<id> <id>` lines.
Dataset load_planetoid(const std::filesystem::path& content_path,
                       const std::filesystem::path& cites_path);

// Inverse of load_planetoid. Feature values are written in shortest
// round-trip form so a reload is exact.
void save_planetoid(const Dataset& dataset,
                    const std::filesystem::path& content_path,
                    const std::filesystem::path& cites_path);

// Scales every non-zero row to unit L1 norm.
void row_normalize(Matrix& features);

struct Splits {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
  std::uint64_t seed = 0;

  bool operator==(const Splits&) const = default;
};

// Stratified split: `per_class_train` nodes of every class (all of them if the
// class is smaller), then `val_size` and `test_size` nodes from the shuffled
// remainder. Index lists are returned sorted.
Splits make_splits(const Dataset& dataset, int per_class_train, int val_size,
                   int test_size, std::uint64_t seed);

nlohmann::json to_json(const Splits& splits);
Splits splits_from_json(const nlohmann::json& doc);

}  // namespace hyperinject
