#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperinject/attack.hpp"
#include "hyperinject/dataset.hpp"
#include "hyperinject/error.hpp"
#include "hyperinject/eval.hpp"
#include "hyperinject/hgnn.hpp"
#include "hyperinject/hypergraph.hpp"

namespace hyperinject {

enum class Construction { Knn, Hor, L1 };

const char* to_string(Construction c);
Construction parse_construction(const std::string& name);

// Every tunable of a run. Defaults here are the documented defaults.
struct RunConfig {
  // data
  std::string dataset = "cora";
  std::string data_dir;          // default: data/<dataset>
  std::string content_path;      // default: <data_dir>/<dataset>.content
  std::string cites_path;        // default: <data_dir>/<dataset>.cites
  bool row_normalize = false;

  // hypergraph
  Construction construction = Construction::Knn;
  int k = 10;
  int order = 1;
  double gamma = 0.1;

  // splits
  int per_class_train = 20;
  int val_size = 500;
  int test_size = 1000;

  // surrogate
  int hidden = 16;
  double dropout = 0.5;
  double surrogate_lr = 0.01;
  int epochs = 200;
  double weight_decay = 5e-4;

  // attack
  double eta = 1.0;
  Kernel kernel = Kernel::Gaussian;
  std::optional<double> bandwidth;  // empty: Scott's rule
  double attack_lr = 0.01;
  int max_iters = 300;
  int patience = 30;
  EliteMethod elite_method = EliteMethod::CycleRatio;

  // extras per seed
  bool detectors = true;
  double pca_variance = 0.9;
  int hbos_bins = 10;
  double flag_fraction = 0.01;
  std::vector<Ablation> ablations;
  bool random_baseline = false;

  std::vector<std::uint64_t> seeds{2024};
  std::string output_dir = "results";
  int threads = 1;

  std::filesystem::path resolved_content() const;
  std::filesystem::path resolved_cites() const;
};

// Throws Error(Config) naming the offending field.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
// Applies the keys present in `doc` on top of `base`; unknown keys are errors.
RunConfig merge_config(RunConfig base, const nlohmann::json& doc);

// FNV-1a 64 over the canonical JSON of the config minus output_dir/threads.
std::string config_hash(const RunConfig& config);

std::string version_string();

struct PreparedData {
  Dataset dataset;
  Hypergraph hypergraph;
};

PreparedData prepare(const RunConfig& config);

struct SeedModel {
  std::uint64_t seed = 0;
  Splits splits;
  HgnnModel surrogate;  // frozen
  TrainResult training;
};

SeedModel train_for_seed(const RunConfig& config, const PreparedData& data, std::uint64_t seed);

AttackConfig attack_config(const RunConfig& config, std::uint64_t seed);

struct ResultRow {
  std::string axis;     // sweep axis name, empty for plain runs
  std::string value;    // sweep axis value
  std::string dataset;
  std::string construction;
  std::string method;
  double eta = 0.0;
  std::string kernel;
  std::string elite_method;
  std::uint64_t seed = 0;
  double clean_rate = 0.0;
  double attacked_rate = 0.0;
  std::optional<double> pca_rate;
  std::optional<double> hbos_rate;
};

// Mean and sample standard deviation over seeds of one (axis value, method).
struct SummaryRow {
  ResultRow mean;
  ResultRow stddev;
  int count = 0;
};

struct RunOutput {
  std::vector<ResultRow> rows;  // ordered by (axis value, seed, method)
  std::vector<SummaryRow> summaries;
  nlohmann::json document;
};

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

// Attacks (plus optional ablations, baseline and detectors) for every seed.
RunOutput execute_run(const RunConfig& config, const PreparedData& data);

enum class SweepAxis { Eta, Kernel, EliteMethod };

const char* to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

RunOutput execute_sweep(const RunConfig& config, const PreparedData& data, SweepAxis axis);

// Summary rows carry "summary" in the seed column and "mean+-std" cells.
std::string format_csv(const RunOutput& output, const RunConfig& config, bool include_axis);

// Writes results.csv / results.json / surrogate_<seed>.json (run) or
// sweep_<axis>.csv / sweep_<axis>.json (sweep) under config.output_dir.
void run(const RunConfig& config);
void sweep(const RunConfig& config, SweepAxis axis);

// CLI exit status for an error kind: 2 config, 3 data, 4 divergence, 1 other.
int exit_code_for(ErrorKind kind);

}  // namespace hyperinject
