#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperinject/dataset.hpp"
#include "hyperinject/elite.hpp"
#include "hyperinject/generator.hpp"
#include "hyperinject/hgnn.hpp"
#include "hyperinject/hypergraph.hpp"

namespace hyperinject {

// H with one extra row (the injected node) and X with z_mal appended.
struct AttackedHypergraph {
  Hypergraph hypergraph;   // num_nodes = clean + 1
  int injected_row = -1;   // == clean node count
  std::vector<int> budget; // hyperedges that received the injected node
  Matrix features;         // (clean + 1) x F
};

// Throws Error(Injection) on an empty, duplicated or out-of-range budget.
AttackedHypergraph inject(const Hypergraph& h, const std::vector<int>& budget,
                          const Vector& z_mal, const Matrix& x);

// Drops the injected node from every hyperedge.
Hypergraph remove_injected(const AttackedHypergraph& ah);

// Rows [0, num_nodes) of the attacked incidence equal H exactly.
bool restriction_matches(const AttackedHypergraph& ah, const Hypergraph& h);

Matrix attacked_forward(const HgnnModel& model, const AttackedHypergraph& ah);

struct AttackLoss {
  double total = 0.0;
  double hinge = 0.0;     // sum over train of max_{z != y} max(0, Z_y - Z_z)
  double distance = 0.0;  // ||z_mal - z_elite||_2
};

AttackLoss attack_loss(const Matrix& logits, const std::vector<int>& labels,
                       const std::vector<int>& train, const Vector& z_mal,
                       const Vector& z_elite);

// The attack loss as a function of the injected feature row, with the
// structure of the attacked hypergraph held fixed. Clean-row work is cached.
class AttackObjective {
 public:
  AttackObjective(const HgnnModel& model, const AttackedHypergraph& structure,
                  std::vector<int> labels, std::vector<int> train, Vector z_elite);

  // Fills grad_z_mal (length F) when non-null.
  AttackLoss evaluate(const Vector& z_mal, Vector* grad_z_mal = nullptr) const;

  Matrix logits(const Vector& z_mal) const;

  const NormalizedAggregator& aggregator() const { return agg_; }

 private:
  const HgnnModel& model_;
  NormalizedAggregator agg_;
  SparseMatrix agg_t_;
  Matrix clean_xw1_;  // X W1 for the clean rows
  int injected_row_;
  std::vector<int> labels_;
  std::vector<int> train_;
  Vector z_elite_;
};

enum class Ablation { None, NoElite, NoKde, NoGenerator };

const char* to_string(Ablation ablation);
Ablation parse_ablation(const std::string& name);

struct IterationView {
  int iteration;
  const AttackedHypergraph& attacked;  // features hold this iteration's z_mal
  const AttackLoss& loss;
};

struct AttackConfig {
  double eta = 1.0;
  Kernel kernel = Kernel::Gaussian;
  BandwidthRule bandwidth{};
  double lr = 0.01;
  int max_iters = 300;
  int patience = 30;
  std::uint64_t seed = 2024;
  EliteMethod elite_method = EliteMethod::CycleRatio;
  Ablation ablation = Ablation::None;
  // Called once per optimiser iteration.
  std::function<void(const IterationView&)> on_iteration;
};

struct AttackResult {
  std::string method;
  Vector z_mal;
  std::vector<double> loss_trace;
  std::vector<double> best_loss_trace;
  double best_loss = 0.0;
  int best_iteration = 0;
  int elite_node = -1;
  int elite_edge = -1;
  std::vector<int> budget;
  double clean_rate = 0.0;
  double attacked_rate = 0.0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  AttackedHypergraph attacked;  // with the returned z_mal
};

// Elite selection, KDE sampling, refinement, then gradient descent on the
// generator head. Returns the lowest-loss iterate. The surrogate is only read.
AttackResult run_attack(const HgnnModel& surrogate, const Hypergraph& h, const Matrix& x,
                        const std::vector<int>& labels, const Splits& splits,
                        const AttackConfig& config);

// Uniform features within the observed bounds injected into `budget_count`
// uniformly chosen hyperedges. No optimisation.
AttackResult random_injection_baseline(const HgnnModel& surrogate, const Hypergraph& h,
                                       const Matrix& x, const std::vector<int>& labels,
                                       const Splits& splits, int budget_count,
                                       std::uint64_t seed);

nlohmann::json to_json(const AttackConfig& config);
nlohmann::json to_json(const AttackResult& result, const nlohmann::json& config);

}  // namespace hyperinject
