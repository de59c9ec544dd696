#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "hyperinject/dataset.hpp"
#include "hyperinject/hypergraph.hpp"
#include "hyperinject/types.hpp"

namespace hyperinject {

// A_norm = D_V^{-1/2} H W D_E^{-1} H^T D_V^{-1/2} with W = I. Zero-degree
// nodes get a zero inverse, so their rows and columns are empty.
struct NormalizedAggregator {
  SparseMatrix matrix;

  int size() const { return static_cast<int>(matrix.rows()); }
};

NormalizedAggregator normalize(const Hypergraph& h);

struct HgnnConfig {
  int hidden = 16;
  double dropout = 0.5;  // on the hidden layer, training only
};

// Two-layer HGNN: logits = A relu(A X W1) W2. No bias terms.
class HgnnModel {
 public:
  HgnnModel() = default;
  HgnnModel(Matrix w1, Matrix w2, double dropout = 0.5);

  // Weights uniform in +-1/sqrt(fan_in).
  static HgnnModel init(int num_features, int num_classes, const HgnnConfig& config,
                        std::uint64_t seed);

  const Matrix& w1() const { return w1_; }
  const Matrix& w2() const { return w2_; }
  int num_features() const { return static_cast<int>(w1_.rows()); }
  int hidden() const { return static_cast<int>(w1_.cols()); }
  int num_classes() const { return static_cast<int>(w2_.cols()); }
  double dropout() const { return dropout_; }

  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  // Throws Error(Protocol) when frozen.
  void set_weights(Matrix w1, Matrix w2);

  bool operator==(const HgnnModel& other) const {
    return w1_ == other.w1_ && w2_ == other.w2_ && dropout_ == other.dropout_;
  }

 private:
  Matrix w1_;
  Matrix w2_;
  double dropout_ = 0.5;
  bool frozen_ = false;
};

struct ForwardResult {
  Matrix logits;        // n x C, before the log-softmax
  Matrix hidden;        // n x d, relu(pre_hidden)
  Matrix pre_hidden;    // n x d, A X W1
};

ForwardResult forward(const HgnnModel& model, const NormalizedAggregator& agg,
                      const Matrix& x);

// Row-wise log-softmax.
Matrix log_softmax(const Matrix& logits);

// Lowest index wins ties.
std::vector<int> argmax_rows(const Matrix& scores);

// A differentiable scalar of the logits. Fills `grad` (same shape as logits)
// when non-null.
using LogitLoss = std::function<double(const Matrix& logits, Matrix* grad)>;

// Mean cross-entropy of log_softmax(logits) over `rows`.
LogitLoss cross_entropy_loss(std::vector<int> labels, std::vector<int> rows);

// d loss / d X[row, :] by reverse mode through the fixed two-layer forward.
Vector grad_wrt_feature_row(const HgnnModel& model, const NormalizedAggregator& agg,
                            const Matrix& x, int row, const LogitLoss& loss);

struct TrainConfig {
  double lr = 0.01;
  int epochs = 200;
  double weight_decay = 5e-4;
  std::uint64_t seed = 2024;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> trace;
  int best_epoch = -1;  // -1: no validation set, final weights kept
};

// Adam on mean cross-entropy over splits.train. Keeps the weights of the
// epoch with the best validation accuracy (earliest on ties), then freezes
// the model. Throws Error(Divergence) on a non-finite loss.
TrainResult train_surrogate(HgnnModel& model, const NormalizedAggregator& agg,
                            const Matrix& x, const std::vector<int>& labels,
                            const Splits& splits, const TrainConfig& config);

double accuracy(const Matrix& logits, const std::vector<int>& labels,
                const std::vector<int>& rows);

nlohmann::json to_json(const HgnnModel& model);
HgnnModel model_from_json(const nlohmann::json& doc);

}  // namespace hyperinject
