#include "hyperinject/hgnn.hpp"

#include <cmath>
#include <string>

#include "hyperinject/error.hpp"
#include "hyperinject/rng.hpp"

namespace hyperinject {
namespace {

constexpr std::uint64_t kInitStream = 0x1001;
constexpr std::uint64_t kDropoutStream = 0x1002;

void check_rows(const std::vector<int>& rows, Eigen::Index n) {
  for (int r : rows) {
    if (r < 0 || r >= n) throw Error(ErrorKind::Index, "row index " + std::to_string(r) + " out of range");
  }
}

struct Adam {
  Matrix m, v;
  int t = 0;

  void step(Matrix& w, const Matrix& g, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (m.size() == 0) {
      m = Matrix::Zero(w.rows(), w.cols());
      v = Matrix::Zero(w.rows(), w.cols());
    }
    ++t;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace

NormalizedAggregator normalize(const Hypergraph& h) {
  const int n = h.num_nodes();
  std::vector<double> inv_sqrt_dv(static_cast<std::size_t>(n), 0.0);
  for (int v = 0; v < n; ++v) {
    const int d = h.node_degrees()[static_cast<std::size_t>(v)];
    if (d > 0) inv_sqrt_dv[static_cast<std::size_t>(v)] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  // Accumulate sum_e 1/|e| per pair first, then scale by the symmetric
  // product a_i * a_j, so (i, j) and (j, i) are bitwise equal.
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& members : h.edges()) {
    const double w = 1.0 / static_cast<double>(members.size());
    for (int i : members) {
      for (int j : members) triplets.emplace_back(i, j, w);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  for (int i = 0; i < a.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      const auto r = static_cast<std::size_t>(it.row());
      const auto c = static_cast<std::size_t>(it.col());
      it.valueRef() *= inv_sqrt_dv[r] * inv_sqrt_dv[c];
    }
  }
  return {std::move(a)};
}

HgnnModel::HgnnModel(Matrix w1, Matrix w2, double dropout)
    : w1_(std::move(w1)), w2_(std::move(w2)), dropout_(dropout) {
  if (w1_.cols() != w2_.rows()) {
    throw Error(ErrorKind::Dimension, "layer shapes do not chain: " +
                                          std::to_string(w1_.cols()) + " vs " +
                                          std::to_string(w2_.rows()));
  }
}

HgnnModel HgnnModel::init(int num_features, int num_classes, const HgnnConfig& config,
                          std::uint64_t seed) {
  Rng rng = Rng::derive(seed, kInitStream);
  auto uniform_matrix = [&](int rows, int cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
    }
    return m;
  };
  Matrix w1 = uniform_matrix(num_features, config.hidden);
  Matrix w2 = uniform_matrix(config.hidden, num_classes);
  return HgnnModel(std::move(w1), std::move(w2), config.dropout);
}

void HgnnModel::set_weights(Matrix w1, Matrix w2) {
  if (frozen_) throw Error(ErrorKind::Protocol, "cannot modify a frozen model");
  if (w1.rows() != w1_.rows() || w1.cols() != w1_.cols() || w2.rows() != w2_.rows() ||
      w2.cols() != w2_.cols()) {
    throw Error(ErrorKind::Dimension, "weight shapes changed");
  }
  w1_ = std::move(w1);
  w2_ = std::move(w2);
}

ForwardResult forward(const HgnnModel& model, const NormalizedAggregator& agg,
                      const Matrix& x) {
  if (x.cols() != model.num_features()) {
    throw Error(ErrorKind::Dimension, "feature matrix has " + std::to_string(x.cols()) +
                                          " columns, model expects " +
                                          std::to_string(model.num_features()));
  }
  if (x.rows() != agg.size()) {
    throw Error(ErrorKind::Dimension, "feature rows " + std::to_string(x.rows()) +
                                          " vs aggregator size " + std::to_string(agg.size()));
  }
  ForwardResult out;
  out.pre_hidden = agg.matrix * (x * model.w1());
  out.hidden = out.pre_hidden.cwiseMax(0.0);
  out.logits = agg.matrix * (out.hidden * model.w2());
  return out;
}

Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

LogitLoss cross_entropy_loss(std::vector<int> labels, std::vector<int> rows) {
  return [labels = std::move(labels), rows = std::move(rows)](const Matrix& logits,
                                                              Matrix* grad) {
    check_rows(rows, logits.rows());
    if (grad) *grad = Matrix::Zero(logits.rows(), logits.cols());
    if (rows.empty()) return 0.0;
    const double scale = 1.0 / static_cast<double>(rows.size());
    double total = 0.0;
    for (int r : rows) {
      const double m = logits.row(r).maxCoeff();
      const Eigen::ArrayXd e = (logits.row(r).array() - m).exp();
      const double z = e.sum();
      const int y = labels[static_cast<std::size_t>(r)];
      total -= logits(r, y) - m - std::log(z);
      if (grad) {
        grad->row(r) = (e / z).matrix().transpose() * scale;
        (*grad)(r, y) -= scale;
      }
    }
    return total * scale;
  };
}

Vector grad_wrt_feature_row(const HgnnModel& model, const NormalizedAggregator& agg,
                            const Matrix& x, int row, const LogitLoss& loss) {
  if (row < 0 || row >= x.rows()) {
    throw Error(ErrorKind::Index, "feature row " + std::to_string(row) + " out of range");
  }
  const ForwardResult fw = forward(model, agg, x);
  Matrix g;
  loss(fw.logits, &g);
  const SparseMatrix at = agg.matrix.transpose();
  // logits = A relu(P) W2, P = A X W1.
  Matrix d_hidden = (at * g) * model.w2().transpose();
  Matrix d_pre = d_hidden.cwiseProduct((fw.pre_hidden.array() > 0.0).cast<double>().matrix());
  const Matrix back = at * d_pre;  // n x d
  return model.w1() * back.row(row).transpose();
}

double accuracy(const Matrix& logits, const std::vector<int>& labels,
                const std::vector<int>& rows) {
  if (rows.empty()) return 0.0;
  const auto pred = argmax_rows(logits);
  std::size_t hits = 0;
  for (int r : rows) {
    if (pred[static_cast<std::size_t>(r)] == labels[static_cast<std::size_t>(r)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

TrainResult train_surrogate(HgnnModel& model, const NormalizedAggregator& agg,
                            const Matrix& x, const std::vector<int>& labels,
                            const Splits& splits, const TrainConfig& config) {
  if (model.frozen()) throw Error(ErrorKind::Protocol, "surrogate is already frozen");
  if (x.cols() != model.num_features() || x.rows() != agg.size()) {
    throw Error(ErrorKind::Dimension, "features do not match model/aggregator");
  }
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw Error(ErrorKind::Dimension, "label count does not match feature rows");
  }
  check_rows(splits.train, x.rows());
  check_rows(splits.val, x.rows());

  const Matrix ax = agg.matrix * x;
  const SparseMatrix at = agg.matrix.transpose();
  const auto ce = cross_entropy_loss(labels, splits.train);
  const double p = model.dropout();
  Rng rng = Rng::derive(config.seed, kDropoutStream);

  Matrix w1 = model.w1();
  Matrix w2 = model.w2();
  Adam adam1, adam2;
  TrainResult result;
  double best_val = -1.0;
  Matrix best_w1 = w1, best_w2 = w2;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Matrix pre = ax * w1;
    const Matrix hidden = pre.cwiseMax(0.0);

    Matrix keep = Matrix::Ones(hidden.rows(), hidden.cols());
    if (p > 0.0) {
      for (Eigen::Index i = 0; i < keep.rows(); ++i) {
        for (Eigen::Index j = 0; j < keep.cols(); ++j) {
          keep(i, j) = rng.uniform() < p ? 0.0 : 1.0 / (1.0 - p);
        }
      }
    }
    const Matrix dropped = hidden.cwiseProduct(keep);
    const Matrix a_dropped = agg.matrix * dropped;
    const Matrix logits = a_dropped * w2;

    Matrix g;
    const double loss = ce(logits, &g);
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::Divergence,
                  "surrogate loss became non-finite at epoch " + std::to_string(epoch));
    }

    const Matrix eval_logits = agg.matrix * (hidden * w2);
    EpochStats stats{epoch, loss, accuracy(eval_logits, labels, splits.train),
                     accuracy(eval_logits, labels, splits.val)};
    result.trace.push_back(stats);
    if (!splits.val.empty() && stats.val_accuracy > best_val) {
      best_val = stats.val_accuracy;
      best_w1 = w1;
      best_w2 = w2;
      result.best_epoch = epoch;
    }

    Matrix dw2 = a_dropped.transpose() * g;
    const Matrix d_dropped = (at * g) * w2.transpose();
    const Matrix d_pre = d_dropped.cwiseProduct(keep).cwiseProduct(
        (pre.array() > 0.0).cast<double>().matrix());
    Matrix dw1 = ax.transpose() * d_pre;
    dw1 += config.weight_decay * w1;
    dw2 += config.weight_decay * w2;
    adam1.step(w1, dw1, config.lr);
    adam2.step(w2, dw2, config.lr);
  }

  if (splits.val.empty()) {
    best_w1 = w1;
    best_w2 = w2;
  }
  model.set_weights(std::move(best_w1), std::move(best_w2));
  model.freeze();
  return result;
}

nlohmann::json to_json(const HgnnModel& model) {
  auto dump = [](const Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
  };
  return {{"format", "hyperinject-hgnn"},
          {"dropout", model.dropout()},
          {"frozen", model.frozen()},
          {"layers", {dump(model.w1()), dump(model.w2())}}};
}

HgnnModel model_from_json(const nlohmann::json& doc) {
  auto load = [](const nlohmann::json& layer) {
    const auto rows = layer.at("rows").get<Eigen::Index>();
    const auto cols = layer.at("cols").get<Eigen::Index>();
    const auto data = layer.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw Error(ErrorKind::Schema, "layer data length does not match its shape");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
    }
    return m;
  };
  const auto& layers = doc.at("layers");
  if (layers.size() != 2) throw Error(ErrorKind::Schema, "expected two layers");
  HgnnModel model(load(layers[0]), load(layers[1]), doc.value("dropout", 0.5));
  if (doc.value("frozen", false)) model.freeze();
  return model;
}

}  // namespace hyperinject
