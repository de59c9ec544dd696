#include "hyperinject/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hyperinject/error.hpp"

namespace hyperinject {

double misclassification_rate(const Matrix& logits, const std::vector<int>& labels,
                              const std::vector<int>& test) {
  if (test.empty()) throw Error(ErrorKind::EmptyTestSet, "misclassification rate of an empty test set");
  std::size_t wrong = 0;
  for (int q : test) {
    if (q < 0 || q >= logits.rows() || q >= static_cast<int>(labels.size())) {
      throw Error(ErrorKind::Index, "test index " + std::to_string(q) + " out of range");
    }
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(q, c) > logits(q, best)) best = c;
    }
    if (best != labels[static_cast<std::size_t>(q)]) ++wrong;
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(test.size());
}

double misclassification_rate(const HgnnModel& model, const NormalizedAggregator& agg,
                              const Matrix& x, const std::vector<int>& labels,
                              const std::vector<int>& test) {
  return misclassification_rate(forward(model, agg, x).logits, labels, test);
}

std::vector<int> flag_top(const std::vector<double>& scores, double fraction) {
  const auto count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(scores.size())));
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  order.resize(std::min(count, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

DetectionReport finish(std::vector<double> scores, double fraction, int injected_row,
                       Eigen::Index rows) {
  DetectionReport report;
  report.scores = std::move(scores);
  report.flagged = flag_top(report.scores, fraction);
  const int injected = injected_row < 0 ? static_cast<int>(rows) - 1 : injected_row;
  report.injected_flagged =
      std::binary_search(report.flagged.begin(), report.flagged.end(), injected);
  return report;
}

void check_fraction(double f, const char* what) {
  if (!(f > 0.0 && f < 1.0)) {
    throw Error(ErrorKind::Config, std::string(what) + " must lie in (0, 1)");
  }
}

}  // namespace

namespace {

int resolve_injected(int injected_row, Eigen::Index rows) {
  const int injected = injected_row < 0 ? static_cast<int>(rows) - 1 : injected_row;
  if (injected >= rows) throw Error(ErrorKind::Index, "injected row out of range");
  return injected;
}

// Every row except `skip` (or all rows when skip < 0).
Matrix reference_rows(const Matrix& features, int skip) {
  if (skip < 0) return features;
  Matrix out(features.rows() - 1, features.cols());
  out.topRows(skip) = features.topRows(skip);
  out.bottomRows(features.rows() - 1 - skip) = features.bottomRows(features.rows() - 1 - skip);
  return out;
}

}  // namespace

DetectionReport pca_detect(const Matrix& features, const PcaOptions& options, int injected_row) {
  if (!(options.variance_fraction > 0.0 && options.variance_fraction <= 1.0)) {
    throw Error(ErrorKind::Config, "variance fraction must lie in (0, 1]");
  }
  check_fraction(options.flag_fraction, "flag fraction");
  const Eigen::Index n = features.rows();
  const int injected = resolve_injected(injected_row, n);
  const Matrix ref = reference_rows(features, options.reference_fit ? injected : -1);
  if (ref.rows() < 2) throw Error(ErrorKind::Rank, "PCA needs at least two reference rows");
  const RowVector mean = ref.colwise().mean();
  const Matrix ref_centred = ref.rowwise() - mean;

  // Eigen-decompose whichever of the covariance (F x F) or Gram (n x n)
  // matrix is smaller; both share the non-zero spectrum.
  const bool use_gram = ref.rows() < ref.cols();
  const Matrix second = use_gram ? Matrix(ref_centred * ref_centred.transpose())
                                 : Matrix(ref_centred.transpose() * ref_centred);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(second);
  const Vector values = eig.eigenvalues().cwiseMax(0.0);  // ascending
  const double total = values.sum();
  if (!(total > 0.0)) throw Error(ErrorKind::Rank, "features have zero variance");

  const Eigen::Index m = values.size();
  Eigen::Index k = 0;
  double kept = 0.0;
  while (k < m && kept < options.variance_fraction * total) {
    kept += values[m - 1 - k];
    ++k;
  }
  Matrix axes;  // F x k, orthonormal columns
  if (use_gram) {
    axes = ref_centred.transpose() * eig.eigenvectors().rightCols(k);
    for (Eigen::Index a = 0; a < k; ++a) axes.col(a) /= std::sqrt(values[m - k + a]);
  } else {
    axes = eig.eigenvectors().rightCols(k);
  }
  const Matrix centred = features.rowwise() - mean;
  const Vector sq_norms = centred.rowwise().squaredNorm();
  const Vector explained = (centred * axes).rowwise().squaredNorm();
  std::vector<double> scores(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    scores[static_cast<std::size_t>(i)] = std::max(0.0, sq_norms[i] - explained[i]);
  }
  return finish(std::move(scores), options.flag_fraction, injected, n);
}

DetectionReport hbos_detect(const Matrix& features, const HbosOptions& options, int injected_row) {
  if (options.bins < 2) throw Error(ErrorKind::Config, "HBOS needs at least two bins");
  check_fraction(options.flag_fraction, "flag fraction");
  constexpr double kFloor = 1e-12;
  const Eigen::Index n = features.rows();
  const int injected = resolve_injected(injected_row, n);
  const int skip = options.reference_fit ? injected : -1;
  std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
  std::vector<double> counts(static_cast<std::size_t>(options.bins));
  std::vector<int> bin_of(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == skip) continue;
      lo = std::min(lo, features(i, c));
      hi = std::max(hi, features(i, c));
    }
    // Bin of a value under the reference histogram; -1 when outside it.
    const double width = (hi - lo) / options.bins;
    auto bin = [&](double v) {
      if (v < lo || v > hi) return -1;
      if (!(hi > lo)) return 0;
      return std::min(static_cast<int>(std::floor((v - lo) / width)), options.bins - 1);
    };
    std::fill(counts.begin(), counts.end(), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int b = bin(features(i, c));
      bin_of[static_cast<std::size_t>(i)] = b;
      if (i != skip) counts[static_cast<std::size_t>(b)] += 1.0;
    }
    const double tallest = *std::max_element(counts.begin(), counts.end());
    for (Eigen::Index i = 0; i < n; ++i) {
      const int b = bin_of[static_cast<std::size_t>(i)];
      const double height = b < 0 ? 0.0 : counts[static_cast<std::size_t>(b)] / tallest;
      scores[static_cast<std::size_t>(i)] += std::log(1.0 / std::max(height, kFloor));
    }
  }
  return finish(std::move(scores), options.flag_fraction, injected, n);
}

const char* to_string(Detector detector) {
  return detector == Detector::Pca ? "pca" : "hbos";
}

DetectionOutcome evaluate_under_detection(const HgnnModel& model, const AttackResult& result,
                                          const std::vector<int>& labels,
                                          const std::vector<int>& test, Detector detector,
                                          const PcaOptions& pca, const HbosOptions& hbos) {
  const AttackedHypergraph& ah = result.attacked;
  DetectionOutcome out;
  out.report = detector == Detector::Pca ? pca_detect(ah.features, pca, ah.injected_row)
                                         : hbos_detect(ah.features, hbos, ah.injected_row);
  if (out.report.injected_flagged) {
    const Hypergraph restored = remove_injected(ah);
    out.rate = misclassification_rate(model, normalize(restored),
                                      ah.features.topRows(ah.injected_row), labels, test);
  } else {
    out.rate = misclassification_rate(attacked_forward(model, ah), labels, test);
  }
  return out;
}

AttackResult ablation_variant(const HgnnModel& surrogate, const Hypergraph& h, const Matrix& x,
                              const std::vector<int>& labels, const Splits& splits,
                              AttackConfig config, Ablation which) {
  config.ablation = which;
  return run_attack(surrogate, h, x, labels, splits, config);
}

}  // namespace hyperinject
