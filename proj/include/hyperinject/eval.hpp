#pragma once

#include <string>
#include <vector>

#include "hyperinject/attack.hpp"
#include "hyperinject/hgnn.hpp"
#include "hyperinject/types.hpp"

namespace hyperinject {

// 100 * share of `test` rows whose argmax (lowest index on ties) differs from
// the label. Throws Error(EmptyTestSet) when `test` is empty.
double misclassification_rate(const Matrix& logits, const std::vector<int>& labels,
                              const std::vector<int>& test);

double misclassification_rate(const HgnnModel& model, const NormalizedAggregator& agg,
                              const Matrix& x, const std::vector<int>& labels,
                              const std::vector<int>& test);

struct DetectionReport {
  std::vector<double> scores;  // one per row, larger = more anomalous
  std::vector<int> flagged;    // ascending row indices
  bool injected_flagged = false;
};

// With `reference_fit` the detector is fitted on every row except the
// injected one (the defender's clean graph) and then scores all rows.
struct PcaOptions {
  double variance_fraction = 0.9;
  double flag_fraction = 0.01;
  bool reference_fit = true;
};

struct HbosOptions {
  int bins = 10;
  double flag_fraction = 0.01;
  bool reference_fit = true;
};

// Squared reconstruction error after projecting the centred rows onto the
// leading principal axes that keep `variance_fraction` of the variance.
// `injected_row` < 0 means "last row".
DetectionReport pca_detect(const Matrix& features, const PcaOptions& options = {},
                           int injected_row = -1);

// Histogram-based outlier score: per feature an equal-width histogram over
// the observed range, heights normalised by the tallest bin,
// score = sum_f log(1 / max(height, 1e-12)). Values outside the fitted range
// land in an empty bin.
DetectionReport hbos_detect(const Matrix& features, const HbosOptions& options = {},
                            int injected_row = -1);

// Top floor(fraction * n) rows by score, lower index on ties.
std::vector<int> flag_top(const std::vector<double>& scores, double fraction);

enum class Detector { Pca, Hbos };

const char* to_string(Detector detector);

struct DetectionOutcome {
  DetectionReport report;
  double rate = 0.0;
};

// Runs the detector on the attacked features. A flagged injected node is
// deleted before the model is re-evaluated; otherwise the attacked hypergraph
// is scored as is.
DetectionOutcome evaluate_under_detection(const HgnnModel& model, const AttackResult& result,
                                          const std::vector<int>& labels,
                                          const std::vector<int>& test, Detector detector,
                                          const PcaOptions& pca = {}, const HbosOptions& hbos = {});

// run_attack with one component removed.
AttackResult ablation_variant(const HgnnModel& surrogate, const Hypergraph& h, const Matrix& x,
                              const std::vector<int>& labels, const Splits& splits,
                              AttackConfig config, Ablation which);

}  // namespace hyperinject
