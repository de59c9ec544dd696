#include "hyperinject/attack.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <set>

#include "hyperinject/error.hpp"
#include "hyperinject/eval.hpp"

namespace hyperinject {
namespace {

constexpr std::uint64_t kKdeStream = 0x2001;
constexpr std::uint64_t kRefineStream = 0x2002;
constexpr std::uint64_t kGeneratorStream = 0x2003;
constexpr std::uint64_t kBudgetStream = 0x2004;
constexpr std::uint64_t kUniformFeatureStream = 0x2005;

Vector uniform_in_bounds(const FeatureBounds& bounds, Rng& rng) {
  Vector v(bounds.lower.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(bounds.lower[i], bounds.upper[i]);
  return v;
}

std::vector<int> random_hyperedges(const Hypergraph& h, int count, Rng& rng) {
  auto picked = rng.sample_without_replacement(h.num_edges(), count);
  return picked;
}

}  // namespace

AttackedHypergraph inject(const Hypergraph& h, const std::vector<int>& budget,
                          const Vector& z_mal, const Matrix& x) {
  if (budget.empty()) throw Error(ErrorKind::Injection, "empty injection budget");
  if (x.rows() != h.num_nodes()) {
    throw Error(ErrorKind::Dimension, "feature rows do not match the hypergraph");
  }
  if (z_mal.size() != x.cols()) {
    throw Error(ErrorKind::Dimension, "injected feature length does not match F");
  }
  std::set<int> seen;
  for (int e : budget) {
    if (e < 0 || e >= h.num_edges()) {
      throw Error(ErrorKind::Injection, "budget hyperedge " + std::to_string(e) + " out of range");
    }
    if (!seen.insert(e).second) {
      throw Error(ErrorKind::Injection, "budget lists hyperedge " + std::to_string(e) + " twice");
    }
  }
  const int injected = h.num_nodes();
  auto edges = h.edges();
  for (int e : budget) edges[static_cast<std::size_t>(e)].push_back(injected);

  AttackedHypergraph ah;
  ah.hypergraph = Hypergraph(injected + 1, std::move(edges));
  ah.injected_row = injected;
  ah.budget = budget;
  ah.features.resize(x.rows() + 1, x.cols());
  ah.features.topRows(x.rows()) = x;
  ah.features.row(injected) = z_mal.transpose();
  return ah;
}

Hypergraph remove_injected(const AttackedHypergraph& ah) {
  auto edges = ah.hypergraph.edges();
  for (auto& members : edges) {
    if (!members.empty() && members.back() == ah.injected_row) members.pop_back();
  }
  return Hypergraph(ah.injected_row, std::move(edges));
}

bool restriction_matches(const AttackedHypergraph& ah, const Hypergraph& h) {
  if (ah.injected_row != h.num_nodes() || ah.hypergraph.num_edges() != h.num_edges()) return false;
  for (int e = 0; e < h.num_edges(); ++e) {
    const auto& attacked = ah.hypergraph.edge(e);
    const auto& clean = h.edge(e);
    const bool has_injected = !attacked.empty() && attacked.back() == ah.injected_row;
    const std::size_t kept = attacked.size() - (has_injected ? 1 : 0);
    if (kept != clean.size() || !std::equal(clean.begin(), clean.end(), attacked.begin())) {
      return false;
    }
  }
  return true;
}

Matrix attacked_forward(const HgnnModel& model, const AttackedHypergraph& ah) {
  if (!model.frozen()) throw Error(ErrorKind::Protocol, "attacked forward needs a frozen model");
  return forward(model, normalize(ah.hypergraph), ah.features).logits;
}

namespace {

// Hinge term and, when `grad` is non-null, its subgradient w.r.t. the logits.
double hinge_term(const Matrix& logits, const std::vector<int>& labels,
                  const std::vector<int>& train, Matrix* grad) {
  double total = 0.0;
  for (int q : train) {
    if (q < 0 || q >= logits.rows()) throw Error(ErrorKind::Index, "train index out of range");
    const int y = labels[static_cast<std::size_t>(q)];
    // max_{z != y} (Z_y - Z_z) is attained at the lowest-scoring wrong class.
    int worst = -1;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      if (c == y) continue;
      if (worst < 0 || logits(q, c) < logits(q, worst)) worst = static_cast<int>(c);
    }
    if (worst < 0) continue;
    const double margin = logits(q, y) - logits(q, worst);
    if (margin > 0.0) {
      total += margin;
      if (grad) {
        (*grad)(q, y) += 1.0;
        (*grad)(q, worst) -= 1.0;
      }
    }
  }
  return total;
}

}  // namespace

AttackLoss attack_loss(const Matrix& logits, const std::vector<int>& labels,
                       const std::vector<int>& train, const Vector& z_mal,
                       const Vector& z_elite) {
  AttackLoss loss;
  loss.hinge = hinge_term(logits, labels, train, nullptr);
  loss.distance = (z_mal - z_elite).norm();
  loss.total = loss.hinge + loss.distance;
  return loss;
}

AttackObjective::AttackObjective(const HgnnModel& model, const AttackedHypergraph& structure,
                                 std::vector<int> labels, std::vector<int> train, Vector z_elite)
    : model_(model),
      agg_(normalize(structure.hypergraph)),
      agg_t_(agg_.matrix.transpose()),
      clean_xw1_(structure.features.topRows(structure.injected_row) * model.w1()),
      injected_row_(structure.injected_row),
      labels_(std::move(labels)),
      train_(std::move(train)),
      z_elite_(std::move(z_elite)) {
  if (!model.frozen()) throw Error(ErrorKind::Protocol, "attack objective needs a frozen model");
}

Matrix AttackObjective::logits(const Vector& z_mal) const {
  Matrix xw1(injected_row_ + 1, model_.hidden());
  xw1.topRows(injected_row_) = clean_xw1_;
  xw1.row(injected_row_) = (model_.w1().transpose() * z_mal).transpose();
  const Matrix hidden = (agg_.matrix * xw1).cwiseMax(0.0);
  return agg_.matrix * (hidden * model_.w2());
}

AttackLoss AttackObjective::evaluate(const Vector& z_mal, Vector* grad_z_mal) const {
  if (z_mal.size() != model_.num_features()) {
    throw Error(ErrorKind::Dimension, "injected feature length does not match F");
  }
  Matrix xw1(injected_row_ + 1, model_.hidden());
  xw1.topRows(injected_row_) = clean_xw1_;
  xw1.row(injected_row_) = (model_.w1().transpose() * z_mal).transpose();
  const Matrix pre = agg_.matrix * xw1;
  const Matrix hidden = pre.cwiseMax(0.0);
  const Matrix logits = agg_.matrix * (hidden * model_.w2());

  AttackLoss loss;
  Matrix g;
  if (grad_z_mal) g = Matrix::Zero(logits.rows(), logits.cols());
  loss.hinge = hinge_term(logits, labels_, train_, grad_z_mal ? &g : nullptr);
  const Vector diff = z_mal - z_elite_;
  loss.distance = diff.norm();
  loss.total = loss.hinge + loss.distance;

  if (grad_z_mal) {
    const Matrix d_hidden = (agg_t_ * g) * model_.w2().transpose();
    const Matrix d_pre = d_hidden.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    const RowVector back = (agg_t_ * d_pre).row(injected_row_);
    *grad_z_mal = model_.w1() * back.transpose();
    if (loss.distance > 0.0) *grad_z_mal += diff / loss.distance;
  }
  return loss;
}

const char* to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::None: return "ie-attack";
    case Ablation::NoElite: return "no_elite";
    case Ablation::NoKde: return "no_kde";
    case Ablation::NoGenerator: return "no_generator";
  }
  return "?";
}

Ablation parse_ablation(const std::string& name) {
  for (auto a : {Ablation::None, Ablation::NoElite, Ablation::NoKde, Ablation::NoGenerator}) {
    if (name == to_string(a)) return a;
  }
  throw Error(ErrorKind::Config, "unknown ablation '" + name + "'");
}

AttackResult run_attack(const HgnnModel& surrogate, const Hypergraph& h, const Matrix& x,
                        const std::vector<int>& labels, const Splits& splits,
                        const AttackConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  if (!surrogate.frozen()) {
    throw Error(ErrorKind::Protocol, "the surrogate must be trained and frozen before attacking");
  }
  if (!(config.eta > 0.0 && config.eta <= 1.0)) throw Error(ErrorKind::Config, "eta must lie in (0, 1]");
  if (config.max_iters < 1) throw Error(ErrorKind::Config, "max_iters must be >= 1");

  AttackResult result;
  result.method = to_string(config.ablation);
  result.seed = config.seed;

  const NormalizedAggregator clean_agg = normalize(h);
  const ForwardResult clean = forward(surrogate, clean_agg, x);
  result.clean_rate = misclassification_rate(clean.logits, labels, splits.test);

  const EliteSelection sel = choose_elite(h, config.elite_method);
  result.elite_node = sel.elite_node;
  if (config.ablation == Ablation::NoElite) {
    const long rounded = std::lround(config.eta * static_cast<double>(sel.omega()));
    const int count = static_cast<int>(std::clamp<long>(rounded, 1, h.num_edges()));
    Rng rng = Rng::derive(config.seed, kBudgetStream);
    result.budget = random_hyperedges(h, count, rng);
  } else {
    result.budget = budget_subset(sel, h, config.eta);
  }

  const Vector z_elite = x.row(sel.elite_node).transpose();
  const FeatureBounds bounds = feature_bounds(x);

  Vector z_m;
  if (config.ablation == Ablation::NoKde) {
    Rng rng = Rng::derive(config.seed, kUniformFeatureStream);
    z_m = uniform_in_bounds(bounds, rng);
  } else {
    const KdeModel kde = fit_kde(z_elite, config.kernel, config.bandwidth);
    Rng rng = Rng::derive(config.seed, kKdeStream);
    z_m = sample_preliminary(kde, rng);
  }

  AttackedHypergraph attacked = inject(h, result.budget, Vector::Zero(x.cols()), x);
  const AttackObjective objective(surrogate, attacked, labels, splits.train, z_elite);

  auto record = [&](int iteration, const Vector& z, const AttackLoss& loss) {
    if (!std::isfinite(loss.total)) {
      throw Error(ErrorKind::Divergence,
                  "attack loss became non-finite at iteration " + std::to_string(iteration));
    }
    result.loss_trace.push_back(loss.total);
    if (config.on_iteration) {
      attacked.features.row(attacked.injected_row) = z.transpose();
      config.on_iteration(IterationView{iteration, attacked, loss});
    }
  };

  if (config.ablation == Ablation::NoGenerator) {
    result.z_mal = clamp(z_m, bounds);
    const AttackLoss loss = objective.evaluate(result.z_mal);
    record(0, result.z_mal, loss);
    result.best_loss = loss.total;
    result.best_loss_trace.push_back(loss.total);
  } else {
    Rng refine_rng = Rng::derive(config.seed, kRefineStream);
    const RefinementContext ctx = refine(z_m, surrogate, clean.hidden, h, sel, refine_rng);
    result.elite_edge = ctx.elite_edge;
    Rng init_rng = Rng::derive(config.seed, kGeneratorStream);
    GeneratorNet net = GeneratorNet::init(surrogate.hidden(), static_cast<int>(x.cols()), init_rng);

    double best = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int it = 0; it < config.max_iters; ++it) {
      const Vector z = generate(net, ctx, bounds);
      Vector grad_z;
      const AttackLoss loss = objective.evaluate(z, &grad_z);
      record(it, z, loss);
      if (loss.total < best - 1e-6) {
        best = loss.total;
        result.best_iteration = it;
        result.z_mal = z;
        stall = 0;
      } else if (++stall >= config.patience) {
        result.best_loss_trace.push_back(best);
        break;
      }
      result.best_loss_trace.push_back(best);
      const GeneratorGrad g = generator_backward(net, ctx, bounds, grad_z);
      net.weight -= config.lr * g.weight;
      net.bias -= config.lr * g.bias;
      if (!net.weight.allFinite() || !net.bias.allFinite()) {
        throw Error(ErrorKind::Divergence,
                    "generator parameters became non-finite at iteration " + std::to_string(it));
      }
    }
    result.best_loss = best;
  }

  attacked.features.row(attacked.injected_row) = result.z_mal.transpose();
  result.attacked_rate = misclassification_rate(objective.logits(result.z_mal), labels, splits.test);
  result.attacked = std::move(attacked);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

AttackResult random_injection_baseline(const HgnnModel& surrogate, const Hypergraph& h,
                                       const Matrix& x, const std::vector<int>& labels,
                                       const Splits& splits, int budget_count,
                                       std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  if (!surrogate.frozen()) {
    throw Error(ErrorKind::Protocol, "the surrogate must be trained and frozen before attacking");
  }
  if (budget_count < 1) throw Error(ErrorKind::Injection, "random baseline needs a budget >= 1");
  if (budget_count > h.num_edges()) {
    throw Error(ErrorKind::Budget, "budget exceeds the number of hyperedges");
  }
  AttackResult result;
  result.method = "random";
  result.seed = seed;
  result.clean_rate = misclassification_rate(surrogate, normalize(h), x, labels, splits.test);

  Rng budget_rng = Rng::derive(seed, kBudgetStream);
  result.budget = random_hyperedges(h, budget_count, budget_rng);
  Rng feature_rng = Rng::derive(seed, kUniformFeatureStream);
  result.z_mal = uniform_in_bounds(feature_bounds(x), feature_rng);

  result.attacked = inject(h, result.budget, result.z_mal, x);
  result.attacked_rate =
      misclassification_rate(attacked_forward(surrogate, result.attacked), labels, splits.test);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

nlohmann::json to_json(const AttackConfig& config) {
  nlohmann::json j{{"eta", config.eta},
                   {"kernel", to_string(config.kernel)},
                   {"lr", config.lr},
                   {"max_iters", config.max_iters},
                   {"patience", config.patience},
                   {"seed", config.seed},
                   {"elite_method", to_string(config.elite_method)},
                   {"ablation", to_string(config.ablation)}};
  if (config.bandwidth.fixed) {
    j["bandwidth"] = *config.bandwidth.fixed;
  } else {
    j["bandwidth"] = "scott";
  }
  return j;
}

nlohmann::json to_json(const AttackResult& result, const nlohmann::json& config) {
  return {{"config", config},
          {"method", result.method},
          {"elite_node", result.elite_node},
          {"elite_edge", result.elite_edge},
          {"budget", result.budget},
          {"loss_trace", result.loss_trace},
          {"best_loss", result.best_loss},
          {"best_iteration", result.best_iteration},
          {"z_mal", std::vector<double>(result.z_mal.data(), result.z_mal.data() + result.z_mal.size())},
          {"clean_rate", result.clean_rate},
          {"attacked_rate", result.attacked_rate},
          {"seed", result.seed},
          {"seconds", result.seconds}};
}

}  // namespace hyperinject
