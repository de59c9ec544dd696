// Command-line driver: `hyperinject run` and `hyperinject sweep --axis <axis>`.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperinject/error.hpp"
#include "hyperinject/pipeline.hpp"

namespace hi = hyperinject;

namespace {

constexpr const char* kOutputEnv = "HYPERINJECT_OUTPUT_DIR";

struct Flags {
  std::string config_path;
  std::optional<std::string> dataset, data_dir, content, cites, construction, kernel, bandwidth,
      elite_method, output, ablations;
  std::optional<int> k, order, per_class_train, val_size, test_size, hidden, epochs, max_iters,
      patience, hbos_bins, threads, num_seeds;
  std::optional<double> gamma, dropout, surrogate_lr, weight_decay, eta, attack_lr, pca_variance,
      flag_fraction;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  bool row_normalize = false, random_baseline = false, no_detectors = false;
  std::string axis;
};

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_path, "JSON config document; flags override its values");
  app.add_option("--dataset", f.dataset, "dataset name (default cora)");
  app.add_option("--data-dir", f.data_dir, "directory holding <dataset>.content/.cites");
  app.add_option("--content", f.content, "explicit .content path");
  app.add_option("--cites", f.cites, "explicit .cites path");
  app.add_flag("--row-normalize", f.row_normalize, "L1-normalize feature rows before building");
  app.add_option("--construction", f.construction, "knn | hor | l1");
  app.add_option("--k", f.k, "neighbors per KNN hyperedge");
  app.add_option("--order", f.order, "HOR neighborhood order");
  app.add_option("--gamma", f.gamma, "L1 radius quantile");
  app.add_option("--per-class-train", f.per_class_train, "training nodes per class");
  app.add_option("--val-size", f.val_size, "validation nodes");
  app.add_option("--test-size", f.test_size, "test nodes");
  app.add_option("--hidden", f.hidden, "surrogate hidden width");
  app.add_option("--dropout", f.dropout, "surrogate dropout");
  app.add_option("--surrogate-lr", f.surrogate_lr, "surrogate learning rate");
  app.add_option("--epochs", f.epochs, "surrogate epochs");
  app.add_option("--weight-decay", f.weight_decay, "surrogate weight decay");
  app.add_option("--eta", f.eta, "elite hyperedge budget fraction in (0, 1]");
  app.add_option("--kernel", f.kernel, "gaussian | tophat | epanechnikov");
  app.add_option("--bandwidth", f.bandwidth, "KDE bandwidth, or 'scott'");
  app.add_option("--attack-lr", f.attack_lr, "generator learning rate");
  app.add_option("--max-iters", f.max_iters, "generator iterations");
  app.add_option("--patience", f.patience, "early-stop patience");
  app.add_option("--elite-method", f.elite_method,
                 "cycle_ratio | degree | betweenness | eigenvector | pagerank");
  app.add_flag("--no-detectors", f.no_detectors, "skip PCA/HBOS detection");
  app.add_option("--pca-variance", f.pca_variance, "PCA retained variance");
  app.add_option("--hbos-bins", f.hbos_bins, "HBOS bins per feature");
  app.add_option("--flag-fraction", f.flag_fraction, "fraction of nodes flagged by detectors");
  app.add_option("--ablations", f.ablations, "comma list of no_elite,no_kde,no_generator or 'all'");
  app.add_flag("--random-baseline", f.random_baseline, "also run random injection");
  app.add_option("--seed", f.seed, "single seed (default 2024)");
  app.add_option("--seeds", f.seeds, "explicit seed list");
  app.add_option("--num-seeds", f.num_seeds, "run seeds seed, seed+1, ...");
  app.add_option("--output,-o", f.output, std::string("output directory (env ") + kOutputEnv + ")");
  app.add_option("--threads", f.threads, "worker threads");
}

std::vector<hi::Ablation> parse_ablations(const std::string& text) {
  std::vector<hi::Ablation> out;
  if (text == "all") return {hi::Ablation::NoElite, hi::Ablation::NoKde, hi::Ablation::NoGenerator};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(hi::parse_ablation(item));
  }
  return out;
}

hi::RunConfig build_config(const Flags& f) {
  hi::RunConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw hi::Error(hi::ErrorKind::Config, "cannot read config " + f.config_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw hi::Error(hi::ErrorKind::Config, "config " + f.config_path + ": " + e.what());
    }
    c = hi::merge_config(c, doc);
  }
  if (const char* env = std::getenv(kOutputEnv); env && *env) c.output_dir = env;

  if (f.dataset) c.dataset = *f.dataset;
  if (f.data_dir) c.data_dir = *f.data_dir;
  if (f.content) c.content_path = *f.content;
  if (f.cites) c.cites_path = *f.cites;
  if (f.row_normalize) c.row_normalize = true;
  if (f.construction) c.construction = hi::parse_construction(*f.construction);
  if (f.k) c.k = *f.k;
  if (f.order) c.order = *f.order;
  if (f.gamma) c.gamma = *f.gamma;
  if (f.per_class_train) c.per_class_train = *f.per_class_train;
  if (f.val_size) c.val_size = *f.val_size;
  if (f.test_size) c.test_size = *f.test_size;
  if (f.hidden) c.hidden = *f.hidden;
  if (f.dropout) c.dropout = *f.dropout;
  if (f.surrogate_lr) c.surrogate_lr = *f.surrogate_lr;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.weight_decay) c.weight_decay = *f.weight_decay;
  if (f.eta) c.eta = *f.eta;
  if (f.kernel) c.kernel = hi::parse_kernel(*f.kernel);
  if (f.bandwidth) {
    if (*f.bandwidth == "scott") {
      c.bandwidth.reset();
    } else {
      try {
        c.bandwidth = std::stod(*f.bandwidth);
      } catch (const std::exception&) {
        throw hi::Error(hi::ErrorKind::Config, "bandwidth must be a number or 'scott'");
      }
    }
  }
  if (f.attack_lr) c.attack_lr = *f.attack_lr;
  if (f.max_iters) c.max_iters = *f.max_iters;
  if (f.patience) c.patience = *f.patience;
  if (f.elite_method) c.elite_method = hi::parse_elite_method(*f.elite_method);
  if (f.no_detectors) c.detectors = false;
  if (f.pca_variance) c.pca_variance = *f.pca_variance;
  if (f.hbos_bins) c.hbos_bins = *f.hbos_bins;
  if (f.flag_fraction) c.flag_fraction = *f.flag_fraction;
  if (f.ablations) c.ablations = parse_ablations(*f.ablations);
  if (f.random_baseline) c.random_baseline = true;
  if (!f.seeds.empty()) {
    c.seeds = f.seeds;
  } else if (f.seed || f.num_seeds) {
    const std::uint64_t first = f.seed ? *f.seed : c.seeds.front();
    const int n = f.num_seeds ? *f.num_seeds : 1;
    if (n < 1) throw hi::Error(hi::ErrorKind::Config, "num-seeds must be >= 1");
    c.seeds.clear();
    for (int i = 0; i < n; ++i) c.seeds.push_back(first + static_cast<std::uint64_t>(i));
  }
  if (f.output) c.output_dir = *f.output;
  if (f.threads) c.threads = *f.threads;
  hi::validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elite-hyperedge node injection attacks on hypergraph neural networks"};
  app.set_version_flag("--version", hi::version_string());
  app.require_subcommand(1);

  Flags run_flags, sweep_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "attack every seed and write results");
  add_common(*run_cmd, run_flags);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "repeat the attack across one axis");
  add_common(*sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--axis", sweep_flags.axis, "eta | kernel | elite_method")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      const hi::RunConfig config = build_config(run_flags);
      hi::run(config);
      std::cout << "wrote " << (std::filesystem::path(config.output_dir) / "results.csv").string()
                << "\n";
    } else {
      const hi::SweepAxis axis = hi::parse_sweep_axis(sweep_flags.axis);
      const hi::RunConfig config = build_config(sweep_flags);
      hi::sweep(config, axis);
      std::cout << "wrote "
                << (std::filesystem::path(config.output_dir) /
                    (std::string("sweep_") + hi::to_string(axis) + ".csv"))
                       .string()
                << "\n";
    }
  } catch (const hi::Error& e) {
    std::cerr << "error [" << hi::to_string(e.kind()) << "]: " << e.what() << "\n";
    return hi::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
