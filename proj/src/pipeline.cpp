#include "hyperinject/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "hyperinject/error.hpp"

namespace hyperinject {

const char* to_string(Construction c) {
  switch (c) {
    case Construction::Knn: return "knn";
    case Construction::Hor: return "hor";
    case Construction::L1: return "l1";
  }
  return "?";
}

Construction parse_construction(const std::string& name) {
  for (auto c : {Construction::Knn, Construction::Hor, Construction::L1}) {
    if (name == to_string(c)) return c;
  }
  throw Error(ErrorKind::Config, "unknown construction '" + name + "' (knn, hor, l1)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Eta: return "eta";
    case SweepAxis::Kernel: return "kernel";
    case SweepAxis::EliteMethod: return "elite_method";
  }
  return "?";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  for (auto a : {SweepAxis::Eta, SweepAxis::Kernel, SweepAxis::EliteMethod}) {
    if (name == to_string(a)) return a;
  }
  throw Error(ErrorKind::Config, "unknown sweep axis '" + name + "'");
}

std::filesystem::path RunConfig::resolved_content() const {
  if (!content_path.empty()) return content_path;
  const std::filesystem::path dir = data_dir.empty() ? std::filesystem::path("data") / dataset : std::filesystem::path(data_dir);
  return dir / (dataset + ".content");
}

std::filesystem::path RunConfig::resolved_cites() const {
  if (!cites_path.empty()) return cites_path;
  const std::filesystem::path dir = data_dir.empty() ? std::filesystem::path("data") / dataset : std::filesystem::path(data_dir);
  return dir / (dataset + ".cites");
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::Config, message);
}

}  // namespace

void validate(const RunConfig& c) {
  require(c.eta > 0.0 && c.eta <= 1.0, "eta must lie in (0, 1], got " + std::to_string(c.eta));
  require(c.k >= 1, "k must be >= 1");
  require(c.order >= 1, "order must be >= 1");
  require(c.gamma > 0.0 && c.gamma < 1.0, "gamma must lie in (0, 1)");
  require(c.per_class_train >= 1, "per_class_train must be >= 1");
  require(c.val_size >= 0 && c.test_size >= 1, "val_size must be >= 0 and test_size >= 1");
  require(c.hidden >= 1, "hidden must be >= 1");
  require(c.dropout >= 0.0 && c.dropout < 1.0, "dropout must lie in [0, 1)");
  require(c.surrogate_lr >= 0.0, "surrogate_lr must be >= 0");
  require(c.epochs >= 0, "epochs must be >= 0");
  require(c.weight_decay >= 0.0, "weight_decay must be >= 0");
  require(!c.bandwidth || *c.bandwidth > 0.0, "bandwidth must be positive");
  require(c.attack_lr >= 0.0, "attack_lr must be >= 0");
  require(c.max_iters >= 1, "max_iters must be >= 1");
  require(c.patience >= 1, "patience must be >= 1");
  require(c.pca_variance > 0.0 && c.pca_variance <= 1.0, "pca_variance must lie in (0, 1]");
  require(c.hbos_bins >= 2, "hbos_bins must be >= 2");
  require(c.flag_fraction > 0.0 && c.flag_fraction < 1.0, "flag_fraction must lie in (0, 1)");
  require(!c.seeds.empty(), "at least one seed is required");
  require(c.threads >= 1, "threads must be >= 1");
}

nlohmann::json to_json(const RunConfig& c) {
  std::vector<std::string> ablations;
  for (auto a : c.ablations) ablations.emplace_back(to_string(a));
  nlohmann::json j{
      {"dataset", c.dataset},
      {"data_dir", c.data_dir},
      {"content_path", c.content_path},
      {"cites_path", c.cites_path},
      {"row_normalize", c.row_normalize},
      {"construction", to_string(c.construction)},
      {"k", c.k},
      {"order", c.order},
      {"gamma", c.gamma},
      {"per_class_train", c.per_class_train},
      {"val_size", c.val_size},
      {"test_size", c.test_size},
      {"hidden", c.hidden},
      {"dropout", c.dropout},
      {"surrogate_lr", c.surrogate_lr},
      {"epochs", c.epochs},
      {"weight_decay", c.weight_decay},
      {"eta", c.eta},
      {"kernel", to_string(c.kernel)},
      {"attack_lr", c.attack_lr},
      {"max_iters", c.max_iters},
      {"patience", c.patience},
      {"elite_method", to_string(c.elite_method)},
      {"detectors", c.detectors},
      {"pca_variance", c.pca_variance},
      {"hbos_bins", c.hbos_bins},
      {"flag_fraction", c.flag_fraction},
      {"ablations", ablations},
      {"random_baseline", c.random_baseline},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir},
      {"threads", c.threads},
  };
  j["bandwidth"] = c.bandwidth ? nlohmann::json(*c.bandwidth) : nlohmann::json("scott");
  return j;
}

RunConfig merge_config(RunConfig c, const nlohmann::json& doc) {
  require(doc.is_object(), "config document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "dataset") c.dataset = value.get<std::string>();
      else if (key == "data_dir") c.data_dir = value.get<std::string>();
      else if (key == "content_path") c.content_path = value.get<std::string>();
      else if (key == "cites_path") c.cites_path = value.get<std::string>();
      else if (key == "row_normalize") c.row_normalize = value.get<bool>();
      else if (key == "construction") c.construction = parse_construction(value.get<std::string>());
      else if (key == "k") c.k = value.get<int>();
      else if (key == "order") c.order = value.get<int>();
      else if (key == "gamma") c.gamma = value.get<double>();
      else if (key == "per_class_train") c.per_class_train = value.get<int>();
      else if (key == "val_size") c.val_size = value.get<int>();
      else if (key == "test_size") c.test_size = value.get<int>();
      else if (key == "hidden") c.hidden = value.get<int>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "surrogate_lr") c.surrogate_lr = value.get<double>();
      else if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "weight_decay") c.weight_decay = value.get<double>();
      else if (key == "eta") c.eta = value.get<double>();
      else if (key == "kernel") c.kernel = parse_kernel(value.get<std::string>());
      else if (key == "bandwidth") {
        if (value.is_string()) {
          require(value.get<std::string>() == "scott", "bandwidth must be a number or \"scott\"");
          c.bandwidth.reset();
        } else {
          c.bandwidth = value.get<double>();
        }
      }
      else if (key == "attack_lr") c.attack_lr = value.get<double>();
      else if (key == "max_iters") c.max_iters = value.get<int>();
      else if (key == "patience") c.patience = value.get<int>();
      else if (key == "elite_method") c.elite_method = parse_elite_method(value.get<std::string>());
      else if (key == "detectors") c.detectors = value.get<bool>();
      else if (key == "pca_variance") c.pca_variance = value.get<double>();
      else if (key == "hbos_bins") c.hbos_bins = value.get<int>();
      else if (key == "flag_fraction") c.flag_fraction = value.get<double>();
      else if (key == "ablations") {
        c.ablations.clear();
        for (const auto& a : value) c.ablations.push_back(parse_ablation(a.get<std::string>()));
      }
      else if (key == "random_baseline") c.random_baseline = value.get<bool>();
      else if (key == "seeds") c.seeds = value.get<std::vector<std::uint64_t>>();
      else if (key == "output_dir") c.output_dir = value.get<std::string>();
      else if (key == "threads") c.threads = value.get<int>();
      else throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Config, "config key '" + key + "': " + e.what());
    }
  }
  return c;
}

std::string config_hash(const RunConfig& config) {
  nlohmann::json j = to_json(config);
  j.erase("output_dir");
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string version_string() { return std::string("hyperinject-") + HYPERINJECT_VERSION; }

PreparedData prepare(const RunConfig& config) {
  PreparedData data;
  data.dataset = load_planetoid(config.resolved_content(), config.resolved_cites());
  if (config.row_normalize) row_normalize(data.dataset.features);
  switch (config.construction) {
    case Construction::Knn:
      data.hypergraph = build_knn(data.dataset.features, config.k);
      break;
    case Construction::Hor:
      data.hypergraph = build_hor(data.dataset.edges, data.dataset.num_nodes(), config.order);
      break;
    case Construction::L1:
      data.hypergraph = build_l1(data.dataset.features, config.gamma);
      break;
  }
  return data;
}

SeedModel train_for_seed(const RunConfig& config, const PreparedData& data, std::uint64_t seed) {
  SeedModel out;
  out.seed = seed;
  out.splits = make_splits(data.dataset, config.per_class_train, config.val_size,
                           config.test_size, seed);
  out.surrogate = HgnnModel::init(data.dataset.num_features(), data.dataset.num_classes(),
                                  HgnnConfig{config.hidden, config.dropout}, seed);
  TrainConfig tc{config.surrogate_lr, config.epochs, config.weight_decay, seed};
  out.training = train_surrogate(out.surrogate, normalize(data.hypergraph),
                                 data.dataset.features, data.dataset.labels, out.splits, tc);
  return out;
}

AttackConfig attack_config(const RunConfig& config, std::uint64_t seed) {
  AttackConfig ac;
  ac.eta = config.eta;
  ac.kernel = config.kernel;
  ac.bandwidth.fixed = config.bandwidth;
  ac.lr = config.attack_lr;
  ac.max_iters = config.max_iters;
  ac.patience = config.patience;
  ac.seed = seed;
  ac.elite_method = config.elite_method;
  return ac;
}

namespace {

struct JobOutput {
  std::vector<ResultRow> rows;
  nlohmann::json results = nlohmann::json::array();
};

struct Job {
  std::string axis;
  std::string value;
  RunConfig config;
  const SeedModel* model = nullptr;
};

JobOutput run_job(const Job& job, const PreparedData& data) {
  const RunConfig& c = job.config;
  const auto& ds = data.dataset;
  const SeedModel& sm = *job.model;
  const AttackConfig ac = attack_config(c, sm.seed);

  std::vector<AttackResult> results;
  results.push_back(run_attack(sm.surrogate, data.hypergraph, ds.features, ds.labels, sm.splits, ac));
  for (auto a : c.ablations) {
    if (a == Ablation::None) continue;
    results.push_back(
        ablation_variant(sm.surrogate, data.hypergraph, ds.features, ds.labels, sm.splits, ac, a));
  }
  if (c.random_baseline) {
    results.push_back(random_injection_baseline(sm.surrogate, data.hypergraph, ds.features,
                                                ds.labels, sm.splits,
                                                static_cast<int>(results.front().budget.size()),
                                                sm.seed));
  }

  JobOutput out;
  const nlohmann::json ac_json = to_json(ac);
  for (const auto& r : results) {
    ResultRow row;
    row.axis = job.axis;
    row.value = job.value;
    row.dataset = c.dataset;
    row.construction = to_string(c.construction);
    row.method = r.method;
    row.eta = c.eta;
    row.kernel = to_string(c.kernel);
    row.elite_method = to_string(c.elite_method);
    row.seed = sm.seed;
    row.clean_rate = r.clean_rate;
    row.attacked_rate = r.attacked_rate;
    nlohmann::json rj = to_json(r, ac_json);
    if (c.detectors) {
      const auto pca = evaluate_under_detection(sm.surrogate, r, ds.labels, sm.splits.test,
                                                Detector::Pca,
                                                PcaOptions{c.pca_variance, c.flag_fraction});
      const auto hbos = evaluate_under_detection(sm.surrogate, r, ds.labels, sm.splits.test,
                                                 Detector::Hbos, PcaOptions{},
                                                 HbosOptions{c.hbos_bins, c.flag_fraction});
      row.pca_rate = pca.rate;
      row.hbos_rate = hbos.rate;
      rj["pca_rate"] = pca.rate;
      rj["pca_flagged_injected"] = pca.report.injected_flagged;
      rj["hbos_rate"] = hbos.rate;
      rj["hbos_flagged_injected"] = hbos.report.injected_flagged;
    }
    if (!job.axis.empty()) {
      rj["axis"] = job.axis;
      rj["value"] = job.value;
    }
    out.rows.push_back(std::move(row));
    out.results.push_back(std::move(rj));
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

RunOutput execute_jobs(const RunConfig& config, const PreparedData& data,
                       std::vector<Job> jobs, std::vector<SeedModel>& models) {
  std::vector<JobOutput> outputs(jobs.size());
  parallel_for(jobs.size(), config.threads,
               [&](std::size_t i) { outputs[i] = run_job(jobs[i], data); });

  RunOutput out;
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& sm = *jobs[i].model;
    nlohmann::json rj{{"seed", sm.seed},
                      {"best_epoch", sm.training.best_epoch},
                      {"results", outputs[i].results}};
    if (!sm.training.trace.empty()) {
      rj["final_val_accuracy"] = sm.training.trace.back().val_accuracy;
    }
    runs.push_back(std::move(rj));
    for (auto& row : outputs[i].rows) out.rows.push_back(std::move(row));
  }
  out.summaries = summarize(out.rows);
  (void)models;
  out.document = {{"version", version_string()},
                  {"config_hash", config_hash(config)},
                  {"config", to_json(config)},
                  {"runs", runs}};
  return out;
}

std::vector<SeedModel> train_all(const RunConfig& config, const PreparedData& data) {
  std::vector<SeedModel> models(config.seeds.size());
  parallel_for(models.size(), config.threads, [&](std::size_t i) {
    models[i] = train_for_seed(config, data, config.seeds[i]);
  });
  return models;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt2(*v) : "NA"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
}

}  // namespace

RunOutput execute_run(const RunConfig& config, const PreparedData& data) {
  validate(config);
  std::vector<SeedModel> models = train_all(config, data);
  std::vector<Job> jobs;
  for (const auto& m : models) jobs.push_back(Job{"", "", config, &m});
  return execute_jobs(config, data, std::move(jobs), models);
}

RunOutput execute_sweep(const RunConfig& config, const PreparedData& data, SweepAxis axis) {
  validate(config);
  std::vector<std::pair<std::string, RunConfig>> variants;
  switch (axis) {
    case SweepAxis::Eta:
      for (int step = 1; step <= 10; ++step) {
        RunConfig c = config;
        c.eta = step / 10.0;
        variants.emplace_back(fmt2(c.eta).substr(0, 3), c);
      }
      break;
    case SweepAxis::Kernel:
      for (auto k : {Kernel::Gaussian, Kernel::Tophat, Kernel::Epanechnikov}) {
        RunConfig c = config;
        c.kernel = k;
        variants.emplace_back(to_string(k), c);
      }
      break;
    case SweepAxis::EliteMethod:
      for (auto m : {EliteMethod::CycleRatio, EliteMethod::Degree, EliteMethod::Betweenness,
                     EliteMethod::Eigenvector, EliteMethod::PageRank}) {
        RunConfig c = config;
        c.elite_method = m;
        variants.emplace_back(to_string(m), c);
      }
      break;
  }
  // Evasion setting: one surrogate per seed, shared by every axis value.
  std::vector<SeedModel> models = train_all(config, data);
  std::vector<Job> jobs;
  for (const auto& [value, c] : variants) {
    for (const auto& m : models) jobs.push_back(Job{to_string(axis), value, c, &m});
  }
  return execute_jobs(config, data, std::move(jobs), models);
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, std::string>, std::vector<const ResultRow*>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.value, r.method);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& members = groups[key];
    if (members.size() < 2) continue;
    auto stat = [&](auto get, std::optional<double>& mean, std::optional<double>& sd) {
      double s = 0.0;
      for (const auto* m : members) {
        const std::optional<double> v = get(*m);
        if (!v) return;
        s += *v;
      }
      const double n = static_cast<double>(members.size());
      const double mu = s / n;
      double ss = 0.0;
      for (const auto* m : members) ss += (*get(*m) - mu) * (*get(*m) - mu);
      mean = mu;
      sd = std::sqrt(ss / (n - 1.0));
    };
    SummaryRow srow;
    srow.mean = *members.front();
    srow.stddev = *members.front();
    srow.count = static_cast<int>(members.size());
    std::optional<double> m, sd;
    stat([](const ResultRow& r) { return std::optional<double>(r.clean_rate); }, m, sd);
    srow.mean.clean_rate = *m;
    srow.stddev.clean_rate = *sd;
    stat([](const ResultRow& r) { return std::optional<double>(r.attacked_rate); }, m, sd);
    srow.mean.attacked_rate = *m;
    srow.stddev.attacked_rate = *sd;
    m.reset();
    sd.reset();
    stat([](const ResultRow& r) { return r.pca_rate; }, m, sd);
    srow.mean.pca_rate = m;
    srow.stddev.pca_rate = sd;
    m.reset();
    sd.reset();
    stat([](const ResultRow& r) { return r.hbos_rate; }, m, sd);
    srow.mean.hbos_rate = m;
    srow.stddev.hbos_rate = sd;
    out.push_back(std::move(srow));
  }
  return out;
}

std::string format_csv(const RunOutput& output, const RunConfig& config, bool include_axis) {
  const std::string hash = config_hash(config);
  const std::string version = version_string();
  std::ostringstream os;
  if (include_axis) os << "axis,value,";
  os << "dataset,construction,method,eta,kernel,seed,clean_rate,attacked_rate,pca_rate,"
        "hbos_rate,elite_method,config_hash,version\n";
  auto prefix = [&](const ResultRow& r) {
    if (include_axis) os << r.axis << ',' << r.value << ',';
    os << r.dataset << ',' << r.construction << ',' << r.method << ',' << fmt2(r.eta) << ','
       << r.kernel << ',';
  };
  auto suffix = [&](const ResultRow& r) {
    os << ',' << r.elite_method << ',' << hash << ',' << version << '\n';
  };
  for (const auto& r : output.rows) {
    prefix(r);
    os << r.seed << ',' << fmt2(r.clean_rate) << ',' << fmt2(r.attacked_rate) << ','
       << fmt_opt(r.pca_rate) << ',' << fmt_opt(r.hbos_rate);
    suffix(r);
  }
  auto pm = [](const std::optional<double>& m, const std::optional<double>& s) {
    return m ? fmt2(*m) + "+-" + fmt2(*s) : std::string("NA");
  };
  for (const auto& s : output.summaries) {
    prefix(s.mean);
    os << "summary," << pm(s.mean.clean_rate, s.stddev.clean_rate) << ','
       << pm(s.mean.attacked_rate, s.stddev.attacked_rate) << ','
       << pm(s.mean.pca_rate, s.stddev.pca_rate) << ',' << pm(s.mean.hbos_rate, s.stddev.hbos_rate);
    suffix(s.mean);
  }
  return os.str();
}

void run(const RunConfig& config) {
  validate(config);
  const PreparedData data = prepare(config);
  std::vector<SeedModel> models = train_all(config, data);
  std::vector<Job> jobs;
  for (const auto& m : models) jobs.push_back(Job{"", "", config, &m});
  const RunOutput out = execute_jobs(config, data, std::move(jobs), models);

  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  write_text(dir / "results.csv", format_csv(out, config, false));
  write_text(dir / "results.json", out.document.dump(2) + "\n");
  for (const auto& m : models) {
    write_text(dir / ("surrogate_" + std::to_string(m.seed) + ".json"),
               to_json(m.surrogate).dump() + "\n");
  }
}

void sweep(const RunConfig& config, SweepAxis axis) {
  validate(config);
  const PreparedData data = prepare(config);
  const RunOutput out = execute_sweep(config, data, axis);
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  const std::string stem = std::string("sweep_") + to_string(axis);
  write_text(dir / (stem + ".csv"), format_csv(out, config, true));
  write_text(dir / (stem + ".json"), out.document.dump(2) + "\n");
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Budget:
      return 2;
    case ErrorKind::Parse:
    case ErrorKind::Schema:
    case ErrorKind::EmptyInput:
    case ErrorKind::Stratification:
    case ErrorKind::Io:
      return 3;
    case ErrorKind::Divergence:
      return 4;
    default:
      return 1;
  }
}

}  // namespace hyperinject
