#include "hyperinject/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hyperinject/error.hpp"
#include "hyperinject/rng.hpp"

namespace hyperinject {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view token, double& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::string location(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

bool Dataset::operator==(const Dataset& other) const {
  return node_ids == other.node_ids && labels == other.labels &&
         class_names == other.class_names && edges == other.edges &&
         dropped_edges == other.dropped_edges &&
         features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() && features == other.features;
}

Dataset load_planetoid(const std::filesystem::path& content_path,
                       const std::filesystem::path& cites_path) {
  Dataset ds;
  std::unordered_map<std::string, int> node_index;
  std::unordered_map<std::string, int> class_index;
  std::vector<double> values;
  int num_features = -1;

  auto content = open_or_throw(content_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(content, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() < 3) {
      throw Error(ErrorKind::Parse, location(content_path, line_no) +
                                        ": expected <id> <features...> <label>");
    }
    const int f = static_cast<int>(tokens.size()) - 2;
    if (num_features < 0) {
      num_features = f;
    } else if (f != num_features) {
      throw Error(ErrorKind::Schema,
                  location(content_path, line_no) + ": expected " +
                      std::to_string(num_features) + " features, found " +
                      std::to_string(f));
    }
    std::string id(tokens.front());
    if (node_index.contains(id)) {
      throw Error(ErrorKind::Parse,
                  location(content_path, line_no) + ": duplicate node id " + id);
    }
    for (int k = 0; k < f; ++k) {
      double v;
      if (!parse_double(tokens[static_cast<std::size_t>(k) + 1], v)) {
        throw Error(ErrorKind::Parse, location(content_path, line_no) +
                                          ": bad feature value '" +
                                          std::string(tokens[k + 1]) + "'");
      }
      values.push_back(v);
    }
    std::string label(tokens.back());
    auto [it, inserted] =
        class_index.try_emplace(label, static_cast<int>(class_index.size()));
    if (inserted) ds.class_names.push_back(label);
    ds.labels.push_back(it->second);
    node_index.emplace(id, static_cast<int>(ds.node_ids.size()));
    ds.node_ids.push_back(std::move(id));
  }
  if (ds.node_ids.empty()) {
    throw Error(ErrorKind::EmptyInput, content_path.string() + " has no records");
  }

  const auto n = static_cast<Eigen::Index>(ds.node_ids.size());
  ds.features.resize(n, num_features);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < num_features; ++k) {
      ds.features(i, k) = values[static_cast<std::size_t>(i * num_features + k)];
    }
  }

  auto cites = open_or_throw(cites_path);
  line_no = 0;
  while (std::getline(cites, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw Error(ErrorKind::Parse,
                  location(cites_path, line_no) + ": expected <id> <id>");
    }
    auto a = node_index.find(std::string(tokens[0]));
    auto b = node_index.find(std::string(tokens[1]));
    if (a == node_index.end() || b == node_index.end()) {
      ++ds.dropped_edges;
      continue;
    }
    ds.edges.emplace_back(a->second, b->second);
  }
  return ds;
}

void save_planetoid(const Dataset& ds, const std::filesystem::path& content_path,
                    const std::filesystem::path& cites_path) {
  std::ofstream content(content_path);
  if (!content) throw Error(ErrorKind::Io, "cannot write " + content_path.string());
  char buf[64];
  for (int i = 0; i < ds.num_nodes(); ++i) {
    content << ds.node_ids[static_cast<std::size_t>(i)];
    for (int k = 0; k < ds.num_features(); ++k) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), ds.features(i, k));
      content << '\t' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    content << '\t' << ds.class_names[static_cast<std::size_t>(ds.labels[i])] << '\n';
  }
  std::ofstream cites(cites_path);
  if (!cites) throw Error(ErrorKind::Io, "cannot write " + cites_path.string());
  for (auto [a, b] : ds.edges) {
    cites << ds.node_ids[static_cast<std::size_t>(a)] << '\t'
          << ds.node_ids[static_cast<std::size_t>(b)] << '\n';
  }
}

void row_normalize(Matrix& features) {
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double sum = features.row(i).cwiseAbs().sum();
    if (sum > 0.0) features.row(i) /= sum;
  }
}

Splits make_splits(const Dataset& ds, int per_class_train, int val_size,
                   int test_size, std::uint64_t seed) {
  const int n = ds.num_nodes();
  const int num_classes = ds.num_classes();
  if (per_class_train < 1 || val_size < 0 || test_size < 0) {
    throw Error(ErrorKind::Config,
                "per-class train size must be >= 1 and val/test sizes >= 0");
  }
  if (static_cast<long long>(per_class_train) * num_classes + val_size + test_size > n) {
    throw Error(ErrorKind::Budget,
                "split sizes exceed the " + std::to_string(n) + " available nodes");
  }

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(num_classes));
  for (int i = 0; i < n; ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  for (int c = 0; c < num_classes; ++c) {
    if (by_class[static_cast<std::size_t>(c)].empty()) {
      throw Error(ErrorKind::Stratification,
                  "class '" + ds.class_names[static_cast<std::size_t>(c)] + "' has no nodes");
    }
  }

  Rng rng(seed);
  Splits splits;
  splits.seed = seed;
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (auto& members : by_class) {
    rng.shuffle(members);
    const auto take = std::min<std::size_t>(members.size(),
                                            static_cast<std::size_t>(per_class_train));
    for (std::size_t k = 0; k < take; ++k) {
      splits.train.push_back(members[k]);
      taken[static_cast<std::size_t>(members[k])] = 1;
    }
  }
  std::vector<int> rest;
  for (int i = 0; i < n; ++i) {
    if (!taken[static_cast<std::size_t>(i)]) rest.push_back(i);
  }
  rng.shuffle(rest);
  const auto n_val = std::min<std::size_t>(rest.size(), static_cast<std::size_t>(val_size));
  const auto n_test =
      std::min<std::size_t>(rest.size() - n_val, static_cast<std::size_t>(test_size));
  splits.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
  splits.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_val),
                     rest.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));

  std::sort(splits.train.begin(), splits.train.end());
  std::sort(splits.val.begin(), splits.val.end());
  std::sort(splits.test.begin(), splits.test.end());
  return splits;
}

nlohmann::json to_json(const Splits& splits) {
  return {{"train", splits.train},
          {"val", splits.val},
          {"test", splits.test},
          {"seed", splits.seed}};
}

Splits splits_from_json(const nlohmann::json& doc) {
  Splits s;
  s.train = doc.at("train").get<std::vector<int>>();
  s.val = doc.at("val").get<std::vector<int>>();
  s.test = doc.at("test").get<std::vector<int>>();
  s.seed = doc.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace hyperinject
