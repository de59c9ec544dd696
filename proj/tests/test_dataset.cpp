#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hyperinject/dataset.hpp"
#include "hyperinject/error.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace hyperinject;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hyperinject_dataset_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Io;
}

}  // namespace

TEST(Planetoid, MinimalFiles) {
  const auto dir = temp_dir("minimal");
  write(dir / "a.content", "p1 0 1 1 A\np2 1 0 0 B\n");
  write(dir / "a.cites", "");
  const Dataset ds = load_planetoid(dir / "a.content", dir / "a.cites");
  EXPECT_EQ(ds.num_nodes(), 2);
  EXPECT_EQ(ds.num_features(), 3);
  EXPECT_EQ(ds.num_classes(), 2);
  EXPECT_TRUE(ds.edges.empty());
  EXPECT_EQ(ds.features(0, 1), 1.0);
  EXPECT_EQ(ds.labels[1], 1);
}

TEST(Planetoid, UnknownCitationDropped) {
  const auto dir = temp_dir("drop");
  write(dir / "a.content", "p1 0 1 A\np2 1 0 B\n");
  write(dir / "a.cites", "p1 p2\np1 ghost\n");
  const Dataset ds = load_planetoid(dir / "a.content", dir / "a.cites");
  ASSERT_EQ(ds.edges.size(), 1u);
  EXPECT_EQ(ds.edges[0], std::make_pair(0, 1));
  EXPECT_EQ(ds.dropped_edges, 1u);
}

TEST(Planetoid, Errors) {
  const auto dir = temp_dir("errors");
  write(dir / "c", "");
  write(dir / "bad", "p1 0 1 A\np2 x 0 B\n");
  write(dir / "short", "p1 A\n");
  write(dir / "ragged", "p1 0 1 A\np2 0 B\n");
  write(dir / "empty", "");
  EXPECT_EQ(kind_of([&] { load_planetoid(dir / "bad", dir / "c"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_planetoid(dir / "short", dir / "c"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_planetoid(dir / "ragged", dir / "c"); }), ErrorKind::Schema);
  EXPECT_EQ(kind_of([&] { load_planetoid(dir / "empty", dir / "c"); }), ErrorKind::EmptyInput);
  EXPECT_EQ(kind_of([&] { load_planetoid(dir / "missing", dir / "c"); }), ErrorKind::Io);
}

TEST(Planetoid, ParseErrorNamesLine) {
  const auto dir = temp_dir("line");
  write(dir / "a.content", "p1 0 1 A\np2 1 0 B\np3 1 q B\n");
  write(dir / "a.cites", "");
  try {
    load_planetoid(dir / "a.content", dir / "a.cites");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(Planetoid, RoundTrip) {
  testkit::CorpusSpec spec;
  spec.class_sizes = {20, 15, 10};
  spec.vocabulary = 50;
  spec.topic_words = 10;
  spec.citations = 60;
  Dataset ds = testkit::synthetic_corpus(spec);
  ds.features(3, 2) = 0.1 + 1e-17;  // non-binary value must survive the text form
  ds.features(4, 5) = 1.0 / 3.0;
  const auto dir = temp_dir("roundtrip");
  save_planetoid(ds, dir / "x.content", dir / "x.cites");
  const Dataset first = load_planetoid(dir / "x.content", dir / "x.cites");
  EXPECT_EQ(first.features, ds.features);
  EXPECT_EQ(first.node_ids, ds.node_ids);
  EXPECT_EQ(first.edges, ds.edges);
  for (int i = 0; i < ds.num_nodes(); ++i) {
    EXPECT_EQ(first.class_names[first.labels[i]], ds.class_names[ds.labels[i]]);
  }
  save_planetoid(first, dir / "y.content", dir / "y.cites");
  EXPECT_TRUE(load_planetoid(dir / "y.content", dir / "y.cites") == first);
}

TEST(RowNormalize, UnitL1Rows) {
  Matrix x(3, 3);
  x << 1, 1, 2, 0, 0, 0, 3, 0, 1;
  row_normalize(x);
  EXPECT_DOUBLE_EQ(x.row(0).sum(), 1.0);
  EXPECT_DOUBLE_EQ(x(0, 2), 0.5);
  EXPECT_EQ(x.row(1).sum(), 0.0);
  EXPECT_DOUBLE_EQ(x(2, 0), 0.75);
}

namespace {

Dataset labelled(int per_class, int classes) {
  Dataset ds;
  ds.features = Matrix::Zero(per_class * classes, 1);
  for (int c = 0; c < classes; ++c) ds.class_names.push_back(std::to_string(c));
  for (int i = 0; i < per_class * classes; ++i) {
    ds.node_ids.push_back(std::to_string(i));
    ds.labels.push_back(i % classes);
  }
  return ds;
}

}  // namespace

TEST(Splits, StandardSizes) {
  const Dataset ds = labelled(387, 7);  // 2709 nodes
  const Splits s = make_splits(ds, 20, 500, 1000, 2024);
  EXPECT_EQ(s.train.size(), 140u);
  EXPECT_EQ(s.val.size(), 500u);
  EXPECT_EQ(s.test.size(), 1000u);
  std::vector<int> per_class(7, 0);
  for (int i : s.train) ++per_class[ds.labels[i]];
  for (int c : per_class) EXPECT_EQ(c, 20);
  std::vector<int> all = s.train;
  all.insert(all.end(), s.val.begin(), s.val.end());
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
  EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
}

TEST(Splits, Deterministic) {
  const Dataset ds = labelled(50, 3);
  EXPECT_EQ(make_splits(ds, 5, 20, 30, 7), make_splits(ds, 5, 20, 30, 7));
  EXPECT_NE(make_splits(ds, 5, 20, 30, 7).test, make_splits(ds, 5, 20, 30, 8).test);
}

TEST(Splits, Exhaustion) {
  const Dataset ds = labelled(1, 3);
  const Splits s = make_splits(ds, 1, 0, 0, 1);
  EXPECT_EQ(s.train, (std::vector<int>{0, 1, 2}));
  EXPECT_TRUE(s.val.empty());
  EXPECT_TRUE(s.test.empty());
}

TEST(Splits, Errors) {
  Dataset ds = labelled(5, 3);
  ds.class_names.push_back("empty");
  EXPECT_EQ(kind_of([&] { make_splits(ds, 1, 0, 0, 1); }), ErrorKind::Stratification);
  const Dataset ok = labelled(5, 3);
  EXPECT_EQ(kind_of([&] { make_splits(ok, 2, 5, 5, 1); }), ErrorKind::Budget);
}

TEST(Splits, JsonRoundTrip) {
  const Dataset ds = labelled(30, 3);
  const Splits s = make_splits(ds, 3, 10, 20, 99);
  EXPECT_EQ(splits_from_json(to_json(s)), s);
}
