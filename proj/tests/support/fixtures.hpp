#pragma once

#include "hyperinject/attack.hpp"
#include "hyperinject/dataset.hpp"
#include "hyperinject/hgnn.hpp"
#include "hyperinject/hypergraph.hpp"
#include "synthetic.hpp"

namespace hyperinject::testkit {

// A small trained-and-frozen surrogate on blob data with a KNN hypergraph.
struct AttackFixture {
  Dataset ds;
  Hypergraph h;
  Splits splits;
  HgnnModel model;
};

inline AttackFixture attack_fixture(std::uint64_t seed, int nodes = 60, int features = 8,
                                    int classes = 3, int k = 4) {
  AttackFixture f;
  f.ds = blob_dataset(nodes, features, classes, seed, 1.0);
  f.h = build_knn(f.ds.features, k);
  f.splits = make_splits(f.ds, 5, nodes / 6, nodes / 3, seed);
  f.model = HgnnModel::init(features, classes, {8, 0.5}, seed);
  train_surrogate(f.model, normalize(f.h), f.ds.features, f.ds.labels, f.splits,
                  {0.02, 80, 5e-4, seed});
  return f;
}

}  // namespace hyperinject::testkit
