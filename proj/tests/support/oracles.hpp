#pragma once

// Straightforward dense reference implementations used as test oracles.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace hyperinject::testkit {

using Dense = Eigen::MatrixXd;

inline Dense dense_incidence(int nodes, const std::vector<std::vector<int>>& edges) {
  Dense h = Dense::Zero(nodes, static_cast<int>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    for (int v : edges[e]) h(v, static_cast<int>(e)) = 1.0;
  }
  return h;
}

// Dv^-1/2 H De^-1 H^T Dv^-1/2 by explicit diagonal matrices.
inline Dense dense_normalized(const Dense& h) {
  const int n = static_cast<int>(h.rows());
  const int m = static_cast<int>(h.cols());
  Dense dv = Dense::Zero(n, n);
  Dense de = Dense::Zero(m, m);
  for (int i = 0; i < n; ++i) {
    const double d = h.row(i).sum();
    dv(i, i) = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  for (int e = 0; e < m; ++e) {
    const double d = h.col(e).sum();
    de(e, e) = d > 0 ? 1.0 / d : 0.0;
  }
  return dv * h * de * h.transpose() * dv;
}

inline Dense relu(const Dense& m) { return m.cwiseMax(0.0); }

inline Dense dense_forward(const Dense& a, const Dense& x, const Dense& w1, const Dense& w2) {
  return a * relu(a * x * w1) * w2;
}

}  // namespace hyperinject::testkit
