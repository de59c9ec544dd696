#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hyperinject {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

}  // namespace hyperinject
