#pragma once

#include <Eigen/Dense>

// Dense matrix-vector kernels used by the solvers. The serial versions are
// the reference; the OpenMP versions split the same loops across threads
// without changing any per-element summation order, so both produce
// bit-identical results.
namespace glamer::kernels {

namespace serial {
/// out = X^T v
void xt_times(const Eigen::MatrixXd& X, const Eigen::VectorXd& v, Eigen::VectorXd& out);
/// out = X b
void times(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out);
} // namespace serial

namespace omp {
void xt_times(const Eigen::MatrixXd& X, const Eigen::VectorXd& v, Eigen::VectorXd& out);
void times(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out);
} // namespace omp

/// Picks the OpenMP kernel for large problems outside an enclosing parallel region.
void xt_times(const Eigen::MatrixXd& X, const Eigen::VectorXd& v, Eigen::VectorXd& out);
void times(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out);

/// Work size (rows * cols) above which the dispatchers go parallel.
inline constexpr Eigen::Index parallel_threshold = 1 << 16;

} // namespace glamer::kernels
