#include <glamer/kernels.hpp>

#include <omp.h>

namespace glamer::kernels {

namespace serial {

void xt_times(const Eigen::MatrixXd& X, const Eigen::VectorXd& v, Eigen::VectorXd& out)
{
    const Eigen::Index n = X.rows(), p = X.cols();
    out.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double* col = X.col(j).data();
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) s += col[i] * v[i];
        out[j] = s;
    }
}

void times(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out)
{
    const Eigen::Index n = X.rows(), p = X.cols();
    out.setZero(n);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double bj = b[j];
        if (bj == 0.0) continue;
        const double* col = X.col(j).data();
        for (Eigen::Index i = 0; i < n; ++i) out[i] += col[i] * bj;
    }
}

} // namespace serial

namespace omp {

void xt_times(const Eigen::MatrixXd& X, const Eigen::VectorXd& v, Eigen::VectorXd& out)
{
    const Eigen::Index n = X.rows(), p = X.cols();
    out.resize(p);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < p; ++j) {
        const double* col = X.col(j).data();
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) s += col[i] * v[i];
        out[j] = s;
    }
}

void times(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out)
{
    const Eigen::Index n = X.rows(), p = X.cols();
    out.setZero(n);
#pragma omp parallel
    {
        // each thread owns a contiguous row range and sweeps all columns over it
        const Eigen::Index nt = omp_get_num_threads();
        const Eigen::Index t = omp_get_thread_num();
        const Eigen::Index lo = n * t / nt, hi = n * (t + 1) / nt;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double bj = b[j];
            if (bj == 0.0) continue;
            const double* col = X.col(j).data();
            for (Eigen::Index i = lo; i < hi; ++i) out[i] += col[i] * bj;
        }
    }
}

} // namespace omp

namespace {
bool go_parallel(const Eigen::MatrixXd& X)
{
    return X.rows() * X.cols() >= parallel_threshold && !omp_in_parallel() && omp_get_max_threads() > 1;
}
} // namespace

void xt_times(const Eigen::MatrixXd& X, const Eigen::VectorXd& v, Eigen::VectorXd& out)
{
    if (go_parallel(X)) omp::xt_times(X, v, out);
    else serial::xt_times(X, v, out);
}

void times(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out)
{
    if (go_parallel(X)) omp::times(X, b, out);
    else serial::times(X, b, out);
}

} // namespace glamer::kernels
