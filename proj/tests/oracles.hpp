#pragma once

#include <glamer/design.hpp>
#include <glamer/glm.hpp>

#include <Eigen/Dense>

// Independent reference solvers used only by tests.
namespace oracle {

// Plain proximal gradient on the full vector u = W beta (intercept weight 1,
// unpenalized) with a fixed step 1/L, L the largest eigenvalue of the whole
// reparametrized Gram matrix (a quarter of it for logistic).
inline Eigen::VectorXd slow_group_lasso(const glamer::DesignMatrix& d, const Eigen::VectorXd& y,
                                        glamer::Family family, const Eigen::VectorXd& w, double lambda,
                                        long iterations)
{
    Eigen::MatrixXd Xt = d.X * w.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Xt.transpose() * Xt, Eigen::EigenvaluesOnly);
    double L = es.eigenvalues().maxCoeff() * (family == glamer::Family::gaussian ? 1.0 : 0.25);
    double t = 1.0 / L;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(d.p());
    Eigen::VectorXd eta(d.n()), r(d.n()), g(d.p());
    for (long it = 0; it < iterations; ++it) {
        eta.noalias() = Xt * u;
        for (Eigen::Index i = 0; i < d.n(); ++i)
            r[i] = (family == glamer::Family::gaussian ? eta[i] : 1.0 / (1.0 + std::exp(-eta[i]))) - y[i];
        g.noalias() = Xt.transpose() * r;
        u -= t * g;
        for (const auto& grp : d.groups) {
            auto seg = u.segment(grp.start, grp.size);
            double nrm = seg.norm();
            if (nrm <= t * lambda) seg.setZero();
            else seg *= 1.0 - t * lambda / nrm;
        }
    }
    return u.cwiseQuotient(w);
}

// Rand index by enumerating level pairs.
inline double rand_index(const std::vector<int>& label_a, const std::vector<int>& label_b)
{
    int agree = 0, total = 0;
    for (std::size_t i = 0; i < label_a.size(); ++i)
        for (std::size_t j = i + 1; j < label_a.size(); ++j) {
            agree += (label_a[i] == label_a[j]) == (label_b[i] == label_b[j]);
            ++total;
        }
    return total ? static_cast<double>(agree) / total : 1.0;
}

} // namespace oracle
