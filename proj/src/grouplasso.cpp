#include <glamer/grouplasso.hpp>
#include <glamer/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace glamer {

namespace {

constexpr double zero_block_norm = 1e-12;

double sigmoid(double a)
{
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    double e = std::exp(a);
    return e / (1.0 + e);
}

// Exact 1-D minimization of the loss over the intercept with everything
// else held fixed. Updates beta0 and eta in place.
void update_intercept(Family family, const CollapsedRows& rows, double& beta0, Eigen::VectorXd& eta, double gtol)
{
    const auto& c = rows.count;
    const auto& s = rows.ysum;
    if (family == Family::gaussian) {
        double delta = (s.sum() - c.dot(eta)) / static_cast<double>(rows.n);
        beta0 += delta;
        eta.array() += delta;
        return;
    }
    for (int it = 0; it < 50; ++it) {
        double g = 0.0, h = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            double m = sigmoid(eta[i]);
            g += c[i] * m - s[i];
            h += c[i] * m * (1.0 - m);
        }
        if (std::abs(g) <= gtol || h <= 0.0) return;
        double delta = -g / h;
        // the 1-D logistic loss is smooth enough that a capped Newton step always descends
        delta = std::clamp(delta, -2.0, 2.0);
        beta0 += delta;
        eta.array() += delta;
        if (std::abs(delta) <= 1e-15 * (1.0 + std::abs(beta0))) return;
    }
}

// KKT violations from a full gradient, intercept first.
std::vector<double> violations(const DesignMatrix& d, const Eigen::VectorXd& w, double lambda,
                               const Eigen::VectorXd& grad, const Eigen::VectorXd& beta)
{
    std::vector<double> out;
    out.reserve(d.r() + 1);
    out.push_back(std::abs(grad[0]));
    for (const auto& g : d.groups) {
        Eigen::VectorXd gs = grad.segment(g.start, g.size).cwiseQuotient(w.segment(g.start, g.size));
        Eigen::VectorXd u = w.segment(g.start, g.size).cwiseProduct(beta.segment(g.start, g.size));
        double un = u.norm();
        if (un < zero_block_norm) {
            out.push_back(std::max(0.0, gs.norm() - lambda));
        } else {
            out.push_back((gs + lambda * u / un).norm());
        }
    }
    return out;
}

double max_violation(const DesignMatrix& d, const Eigen::VectorXd& w, double lambda, const Eigen::VectorXd& grad,
                     const Eigen::VectorXd& beta)
{
    auto v = violations(d, w, lambda, grad, beta);
    return *std::max_element(v.begin(), v.end());
}

} // namespace

GroupedCoefficients GroupedCoefficients::from_flat(const DesignMatrix& design, const Eigen::VectorXd& beta)
{
    GroupedCoefficients out;
    out.intercept = beta[0];
    for (const auto& g : design.groups) {
        CoefficientBlock b;
        b.name = g.name;
        b.kind = g.kind;
        if (g.is_factor()) b.levels.assign(g.levels.begin() + 1, g.levels.end());
        b.values = beta.segment(g.start, g.size);
        out.blocks.push_back(std::move(b));
    }
    return out;
}

Eigen::VectorXd GroupedCoefficients::flatten() const
{
    Eigen::Index p = 1;
    for (const auto& b : blocks) p += b.values.size();
    Eigen::VectorXd beta(p);
    beta[0] = intercept;
    Eigen::Index at = 1;
    for (const auto& b : blocks) {
        beta.segment(at, b.values.size()) = b.values;
        at += b.values.size();
    }
    return beta;
}

Eigen::VectorXd group_soft_threshold(const Eigen::VectorXd& v, double t)
{
    double norm = v.norm();
    if (norm <= t) return Eigen::VectorXd::Zero(v.size());
    return v * (1.0 - t / norm);
}

double group_penalty(const DesignMatrix& design, const WeightMatrix& weights, const Eigen::VectorXd& beta)
{
    double s = 0.0;
    for (const auto& g : design.groups) {
        s += (weights.w.segment(g.start, g.size).array() * beta.segment(g.start, g.size).array()).matrix().norm();
    }
    return s;
}

GroupLassoSolver::GroupLassoSolver(const DesignMatrix& design, const Eigen::VectorXd& y, Family family,
                                   const WeightMatrix& weights)
    : design_(design), y_(y), family_(family), weights_(weights), rows_(collapse_rows(design.X, y))
{
    if (y.size() != design.n()) throw std::invalid_argument("GroupLassoSolver: response length mismatch");
    if (weights.w.size() != design.p()) throw std::invalid_argument("GroupLassoSolver: weight length mismatch");
    const double curvature = family == Family::gaussian ? 1.0 : 0.25;
    lipschitz_.reserve(design.r());
    for (const auto& g : design.groups) {
        Eigen::MatrixXd Xs = design.X.middleCols(g.start, g.size) *
                             weights.w.segment(g.start, g.size).cwiseInverse().asDiagonal();
        double top = 0.0;
        if (g.size == 1) {
            top = Xs.col(0).squaredNorm();
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Xs.transpose() * Xs, Eigen::EigenvaluesOnly);
            top = es.eigenvalues().maxCoeff();
        }
        lipschitz_.push_back(curvature * top);
    }
}

GroupLassoSolution GroupLassoSolver::solve(double lambda, const GroupLassoOptions& options,
                                           const std::optional<Eigen::VectorXd>& start) const
{
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    const auto& X = rows_.X;
    const auto& w = weights_.w;
    const double target = options.tol * (1.0 + lambda);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(design_.p());
    if (start) {
        if (start->size() != design_.p()) throw std::invalid_argument("warm start has wrong length");
        beta = *start;
    } else {
        beta[0] = family_ == Family::gaussian ? y_.mean() : 0.0;
    }
    std::vector<double> lipschitz = lipschitz_;

    Eigen::VectorXd eta, resid, grad;
    auto refresh = [&] {
        kernels::times(X, beta, eta);
        resid = working_residual(family_, rows_, eta);
        kernels::xt_times(X, resid, grad);
    };
    auto kkt_now = [&] { return max_violation(design_, w, lambda, grad, beta); };

    GroupLassoSolution sol;
    auto finish = [&](int iters, bool converged, double kkt) {
        sol.flat = beta;
        sol.beta = GroupedCoefficients::from_flat(design_, beta);
        sol.iterations = iters;
        sol.converged = converged;
        sol.kkt_residual = kkt;
        sol.objective = loss(family_, rows_, eta) + lambda * group_penalty(design_, weights_, beta);
        return sol;
    };

    kernels::times(X, beta, eta);
    // the intercept first, so a cold start begins at the null fit
    update_intercept(family_, rows_, beta[0], eta, 1e-3 * target);
    refresh();
    double kkt = kkt_now();
    if (kkt <= target) return finish(0, true, kkt);
    double f = loss(family_, rows_, eta);

    Eigen::VectorXd eta_new(X.rows());
    for (int sweep = 1; sweep <= options.max_iter; ++sweep) {
        for (std::size_t k = 0; k < design_.r(); ++k) {
            const auto& g = design_.groups[k];
            if (lipschitz[k] <= 0.0) continue;
            auto Xk = X.middleCols(g.start, g.size);
            auto wk = w.segment(g.start, g.size);

            Eigen::VectorXd grad_u = (Xk.transpose() * resid).cwiseQuotient(wk);
            Eigen::VectorXd u = wk.cwiseProduct(beta.segment(g.start, g.size));
            double penalty_old = u.norm();
            for (int bt = 0; bt < 60; ++bt) {
                const double L = lipschitz[k];
                Eigen::VectorXd u_new = group_soft_threshold(u - grad_u / L, lambda / L);
                Eigen::VectorXd du = u_new - u;
                if (du.squaredNorm() == 0.0) break;
                Eigen::VectorXd dbeta = du.cwiseQuotient(wk);
                eta_new = eta + Xk * dbeta;
                double f_new = loss(family_, rows_, eta_new);
                double bound = f + grad_u.dot(du) + 0.5 * L * du.squaredNorm();
                const double slack = 1e-12 * (1.0 + std::abs(f));
                if (f_new <= bound + slack) {
                    if (f_new + lambda * u_new.norm() <= f + lambda * penalty_old + slack) {
                        beta.segment(g.start, g.size) += dbeta;
                        eta.swap(eta_new);
                        f = f_new;
                        resid = working_residual(family_, rows_, eta);
                    }
                    break;
                }
                lipschitz[k] *= 2.0;
            }
        }

        update_intercept(family_, rows_, beta[0], eta, 1e-3 * target);

        for (const auto& g : design_.groups) {
            auto bk = beta.segment(g.start, g.size);
            if (bk.squaredNorm() != 0.0 &&
                (w.segment(g.start, g.size).array() * bk.array()).matrix().norm() < zero_block_norm) {
                bk.setZero();
            }
        }
        // eta recomputed from beta so rounding does not accumulate across sweeps
        refresh();
        f = loss(family_, rows_, eta);
        sol.objective_trace.push_back(f + lambda * group_penalty(design_, weights_, beta));

        kkt = kkt_now();
        if (kkt <= target) return finish(sweep, true, kkt);
    }
    return finish(options.max_iter, false, kkt);
}

std::vector<GroupLassoSolution> GroupLassoSolver::solve_path(const std::vector<double>& lambdas,
                                                             const GroupLassoOptions& options) const
{
    std::vector<GroupLassoSolution> out;
    out.reserve(lambdas.size());
    std::optional<Eigen::VectorXd> start;
    for (double lambda : lambdas) {
        out.push_back(solve(lambda, options, start));
        start = out.back().flat;
    }
    return out;
}

GroupLassoSolution fit(const GroupLassoProblem& problem, const GroupLassoOptions& options,
                       const std::optional<Eigen::VectorXd>& start)
{
    if (!(problem.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    GroupLassoSolver solver(problem.design, problem.y, problem.family, problem.weights);
    return solver.solve(problem.lambda, options, start);
}

std::vector<double> kkt_violations(const GroupLassoProblem& problem, const Eigen::VectorXd& beta)
{
    Eigen::VectorXd grad = loss_gradient(problem.family, problem.y, problem.design.X, beta);
    return violations(problem.design, problem.weights.w, problem.lambda, grad, beta);
}

double kkt_residual(const GroupLassoProblem& problem, const Eigen::VectorXd& beta)
{
    auto v = kkt_violations(problem, beta);
    return *std::max_element(v.begin(), v.end());
}

double kkt_residual(const GroupLassoProblem& problem, const GroupedCoefficients& beta)
{
    return kkt_residual(problem, beta.flatten());
}

double lambda_max(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, const WeightMatrix& weights)
{
    double b0 = null_intercept(family, y);
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(design.n(), b0);
    Eigen::VectorXd grad;
    kernels::xt_times(design.X, working_residual(family, y, eta), grad);
    double top = 0.0;
    for (const auto& g : design.groups) {
        top = std::max(top, grad.segment(g.start, g.size).cwiseQuotient(weights.w.segment(g.start, g.size)).norm());
    }
    return top;
}

std::vector<double> lambda_path(const DesignMatrix& design, const Eigen::VectorXd& y, Family family,
                                const WeightMatrix& weights, int m, double ratio)
{
    if (m < 2) throw ConfigError("lambda path needs at least 2 points");
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("lambda ratio must lie in (0, 1]");
    const double top = lambda_max(design, y, family, weights);
    std::vector<double> path(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        path[static_cast<std::size_t>(i)] = top * std::pow(ratio, static_cast<double>(i) / (m - 1));
    }
    path.front() = top;
    return path;
}

double theoretical_lambda(double sigma, double a, double x_weighted, double p, double alpha)
{
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("theoretical_lambda: a must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("theoretical_lambda: alpha must lie in (0, 1)");
    if (!(sigma > 0.0)) throw ConfigError("theoretical_lambda: sigma must be > 0");
    if (!(x_weighted > 0.0)) throw ConfigError("theoretical_lambda: x_W must be > 0");
    if (!(p >= 1.0)) throw ConfigError("theoretical_lambda: p must be >= 1");
    return std::sqrt(2.0 * sigma * sigma * x_weighted * x_weighted * std::log(2.0 * p / alpha) / (a * a));
}

} // namespace glamer
