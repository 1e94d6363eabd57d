#include <glamer/glm.hpp>
#include <glamer/kernels.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace glamer {

namespace {

double softplus(double a)
{
    return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
}

double sigmoid(double a)
{
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    double e = std::exp(a);
    return e / (1.0 + e);
}

void check_sizes(Eigen::Index a, Eigen::Index b, const char* what)
{
    if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

} // namespace

std::string_view to_string(Family family)
{
    return family == Family::gaussian ? "gaussian" : "logistic";
}

Family parse_family(std::string_view name)
{
    if (name == "gaussian") return Family::gaussian;
    if (name == "logistic" || name == "binomial") return Family::logistic;
    throw ConfigError("unknown family `" + std::string(name) + "` (expected gaussian|logistic)");
}

double cumulant(Family family, double a)
{
    return family == Family::gaussian ? 0.5 * a * a : softplus(a);
}

double mean_function(Family family, double a)
{
    return family == Family::gaussian ? a : sigmoid(a);
}

double variance_function(Family family, double a)
{
    if (family == Family::gaussian) return 1.0;
    double m = sigmoid(a);
    return m * (1.0 - m);
}

void validate_response(Family family, const Eigen::VectorXd& y)
{
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) throw DataError("response row " + std::to_string(i + 1) + " is not finite");
        if (family == Family::logistic && y[i] != 0.0 && y[i] != 1.0)
            throw DataError("logistic response must be 0/1; row " + std::to_string(i + 1) + " has " +
                            std::to_string(y[i]));
    }
}

double loss(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta)
{
    check_sizes(y.size(), eta.size(), "loss");
    double s = 0.0;
    if (family == Family::gaussian) {
        for (Eigen::Index i = 0; i < y.size(); ++i) s += eta[i] * (0.5 * eta[i] - y[i]);
    } else {
        // softplus(a) - y a written so neither branch subtracts two large numbers
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double a = eta[i];
            s += a > 0.0 ? (1.0 - y[i]) * a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)) - y[i] * a;
        }
    }
    return s;
}

Eigen::VectorXd working_residual(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta)
{
    check_sizes(y.size(), eta.size(), "working_residual");
    Eigen::VectorXd r(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) r[i] = mean_function(family, eta[i]) - y[i];
    return r;
}

CollapsedRows collapse_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    check_sizes(X.rows(), y.size(), "collapse_rows");
    std::map<std::vector<double>, Eigen::Index> seen;
    std::vector<Eigen::Index> first;
    std::vector<Eigen::Index> slot(static_cast<std::size_t>(X.rows()));
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) row[static_cast<std::size_t>(j)] = X(i, j);
        auto [it, fresh] = seen.emplace(row, static_cast<Eigen::Index>(first.size()));
        if (fresh) first.push_back(i);
        slot[static_cast<std::size_t>(i)] = it->second;
    }
    CollapsedRows out;
    out.n = X.rows();
    const auto u = static_cast<Eigen::Index>(first.size());
    out.X.resize(u, X.cols());
    for (Eigen::Index k = 0; k < u; ++k) out.X.row(k) = X.row(first[static_cast<std::size_t>(k)]);
    out.count = Eigen::VectorXd::Zero(u);
    out.ysum = Eigen::VectorXd::Zero(u);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out.count[slot[static_cast<std::size_t>(i)]] += 1.0;
        out.ysum[slot[static_cast<std::size_t>(i)]] += y[i];
    }
    return out;
}

double loss(Family family, const CollapsedRows& rows, const Eigen::VectorXd& eta)
{
    check_sizes(rows.count.size(), eta.size(), "loss");
    const auto& c = rows.count;
    const auto& s = rows.ysum;
    double f = 0.0;
    if (family == Family::gaussian) {
        for (Eigen::Index i = 0; i < eta.size(); ++i) f += eta[i] * (0.5 * c[i] * eta[i] - s[i]);
    } else {
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            double a = eta[i];
            f += a > 0.0 ? (c[i] - s[i]) * a + c[i] * std::log1p(std::exp(-a))
                         : c[i] * std::log1p(std::exp(a)) - s[i] * a;
        }
    }
    return f;
}

Eigen::VectorXd working_residual(Family family, const CollapsedRows& rows, const Eigen::VectorXd& eta)
{
    check_sizes(rows.count.size(), eta.size(), "working_residual");
    Eigen::VectorXd r(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = rows.count[i] * mean_function(family, eta[i]) - rows.ysum[i];
    return r;
}

Eigen::VectorXd loss_gradient(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& beta)
{
    check_sizes(X.cols(), beta.size(), "loss_gradient");
    check_sizes(X.rows(), y.size(), "loss_gradient");
    Eigen::VectorXd eta, g;
    kernels::times(X, beta, eta);
    kernels::xt_times(X, working_residual(family, y, eta), g);
    return g;
}

double null_intercept(Family family, const Eigen::VectorXd& y)
{
    if (y.size() == 0) throw DataError("empty response");
    double m = y.mean();
    if (family == Family::gaussian) return m;
    if (m <= 0.0 || m >= 1.0) throw DataError("logistic response is constant; no finite intercept-only fit");
    return std::log(m / (1.0 - m));
}

MleFit fit_mle(const Eigen::MatrixXd& Z_full, const Eigen::VectorXd& y, Family family, const MleOptions& options)
{
    check_sizes(Z_full.rows(), y.size(), "fit_mle");
    const Eigen::Index p = Z_full.cols();
    const auto rows = collapse_rows(Z_full, y);
    const auto& Z = rows.X;
    const Eigen::VectorXd root = rows.count.cwiseSqrt();

    // sqrt(count)-weighted distinct rows have the Gram matrix of the full Z
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(root.asDiagonal() * Z);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        std::vector<Eigen::Index> dependent;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < p; ++j) dependent.push_back(perm[j]);
        std::string cols;
        for (auto j : dependent) cols += (cols.empty() ? "" : ", ") + std::to_string(j);
        throw RankDeficientError("refit design is rank deficient (dependent columns: " + cols + ")", dependent);
    }

    MleFit fit;
    if (family == Family::gaussian) {
        fit.beta = qr.solve(rows.ysum.cwiseQuotient(root));
        fit.loss = loss(family, rows, Z * fit.beta);
        fit.iterations = 1;
        return fit;
    }

    auto gradient = [&](const Eigen::VectorXd& eta) -> Eigen::VectorXd {
        return Z.transpose() * working_residual(family, rows, eta);
    };
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(Z.rows());
    double f = loss(family, rows, eta);
    for (int it = 0; it < options.max_iter; ++it) {
        Eigen::VectorXd wts(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            double m = sigmoid(eta[i]);
            wts[i] = rows.count[i] * m * (1.0 - m);
        }
        Eigen::VectorXd g = gradient(eta);
        if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
            fit.beta = beta;
            fit.loss = f;
            fit.iterations = it;
            return fit;
        }
        Eigen::MatrixXd H = Z.transpose() * wts.asDiagonal() * Z;
        Eigen::VectorXd step = H.ldlt().solve(g);
        if (!step.allFinite()) throw NumericalError("logistic refit: singular Hessian (separation suspected)");

        double slope = g.dot(step);
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h < 40; ++h, t *= 0.5) {
            Eigen::VectorXd cand = beta - t * step;
            Eigen::VectorXd cand_eta = Z * cand;
            double fc = loss(family, rows, cand_eta);
            if (fc <= f - 1e-4 * t * slope) {
                beta = std::move(cand);
                eta = std::move(cand_eta);
                f = fc;
                accepted = true;
                break;
            }
        }
        if (beta.norm() > options.divergence_norm)
            throw NumericalError("logistic refit diverged (separation suspected)");
        if (!accepted) {
            // no decrease left to find: accept if stationary to working precision
            if (g.lpNorm<Eigen::Infinity>() <= 1e-7 * (1.0 + std::abs(f))) {
                fit.beta = beta;
                fit.loss = f;
                fit.iterations = it + 1;
                return fit;
            }
            throw NumericalError("logistic refit: line search failed (separation suspected)");
        }
    }
    if (gradient(eta).lpNorm<Eigen::Infinity>() <= 1e-7 * (1.0 + std::abs(f))) {
        fit.beta = beta;
        fit.loss = f;
        fit.iterations = options.max_iter;
        return fit;
    }
    throw NumericalError("logistic refit did not converge in " + std::to_string(options.max_iter) +
                         " iterations (separation suspected)");
}

} // namespace glamer
