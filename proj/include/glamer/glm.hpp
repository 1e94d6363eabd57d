#pragma once

#include <glamer/error.hpp>

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace glamer {

/// Canonical-link exponential family: gaussian (gamma(a) = a^2/2) or
/// logistic (gamma(a) = log(1 + e^a)).
enum class Family { gaussian, logistic };

std::string_view to_string(Family family);
/// Throws ConfigError on an unknown name.
Family parse_family(std::string_view name);

/// Cumulant gamma(a).
double cumulant(Family family, double a);
/// Mean function gamma'(a).
double mean_function(Family family, double a);
/// Variance function gamma''(a).
double variance_function(Family family, double a);

/// Logistic responses must be 0/1. Throws DataError otherwise.
void validate_response(Family family, const Eigen::VectorXd& y);

/// Negative log-likelihood sum_i [gamma(eta_i) - y_i eta_i], no 1/n scaling.
double loss(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

/// mu - y with mu_i = gamma'(eta_i).
Eigen::VectorXd working_residual(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

/// X^T (gamma'(X beta) - y).
Eigen::VectorXd loss_gradient(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& beta);

/// X with identical rows collapsed: one row per distinct pattern (in order of
/// first appearance), its multiplicity and the sum of its responses. The
/// loss and its gradient depend on the data only through these.
struct CollapsedRows
{
    Eigen::MatrixXd X;
    Eigen::VectorXd count;
    Eigen::VectorXd ysum;
    Eigen::Index n = 0;
};

CollapsedRows collapse_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// sum_u [count_u gamma(eta_u) - ysum_u eta_u]; equals `loss` on the full rows.
double loss(Family family, const CollapsedRows& rows, const Eigen::VectorXd& eta);

/// count_u gamma'(eta_u) - ysum_u, so X_u^T of it is the full gradient.
Eigen::VectorXd working_residual(Family family, const CollapsedRows& rows, const Eigen::VectorXd& eta);

/// Thrown when the refit design is not of full column rank.
struct RankDeficientError : NumericalError
{
    RankDeficientError(const std::string& what, std::vector<Eigen::Index> columns)
        : NumericalError(what), dependent_columns(std::move(columns)) {}
    // Column indices outside the pivoted QR's leading independent set.
    std::vector<Eigen::Index> dependent_columns;
};

struct MleOptions
{
    double grad_tol = 1e-8;
    int max_iter = 100;
    double divergence_norm = 1e6;
};

struct MleFit
{
    Eigen::VectorXd beta;
    double loss = 0.0;
    int iterations = 0;
};

/// Unpenalized maximum likelihood on Z. Gaussian: pivoted-QR least squares.
/// Logistic: Newton with step halving. Throws RankDeficientError or
/// NumericalError ("separation suspected") on failure.
MleFit fit_mle(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, Family family, const MleOptions& options = {});

/// Intercept-only MLE: mean(y) or logit(mean(y)). Throws DataError for a
/// constant logistic response.
double null_intercept(Family family, const Eigen::VectorXd& y);

} // namespace glamer
