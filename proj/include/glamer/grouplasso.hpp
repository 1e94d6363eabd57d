#pragma once

#include <glamer/design.hpp>
#include <glamer/glm.hpp>

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace glamer {

struct CoefficientBlock
{
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    // Factor: names of the non-reference levels, aligned with `values`.
    std::vector<std::string> levels;
    Eigen::VectorXd values;
};

/// beta split as (intercept, beta_1, ..., beta_r) following the design's groups.
struct GroupedCoefficients
{
    double intercept = 0.0;
    std::vector<CoefficientBlock> blocks;

    static GroupedCoefficients from_flat(const DesignMatrix& design, const Eigen::VectorXd& beta);
    Eigen::VectorXd flatten() const;
};

/// argmin_beta L(y, X beta) + lambda * sum_k ||W_k beta_k||, intercept unpenalized.
struct GroupLassoProblem
{
    const DesignMatrix& design;
    const Eigen::VectorXd& y;
    Family family;
    const WeightMatrix& weights;
    double lambda;
};

struct GroupLassoOptions
{
    double tol = 1e-7;   // on the KKT residual, scaled by (1 + lambda)
    int max_iter = 10000; // sweeps
};

struct GroupLassoSolution
{
    GroupedCoefficients beta;
    Eigen::VectorXd flat;
    double kkt_residual = 0.0;
    int iterations = 0;
    double objective = 0.0;
    // objective after each sweep
    std::vector<double> objective_trace;
    bool converged = false;
};

/// Proximal operator of t*||.||: 0 if ||v|| <= t, else v * (1 - t/||v||).
Eigen::VectorXd group_soft_threshold(const Eigen::VectorXd& v, double t);

/// Block-proximal descent for the weighted Group Lasso. Per-block step
/// sizes are precomputed once, so one solver serves a whole lambda path.
///
/// Each sweep visits the groups in order and takes one proximal gradient
/// step on u_k = W_k beta_k, where the penalty is lambda*||u_k|| and the
/// group soft threshold is the exact prox. The step is 1/L_k with L_k the
/// largest eigenvalue of X~_k^T X~_k (X~_k = X_k W_k^{-1}; a quarter of it
/// for the logistic loss), doubled whenever the quadratic majorization
/// fails. The intercept is then minimized exactly. The run stops once the
/// KKT residual drops to tol * (1 + lambda).
class GroupLassoSolver
{
public:
    GroupLassoSolver(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, const WeightMatrix& weights);

    GroupLassoSolution solve(double lambda, const GroupLassoOptions& options = {},
                             const std::optional<Eigen::VectorXd>& start = std::nullopt) const;

    /// Warm-started fits along the grid, in order.
    std::vector<GroupLassoSolution> solve_path(const std::vector<double>& lambdas,
                                               const GroupLassoOptions& options = {}) const;

    const std::vector<double>& block_lipschitz() const { return lipschitz_; }

private:
    const DesignMatrix& design_;
    const Eigen::VectorXd& y_;
    Family family_;
    const WeightMatrix& weights_;
    // identical design rows collapsed; the sweeps run on these
    CollapsedRows rows_;
    std::vector<double> lipschitz_;
};

/// Throws ConfigError for lambda < 0. A run that hits max_iter returns its
/// last iterate with converged = false.
GroupLassoSolution fit(const GroupLassoProblem& problem, const GroupLassoOptions& options = {},
                       const std::optional<Eigen::VectorXd>& start = std::nullopt);

/// Per-group KKT violations, intercept first:
///   |d/d beta_0|,
///   beta_k != 0: ||W_k^{-1} grad_k + lambda W_k beta_k / ||W_k beta_k|| ||,
///   beta_k == 0: max(0, ||W_k^{-1} grad_k|| - lambda).
/// Blocks with ||W_k beta_k|| < 1e-12 count as zero.
std::vector<double> kkt_violations(const GroupLassoProblem& problem, const Eigen::VectorXd& beta);

/// Maximum of kkt_violations.
double kkt_residual(const GroupLassoProblem& problem, const Eigen::VectorXd& beta);
double kkt_residual(const GroupLassoProblem& problem, const GroupedCoefficients& beta);

/// max_k ||W_k^{-1} grad_k|| at the intercept-only MLE: the smallest lambda
/// with an all-zero penalized solution.
double lambda_max(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, const WeightMatrix& weights);

/// Geometric grid from lambda_max down to ratio * lambda_max, m >= 2 points.
std::vector<double> lambda_path(const DesignMatrix& design, const Eigen::VectorXd& y, Family family,
                                const WeightMatrix& weights, int m = 100, double ratio = 1e-3);

/// sqrt(2 a^-2 sigma^2 x_W^2 log(2p / alpha)).
double theoretical_lambda(double sigma, double a, double x_weighted, double p, double alpha);

/// Group Lasso penalty sum_k ||W_k beta_k||.
double group_penalty(const DesignMatrix& design, const WeightMatrix& weights, const Eigen::VectorXd& beta);

} // namespace glamer
