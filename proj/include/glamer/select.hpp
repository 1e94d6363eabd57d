#pragma once

#include <glamer/design.hpp>
#include <glamer/glm.hpp>
#include <glamer/grouplasso.hpp>
#include <glamer/merge.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace glamer {

/// A fitted GLAMER model: per-level coefficients after the refit on the
/// merged design, plus everything needed to predict and to audit the fit.
struct GlamerFit
{
    Schema schema;
    Family family = Family::gaussian;
    GroupedCoefficients beta;
    PartitionModel model;
    int md = 1;
    double train_loss = 0.0;
    double lambda = 0.0;
    // Unset when the partition came from a dendrogram rather than a fixed threshold.
    std::optional<double> tau;
    int solver_iterations = 0;
    double kkt_residual = 0.0;
    // Dimension of the Group Lasso support (levels kept distinct) behind this fit.
    int support_md = 1;
    // Rank-deficiency repairs applied before the refit.
    std::vector<std::string> repairs;
};

/// Refit of one partition model, after greedy rank repair.
struct Refit
{
    PartitionModel model; // possibly coarser than requested
    Eigen::VectorXd beta; // expanded to design columns
    double loss = 0.0;
    std::vector<std::string> repairs;
};

/// MLE on the merged design. A rank-deficient Z is repaired by merging the
/// cluster behind the last dependent column into its reference, repeatedly.
Refit refit_model(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, PartitionModel model);

/// One fit at a fixed (lambda, tau): Group Lasso, per-group gap
/// chaining at tau (a continuous variable stays iff |beta_k| > tau), MLE refit.
GlamerFit glamer_fit(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, double lambda, double tau,
                     const WeightMatrix& weights, const GroupLassoOptions& options = {});

struct PathPoint
{
    double lambda = 0.0;
    GroupLassoSolution solution;
    std::vector<PartitionModel> family;
    // Refit loss and dimension of each family member (after repair); NaN loss if the refit failed.
    std::vector<double> family_loss;
    std::vector<int> family_md;
};

struct DimensionBest
{
    int md = 1;
    PartitionModel model;
    Eigen::VectorXd beta;
    double loss = 0.0;
    std::size_t lambda_index = 0;
};

struct PathResult
{
    std::vector<double> lambdas;
    Linkage linkage = Linkage::complete;
    std::vector<PathPoint> points;
    // One entry per model dimension seen anywhere on the path, ascending md.
    std::vector<DimensionBest> best;
    int failed_refits = 0;

    const DimensionBest* find(int md) const;
};

/// Net scheme: warm-started Group Lasso over the grid, per-group linkage
/// dendrograms and their nested family at every lambda, then for each
/// dimension c the family member with the lowest in-sample refit loss.
PathResult glamer_path(const DesignMatrix& design, const Eigen::VectorXd& y, Family family,
                       const std::vector<double>& lambdas, const WeightMatrix& weights, Linkage linkage,
                       const GroupLassoOptions& options = {});

enum class CriterionKind { cv, ric };

std::string_view to_string(CriterionKind kind);

struct SelectionCriterion
{
    CriterionKind kind = CriterionKind::cv;
    int folds = 10;
    double ric_constant = 2.0;
    // Gaussian only: n log(RSS/n) in place of 2 * loss.
    bool ric_log_rss = false;
    std::uint64_t seed = 0;
};

/// Settings shared by every (re)run of the net scheme.
struct NetConfig
{
    int n_lambda = 100;
    double lambda_ratio = 1e-3;
    double q = 1.0;
    Linkage linkage = Linkage::complete;
    GroupLassoOptions solver;
};

struct SelectionRow
{
    int md = 1;
    double train_loss = 0.0;
    double value = 0.0; // criterion value (RIC) or mean held-out loss (CV)
    std::size_t lambda_index = 0;
};

struct Selection
{
    GlamerFit fit;
    std::vector<SelectionRow> trace;
    int chosen_md = 1;
    // CV bookkeeping: held-out rows dropped because their level never
    // occurred in the fold's training part.
    int dropped_test_rows = 0;
};

/// Weights for a row subset: ||x_{j,k}||^q on the subset, falling back to
/// `fallback` for columns that are all zero there.
WeightMatrix subset_weights(const DesignMatrix& design, double q, const WeightMatrix& fallback);

/// Fold label per row. Logistic responses are stratified by class.
std::vector<int> assign_folds(const Eigen::VectorXd& y, Family family, int folds, std::uint64_t seed);

/// Picks c* from the path's per-dimension models.
///   ric: argmin 2 * loss(M_c) + ric_constant * log(p) * c
///   cv:  argmin mean held-out loss, the whole net scheme re-run per fold
/// Ties go to the smaller c.
Selection select_final(const PathResult& path, const SelectionCriterion& criterion, const DesignMatrix& design,
                       const Eigen::VectorXd& y, Family family, const NetConfig& config);

/// Lambda grid of the net scheme; a single point is ratio * lambda_max.
std::vector<double> net_grid(const DesignMatrix& design, const Eigen::VectorXd& y, Family family,
                             const WeightMatrix& weights, const NetConfig& config);

/// Convenience: weights, grid, path and selection in one call.
Selection glamer_net(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, const NetConfig& config,
                     const SelectionCriterion& criterion);

/// Plain Group Lasso baseline: lambda picked by K-fold CV on held-out
/// loss, coefficients left unmerged and unrefit.
struct GroupLassoSelection
{
    double lambda = 0.0;
    Eigen::VectorXd beta;
    int support_md = 1;
};

GroupLassoSelection group_lasso_cv(const DesignMatrix& design, const Eigen::VectorXd& y, Family family,
                                   const NetConfig& config, int folds, std::uint64_t seed);

/// 1 + sum of p_k over groups with a nonzero block (levels counted as distinct).
int support_dimension(const DesignMatrix& design, const Eigen::VectorXd& beta);

struct Prediction
{
    Eigen::VectorXd eta;
    // Logistic only.
    Eigen::VectorXd probability;
    std::vector<int> label;
};

/// Linear predictor from per-level coefficients. A level outside the fit's
/// schema raises DataError unless map_unseen_to_reference is set.
Prediction predict(const GlamerFit& fit, const Table& rows, bool map_unseen_to_reference = false);

/// Same, for an already encoded design with matching columns.
Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta);

/// Builds a GlamerFit from a refit on `design`.
GlamerFit make_fit(const DesignMatrix& design, Family family, const Refit& refit, double lambda,
                   std::optional<double> tau, const GroupLassoSolution* solution);

} // namespace glamer
