#pragma once

#include <glamer/design.hpp>

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace glamer {

/// A partition of level indices {0, ..., p_k}, level 0 being the reference.
/// Canonical form: each cluster sorted ascending, clusters ordered by their
/// smallest member, so the reference cluster always comes first.
using Cluster = std::vector<int>;
using Partition = std::vector<Cluster>;

Partition canonical(Partition partition);
Partition singletons(int n_levels);
Partition one_cluster(int n_levels);

/// One partition per design group. A continuous variable is a two-level
/// group: {{0},{1}} means present, {{0,1}} means absent.
struct PartitionModel
{
    std::vector<Partition> groups;

    bool continuous_present(std::size_t k) const { return groups[k].size() > 1; }
    /// Compact text key, unique per model; used for caching and comparison.
    std::string key() const;
    friend bool operator==(const PartitionModel&, const PartitionModel&) = default;
};

/// Every group fully merged into its reference (intercept-only model).
PartitionModel null_model(const DesignMatrix& design);
/// No merging at all.
PartitionModel full_model(const DesignMatrix& design);
/// The model M_beta read off a coefficient vector: equal values share a
/// cluster, zeros join the reference.
PartitionModel model_of(const DesignMatrix& design, const Eigen::VectorXd& beta);

/// 1 + sum over groups of (#clusters - 1).
int model_dimension(const PartitionModel& model);

/// Gap chaining: a virtual 0 for the reference joins beta_k, the p_k + 1
/// values are sorted (stable by level index) and neighbours whose gap is
/// <= tau land in the same cluster.
Partition threshold_merge(const Eigen::VectorXd& beta_k, double tau);

enum class Linkage { single, complete };

std::string_view to_string(Linkage linkage);
Linkage parse_linkage(std::string_view name);

struct MergeEvent
{
    // Cluster ids: leaves are 0..n_leaves-1, the i-th merge creates n_leaves+i.
    int left = 0;
    int right = 0;
    double height = 0.0;
};

struct Dendrogram
{
    int n_leaves = 0;
    std::vector<MergeEvent> merges;
    std::vector<int> leaf_order;
};

/// Agglomerative clustering of {0} u beta_k under |a - b|. Ties between
/// candidate pairs go to the pair with the smallest (left, right) ids.
Dendrogram linkage_dendrogram(const Eigen::VectorXd& beta_k, Linkage linkage);

/// Partition after applying every merge with height <= tau.
Partition cut(const Dendrogram& dendrogram, double tau);

/// Partition after applying the first `n_merges` merges.
Partition partition_after(const Dendrogram& dendrogram, std::size_t n_merges);

/// Nested models M_1 < M_2 < ... obtained by undoing merges globally in
/// decreasing height order, starting from the intercept-only model. Ties
/// are undone by (factor index, later event first). A continuous group k
/// is a one-merge dendrogram whose height is |beta_k|. Events at height 0
/// (identical coefficients) are never undone, so the last member is the
/// model M_beta of the coefficients the dendrograms came from.
std::vector<PartitionModel> nested_family(const std::vector<Dendrogram>& dendrograms);

/// Per-group dendrograms of a coefficient vector.
std::vector<Dendrogram> group_dendrograms(const DesignMatrix& design, const Eigen::VectorXd& beta, Linkage linkage);

struct MergedDesign
{
    Eigen::MatrixXd Z;
    // Source design columns summed into each Z column (Z column 0 is the intercept: {0}).
    std::vector<std::vector<Eigen::Index>> cluster_map;
    // For each Z column after the intercept: (group index, cluster index).
    std::vector<std::pair<std::size_t, std::size_t>> column_cluster;
    PartitionModel model;
};

/// Intercept, then one summed column per non-reference cluster of each group.
MergedDesign build_merged_design(const DesignMatrix& design, const PartitionModel& model);

/// Expands Z-space coefficients back to one coefficient per design column.
Eigen::VectorXd expand_coefficients(const DesignMatrix& design, const MergedDesign& merged,
                                    const Eigen::VectorXd& gamma);

} // namespace glamer
