#pragma once

#include <glamer/design.hpp>
#include <glamer/glm.hpp>
#include <glamer/grouplasso.hpp>
#include <glamer/merge.hpp>
#include <glamer/model_io.hpp>
#include <glamer/select.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace glamer {

/// Independent RNG stream for (seed, a, b).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);

enum class Balance { balanced, multinomial };
enum class NoiseKind { normal, uniform };

struct FactorSpec
{
    std::string name;
    int levels = 2;                // including the reference
    std::vector<int> cluster_of;   // level -> cluster id
    std::vector<double> effects;   // cluster id -> effect; the reference's cluster has effect 0
};

struct ContinuousSpec
{
    std::string name;
    double beta = 0.0;
};

struct SyntheticSpec
{
    int n = 100;
    std::vector<FactorSpec> factors;
    std::vector<ContinuousSpec> continuous;
    double intercept = 0.0;
    Family family = Family::gaussian;
    double sigma = 1.0;
    Balance balance = Balance::balanced;
    NoiseKind noise = NoiseKind::normal;
    std::uint64_t seed = 0;
};

/// Throws ConfigError if effects within a factor repeat across clusters
/// or the reference cluster has a nonzero effect.
void validate(const SyntheticSpec& spec);

/// True coefficients in design layout (factors first, then continuous).
GroupedCoefficients true_coefficients(const SyntheticSpec& spec);

struct TruthSummary
{
    std::optional<double> delta;
    PartitionModel model;
    double x_min = 0.0;
    double x_max = 0.0;
    GroupedCoefficients beta;
};

struct SyntheticData
{
    DesignMatrix design;
    Eigen::VectorXd y;
    TruthSummary truth;
};

/// Factor levels are named L0, L1, ... (L0 the reference); continuous
/// covariates are standard normal. Gaussian noise is N(0, sigma^2), or
/// uniform on +-sigma*sqrt(3) in uniform mode; logistic responses are
/// Bernoulli(gamma'(eta)). Throws ConfigError when a balanced design
/// cannot show every level.
SyntheticData generate(const SyntheticSpec& spec, std::uint64_t stream = 0);

/// Smallest gap between distinct values of {0} u beta_k over all groups;
/// nullopt when every group is a single value.
std::optional<double> compute_delta(const GroupedCoefficients& beta);

struct RecoveryScore
{
    bool exact = false;
    double rand_index = 1.0; // mean over groups
};

/// Throws ConfigError when the two models disagree on groups or level counts.
RecoveryScore recovery(const PartitionModel& estimated, const PartitionModel& truth);

/// Pair-counting Rand index of two partitions of the same level set.
double rand_index(const Partition& a, const Partition& b);

/// x_m^-2 (x_M / x_m)^max(0, |2q - 3| - 1).
double weight_bound_f(double q, double x_min, double x_max);

/// sigma * sqrt(128 log p) / x_m, with the o(1) terms dropped.
double sufficient_delta(double sigma, double x_min, double p);
/// sigma * sqrt(log(p) / 2) / x_M, with the o(1) terms dropped.
double necessary_delta(double sigma, double x_max, double p);

enum class Method { glamer_cv, glamer_ric, glamer_fixed, group_lasso };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct MethodConfig
{
    Method method = Method::glamer_cv;
    NetConfig net;
    int folds = 10;
    double ric_constant = 2.0;
    // glamer_fixed only
    double lambda = 0.0;
    double tau = 0.0;
};

/// One fitted model from any method, for scoring.
struct MethodFit
{
    PartitionModel model;
    Eigen::VectorXd beta; // design layout
    int md = 1;
    // Group Lasso support dimension at the lambda the model came from.
    int support_md = 1;
};

MethodFit run_method(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, const MethodConfig& config,
                     std::uint64_t seed);

enum class GridAxis { delta, n, sigma };

std::string_view to_string(GridAxis axis);
GridAxis parse_axis(std::string_view name);

struct ReplicationResult
{
    bool exact = false;
    double rand_index = 0.0;
    int md = 1;
    int support_md = 1;
};

struct CurvePoint
{
    double value = 0.0;
    double recovery_rate = 0.0;
    double mean_rand_index = 0.0;
    double mean_md = 0.0;
    double mean_support_md = 0.0;
    int true_md = 1;
    std::vector<ReplicationResult> replications;
};

/// Spec with the grid value applied. Along `delta`, every effect is scaled
/// so the smallest effect gap becomes the value (0 collapses all effects).
SyntheticSpec apply_axis(const SyntheticSpec& spec, GridAxis axis, double value);

/// Exact-recovery rate per grid point; replication r at grid point g draws
/// its data from stream g * replications + r of spec.seed, so results do
/// not depend on scheduling.
std::vector<CurvePoint> consistency_experiment(const SyntheticSpec& spec, GridAxis axis,
                                               const std::vector<double>& values, int replications,
                                               const MethodConfig& method);

struct BenchmarkRow
{
    int iteration = 0;
    Method method = Method::glamer_cv;
    int attempts = 1;
    int n_train = 0;
    int n_test = 0;
    int dropped_test_rows = 0;
    int removed_variables = 0;
    double pe = 0.0;
    int md = 1;
};

struct BenchmarkSetup
{
    std::string response;
    Family family = Family::gaussian;
    std::vector<MethodConfig> methods;
    double m_percent = 70.0;
    int iterations = 100;
    std::uint64_t seed = 0;
    int max_attempts = 20;
};

/// Repeated random train/test splits of a real dataset:
///   - a random m% of rows is the training set;
///   - factors showing a single level in training are dropped;
///   - when n_train > p, variables behind rank deficiency are dropped greedily;
///   - held-out rows with levels unseen in training are removed;
///   - PE is the test MSE (gaussian) or misclassification rate (logistic).
/// A failed (method, iteration) is retried on a fresh split.
std::vector<BenchmarkRow> run_benchmark(const Table& data, const Schema& schema, const BenchmarkSetup& setup);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);
Json benchmark_summary(const std::vector<BenchmarkRow>& rows);
std::string curve_csv(const std::vector<CurvePoint>& points, GridAxis axis);
Json curve_summary(const std::vector<CurvePoint>& points, GridAxis axis);

/// Reads a synthetic spec from JSON:
///   {"n": 400, "family": "gaussian", "sigma": 1, "intercept": 0, "balance": "balanced",
///    "noise": "normal", "seed": 1,
///    "factors": [{"name": "f", "levels": 8, "clusters": [0,0,0,0,1,1,1,1], "effects": [0, 2]}],
///    "continuous": [{"name": "x", "beta": 0.5}]}
SyntheticSpec spec_from_json(const Json& j);
Json spec_to_json(const SyntheticSpec& spec);

} // namespace glamer
