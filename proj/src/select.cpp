#include <glamer/kernels.hpp>
#include <glamer/select.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace glamer {

namespace {

std::string describe_cluster(const Group& g, const Cluster& cluster)
{
    if (!g.is_factor()) return "continuous `" + g.name + "`";
    std::string s = "`" + g.name + "` levels {";
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        if (i) s += ", ";
        s += g.levels[static_cast<std::size_t>(cluster[i])];
    }
    return s + "}";
}

// Held-out rows that carry a level whose dummy column never fires in training.
std::vector<Eigen::Index> seen_rows(const DesignMatrix& train, const DesignMatrix& test)
{
    std::vector<bool> unseen(static_cast<std::size_t>(train.p()), false);
    for (const auto& g : train.groups) {
        if (!g.is_factor()) continue;
        for (Eigen::Index j = g.start; j < g.start + g.size; ++j) {
            unseen[static_cast<std::size_t>(j)] = (train.X.col(j).array() == 0.0).all();
        }
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < test.n(); ++i) {
        bool ok = true;
        for (Eigen::Index j = 1; j < test.p() && ok; ++j) {
            if (unseen[static_cast<std::size_t>(j)] && test.X(i, j) != 0.0) ok = false;
        }
        if (ok) keep.push_back(i);
    }
    return keep;
}

struct FoldSplit
{
    DesignMatrix train, test;
    Eigen::VectorXd y_train, y_test;
    int dropped = 0;
};

FoldSplit split_fold(const DesignMatrix& design, const Eigen::VectorXd& y, const std::vector<int>& fold_of, int f)
{
    std::vector<Eigen::Index> tr, te;
    for (Eigen::Index i = 0; i < design.n(); ++i) (fold_of[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
    FoldSplit s;
    s.train = subset_rows(design, tr);
    s.y_train = y(tr);
    DesignMatrix test_all = subset_rows(design, te);
    auto keep = seen_rows(s.train, test_all);
    s.dropped = static_cast<int>(te.size() - keep.size());
    s.test = subset_rows(test_all, keep);
    Eigen::VectorXd y_te = y(te);
    s.y_test = y_te(keep);
    return s;
}

} // namespace

Refit refit_model(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, PartitionModel model)
{
    Refit r;
    r.model = std::move(model);
    while (true) {
        MergedDesign merged = build_merged_design(design, r.model);
        try {
            MleFit mle = fit_mle(merged.Z, y, family);
            r.beta = expand_coefficients(design, merged, mle.beta);
            r.loss = mle.loss;
            return r;
        } catch (const RankDeficientError& e) {
            Eigen::Index worst = 0;
            for (auto j : e.dependent_columns) worst = std::max(worst, j);
            if (worst == 0) throw;
            auto [k, c] = merged.column_cluster[static_cast<std::size_t>(worst - 1)];
            auto& part = r.model.groups[k];
            r.repairs.push_back("merged " + describe_cluster(design.groups[k], part[c]) +
                                " into the reference (rank deficiency)");
            part[0].insert(part[0].end(), part[c].begin(), part[c].end());
            part.erase(part.begin() + static_cast<std::ptrdiff_t>(c));
            part = canonical(std::move(part));
        }
    }
}

GlamerFit make_fit(const DesignMatrix& design, Family family, const Refit& refit, double lambda,
                   std::optional<double> tau, const GroupLassoSolution* solution)
{
    GlamerFit fit;
    fit.schema = schema_of(design);
    fit.family = family;
    fit.beta = GroupedCoefficients::from_flat(design, refit.beta);
    fit.model = refit.model;
    fit.md = model_dimension(refit.model);
    fit.train_loss = refit.loss;
    fit.lambda = lambda;
    fit.tau = tau;
    fit.repairs = refit.repairs;
    if (solution) {
        fit.solver_iterations = solution->iterations;
        fit.kkt_residual = solution->kkt_residual;
        fit.support_md = support_dimension(design, solution->flat);
    }
    return fit;
}

GlamerFit glamer_fit(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, double lambda, double tau,
                     const WeightMatrix& weights, const GroupLassoOptions& options)
{
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
    validate_response(family, y);
    GroupLassoSolution sol = fit(GroupLassoProblem{design, y, family, weights, lambda}, options);

    PartitionModel model;
    for (const auto& g : design.groups) model.groups.push_back(threshold_merge(sol.flat.segment(g.start, g.size), tau));

    Refit refit = refit_model(design, y, family, std::move(model));
    return make_fit(design, family, refit, lambda, tau, &sol);
}

const DimensionBest* PathResult::find(int md) const
{
    for (const auto& b : best) {
        if (b.md == md) return &b;
    }
    return nullptr;
}

PathResult glamer_path(const DesignMatrix& design, const Eigen::VectorXd& y, Family family,
                       const std::vector<double>& lambdas, const WeightMatrix& weights, Linkage linkage,
                       const GroupLassoOptions& options)
{
    if (lambdas.empty()) throw ConfigError("empty lambda grid");
    validate_response(family, y);

    PathResult result;
    result.lambdas = lambdas;
    result.linkage = linkage;

    GroupLassoSolver solver(design, y, family, weights);
    auto solutions = solver.solve_path(lambdas, options);

    std::map<std::string, std::size_t> index;
    std::vector<PartitionModel> unique;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        PathPoint pt;
        pt.lambda = lambdas[i];
        pt.solution = std::move(solutions[i]);
        pt.family = nested_family(group_dendrograms(design, pt.solution.flat, linkage));
        for (const auto& m : pt.family) {
            if (index.emplace(m.key(), unique.size()).second) unique.push_back(m);
        }
        result.points.push_back(std::move(pt));
    }

    std::vector<std::optional<Refit>> refits(unique.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t u = 0; u < unique.size(); ++u) {
        try {
            refits[u] = refit_model(design, y, family, unique[u]);
        } catch (const Error&) {
            refits[u].reset();
        }
    }

    std::map<int, DimensionBest> best;
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        auto& pt = result.points[i];
        for (const auto& m : pt.family) {
            const auto& r = refits[index.at(m.key())];
            if (!r) {
                pt.family_loss.push_back(std::numeric_limits<double>::quiet_NaN());
                pt.family_md.push_back(model_dimension(m));
                ++result.failed_refits;
                continue;
            }
            int md = model_dimension(r->model);
            pt.family_loss.push_back(r->loss);
            pt.family_md.push_back(md);
            auto it = best.find(md);
            if (it == best.end() || r->loss < it->second.loss) {
                best[md] = DimensionBest{md, r->model, r->beta, r->loss, i};
            }
        }
    }
    for (auto& [md, b] : best) result.best.push_back(std::move(b));
    return result;
}

std::string_view to_string(CriterionKind kind)
{
    return kind == CriterionKind::cv ? "cv" : "ric";
}

WeightMatrix subset_weights(const DesignMatrix& design, double q, const WeightMatrix& fallback)
{
    WeightMatrix W;
    W.q = q;
    W.w = Eigen::VectorXd::Ones(design.p());
    for (Eigen::Index j = 1; j < design.p(); ++j) {
        double norm = design.X.col(j).norm();
        W.w[j] = norm > 0.0 ? std::pow(norm, q) : fallback.w[j];
    }
    return W;
}

std::vector<int> assign_folds(const Eigen::VectorXd& y, Family family, int folds, std::uint64_t seed)
{
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (folds > y.size()) throw ConfigError("more folds than observations");
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> order;
    if (family == Family::logistic) {
        for (double cls : {0.0, 1.0}) {
            std::vector<Eigen::Index> part;
            for (Eigen::Index i = 0; i < y.size(); ++i)
                if (y[i] == cls) part.push_back(i);
            std::shuffle(part.begin(), part.end(), rng);
            order.insert(order.end(), part.begin(), part.end());
        }
    } else {
        order.resize(static_cast<std::size_t>(y.size()));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<int> fold_of(static_cast<std::size_t>(y.size()));
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        fold_of[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    return fold_of;
}

Selection select_final(const PathResult& path, const SelectionCriterion& criterion, const DesignMatrix& design,
                       const Eigen::VectorXd& y, Family family, const NetConfig& config)
{
    if (path.best.empty()) throw NumericalError("no model on the path could be refit");
    Selection sel;

    std::map<int, double> value;
    if (criterion.kind == CriterionKind::ric) {
        const double logp = std::log(static_cast<double>(design.p()));
        for (const auto& b : path.best) {
            double fit_term = 2.0 * b.loss;
            if (criterion.ric_log_rss && family == Family::gaussian) {
                double rss = (y - linear_predictor(design.X, b.beta)).squaredNorm();
                fit_term = static_cast<double>(design.n()) * std::log(rss / static_cast<double>(design.n()));
            }
            value[b.md] = fit_term + criterion.ric_constant * logp * b.md;
        }
    } else {
        const int K = criterion.folds;
        auto fold_of = assign_folds(y, family, K, criterion.seed);
        WeightMatrix full = subset_weights(design, config.q, WeightMatrix{Eigen::VectorXd::Ones(design.p()), config.q});

        struct FoldOut
        {
            std::map<int, double> loss;
            int n_test = 0;
            int dropped = 0;
        };
        std::vector<FoldOut> outs(static_cast<std::size_t>(K));
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(K));
#pragma omp parallel for schedule(dynamic)
        for (int f = 0; f < K; ++f) {
            try {
                auto split = split_fold(design, y, fold_of, f);
                auto W = subset_weights(split.train, config.q, full);
                auto grid = net_grid(split.train, split.y_train, family, W, config);
                auto fp = glamer_path(split.train, split.y_train, family, grid, W, config.linkage, config.solver);
                auto& out = outs[static_cast<std::size_t>(f)];
                out.n_test = static_cast<int>(split.test.n());
                out.dropped = split.dropped;
                for (const auto& b : fp.best) {
                    out.loss[b.md] = loss(family, split.y_test, linear_predictor(split.test.X, b.beta));
                }
            } catch (...) {
                errors[static_cast<std::size_t>(f)] = std::current_exception();
            }
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);

        int total = 0;
        for (const auto& o : outs) {
            total += o.n_test;
            sel.dropped_test_rows += o.dropped;
        }
        for (const auto& b : path.best) {
            double sum = 0.0;
            bool everywhere = true;
            for (const auto& o : outs) {
                auto it = o.loss.find(b.md);
                if (it == o.loss.end()) {
                    everywhere = false;
                    break;
                }
                sum += it->second;
            }
            if (everywhere && total > 0) value[b.md] = sum / total;
        }
    }

    const DimensionBest* chosen = nullptr;
    double best_value = std::numeric_limits<double>::infinity();
    for (const auto& b : path.best) {
        SelectionRow row{b.md, b.loss, std::numeric_limits<double>::quiet_NaN(), b.lambda_index};
        auto it = value.find(b.md);
        if (it != value.end()) {
            row.value = it->second;
            if (it->second < best_value) {
                best_value = it->second;
                chosen = &b;
            }
        }
        sel.trace.push_back(row);
    }
    if (!chosen) throw NumericalError("no model dimension could be scored by the selection criterion");

    Refit refit{chosen->model, chosen->beta, chosen->loss, {}};
    const auto& pt = path.points[chosen->lambda_index];
    sel.fit = make_fit(design, family, refit, pt.lambda, std::nullopt, &pt.solution);
    sel.chosen_md = chosen->md;
    return sel;
}

Selection glamer_net(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, const NetConfig& config,
                     const SelectionCriterion& criterion)
{
    validate_response(family, y);
    WeightMatrix W = default_weights(design, config.q);
    auto grid = net_grid(design, y, family, W, config);
    auto path = glamer_path(design, y, family, grid, W, config.linkage, config.solver);
    return select_final(path, criterion, design, y, family, config);
}

std::vector<double> net_grid(const DesignMatrix& design, const Eigen::VectorXd& y, Family family,
                             const WeightMatrix& weights, const NetConfig& config)
{
    if (config.n_lambda < 1) throw ConfigError("lambda grid needs at least one point");
    if (config.n_lambda == 1) {
        if (!(config.lambda_ratio > 0.0 && config.lambda_ratio <= 1.0)) throw ConfigError("lambda ratio must lie in (0, 1]");
        return {config.lambda_ratio * lambda_max(design, y, family, weights)};
    }
    return lambda_path(design, y, family, weights, config.n_lambda, config.lambda_ratio);
}

int support_dimension(const DesignMatrix& design, const Eigen::VectorXd& beta)
{
    int md = 1;
    for (const auto& g : design.groups) {
        if (beta.segment(g.start, g.size).squaredNorm() != 0.0) md += static_cast<int>(g.size);
    }
    return md;
}

GroupLassoSelection group_lasso_cv(const DesignMatrix& design, const Eigen::VectorXd& y, Family family,
                                   const NetConfig& config, int folds, std::uint64_t seed)
{
    validate_response(family, y);
    WeightMatrix W = default_weights(design, config.q);
    auto grid = net_grid(design, y, family, W, config);
    auto fold_of = assign_folds(y, family, folds, seed);

    std::vector<std::vector<double>> fold_loss(static_cast<std::size_t>(folds));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(folds));
#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < folds; ++f) {
        try {
            auto split = split_fold(design, y, fold_of, f);
            auto Wf = subset_weights(split.train, config.q, W);
            GroupLassoSolver solver(split.train, split.y_train, family, Wf);
            auto sols = solver.solve_path(grid, config.solver);
            for (const auto& s : sols)
                fold_loss[static_cast<std::size_t>(f)].push_back(
                    loss(family, split.y_test, linear_predictor(split.test.X, s.flat)));
        } catch (...) {
            errors[static_cast<std::size_t>(f)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::size_t pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = 0.0;
        for (const auto& fl : fold_loss) s += fl[i];
        if (s < best) {
            best = s;
            pick = i;
        }
    }
    GroupLassoSolver solver(design, y, family, W);
    std::vector<double> prefix(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(pick) + 1);
    auto sols = solver.solve_path(prefix, config.solver);
    GroupLassoSelection out;
    out.lambda = grid[pick];
    out.beta = sols.back().flat;
    out.support_md = support_dimension(design, out.beta);
    return out;
}

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta)
{
    Eigen::VectorXd eta;
    kernels::times(X, beta, eta);
    return eta;
}

Prediction predict(const GlamerFit& fit, const Table& rows, bool map_unseen_to_reference)
{
    const auto n = rows.n_rows();
    Prediction pred;
    pred.eta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), fit.beta.intercept);

    for (std::size_t k = 0; k < fit.schema.columns.size(); ++k) {
        const auto& col = fit.schema.columns[k];
        const auto& block = fit.beta.blocks.at(k);
        auto idx = rows.column(col.name);
        if (!idx) throw DataError("data has no column `" + col.name + "`");
        for (std::size_t i = 0; i < n; ++i) {
            const auto& cell = rows.rows[i][*idx];
            auto where = "row " + std::to_string(i + 1) + ", column `" + col.name + "`";
            double contrib = 0.0;
            if (col.kind == ColumnKind::continuous) {
                contrib = block.values[0] * parse_double(cell, where);
            } else if (cell != col.levels.front()) {
                auto it = std::find(block.levels.begin(), block.levels.end(), cell);
                if (it != block.levels.end()) {
                    contrib = block.values[it - block.levels.begin()];
                } else if (!map_unseen_to_reference) {
                    throw DataError(where + ": unseen level `" + cell + "`");
                }
            }
            pred.eta[static_cast<Eigen::Index>(i)] += contrib;
        }
    }

    if (fit.family == Family::logistic) {
        pred.probability.resize(pred.eta.size());
        pred.label.resize(n);
        for (Eigen::Index i = 0; i < pred.eta.size(); ++i) {
            pred.probability[i] = mean_function(Family::logistic, pred.eta[i]);
            pred.label[static_cast<std::size_t>(i)] = pred.probability[i] >= 0.5 ? 1 : 0;
        }
    }
    return pred;
}

} // namespace glamer
