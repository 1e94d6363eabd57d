#include <glamer/simbench.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace glamer {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(a), hi(a), lo(b), hi(b)};
    return std::mt19937_64(seq);
}

void validate(const SyntheticSpec& spec)
{
    if (spec.n < 2) throw ConfigError("synthetic spec: n must be >= 2");
    if (!(spec.sigma >= 0.0)) throw ConfigError("synthetic spec: sigma must be >= 0");
    for (const auto& f : spec.factors) {
        auto where = "synthetic factor `" + f.name + "`: ";
        if (f.levels < 2) throw ConfigError(where + "needs at least 2 levels");
        if (static_cast<int>(f.cluster_of.size()) != f.levels) throw ConfigError(where + "cluster list length != levels");
        for (int c : f.cluster_of) {
            if (c < 0 || c >= static_cast<int>(f.effects.size())) throw ConfigError(where + "cluster id out of range");
        }
        if (f.effects[static_cast<std::size_t>(f.cluster_of[0])] != 0.0)
            throw ConfigError(where + "the reference level's cluster must have effect 0");
        std::set<int> used(f.cluster_of.begin(), f.cluster_of.end());
        std::set<double> distinct;
        for (int c : used) {
            if (!distinct.insert(f.effects[static_cast<std::size_t>(c)]).second)
                throw ConfigError(where + "two clusters share an effect value");
        }
    }
}

GroupedCoefficients true_coefficients(const SyntheticSpec& spec)
{
    GroupedCoefficients b;
    b.intercept = spec.intercept;
    for (const auto& f : spec.factors) {
        CoefficientBlock blk;
        blk.name = f.name;
        blk.kind = ColumnKind::categorical;
        blk.values.resize(f.levels - 1);
        for (int j = 1; j < f.levels; ++j) {
            blk.levels.push_back("L" + std::to_string(j));
            blk.values[j - 1] = f.effects[static_cast<std::size_t>(f.cluster_of[static_cast<std::size_t>(j)])];
        }
        b.blocks.push_back(std::move(blk));
    }
    for (const auto& c : spec.continuous) {
        CoefficientBlock blk;
        blk.name = c.name;
        blk.kind = ColumnKind::continuous;
        blk.values = Eigen::VectorXd::Constant(1, c.beta);
        b.blocks.push_back(std::move(blk));
    }
    return b;
}

SyntheticData generate(const SyntheticSpec& spec, std::uint64_t stream)
{
    validate(spec);
    auto rng = make_rng(spec.seed, stream, 0x5eed);
    const auto n = static_cast<std::size_t>(spec.n);

    Schema schema;
    std::vector<ColumnData> cols;
    for (const auto& f : spec.factors) {
        Column c;
        c.name = f.name;
        c.kind = ColumnKind::categorical;
        for (int j = 0; j < f.levels; ++j) c.levels.push_back("L" + std::to_string(j));
        schema.columns.push_back(std::move(c));

        ColumnData cd;
        cd.codes.resize(n);
        if (spec.balance == Balance::balanced) {
            if (spec.n < f.levels)
                throw ConfigError("synthetic factor `" + f.name + "`: n is too small to show every level");
            for (std::size_t i = 0; i < n; ++i) cd.codes[i] = static_cast<int>(i % static_cast<std::size_t>(f.levels));
            std::shuffle(cd.codes.begin(), cd.codes.end(), rng);
        } else {
            std::uniform_int_distribution<int> pick(0, f.levels - 1);
            for (auto& code : cd.codes) code = pick(rng);
        }
        cols.push_back(std::move(cd));
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (const auto& c : spec.continuous) {
        Column col;
        col.name = c.name;
        col.kind = ColumnKind::continuous;
        schema.columns.push_back(std::move(col));
        ColumnData cd;
        cd.values.resize(n);
        for (auto& v : cd.values) v = gauss(rng);
        cols.push_back(std::move(cd));
    }

    SyntheticData out;
    out.design = assemble_design(schema, cols);
    out.truth.beta = true_coefficients(spec);
    Eigen::VectorXd beta = out.truth.beta.flatten();
    Eigen::VectorXd eta = out.design.X * beta;

    out.y.resize(eta.size());
    if (spec.family == Family::gaussian) {
        std::uniform_real_distribution<double> unif(-std::sqrt(3.0), std::sqrt(3.0));
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            double e = spec.noise == NoiseKind::normal ? gauss(rng) : unif(rng);
            out.y[i] = eta[i] + spec.sigma * e;
        }
    } else {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (Eigen::Index i = 0; i < eta.size(); ++i)
            out.y[i] = u01(rng) < mean_function(Family::logistic, eta[i]) ? 1.0 : 0.0;
    }

    out.truth.delta = compute_delta(out.truth.beta);
    out.truth.model = model_of(out.design, beta);
    WeightMatrix unit{Eigen::VectorXd::Ones(out.design.p()), 0.0};
    auto norms = norm_summary(out.design, unit);
    out.truth.x_min = norms.x_min;
    out.truth.x_max = norms.x_max;
    return out;
}

std::optional<double> compute_delta(const GroupedCoefficients& beta)
{
    std::optional<double> delta;
    for (const auto& b : beta.blocks) {
        std::vector<double> v(b.values.data(), b.values.data() + b.values.size());
        v.push_back(0.0);
        std::sort(v.begin(), v.end());
        for (std::size_t i = 1; i < v.size(); ++i) {
            double gap = v[i] - v[i - 1];
            if (gap > 0.0 && (!delta || gap < *delta)) delta = gap;
        }
    }
    return delta;
}

double rand_index(const Partition& a, const Partition& b)
{
    auto label = [](const Partition& p) {
        std::map<int, int> out;
        for (std::size_t c = 0; c < p.size(); ++c)
            for (int j : p[c]) out[j] = static_cast<int>(c);
        return out;
    };
    auto la = label(a), lb = label(b);
    if (la.size() != lb.size()) throw ConfigError("rand_index: partitions cover different level sets");
    std::vector<int> levels;
    for (const auto& [j, c] : la) {
        if (!lb.count(j)) throw ConfigError("rand_index: partitions cover different level sets");
        levels.push_back(j);
    }
    if (levels.size() < 2) return 1.0;
    std::size_t agree = 0, total = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        for (std::size_t j = i + 1; j < levels.size(); ++j) {
            bool sa = la[levels[i]] == la[levels[j]];
            bool sb = lb[levels[i]] == lb[levels[j]];
            agree += sa == sb;
            ++total;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

RecoveryScore recovery(const PartitionModel& estimated, const PartitionModel& truth)
{
    if (estimated.groups.size() != truth.groups.size()) throw ConfigError("recovery: models have different groups");
    RecoveryScore s;
    s.exact = true;
    double sum = 0.0;
    for (std::size_t k = 0; k < truth.groups.size(); ++k) {
        auto e = canonical(estimated.groups[k]);
        auto t = canonical(truth.groups[k]);
        sum += rand_index(e, t);
        if (e != t) s.exact = false;
    }
    s.rand_index = truth.groups.empty() ? 1.0 : sum / static_cast<double>(truth.groups.size());
    return s;
}

double weight_bound_f(double q, double x_min, double x_max)
{
    if (!(x_min > 0.0 && x_min <= x_max)) throw ConfigError("weight_bound_f: need 0 < x_m <= x_M");
    double exponent = std::max(0.0, std::abs(2.0 * q - 3.0) - 1.0);
    return std::pow(x_min, -2.0) * std::pow(x_max / x_min, exponent);
}

namespace {

// sigma * sqrt(log p) / x; both thresholds are constant multiples of it
double delta_scale(double sigma, double x, double p)
{
    if (!(sigma > 0.0 && x > 0.0)) throw ConfigError("delta bound: sigma and x must be > 0");
    if (!(p >= 2.0)) throw ConfigError("delta bound: p must be >= 2");
    return sigma * std::sqrt(std::log(p)) / x;
}

} // namespace

double sufficient_delta(double sigma, double x_min, double p)
{
    // sqrt(128) = 8 sqrt(2)
    return (8.0 * std::sqrt(2.0)) * delta_scale(sigma, x_min, p);
}

double necessary_delta(double sigma, double x_max, double p)
{
    // sqrt(1/2) = sqrt(2) / 2
    return (std::sqrt(2.0) / 2.0) * delta_scale(sigma, x_max, p);
}

std::string_view to_string(Method method)
{
    switch (method) {
    case Method::glamer_cv: return "glamer-cv";
    case Method::glamer_ric: return "glamer-ric";
    case Method::glamer_fixed: return "glamer-fixed";
    case Method::group_lasso: return "group-lasso";
    }
    return "?";
}

Method parse_method(std::string_view name)
{
    for (auto m : {Method::glamer_cv, Method::glamer_ric, Method::glamer_fixed, Method::group_lasso}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown method `" + std::string(name) + "`");
}

MethodFit run_method(const DesignMatrix& design, const Eigen::VectorXd& y, Family family, const MethodConfig& config,
                     std::uint64_t seed)
{
    MethodFit out;
    switch (config.method) {
    case Method::glamer_cv:
    case Method::glamer_ric: {
        SelectionCriterion crit;
        crit.kind = config.method == Method::glamer_cv ? CriterionKind::cv : CriterionKind::ric;
        crit.folds = config.folds;
        crit.ric_constant = config.ric_constant;
        crit.seed = seed;
        auto sel = glamer_net(design, y, family, config.net, crit);
        out.model = sel.fit.model;
        out.beta = sel.fit.beta.flatten();
        out.md = sel.fit.md;
        out.support_md = sel.fit.support_md;
        break;
    }
    case Method::glamer_fixed: {
        auto W = default_weights(design, config.net.q);
        auto fit = glamer_fit(design, y, family, config.lambda, config.tau, W, config.net.solver);
        out.model = fit.model;
        out.beta = fit.beta.flatten();
        out.md = fit.md;
        out.support_md = fit.support_md;
        break;
    }
    case Method::group_lasso: {
        auto gl = group_lasso_cv(design, y, family, config.net, config.folds, seed);
        out.model = model_of(design, gl.beta);
        out.beta = gl.beta;
        out.md = gl.support_md;
        out.support_md = gl.support_md;
        break;
    }
    }
    return out;
}

std::string_view to_string(GridAxis axis)
{
    switch (axis) {
    case GridAxis::delta: return "delta";
    case GridAxis::n: return "n";
    case GridAxis::sigma: return "sigma";
    }
    return "?";
}

GridAxis parse_axis(std::string_view name)
{
    for (auto a : {GridAxis::delta, GridAxis::n, GridAxis::sigma}) {
        if (to_string(a) == name) return a;
    }
    throw ConfigError("unknown grid axis `" + std::string(name) + "` (expected delta|n|sigma)");
}

SyntheticSpec apply_axis(const SyntheticSpec& spec, GridAxis axis, double value)
{
    SyntheticSpec s = spec;
    switch (axis) {
    case GridAxis::n:
        if (!(value >= 2.0)) throw ConfigError("grid: n must be >= 2");
        s.n = static_cast<int>(std::lround(value));
        break;
    case GridAxis::sigma:
        if (!(value >= 0.0)) throw ConfigError("grid: sigma must be >= 0");
        s.sigma = value;
        break;
    case GridAxis::delta: {
        if (!(value >= 0.0)) throw ConfigError("grid: delta must be >= 0");
        GroupedCoefficients factors_only;
        for (const auto& b : true_coefficients(spec).blocks)
            if (b.kind == ColumnKind::categorical) factors_only.blocks.push_back(b);
        auto base = compute_delta(factors_only);
        if (!base) throw ConfigError("grid over delta needs a spec with distinct factor effects");
        double scale = value / *base;
        for (auto& f : s.factors) {
            if (value == 0.0) {
                // all effects collapse: one cluster per factor, effect 0
                std::fill(f.cluster_of.begin(), f.cluster_of.end(), 0);
                f.effects.assign(1, 0.0);
            } else {
                for (auto& e : f.effects) e *= scale;
            }
        }
        break;
    }
    }
    return s;
}

std::vector<CurvePoint> consistency_experiment(const SyntheticSpec& spec, GridAxis axis,
                                               const std::vector<double>& values, int replications,
                                               const MethodConfig& method)
{
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (values.empty()) throw ConfigError("empty grid");
    std::vector<SyntheticSpec> specs;
    for (double v : values) {
        specs.push_back(apply_axis(spec, axis, v));
        validate(specs.back());
    }

    const std::size_t G = values.size(), R = static_cast<std::size_t>(replications);
    std::vector<ReplicationResult> results(G * R);
    std::vector<std::exception_ptr> errors(G * R);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < G * R; ++t) {
        const std::size_t g = t / R, r = t % R;
        try {
            auto data = generate(specs[g], t);
            auto fit = run_method(data.design, data.y, specs[g].family, method,
                                  make_rng(spec.seed, t, 0xc0ffee)());
            auto score = recovery(fit.model, data.truth.model);
            results[t] = {score.exact, score.rand_index, fit.md, fit.support_md};
        } catch (...) {
            errors[t] = std::current_exception();
        }
        (void)r;
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<CurvePoint> out;
    for (std::size_t g = 0; g < G; ++g) {
        CurvePoint pt;
        pt.value = values[g];
        pt.replications.assign(results.begin() + static_cast<std::ptrdiff_t>(g * R),
                               results.begin() + static_cast<std::ptrdiff_t>((g + 1) * R));
        int exact = 0;
        for (const auto& rr : pt.replications) {
            exact += rr.exact;
            pt.mean_rand_index += rr.rand_index;
            pt.mean_md += rr.md;
            pt.mean_support_md += rr.support_md;
        }
        pt.recovery_rate = static_cast<double>(exact) / static_cast<double>(R);
        pt.mean_rand_index /= static_cast<double>(R);
        pt.mean_md /= static_cast<double>(R);
        pt.mean_support_md /= static_cast<double>(R);
        // the true dimension does not depend on the draw; generate once for it
        auto sample = generate(specs[g], 0);
        pt.true_md = model_dimension(sample.truth.model);
        out.push_back(std::move(pt));
    }
    return out;
}

namespace {

struct Prepared
{
    DesignMatrix train, test;
    Eigen::VectorXd y_train, y_test;
    int dropped_test_rows = 0;
    int removed_variables = 0;
};

// One random split plus the preprocessing rules of the benchmark loop.
Prepared prepare_split(const Table& data, const Schema& schema, const BenchmarkSetup& setup, std::mt19937_64& rng)
{
    const std::size_t n = data.n_rows();
    auto n_train = static_cast<std::size_t>(std::lround(static_cast<double>(n) * setup.m_percent / 100.0));
    n_train = std::clamp<std::size_t>(n_train, 2, n - 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> tr(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> te(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(tr.begin(), tr.end());
    std::sort(te.begin(), te.end());
    Table train = data.select_rows(tr);

    Prepared out;
    Schema kept;
    for (const auto& col : schema.columns) {
        if (col.kind == ColumnKind::continuous) {
            kept.columns.push_back(col);
            continue;
        }
        auto idx = *data.column(col.name);
        std::set<std::string> present;
        for (const auto& row : train.rows) present.insert(row[idx]);
        Column c = col;
        c.levels.clear();
        for (const auto& l : col.levels)
            if (present.count(l)) c.levels.push_back(l);
        if (c.levels.size() < 2) {
            ++out.removed_variables;
            continue;
        }
        kept.columns.push_back(std::move(c));
    }
    if (kept.columns.empty()) throw DataError("no usable variables left in the training split");

    out.y_train = extract_numeric(train, setup.response);
    out.train = encode(train, kept);
    // greedy removal of variables behind rank deficiency, when a full-rank design is possible
    while (out.train.n() > out.train.p()) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(out.train.X);
        qr.setThreshold(1e-10);
        if (qr.rank() == out.train.p()) break;
        Eigen::Index worst = 0;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < out.train.p(); ++j) worst = std::max<Eigen::Index>(worst, perm[j]);
        if (worst == 0) throw DataError("training design is rank deficient in the intercept");
        std::size_t k = 0;
        while (!(worst >= out.train.groups[k].start && worst < out.train.groups[k].start + out.train.groups[k].size)) ++k;
        kept.columns.erase(kept.columns.begin() + static_cast<std::ptrdiff_t>(k));
        ++out.removed_variables;
        if (kept.columns.empty()) throw DataError("no usable variables left in the training split");
        out.train = encode(train, kept);
    }

    std::vector<std::size_t> te_keep;
    for (auto i : te) {
        bool ok = true;
        for (const auto& col : kept.columns) {
            if (col.kind != ColumnKind::categorical) continue;
            const auto& cell = data.rows[i][*data.column(col.name)];
            if (std::find(col.levels.begin(), col.levels.end(), cell) == col.levels.end()) {
                ok = false;
                break;
            }
        }
        if (ok) te_keep.push_back(i);
    }
    out.dropped_test_rows = static_cast<int>(te.size() - te_keep.size());
    if (te_keep.empty()) throw DataError("empty test set after removing unseen levels");
    Table test = data.select_rows(te_keep);
    out.test = encode(test, kept);
    out.y_test = extract_numeric(test, setup.response);
    return out;
}

} // namespace

std::vector<BenchmarkRow> run_benchmark(const Table& data, const Schema& schema, const BenchmarkSetup& setup)
{
    if (!(setup.m_percent > 0.0 && setup.m_percent < 100.0)) throw ConfigError("m_percent must lie in (0, 100)");
    if (setup.iterations < 1) throw ConfigError("iterations must be >= 1");
    if (setup.methods.empty()) throw ConfigError("no benchmark methods");
    if (data.n_rows() < 3) throw DataError("dataset has fewer than 3 rows");
    validate_response(setup.family, extract_numeric(data, setup.response));

    const std::size_t M = setup.methods.size(), I = static_cast<std::size_t>(setup.iterations);
    std::vector<BenchmarkRow> rows(M * I);
    std::vector<std::exception_ptr> errors(M * I);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < M * I; ++t) {
        const std::size_t it = t / M, m = t % M;
        const auto& method = setup.methods[m];
        BenchmarkRow row;
        row.iteration = static_cast<int>(it);
        row.method = method.method;
        bool done = false;
        std::exception_ptr last;
        for (int attempt = 0; attempt < setup.max_attempts && !done; ++attempt) {
            try {
                auto rng = make_rng(setup.seed, it, static_cast<std::uint64_t>(attempt));
                auto prep = prepare_split(data, schema, setup, rng);
                auto fit = run_method(prep.train, prep.y_train, setup.family, method, rng());
                Eigen::VectorXd eta = linear_predictor(prep.test.X, fit.beta);
                double pe = 0.0;
                for (Eigen::Index i = 0; i < eta.size(); ++i) {
                    if (setup.family == Family::gaussian) {
                        double e = prep.y_test[i] - eta[i];
                        pe += e * e;
                    } else {
                        double label = mean_function(Family::logistic, eta[i]) >= 0.5 ? 1.0 : 0.0;
                        pe += label != prep.y_test[i];
                    }
                }
                row.attempts = attempt + 1;
                row.n_train = static_cast<int>(prep.train.n());
                row.n_test = static_cast<int>(prep.test.n());
                row.dropped_test_rows = prep.dropped_test_rows;
                row.removed_variables = prep.removed_variables;
                row.pe = pe / static_cast<double>(eta.size());
                row.md = fit.md;
                done = true;
            } catch (const Error&) {
                last = std::current_exception();
            }
        }
        if (done) rows[t] = row;
        else errors[t] = last;
    }
    for (auto& e : errors) {
        if (!e) continue;
        try {
            std::rethrow_exception(e);
        } catch (const Error& err) {
            throw DataError(std::string("dataset unusable after preprocessing: ") + err.what());
        }
    }
    return rows;
}

namespace {

std::string fmt(double v)
{
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

Json mean_se(const std::vector<double>& v)
{
    Json j;
    double n = static_cast<double>(v.size());
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    j["mean"] = mean;
    j["se"] = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return j;
}

} // namespace

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows)
{
    std::string out = "iteration,method,attempts,n_train,n_test,dropped_test_rows,removed_variables,pe,md\n";
    for (const auto& r : rows) {
        out += std::to_string(r.iteration) + "," + std::string(to_string(r.method)) + "," + std::to_string(r.attempts) +
               "," + std::to_string(r.n_train) + "," + std::to_string(r.n_test) + "," +
               std::to_string(r.dropped_test_rows) + "," + std::to_string(r.removed_variables) + "," + fmt(r.pe) +
               "," + std::to_string(r.md) + "\n";
    }
    return out;
}

Json benchmark_summary(const std::vector<BenchmarkRow>& rows)
{
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        auto name = std::string(to_string(r.method));
        if (!by.count(name)) order.push_back(name);
        by[name].first.push_back(r.pe);
        by[name].second.push_back(r.md);
    }
    Json j = Json::array();
    for (const auto& name : order) {
        Json m;
        m["method"] = name;
        m["iterations"] = by[name].first.size();
        m["pe"] = mean_se(by[name].first);
        m["md"] = mean_se(by[name].second);
        j.push_back(m);
    }
    return j;
}

std::string curve_csv(const std::vector<CurvePoint>& points, GridAxis axis)
{
    std::string out = std::string(to_string(axis)) +
                      ",replications,recovery_rate,mean_rand_index,mean_md,mean_support_md,true_md\n";
    for (const auto& p : points) {
        out += fmt(p.value) + "," + std::to_string(p.replications.size()) + "," + fmt(p.recovery_rate) + "," +
               fmt(p.mean_rand_index) + "," + fmt(p.mean_md) + "," + fmt(p.mean_support_md) + "," +
               std::to_string(p.true_md) + "\n";
    }
    return out;
}

Json curve_summary(const std::vector<CurvePoint>& points, GridAxis axis)
{
    Json j = Json::array();
    for (const auto& p : points) {
        std::vector<double> exact, md;
        for (const auto& r : p.replications) {
            exact.push_back(r.exact ? 1.0 : 0.0);
            md.push_back(r.md);
        }
        Json e;
        e[std::string(to_string(axis))] = p.value;
        e["recovery"] = mean_se(exact);
        e["md"] = mean_se(md);
        e["true_md"] = p.true_md;
        j.push_back(e);
    }
    return j;
}

SyntheticSpec spec_from_json(const Json& j)
{
    try {
        SyntheticSpec s;
        s.n = j.at("n").get<int>();
        s.family = parse_family(j.value("family", std::string("gaussian")));
        s.sigma = j.value("sigma", 1.0);
        s.intercept = j.value("intercept", 0.0);
        auto balance = j.value("balance", std::string("balanced"));
        if (balance == "balanced") s.balance = Balance::balanced;
        else if (balance == "multinomial-uniform" || balance == "multinomial") s.balance = Balance::multinomial;
        else throw ConfigError("unknown balance `" + balance + "`");
        auto noise = j.value("noise", std::string("normal"));
        if (noise == "normal") s.noise = NoiseKind::normal;
        else if (noise == "uniform") s.noise = NoiseKind::uniform;
        else throw ConfigError("unknown noise `" + noise + "`");
        s.seed = j.value("seed", std::uint64_t{0});
        for (const auto& fj : j.value("factors", Json::array())) {
            FactorSpec f;
            f.name = fj.at("name").get<std::string>();
            f.levels = fj.at("levels").get<int>();
            f.cluster_of = fj.at("clusters").get<std::vector<int>>();
            f.effects = fj.at("effects").get<std::vector<double>>();
            s.factors.push_back(std::move(f));
        }
        for (const auto& cj : j.value("continuous", Json::array())) {
            s.continuous.push_back({cj.at("name").get<std::string>(), cj.at("beta").get<double>()});
        }
        validate(s);
        return s;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
    }
}

Json spec_to_json(const SyntheticSpec& s)
{
    Json j;
    j["n"] = s.n;
    j["family"] = std::string(to_string(s.family));
    j["sigma"] = s.sigma;
    j["intercept"] = s.intercept;
    j["balance"] = s.balance == Balance::balanced ? "balanced" : "multinomial-uniform";
    j["noise"] = s.noise == NoiseKind::normal ? "normal" : "uniform";
    j["seed"] = s.seed;
    Json fs = Json::array();
    for (const auto& f : s.factors) {
        Json fj;
        fj["name"] = f.name;
        fj["levels"] = f.levels;
        fj["clusters"] = f.cluster_of;
        fj["effects"] = f.effects;
        fs.push_back(fj);
    }
    j["factors"] = fs;
    Json cs = Json::array();
    for (const auto& c : s.continuous) cs.push_back({{"name", c.name}, {"beta", c.beta}});
    j["continuous"] = cs;
    return j;
}

} // namespace glamer
