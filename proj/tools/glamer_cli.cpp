// glamer command line: fit / path / cv / predict / simulate / bench
#include <glamer/error.hpp>
#include <glamer/model_io.hpp>
#include <glamer/select.hpp>
#include <glamer/simbench.hpp>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace glamer;

namespace {

struct RunConfig
{
    std::string command;
    std::string data, schema, response = "y", model, spec;
    std::string family = "gaussian";
    std::optional<double> lambda;
    std::string tau;
    int nlambda = 100;
    double lambda_ratio = 1e-3;
    double q = 1.0;
    std::string linkage = "complete";
    std::string select = "cv";
    int folds = 10;
    double ric_const = 2.0;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out = ".";
    bool map_unseen = false;
    // simulate / bench
    int replications = 100;
    std::string axis = "delta";
    std::vector<double> grid;
    std::string method = "glamer-cv";
    double m_percent = 70.0;
    int iterations = 100;
    std::string methods = "glamer-cv,group-lasso";
};

// Resolved configuration as embedded in every output. Leaves out --threads
// and --out so outputs do not depend on them.
Json config_json(const RunConfig& c)
{
    Json j;
    j["command"] = c.command;
    if (!c.data.empty()) j["data"] = c.data;
    if (!c.schema.empty()) j["schema"] = c.schema;
    if (c.command == "predict") {
        j["model"] = c.model;
        j["map_unseen_to_reference"] = c.map_unseen;
        return j;
    }
    if (c.command == "simulate") {
        j["spec"] = c.spec;
    } else {
        j["response"] = c.response;
        j["family"] = c.family;
    }
    j["q"] = c.q;
    if (c.command == "fit") {
        j["lambda"] = *c.lambda;
        j["tau"] = std::stod(c.tau);
        return j;
    }
    j["nlambda"] = c.nlambda;
    j["lambda_ratio"] = c.lambda_ratio;
    j["linkage"] = c.linkage;
    if (c.command == "path" || c.command == "cv") {
        j["select"] = c.select;
        if (c.select == "cv") j["folds"] = c.folds;
        else j["ric_const"] = c.ric_const;
    } else {
        j["folds"] = c.folds;
        j["ric_const"] = c.ric_const;
    }
    if (c.command == "simulate") {
        j["method"] = c.method;
        if (c.method == "glamer-fixed") {
            j["lambda"] = c.lambda.value_or(0.0);
            j["tau"] = c.tau.empty() ? 0.0 : std::stod(c.tau);
        }
        j["replications"] = c.replications;
        j["axis"] = c.axis;
        j["grid"] = c.grid;
    }
    if (c.command == "bench") {
        j["methods"] = c.methods;
        j["m_percent"] = c.m_percent;
        j["iterations"] = c.iterations;
    }
    j["seed"] = *c.seed;
    return j;
}

std::string sig6(double v)
{
    std::ostringstream ss;
    ss << std::setprecision(6) << v;
    return ss.str();
}

std::string full(double v)
{
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write `" + path.string() + "`");
    f << text;
    if (!f) throw ConfigError("cannot write `" + path.string() + "`");
}

fs::path out_dir(const RunConfig& c)
{
    fs::path p(c.out);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory `" + c.out + "`: " + ec.message());
    return p;
}

std::string csv_header(const Json& config)
{
    return "# config: " + config.dump() + "\n";
}

struct Loaded
{
    Schema schema;
    DesignMatrix design;
    Eigen::VectorXd y;
    Family family;
};

Loaded load_training(const RunConfig& c)
{
    if (c.data.empty()) throw ConfigError("--data is required");
    if (c.schema.empty()) throw ConfigError("--schema is required");
    Loaded out;
    out.family = parse_family(c.family);
    auto schema_text = read_text_file(c.schema);
    auto table = read_csv_file(c.data);
    out.schema = resolve_schema(parse_schema(schema_text), table);
    if (out.schema.find(c.response)) throw ConfigError("response column `" + c.response + "` is also in the schema");
    out.y = extract_numeric(table, c.response);
    validate_response(out.family, out.y);
    out.design = encode(table, out.schema);
    return out;
}

NetConfig net_config(const RunConfig& c)
{
    NetConfig net;
    net.n_lambda = c.nlambda;
    net.lambda_ratio = c.lambda_ratio;
    net.q = c.q;
    net.linkage = parse_linkage(c.linkage);
    return net;
}

std::string report(const GlamerFit& fit)
{
    std::ostringstream r;
    r << "family: " << to_string(fit.family) << "\n";
    r << "lambda: " << sig6(fit.lambda) << "\n";
    r << "tau: " << (fit.tau ? sig6(*fit.tau) : std::string("dendrogram")) << "\n";
    r << "model dimension: " << fit.md << "\n";
    r << "group lasso support dimension: " << fit.support_md << "\n";
    r << "training loss: " << sig6(fit.train_loss) << "\n";
    r << "kkt residual: " << sig6(fit.kkt_residual) << "\n";
    r << "solver iterations: " << fit.solver_iterations << "\n";
    r << "intercept: " << sig6(fit.beta.intercept) << "\n";
    for (std::size_t k = 0; k < fit.beta.blocks.size(); ++k) {
        const auto& blk = fit.beta.blocks[k];
        const auto& part = fit.model.groups[k];
        if (blk.kind == ColumnKind::continuous) {
            r << blk.name << " (continuous): " << sig6(blk.values[0])
              << (part.size() == 1 ? " [dropped]" : "") << "\n";
            continue;
        }
        const auto* col = fit.schema.find(blk.name);
        r << blk.name << " (factor, " << part.size() << " clusters)\n";
        for (std::size_t ci = 0; ci < part.size(); ++ci) {
            r << "  {";
            for (std::size_t m = 0; m < part[ci].size(); ++m)
                r << (m ? ", " : "") << col->levels[static_cast<std::size_t>(part[ci][m])];
            double coef = part[ci][0] == 0 ? 0.0 : blk.values[part[ci][0] - 1];
            r << "}: " << sig6(coef) << (ci == 0 ? " (reference)" : "") << "\n";
        }
    }
    for (const auto& rep : fit.repairs) r << "repair: " << rep << "\n";
    return r.str();
}

int cmd_fit(const RunConfig& c)
{
    if (!c.lambda) throw ConfigError("fit needs --lambda");
    if (c.tau.empty()) throw ConfigError("fit needs --tau");
    if (c.tau == "auto") throw ConfigError("fit needs a numeric --tau; use `cv` or `path` for dendrogram selection");
    double tau = 0.0;
    try {
        tau = std::stod(c.tau);
    } catch (const std::exception&) {
        throw ConfigError("--tau: not a number: `" + c.tau + "`");
    }
    if (!(*c.lambda >= 0.0) || !std::isfinite(*c.lambda)) throw ConfigError("--lambda must be a finite value >= 0");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("--tau must be a finite value >= 0");

    auto d = load_training(c);
    auto W = default_weights(d.design, c.q);
    auto fit = glamer_fit(d.design, d.y, d.family, *c.lambda, tau, W);
    auto dir = out_dir(c);
    write_file(dir / "model.json", save_model(fit, config_json(c)));
    write_file(dir / "report.txt", report(fit));
    std::cout << report(fit);
    return 0;
}

int cmd_path(const RunConfig& c)
{
    if (!c.tau.empty() && c.tau != "auto") throw ConfigError("--tau is fixed by the dendrogram in path/cv mode; omit it or pass `auto`");
    if (c.lambda) throw ConfigError("--lambda and the lambda grid (--nlambda/--lambda-ratio) are mutually exclusive here; use `fit`");
    if (c.select != "cv" && c.select != "ric") throw ConfigError("--select must be cv or ric");
    auto d = load_training(c);
    auto net = net_config(c);
    SelectionCriterion crit;
    crit.kind = c.select == "cv" ? CriterionKind::cv : CriterionKind::ric;
    crit.folds = c.folds;
    crit.ric_constant = c.ric_const;
    crit.seed = *c.seed;

    auto W = default_weights(d.design, net.q);
    auto grid = net_grid(d.design, d.y, d.family, W, net);
    auto path = glamer_path(d.design, d.y, d.family, grid, W, net.linkage, net.solver);
    auto sel = select_final(path, crit, d.design, d.y, d.family, net);

    auto config = config_json(c);
    auto dir = out_dir(c);
    std::string pcsv = csv_header(config) + "lambda_index,lambda,member,md,loss,kkt_residual\n";
    for (std::size_t i = 0; i < path.points.size(); ++i) {
        const auto& pt = path.points[i];
        for (std::size_t m = 0; m < pt.family.size(); ++m) {
            pcsv += std::to_string(i) + "," + full(pt.lambda) + "," + std::to_string(m) + "," +
                    std::to_string(pt.family_md[m]) + "," + full(pt.family_loss[m]) + "," +
                    full(pt.solution.kkt_residual) + "\n";
        }
    }
    std::string tcsv = csv_header(config) + "md,train_loss,criterion,lambda_index,lambda,chosen\n";
    for (const auto& row : sel.trace) {
        tcsv += std::to_string(row.md) + "," + full(row.train_loss) + "," + full(row.value) + "," +
                std::to_string(row.lambda_index) + "," + full(path.lambdas[row.lambda_index]) + "," +
                (row.md == sel.chosen_md ? "1" : "0") + "\n";
    }
    write_file(dir / "path.csv", pcsv);
    write_file(dir / "trace.csv", tcsv);
    write_file(dir / "model.json", save_model(sel.fit, config));
    write_file(dir / "report.txt", report(sel.fit));
    std::cout << "selected model dimension " << sel.chosen_md << " by " << c.select << " (" << path.best.size()
              << " candidate dimensions";
    if (path.failed_refits) std::cout << ", " << path.failed_refits << " refits failed";
    if (sel.dropped_test_rows) std::cout << ", " << sel.dropped_test_rows << " held-out rows with unseen levels dropped";
    std::cout << ")\n" << report(sel.fit);
    return 0;
}

int cmd_predict(const RunConfig& c)
{
    if (c.model.empty()) throw ConfigError("predict needs --model");
    if (c.data.empty()) throw ConfigError("--data is required");
    auto fit = load_model(read_text_file(c.model));
    auto table = read_csv_file(c.data);
    if (!c.schema.empty()) {
        auto schema = resolve_schema(parse_schema(read_text_file(c.schema)), table);
        if (schema.fingerprint() != fit.schema.fingerprint())
            throw DataError("schema fingerprint " + schema.fingerprint() + " of `" + c.schema +
                            "` does not match the model's " + fit.schema.fingerprint());
    }
    auto pred = predict(fit, table, c.map_unseen);
    std::string out = csv_header(config_json(c));
    bool logistic = fit.family == Family::logistic;
    out += logistic ? "eta,probability,label\n" : "prediction\n";
    for (Eigen::Index i = 0; i < pred.eta.size(); ++i) {
        out += full(pred.eta[i]);
        if (logistic) out += "," + full(pred.probability[i]) + "," + std::to_string(pred.label[static_cast<std::size_t>(i)]);
        out += "\n";
    }
    write_file(out_dir(c) / "predictions.csv", out);
    std::cout << "wrote " << pred.eta.size() << " predictions\n";
    return 0;
}

MethodConfig method_config(const RunConfig& c, Method m)
{
    MethodConfig mc;
    mc.method = m;
    mc.net = net_config(c);
    mc.folds = c.folds;
    mc.ric_constant = c.ric_const;
    if (m == Method::glamer_fixed) {
        if (!c.lambda || c.tau.empty() || c.tau == "auto") throw ConfigError("glamer-fixed needs --lambda and a numeric --tau");
        mc.lambda = *c.lambda;
        mc.tau = std::stod(c.tau);
        if (!(mc.lambda >= 0.0 && mc.tau >= 0.0)) throw ConfigError("--lambda and --tau must be >= 0");
    }
    return mc;
}

int cmd_simulate(const RunConfig& c)
{
    if (c.spec.empty()) throw ConfigError("simulate needs --spec");
    Json sj;
    try {
        sj = Json::parse(read_text_file(c.spec));
    } catch (const Json::parse_error& e) {
        throw ConfigError("`" + c.spec + "`: " + e.what());
    }
    auto spec = spec_from_json(sj);
    if (sj.find("seed") == sj.end()) spec.seed = *c.seed;
    auto mc = method_config(c, parse_method(c.method));
    auto axis = parse_axis(c.axis);
    auto grid = c.grid;
    if (grid.empty()) {
        axis = GridAxis::n;
        grid = {static_cast<double>(spec.n)};
    }
    auto curve = consistency_experiment(spec, axis, grid, c.replications, mc);

    auto config = config_json(c);
    config["axis"] = std::string(to_string(axis));
    config["grid"] = grid;
    config["resolved_spec"] = spec_to_json(spec);
    auto dir = out_dir(c);
    write_file(dir / "recovery.csv", csv_header(config) + curve_csv(curve, axis));
    Json summary;
    summary["config"] = config;
    summary["note"] = "theoretical thresholds drop their o(1) terms";
    summary["points"] = curve_summary(curve, axis);
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    for (const auto& p : curve)
        std::cout << to_string(axis) << "=" << sig6(p.value) << " recovery=" << sig6(p.recovery_rate)
                  << " mean_md=" << sig6(p.mean_md) << " true_md=" << p.true_md << "\n";
    return 0;
}

int cmd_bench(const RunConfig& c)
{
    if (!(c.m_percent > 0.0 && c.m_percent < 100.0)) throw ConfigError("--m-percent must lie in (0, 100)");
    if (c.iterations < 1) throw ConfigError("--iterations must be >= 1");
    if (c.data.empty()) throw ConfigError("--data is required");
    if (c.schema.empty()) throw ConfigError("--schema is required");
    auto table = read_csv_file(c.data);
    auto schema = resolve_schema(parse_schema(read_text_file(c.schema)), table);
    BenchmarkSetup setup;
    setup.response = c.response;
    setup.family = parse_family(c.family);
    setup.m_percent = c.m_percent;
    setup.iterations = c.iterations;
    setup.seed = *c.seed;
    std::stringstream ss(c.methods);
    for (std::string name; std::getline(ss, name, ',');)
        if (!name.empty()) setup.methods.push_back(method_config(c, parse_method(name)));
    auto rows = run_benchmark(table, schema, setup);

    auto config = config_json(c);
    auto dir = out_dir(c);
    write_file(dir / "bench.csv", csv_header(config) + benchmark_csv(rows));
    Json summary;
    summary["config"] = config;
    summary["methods"] = benchmark_summary(rows);
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    for (const auto& m : summary["methods"])
        std::cout << m["method"].get<std::string>() << ": PE " << sig6(m["pe"]["mean"].get<double>()) << " (se "
                  << sig6(m["pe"]["se"].get<double>()) << "), MD " << sig6(m["md"]["mean"].get<double>()) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"glamer: Group Lasso with factor-level merging"};
    app.require_subcommand(1);
    RunConfig c;
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* s) {
        s->add_option("--seed", seed, "random seed (drawn and printed when omitted)");
        s->add_option("--threads", c.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
        s->add_option("--out", c.out, "output directory");
    };
    auto data_opts = [&](CLI::App* s) {
        s->add_option("--data", c.data, "CSV file with a header row");
        s->add_option("--schema", c.schema, "column schema file");
        s->add_option("--response", c.response, "response column name");
        s->add_option("--family", c.family, "gaussian|logistic");
        s->add_option("--q", c.q, "weight exponent: w = ||x||^q");
    };
    auto grid_opts = [&](CLI::App* s) {
        s->add_option("--nlambda", c.nlambda, "lambda grid size");
        s->add_option("--lambda-ratio", c.lambda_ratio, "smallest lambda / lambda_max");
        s->add_option("--linkage", c.linkage, "single|complete");
        s->add_option("--folds", c.folds, "cross-validation folds");
        s->add_option("--ric-const", c.ric_const, "RIC constant");
    };

    auto* fit = app.add_subcommand("fit", "fit at a fixed (lambda, tau)");
    data_opts(fit);
    common(fit);
    fit->add_option("--lambda", c.lambda, "penalty level");
    fit->add_option("--tau", c.tau, "merge threshold");

    for (const char* name : {"path", "cv"}) {
        auto* s = app.add_subcommand(name, std::string(name) == "cv" ? "net scheme with final selection (default cv)"
                                                                     : "net scheme: path table plus selection");
        data_opts(s);
        grid_opts(s);
        common(s);
        s->add_option("--select", c.select, "cv|ric");
        s->add_option("--lambda", c.lambda, "not allowed here (use fit)");
        s->add_option("--tau", c.tau, "auto (the only accepted value)");
    }

    auto* pred = app.add_subcommand("predict", "predict from a saved model");
    pred->add_option("--model", c.model, "model JSON");
    pred->add_option("--data", c.data, "CSV with the model's columns");
    pred->add_option("--schema", c.schema, "schema to check against the model");
    pred->add_flag("--map-unseen-to-reference", c.map_unseen, "send unseen levels to the reference cluster");
    common(pred);

    auto* sim = app.add_subcommand("simulate", "partition-recovery experiment on synthetic data");
    sim->add_option("--spec", c.spec, "synthetic spec JSON");
    sim->add_option("--replications", c.replications)->check(CLI::PositiveNumber);
    sim->add_option("--axis", c.axis, "delta|n|sigma");
    sim->add_option("--grid", c.grid, "grid values along --axis")->delimiter(',');
    sim->add_option("--method", c.method, "glamer-cv|glamer-ric|glamer-fixed|group-lasso");
    sim->add_option("--lambda", c.lambda, "glamer-fixed only");
    sim->add_option("--tau", c.tau, "glamer-fixed only");
    sim->add_option("--q", c.q);
    grid_opts(sim);
    common(sim);

    auto* bench = app.add_subcommand("bench", "repeated train/test splits of a dataset");
    data_opts(bench);
    grid_opts(bench);
    common(bench);
    bench->add_option("--methods", c.methods, "comma separated methods");
    bench->add_option("--m-percent", c.m_percent, "training share in percent");
    bench->add_option("--iterations", c.iterations);
    bench->add_option("--lambda", c.lambda, "glamer-fixed only");
    bench->add_option("--tau", c.tau, "glamer-fixed only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        auto* sub = app.get_subcommands().front();
        c.command = sub->get_name();
        if (sub->count("--seed")) {
            c.seed = seed;
        } else if (c.command != "fit" && c.command != "predict") {
            c.seed = std::random_device{}();
            std::cerr << "seed: " << *c.seed << "\n";
        } else {
            c.seed = 0;
        }
#ifdef _OPENMP
        if (c.threads > 0) omp_set_num_threads(c.threads);
#endif
        if (c.command == "fit") return cmd_fit(c);
        if (c.command == "path" || c.command == "cv") return cmd_path(c);
        if (c.command == "predict") return cmd_predict(c);
        if (c.command == "simulate") return cmd_simulate(c);
        return cmd_bench(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
