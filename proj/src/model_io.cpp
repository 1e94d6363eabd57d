#include <glamer/model_io.hpp>

#include <algorithm>

namespace glamer {

namespace {

int level_index(const Column& col, const std::string& level)
{
    auto it = std::find(col.levels.begin(), col.levels.end(), level);
    if (it == col.levels.end()) throw DataError("model file: unknown level `" + level + "` in `" + col.name + "`");
    return static_cast<int>(it - col.levels.begin());
}

} // namespace

Json partition_to_json(const Schema& schema, const PartitionModel& model)
{
    Json out = Json::array();
    for (std::size_t k = 0; k < schema.columns.size(); ++k) {
        const auto& col = schema.columns[k];
        Json g;
        g["name"] = col.name;
        g["kind"] = std::string(to_string(col.kind));
        if (col.kind == ColumnKind::continuous) {
            g["present"] = model.continuous_present(k);
        } else {
            Json clusters = Json::array();
            for (const auto& c : model.groups[k]) {
                Json cj;
                Json levels = Json::array();
                for (int j : c) levels.push_back(col.levels[static_cast<std::size_t>(j)]);
                cj["levels"] = levels;
                cj["reference"] = std::find(c.begin(), c.end(), 0) != c.end();
                clusters.push_back(cj);
            }
            g["clusters"] = clusters;
        }
        out.push_back(g);
    }
    return out;
}

PartitionModel partition_from_json(const Schema& schema, const Json& j)
{
    if (!j.is_array() || j.size() != schema.columns.size()) throw DataError("model file: partition does not match schema");
    PartitionModel m;
    for (std::size_t k = 0; k < schema.columns.size(); ++k) {
        const auto& col = schema.columns[k];
        const auto& g = j[k];
        if (g.at("name").get<std::string>() != col.name) throw DataError("model file: group order does not match schema");
        if (col.kind == ColumnKind::continuous) {
            m.groups.push_back(g.at("present").get<bool>() ? singletons(2) : one_cluster(2));
            continue;
        }
        Partition part;
        for (const auto& cj : g.at("clusters")) {
            Cluster c;
            for (const auto& l : cj.at("levels")) c.push_back(level_index(col, l.get<std::string>()));
            part.push_back(std::move(c));
        }
        m.groups.push_back(canonical(std::move(part)));
    }
    return m;
}

Json model_to_json(const GlamerFit& fit, const Json& settings)
{
    Json j;
    j["format"] = "glamer-model/1";
    j["schema_fingerprint"] = fit.schema.fingerprint();
    Json schema = Json::array();
    for (const auto& c : fit.schema.columns) {
        Json cj;
        cj["name"] = c.name;
        cj["kind"] = std::string(to_string(c.kind));
        if (c.kind == ColumnKind::categorical) cj["levels"] = c.levels;
        if (c.levels_inferred) cj["levels_inferred"] = true;
        schema.push_back(cj);
    }
    j["schema"] = schema;
    j["family"] = std::string(to_string(fit.family));
    j["intercept"] = fit.beta.intercept;

    // partition plus one coefficient per cluster (the reference cluster is 0)
    Json groups = partition_to_json(fit.schema, fit.model);
    for (std::size_t k = 0; k < fit.schema.columns.size(); ++k) {
        const auto& col = fit.schema.columns[k];
        const auto& block = fit.beta.blocks[k];
        auto& g = groups[k];
        if (col.kind == ColumnKind::continuous) {
            g["coefficient"] = block.values[0];
            continue;
        }
        for (std::size_t c = 0; c < fit.model.groups[k].size(); ++c) {
            const auto& cluster = fit.model.groups[k][c];
            int j0 = cluster.front();
            g["clusters"][c]["coefficient"] = j0 == 0 ? 0.0 : block.values[j0 - 1];
        }
    }
    j["groups"] = groups;
    j["md"] = fit.md;
    j["train_loss"] = fit.train_loss;
    j["lambda"] = fit.lambda;
    j["tau"] = fit.tau ? Json(*fit.tau) : Json(nullptr);
    j["settings"] = settings;
    Json diag;
    diag["solver_iterations"] = fit.solver_iterations;
    diag["kkt_residual"] = fit.kkt_residual;
    diag["group_lasso_support_md"] = fit.support_md;
    diag["repairs"] = fit.repairs;
    j["diagnostics"] = diag;
    return j;
}

GlamerFit model_from_json(const Json& j)
{
    try {
        if (j.at("format").get<std::string>() != "glamer-model/1") throw DataError("model file: unsupported format");
        GlamerFit fit;
        for (const auto& cj : j.at("schema")) {
            Column c;
            c.name = cj.at("name").get<std::string>();
            auto kind = cj.at("kind").get<std::string>();
            c.kind = kind == "categorical" ? ColumnKind::categorical : ColumnKind::continuous;
            if (c.kind == ColumnKind::categorical) c.levels = cj.at("levels").get<std::vector<std::string>>();
            c.levels_inferred = cj.value("levels_inferred", false);
            fit.schema.columns.push_back(std::move(c));
        }
        if (fit.schema.fingerprint() != j.at("schema_fingerprint").get<std::string>())
            throw DataError("model file: schema fingerprint does not match its schema");
        fit.family = parse_family(j.at("family").get<std::string>());
        fit.model = partition_from_json(fit.schema, j.at("groups"));

        fit.beta.intercept = j.at("intercept").get<double>();
        for (std::size_t k = 0; k < fit.schema.columns.size(); ++k) {
            const auto& col = fit.schema.columns[k];
            const auto& g = j.at("groups")[k];
            CoefficientBlock b;
            b.name = col.name;
            b.kind = col.kind;
            if (col.kind == ColumnKind::continuous) {
                b.values = Eigen::VectorXd::Constant(1, g.at("coefficient").get<double>());
            } else {
                b.levels.assign(col.levels.begin() + 1, col.levels.end());
                b.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.levels.size()));
                for (const auto& cj : g.at("clusters")) {
                    double coef = cj.at("coefficient").get<double>();
                    for (const auto& l : cj.at("levels")) {
                        int idx = level_index(col, l.get<std::string>());
                        if (idx > 0) b.values[idx - 1] = coef;
                    }
                }
            }
            fit.beta.blocks.push_back(std::move(b));
        }
        fit.md = j.at("md").get<int>();
        fit.train_loss = j.at("train_loss").get<double>();
        fit.lambda = j.at("lambda").get<double>();
        if (!j.at("tau").is_null()) fit.tau = j.at("tau").get<double>();
        const auto& diag = j.at("diagnostics");
        fit.solver_iterations = diag.at("solver_iterations").get<int>();
        fit.kkt_residual = diag.at("kkt_residual").get<double>();
        fit.support_md = diag.value("group_lasso_support_md", 1);
        fit.repairs = diag.at("repairs").get<std::vector<std::string>>();
        return fit;
    } catch (const Json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

std::string save_model(const GlamerFit& fit, const Json& settings)
{
    return model_to_json(fit, settings).dump(2) + "\n";
}

GlamerFit load_model(const std::string& text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(j);
}

} // namespace glamer
