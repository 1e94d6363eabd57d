#include <glamer/design.hpp>
#include <glamer/error.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace glamer {

namespace {

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

bool is_missing(std::string_view cell)
{
    return cell.empty() || cell == "NA" || cell == "?";
}

} // namespace

std::string_view to_string(ColumnKind kind)
{
    return kind == ColumnKind::continuous ? "continuous" : "categorical";
}

const Column* Schema::find(std::string_view name) const
{
    for (const auto& c : columns) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string Schema::to_text() const
{
    std::string out;
    for (const auto& c : columns) {
        out += c.name;
        out += ',';
        out += to_string(c.kind);
        if (c.kind == ColumnKind::categorical) {
            out += ',';
            for (std::size_t j = 0; j < c.levels.size(); ++j) {
                if (j) out += '|';
                out += c.levels[j];
            }
        }
        out += '\n';
    }
    return out;
}

std::string Schema::fingerprint() const
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : to_text()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Schema parse_schema(std::string_view text)
{
    Schema schema;
    std::unordered_set<std::string> names;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto where = "schema line " + std::to_string(line_no) + ": ";

        auto parts = split(line, ',');
        if (parts.size() < 2 || parts.size() > 3 || parts[0].empty())
            throw ConfigError(where + "expected `name,kind[,level1|level2|...]`");

        Column col;
        col.name = parts[0];
        if (parts[1] == "continuous") {
            col.kind = ColumnKind::continuous;
            if (parts.size() == 3) throw ConfigError(where + "continuous column `" + col.name + "` cannot list levels");
        } else if (parts[1] == "categorical") {
            col.kind = ColumnKind::categorical;
            if (parts.size() == 3) {
                col.levels = split(parts[2], '|');
                std::unordered_set<std::string> seen;
                for (const auto& l : col.levels) {
                    if (l.empty()) throw ConfigError(where + "empty level name in `" + col.name + "`");
                    if (!seen.insert(l).second)
                        throw ConfigError(where + "duplicate level `" + l + "` in `" + col.name + "`");
                }
                if (col.levels.size() < 2)
                    throw ConfigError(where + "categorical column `" + col.name + "` needs at least 2 levels");
            }
        } else {
            throw ConfigError(where + "unknown column kind `" + parts[1] + "`");
        }
        if (!names.insert(col.name).second) throw ConfigError(where + "duplicate column name `" + col.name + "`");
        schema.columns.push_back(std::move(col));
    }
    if (schema.columns.empty()) throw ConfigError("schema: no columns");
    return schema;
}

Schema resolve_schema(Schema schema, const Table& data)
{
    for (auto& col : schema.columns) {
        if (col.kind != ColumnKind::categorical || !col.levels.empty()) continue;
        auto idx = data.column(col.name);
        if (!idx) throw DataError("data has no column `" + col.name + "`");
        std::set<std::string> seen;
        for (const auto& row : data.rows) {
            const auto& cell = row[*idx];
            if (is_missing(cell)) continue;
            seen.insert(cell);
        }
        col.levels.assign(seen.begin(), seen.end());
        col.levels_inferred = true;
        if (col.levels.size() < 2)
            throw DataError("categorical column `" + col.name + "` has fewer than 2 levels in the data");
    }
    return schema;
}

std::string DesignMatrix::column_label(Eigen::Index col) const
{
    if (col == 0) return "(intercept)";
    for (const auto& g : groups) {
        if (col >= g.start && col < g.start + g.size) {
            if (!g.is_factor()) return g.name;
            return g.name + "=" + g.levels[static_cast<std::size_t>(col - g.start + 1)];
        }
    }
    return "column " + std::to_string(col);
}

double parse_double(std::string_view cell, std::string_view context)
{
    auto s = trim(cell);
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        throw DataError(std::string(context) + ": non-numeric value `" + std::string(cell) + "`");
    return v;
}

DesignMatrix assemble_design(const Schema& schema, const std::vector<ColumnData>& columns)
{
    if (columns.size() != schema.columns.size())
        throw DataError("assemble_design: column count does not match schema");

    Eigen::Index n = 0;
    if (!columns.empty()) {
        const auto& c0 = columns.front();
        n = static_cast<Eigen::Index>(schema.columns[0].kind == ColumnKind::categorical ? c0.codes.size()
                                                                                         : c0.values.size());
    }

    DesignMatrix d;
    Eigen::Index p = 1;
    for (const auto& col : schema.columns) {
        Group g;
        g.name = col.name;
        g.kind = col.kind;
        g.start = p;
        if (col.kind == ColumnKind::categorical) {
            g.size = static_cast<Eigen::Index>(col.levels.size()) - 1;
            g.levels = col.levels;
        } else {
            g.size = 1;
        }
        p += g.size;
        d.groups.push_back(std::move(g));
    }

    d.X = Eigen::MatrixXd::Zero(n, p);
    d.X.col(0).setOnes();
    for (std::size_t k = 0; k < d.groups.size(); ++k) {
        const auto& g = d.groups[k];
        const auto& data = columns[k];
        if (g.is_factor()) {
            if (static_cast<Eigen::Index>(data.codes.size()) != n)
                throw DataError("assemble_design: ragged column `" + g.name + "`");
            for (Eigen::Index i = 0; i < n; ++i) {
                int code = data.codes[static_cast<std::size_t>(i)];
                if (code < 0 || code > g.size) throw DataError("assemble_design: bad level code in `" + g.name + "`");
                if (code > 0) d.X(i, g.start + code - 1) = 1.0;
            }
        } else {
            if (static_cast<Eigen::Index>(data.values.size()) != n)
                throw DataError("assemble_design: ragged column `" + g.name + "`");
            for (Eigen::Index i = 0; i < n; ++i) d.X(i, g.start) = data.values[static_cast<std::size_t>(i)];
        }
    }
    return d;
}

DesignMatrix encode(const Table& data, const Schema& schema)
{
    std::vector<ColumnData> columns;
    columns.reserve(schema.columns.size());
    for (const auto& col : schema.columns) {
        auto idx = data.column(col.name);
        if (!idx) throw DataError("data has no column `" + col.name + "`");
        ColumnData cd;
        if (col.kind == ColumnKind::categorical) {
            if (col.levels.size() < 2)
                throw DataError("categorical column `" + col.name + "` has unresolved levels");
            std::unordered_map<std::string, int> code;
            for (std::size_t j = 0; j < col.levels.size(); ++j) code.emplace(col.levels[j], static_cast<int>(j));
            cd.codes.reserve(data.n_rows());
            for (std::size_t i = 0; i < data.n_rows(); ++i) {
                const auto& cell = data.rows[i][*idx];
                auto where = "row " + std::to_string(i + 1) + ", column `" + col.name + "`";
                if (is_missing(cell)) throw DataError(where + ": missing value");
                auto it = code.find(cell);
                if (it == code.end()) throw DataError(where + ": unseen level `" + cell + "`");
                cd.codes.push_back(it->second);
            }
        } else {
            cd.values.reserve(data.n_rows());
            for (std::size_t i = 0; i < data.n_rows(); ++i) {
                const auto& cell = data.rows[i][*idx];
                auto where = "row " + std::to_string(i + 1) + ", column `" + col.name + "`";
                if (is_missing(cell)) throw DataError(where + ": missing value");
                cd.values.push_back(parse_double(cell, where));
            }
        }
        columns.push_back(std::move(cd));
    }
    return assemble_design(schema, columns);
}

std::vector<std::string> decode_levels(const DesignMatrix& design, Eigen::Index row)
{
    std::vector<std::string> out;
    for (const auto& g : design.groups) {
        if (!g.is_factor()) continue;
        std::size_t level = 0;
        for (Eigen::Index j = 0; j < g.size; ++j) {
            if (design.X(row, g.start + j) != 0.0) {
                level = static_cast<std::size_t>(j + 1);
                break;
            }
        }
        out.push_back(g.levels[level]);
    }
    return out;
}

Eigen::VectorXd extract_numeric(const Table& data, std::string_view column)
{
    auto idx = data.column(column);
    if (!idx) throw DataError("data has no column `" + std::string(column) + "`");
    Eigen::VectorXd y(static_cast<Eigen::Index>(data.n_rows()));
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const auto& cell = data.rows[i][*idx];
        auto where = "row " + std::to_string(i + 1) + ", column `" + std::string(column) + "`";
        if (is_missing(cell)) throw DataError(where + ": missing value");
        y[static_cast<Eigen::Index>(i)] = parse_double(cell, where);
    }
    return y;
}

WeightMatrix default_weights(const DesignMatrix& design, double q)
{
    WeightMatrix W;
    W.q = q;
    W.w = Eigen::VectorXd::Ones(design.p());
    for (Eigen::Index j = 1; j < design.p(); ++j) {
        double norm = design.X.col(j).norm();
        if (norm == 0.0) throw DataError("all-zero design column `" + design.column_label(j) + "`");
        W.w[j] = std::pow(norm, q);
    }
    return W;
}

NormSummary norm_summary(const DesignMatrix& design, const WeightMatrix& weights)
{
    NormSummary s;
    if (design.p() <= 1) return s;
    s.x_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 1; j < design.p(); ++j) {
        double norm = design.X.col(j).norm();
        s.x_max = std::max(s.x_max, norm);
        s.x_min = std::min(s.x_min, norm);
        s.x_weighted = std::max(s.x_weighted, norm / weights.w[j]);
    }
    return s;
}

} // namespace glamer

namespace glamer {

Schema schema_of(const DesignMatrix& design)
{
    Schema s;
    for (const auto& g : design.groups) {
        Column c;
        c.name = g.name;
        c.kind = g.kind;
        c.levels = g.levels;
        s.columns.push_back(std::move(c));
    }
    return s;
}

DesignMatrix subset_rows(const DesignMatrix& design, const std::vector<Eigen::Index>& rows)
{
    DesignMatrix out;
    out.groups = design.groups;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), design.p());
    for (std::size_t i = 0; i < rows.size(); ++i) out.X.row(static_cast<Eigen::Index>(i)) = design.X.row(rows[i]);
    return out;
}

} // namespace glamer
