#include <glamer/error.hpp>
#include <glamer/merge.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

namespace glamer {

Partition canonical(Partition partition)
{
    for (auto& c : partition) std::sort(c.begin(), c.end());
    std::erase_if(partition, [](const Cluster& c) { return c.empty(); });
    std::sort(partition.begin(), partition.end(),
              [](const Cluster& a, const Cluster& b) { return a.front() < b.front(); });
    return partition;
}

Partition singletons(int n_levels)
{
    Partition p;
    for (int j = 0; j < n_levels; ++j) p.push_back({j});
    return p;
}

Partition one_cluster(int n_levels)
{
    Cluster c(static_cast<std::size_t>(n_levels));
    std::iota(c.begin(), c.end(), 0);
    return {c};
}

std::string PartitionModel::key() const
{
    std::string out;
    for (std::size_t k = 0; k < groups.size(); ++k) {
        if (k) out += ';';
        for (std::size_t c = 0; c < groups[k].size(); ++c) {
            if (c) out += '|';
            for (std::size_t j = 0; j < groups[k][c].size(); ++j) {
                if (j) out += ',';
                out += std::to_string(groups[k][c][j]);
            }
        }
    }
    return out;
}

PartitionModel null_model(const DesignMatrix& design)
{
    PartitionModel m;
    for (const auto& g : design.groups) m.groups.push_back(one_cluster(g.n_levels()));
    return m;
}

PartitionModel full_model(const DesignMatrix& design)
{
    PartitionModel m;
    for (const auto& g : design.groups) m.groups.push_back(singletons(g.n_levels()));
    return m;
}

PartitionModel model_of(const DesignMatrix& design, const Eigen::VectorXd& beta)
{
    PartitionModel m;
    for (const auto& g : design.groups) m.groups.push_back(threshold_merge(beta.segment(g.start, g.size), 0.0));
    return m;
}

int model_dimension(const PartitionModel& model)
{
    int md = 1;
    for (const auto& p : model.groups) md += static_cast<int>(p.size()) - 1;
    return md;
}

Partition threshold_merge(const Eigen::VectorXd& beta_k, double tau)
{
    const int m = static_cast<int>(beta_k.size()) + 1;
    std::vector<double> values(static_cast<std::size_t>(m));
    values[0] = 0.0;
    for (int j = 1; j < m; ++j) values[static_cast<std::size_t>(j)] = beta_k[j - 1];

    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
    });

    Partition out;
    out.push_back({order[0]});
    for (std::size_t i = 1; i < order.size(); ++i) {
        double gap = values[static_cast<std::size_t>(order[i])] - values[static_cast<std::size_t>(order[i - 1])];
        if (gap <= tau) out.back().push_back(order[i]);
        else out.push_back({order[i]});
    }
    return canonical(std::move(out));
}

std::string_view to_string(Linkage linkage)
{
    return linkage == Linkage::single ? "single" : "complete";
}

Linkage parse_linkage(std::string_view name)
{
    if (name == "single") return Linkage::single;
    if (name == "complete") return Linkage::complete;
    throw ConfigError("unknown linkage `" + std::string(name) + "` (expected single|complete)");
}

Dendrogram linkage_dendrogram(const Eigen::VectorXd& beta_k, Linkage linkage)
{
    const int m = static_cast<int>(beta_k.size()) + 1;
    std::vector<double> values(static_cast<std::size_t>(m));
    values[0] = 0.0;
    for (int j = 1; j < m; ++j) values[static_cast<std::size_t>(j)] = beta_k[j - 1];

    Dendrogram d;
    d.n_leaves = m;

    // dist[a][b] between active clusters, indexed by cluster id
    const int total = 2 * m - 1;
    std::vector<std::vector<double>> dist(static_cast<std::size_t>(total),
                                          std::vector<double>(static_cast<std::size_t>(total), 0.0));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            dist[a][b] = std::abs(values[static_cast<std::size_t>(a)] - values[static_cast<std::size_t>(b)]);

    std::vector<int> active(static_cast<std::size_t>(m));
    std::iota(active.begin(), active.end(), 0);
    std::vector<std::pair<int, int>> children(static_cast<std::size_t>(total), {-1, -1});

    for (int step = 0; step < m - 1; ++step) {
        int best_a = -1, best_b = -1;
        double best = std::numeric_limits<double>::infinity();
        // active stays sorted by id, so the first minimum found has the smallest (a, b)
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                double v = dist[active[i]][active[j]];
                if (v < best) {
                    best = v;
                    best_a = active[i];
                    best_b = active[j];
                }
            }
        }
        const int id = m + step;
        for (int c : active) {
            if (c == best_a || c == best_b) continue;
            double da = dist[best_a][c], db = dist[best_b][c];
            double v = linkage == Linkage::single ? std::min(da, db) : std::max(da, db);
            dist[id][c] = dist[c][id] = v;
        }
        d.merges.push_back({best_a, best_b, best});
        children[static_cast<std::size_t>(id)] = {best_a, best_b};
        std::erase_if(active, [&](int c) { return c == best_a || c == best_b; });
        active.push_back(id);
    }

    // leaf order: depth-first, left child first
    std::vector<int> stack{total - 1};
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        if (c < m) {
            d.leaf_order.push_back(c);
        } else {
            stack.push_back(children[static_cast<std::size_t>(c)].second);
            stack.push_back(children[static_cast<std::size_t>(c)].first);
        }
    }
    return d;
}

Partition partition_after(const Dendrogram& dendrogram, std::size_t n_merges)
{
    const int m = dendrogram.n_leaves;
    std::vector<Cluster> members(static_cast<std::size_t>(2 * m - 1));
    std::vector<bool> alive(members.size(), false);
    for (int j = 0; j < m; ++j) {
        members[static_cast<std::size_t>(j)] = {j};
        alive[static_cast<std::size_t>(j)] = true;
    }
    n_merges = std::min(n_merges, dendrogram.merges.size());
    for (std::size_t e = 0; e < n_merges; ++e) {
        const auto& ev = dendrogram.merges[e];
        auto id = static_cast<std::size_t>(m) + e;
        auto& dst = members[id];
        const auto& a = members[static_cast<std::size_t>(ev.left)];
        const auto& b = members[static_cast<std::size_t>(ev.right)];
        dst.insert(dst.end(), a.begin(), a.end());
        dst.insert(dst.end(), b.begin(), b.end());
        alive[static_cast<std::size_t>(ev.left)] = alive[static_cast<std::size_t>(ev.right)] = false;
        alive[id] = true;
    }
    Partition out;
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (alive[c]) out.push_back(members[c]);
    }
    return canonical(std::move(out));
}

Partition cut(const Dendrogram& dendrogram, double tau)
{
    std::size_t n = 0;
    while (n < dendrogram.merges.size() && dendrogram.merges[n].height <= tau) ++n;
    return partition_after(dendrogram, n);
}

std::vector<Dendrogram> group_dendrograms(const DesignMatrix& design, const Eigen::VectorXd& beta, Linkage linkage)
{
    std::vector<Dendrogram> out;
    out.reserve(design.r());
    for (const auto& g : design.groups) out.push_back(linkage_dendrogram(beta.segment(g.start, g.size), linkage));
    return out;
}

std::vector<PartitionModel> nested_family(const std::vector<Dendrogram>& dendrograms)
{
    struct Undo
    {
        double height;
        std::size_t group;
        std::size_t event;
    };
    std::vector<Undo> undo;
    std::vector<std::size_t> applied(dendrograms.size());
    for (std::size_t k = 0; k < dendrograms.size(); ++k) {
        const auto& d = dendrograms[k];
        applied[k] = d.merges.size();
        for (std::size_t e = 0; e < d.merges.size(); ++e) {
            if (d.merges[e].height > 0.0) undo.push_back({d.merges[e].height, k, e});
        }
    }
    std::sort(undo.begin(), undo.end(), [](const Undo& a, const Undo& b) {
        if (a.height != b.height) return a.height > b.height;
        if (a.group != b.group) return a.group < b.group;
        return a.event > b.event;
    });

    auto snapshot = [&] {
        PartitionModel m;
        for (std::size_t k = 0; k < dendrograms.size(); ++k) m.groups.push_back(partition_after(dendrograms[k], applied[k]));
        return m;
    };

    std::vector<PartitionModel> family;
    family.reserve(undo.size() + 1);
    // everything merged; height-0 events stay applied throughout
    family.push_back(snapshot());
    for (const auto& u : undo) {
        applied[u.group] = u.event;
        family.push_back(snapshot());
    }
    return family;
}

MergedDesign build_merged_design(const DesignMatrix& design, const PartitionModel& model)
{
    if (model.groups.size() != design.r()) throw std::invalid_argument("build_merged_design: model/design mismatch");
    MergedDesign out;
    out.model = model;
    Eigen::Index cols = 1;
    for (const auto& p : model.groups) cols += static_cast<Eigen::Index>(p.size()) - 1;

    out.Z = Eigen::MatrixXd::Zero(design.n(), cols);
    out.Z.col(0).setOnes();
    out.cluster_map.push_back({0});
    Eigen::Index at = 1;
    for (std::size_t k = 0; k < design.r(); ++k) {
        const auto& g = design.groups[k];
        const auto& part = model.groups[k];
        for (std::size_t c = 0; c < part.size(); ++c) {
            const auto& cluster = part[c];
            // the reference cluster is absorbed by the intercept
            if (std::find(cluster.begin(), cluster.end(), 0) != cluster.end()) continue;
            std::vector<Eigen::Index> src;
            for (int j : cluster) {
                src.push_back(g.start + j - 1);
                out.Z.col(at) += design.X.col(g.start + j - 1);
            }
            out.cluster_map.push_back(std::move(src));
            out.column_cluster.emplace_back(k, c);
            ++at;
        }
    }
    return out;
}

Eigen::VectorXd expand_coefficients(const DesignMatrix& design, const MergedDesign& merged, const Eigen::VectorXd& gamma)
{
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.p());
    beta[0] = gamma[0];
    for (std::size_t t = 1; t < merged.cluster_map.size(); ++t) {
        for (auto col : merged.cluster_map[t]) beta[col] = gamma[static_cast<Eigen::Index>(t)];
    }
    return beta;
}

} // namespace glamer
