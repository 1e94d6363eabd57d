#pragma once

#include <glamer/design.hpp>
#include <glamer/glm.hpp>

#include <random>
#include <string>
#include <vector>

namespace th {

// Factors first (levels L0..), then standard normal continuous columns.
inline glamer::DesignMatrix random_design(std::mt19937_64& rng, int n, const std::vector<int>& factor_levels,
                                          int n_continuous)
{
    using namespace glamer;
    Schema schema;
    std::vector<ColumnData> cols;
    for (std::size_t f = 0; f < factor_levels.size(); ++f) {
        Column c;
        c.name = "f" + std::to_string(f);
        c.kind = ColumnKind::categorical;
        for (int j = 0; j < factor_levels[f]; ++j) c.levels.push_back("L" + std::to_string(j));
        schema.columns.push_back(c);
        ColumnData cd;
        for (int i = 0; i < n; ++i) cd.codes.push_back(i % factor_levels[f]);
        std::shuffle(cd.codes.begin(), cd.codes.end(), rng);
        cols.push_back(cd);
    }
    std::normal_distribution<double> g;
    for (int c = 0; c < n_continuous; ++c) {
        Column col;
        col.name = "x" + std::to_string(c);
        schema.columns.push_back(col);
        ColumnData cd;
        for (int i = 0; i < n; ++i) cd.values.push_back(g(rng));
        cols.push_back(cd);
    }
    return assemble_design(schema, cols);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale);
    Eigen::VectorXd v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

inline Eigen::VectorXd gaussian_response(std::mt19937_64& rng, const glamer::DesignMatrix& d,
                                         const Eigen::VectorXd& beta, double sigma)
{
    return d.X * beta + random_vector(rng, d.n(), sigma);
}

inline Eigen::VectorXd logistic_response(std::mt19937_64& rng, const glamer::DesignMatrix& d,
                                         const Eigen::VectorXd& beta)
{
    std::uniform_real_distribution<double> u;
    Eigen::VectorXd eta = d.X * beta, y(d.n());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = u(rng) < 1.0 / (1.0 + std::exp(-eta[i])) ? 1.0 : 0.0;
    return y;
}

// Intercept plus one block whose weighted columns are orthonormal and orthogonal to 1.
struct Orthonormal
{
    glamer::DesignMatrix design;
    glamer::WeightMatrix weights;
};

inline Orthonormal orthonormal_block(std::mt19937_64& rng, int n, int m)
{
    Eigen::MatrixXd A(n, m + 1);
    A.col(0).setOnes();
    for (int j = 1; j <= m; ++j) A.col(j) = random_vector(rng, n);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m + 1);
    Orthonormal o;
    o.weights.w = Eigen::VectorXd::Ones(m + 1);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (int j = 1; j <= m; ++j) o.weights.w[j] = u(rng);
    o.design.X.resize(n, m + 1);
    o.design.X.col(0).setOnes();
    o.design.X.rightCols(m) = Q.rightCols(m) * o.weights.w.tail(m).asDiagonal();
    glamer::Group g;
    g.name = "f";
    g.kind = glamer::ColumnKind::categorical;
    g.start = 1;
    g.size = m;
    for (int j = 0; j <= m; ++j) g.levels.push_back("L" + std::to_string(j));
    o.design.groups.push_back(g);
    return o;
}

} // namespace th
