#include <glamer/grouplasso.hpp>

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace glamer;

TEST_CASE("group soft threshold")
{
    Eigen::Vector2d v(3, 4);
    CHECK(group_soft_threshold(v, 5.0).isZero(0.0));
    CHECK(group_soft_threshold(v, 2.5).isApprox(Eigen::Vector2d(1.5, 2.0)));
    CHECK(group_soft_threshold(v, 0.0) == Eigen::VectorXd(v));
}

TEST_CASE("group soft threshold minimizes the prox objective")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ut(0.0, 3.0);
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::VectorXd v = th::random_vector(rng, 3);
        double t = ut(rng);
        auto obj = [&](const Eigen::VectorXd& u) { return 0.5 * (u - v).squaredNorm() + t * u.norm(); };
        Eigen::VectorXd best = group_soft_threshold(v, t);
        double fb = obj(best);
        for (int k = 0; k < 200; ++k) CHECK(fb <= obj(best + th::random_vector(rng, 3, 0.05)) + 1e-12);
        CHECK(fb <= obj(Eigen::VectorXd::Zero(3)) + 1e-12);
    }
}

TEST_CASE("fit: orthonormal block equals the closed form")
{
    std::mt19937_64 rng(32);
    for (int rep = 0; rep < 10; ++rep) {
        auto o = th::orthonormal_block(rng, 30, 3);
        Eigen::VectorXd y = th::random_vector(rng, 30, 2.0);
        Eigen::VectorXd ls = o.design.X.rightCols(3).cwiseQuotient(o.weights.w.tail(3).transpose().replicate(30, 1)).transpose() * y;
        for (double lambda : {0.0, 0.5 * ls.norm(), 2.0 * ls.norm()}) {
            GroupLassoProblem prob{o.design, y, Family::gaussian, o.weights, lambda};
            auto sol = fit(prob);
            CHECK(sol.converged);
            Eigen::VectorXd u = group_soft_threshold(ls, lambda);
            Eigen::VectorXd expect(4);
            expect << y.mean(), u.cwiseQuotient(o.weights.w.tail(3));
            CHECK((sol.flat - expect).lpNorm<Eigen::Infinity>() <= 1e-8);
            CHECK(kkt_residual(prob, expect) <= 1e-10);
        }
    }
}

TEST_CASE("fit: matches the slow proximal gradient oracle")
{
    std::mt19937_64 rng(33);
    for (auto fam : {Family::gaussian, Family::logistic}) {
        auto d = th::random_design(rng, 50, {3, 3}, 1);
        Eigen::VectorXd b(d.p());
        b << 0.2, 1.0, -0.5, 0.0, 0.8, 0.6;
        Eigen::VectorXd y = fam == Family::gaussian ? th::gaussian_response(rng, d, b, 1.0)
                                                    : th::logistic_response(rng, d, b);
        auto W = default_weights(d);
        double lambda = 0.3 * lambda_max(d, y, fam, W);
        GroupLassoProblem prob{d, y, fam, W, lambda};
        auto sol = fit(prob);
        REQUIRE(sol.converged);
        CHECK(sol.kkt_residual <= 1e-7 * (1.0 + lambda));
        auto ref = oracle::slow_group_lasso(d, y, fam, W.w, lambda, 200000);
        CHECK((sol.flat - ref).lpNorm<Eigen::Infinity>() <= 1e-4);
    }
}

TEST_CASE("fit: lambda_max zeroes every block; path spacing")
{
    std::mt19937_64 rng(34);
    auto d = th::random_design(rng, 40, {3, 4}, 2);
    Eigen::VectorXd y = th::gaussian_response(rng, d, th::random_vector(rng, d.p()), 1.0);
    auto W = default_weights(d);
    double top = lambda_max(d, y, Family::gaussian, W);
    GroupLassoProblem prob{d, y, Family::gaussian, W, top};
    auto sol = fit(prob);
    CHECK(sol.flat.tail(d.p() - 1).isZero(0.0));
    CHECK(sol.flat[0] == doctest::Approx(y.mean()));
    auto v = kkt_violations(prob, sol.flat);
    for (std::size_t k = 1; k < v.size(); ++k) CHECK(v[k] == 0.0);

    auto two = lambda_path(d, y, Family::gaussian, W, 2, 0.5);
    CHECK(two[0] == top);
    CHECK(two[1] == doctest::Approx(top / 2).epsilon(1e-14));
    auto path = lambda_path(d, y, Family::gaussian, W, 50, 1e-3);
    for (std::size_t i = 2; i < path.size(); ++i)
        CHECK(std::abs(path[i] / path[i - 1] - path[1] / path[0]) <= 1e-12);
    CHECK_THROWS_AS(lambda_path(d, y, Family::gaussian, W, 1, 0.5), ConfigError);
    GroupLassoProblem bad{d, y, Family::gaussian, W, -1.0};
    CHECK_THROWS_AS(fit(bad), ConfigError);
}

TEST_CASE("fit: objective trace non-increasing, perturbed solution violates KKT")
{
    std::mt19937_64 rng(35);
    for (auto fam : {Family::gaussian, Family::logistic}) {
        auto d = th::random_design(rng, 80, {4, 3}, 2);
        Eigen::VectorXd b = th::random_vector(rng, d.p(), 0.7);
        Eigen::VectorXd y = fam == Family::gaussian ? th::gaussian_response(rng, d, b, 1.0)
                                                    : th::logistic_response(rng, d, b);
        auto W = default_weights(d);
        double lambda = 0.1 * lambda_max(d, y, fam, W);
        GroupLassoProblem prob{d, y, fam, W, lambda};
        auto sol = fit(prob);
        CHECK(sol.converged);
        for (std::size_t i = 1; i < sol.objective_trace.size(); ++i)
            CHECK(sol.objective_trace[i] <= sol.objective_trace[i - 1] + 1e-12 * (1.0 + std::abs(sol.objective_trace[i - 1])));
        Eigen::VectorXd pert = sol.flat;
        pert[1] += 0.1;
        CHECK(kkt_residual(prob, pert) > 1e-7 * (1.0 + lambda));
        // zero blocks satisfy the subgradient bound
        Eigen::VectorXd grad = loss_gradient(fam, y, d.X, sol.flat);
        for (const auto& g : d.groups) {
            if (!sol.flat.segment(g.start, g.size).isZero(0.0)) continue;
            CHECK(grad.segment(g.start, g.size).cwiseQuotient(W.w.segment(g.start, g.size)).norm() <=
                  lambda * (1.0 + 1e-7) + 1e-7);
        }
    }
}

TEST_CASE("fit: different starts agree; weight scaling covariance")
{
    std::mt19937_64 rng(36);
    auto d = th::random_design(rng, 60, {3, 3}, 1);
    Eigen::VectorXd y = th::gaussian_response(rng, d, th::random_vector(rng, d.p()), 1.0);
    auto W = default_weights(d);
    double lambda = 0.2 * lambda_max(d, y, Family::gaussian, W);
    GroupLassoProblem prob{d, y, Family::gaussian, W, lambda};
    auto a = fit(prob);
    auto b = fit(prob, {}, th::random_vector(rng, d.p(), 3.0));
    CHECK((a.flat - b.flat).lpNorm<Eigen::Infinity>() <= 1e-5);

    WeightMatrix W3 = W;
    W3.w.tail(d.p() - 1) *= 3.0;
    GroupLassoProblem scaled{d, y, Family::gaussian, W3, lambda / 3.0};
    GroupLassoOptions tight;
    tight.tol = 1e-10;
    auto c = fit(scaled, tight);
    auto e = fit(prob, tight);
    CHECK((c.flat - e.flat).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("theoretical lambda")
{
    CHECK(theoretical_lambda(1.0, 0.5, 1.0, 1.0, 0.5) == doctest::Approx(std::sqrt(8.0 * std::log(4.0))));
    CHECK(theoretical_lambda(1.0, 0.5, 1.0, 1.0, 0.5) == doctest::Approx(3.3302).epsilon(1e-4));
    CHECK(theoretical_lambda(2.0, 0.5, 1.0, 10.0, 0.1) == doctest::Approx(2.0 * theoretical_lambda(1.0, 0.5, 1.0, 10.0, 0.1)));
    CHECK(theoretical_lambda(1.0, 0.5, 1.0, 20.0, 0.1) > theoretical_lambda(1.0, 0.5, 1.0, 10.0, 0.1));
    CHECK_THROWS_AS(theoretical_lambda(1.0, 1.5, 1.0, 1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(theoretical_lambda(0.0, 0.5, 1.0, 1.0, 0.5), ConfigError);
}

TEST_CASE("solve_path warm starts converge at every point")
{
    std::mt19937_64 rng(37);
    auto d = th::random_design(rng, 100, {5, 3}, 1);
    Eigen::VectorXd y = th::logistic_response(rng, d, th::random_vector(rng, d.p(), 0.8));
    auto W = default_weights(d);
    auto grid = lambda_path(d, y, Family::logistic, W, 30, 1e-2);
    GroupLassoSolver solver(d, y, Family::logistic, W);
    auto sols = solver.solve_path(grid);
    for (std::size_t i = 0; i < sols.size(); ++i) {
        CHECK(sols[i].converged);
        GroupLassoProblem prob{d, y, Family::logistic, W, grid[i]};
        CHECK(kkt_residual(prob, sols[i].flat) <= 1e-7 * (1.0 + grid[i]) * 1.01);
    }
}
