#include <glamer/glm.hpp>

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace glamer;

TEST_CASE("loss: small cases")
{
    Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
    CHECK(loss(Family::gaussian, z, z) == 0.0);
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(1), e0 = Eigen::VectorXd::Zero(1);
    CHECK(loss(Family::logistic, y0, e0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("loss: logistic does not overflow")
{
    Eigen::VectorXd y = Eigen::VectorXd::Ones(1), eta = Eigen::VectorXd::Constant(1, 700.0);
    double f = loss(Family::logistic, y, eta);
    CHECK(std::isfinite(f));
    // softplus(700) - 700 = log1p(exp(-700)), evaluated in long double
    long double ref = std::log1p(std::exp(-700.0L));
    CHECK(std::abs(f - static_cast<double>(ref)) <= 1e-300);
    eta[0] = -700.0;
    y[0] = 0.0;
    CHECK(std::isfinite(loss(Family::logistic, y, eta)));
    y[0] = 1.0;
    CHECK(loss(Family::logistic, y, eta) == doctest::Approx(700.0));
}

TEST_CASE("loss: gaussian differs from half RSS by a constant")
{
    std::mt19937_64 rng(8);
    auto d = th::random_design(rng, 40, {3}, 2);
    Eigen::VectorXd y = th::random_vector(rng, d.n());
    Eigen::VectorXd b1 = th::random_vector(rng, d.p()), b2 = th::random_vector(rng, d.p());
    double l1 = loss(Family::gaussian, y, d.X * b1), l2 = loss(Family::gaussian, y, d.X * b2);
    double r1 = 0.5 * (y - d.X * b1).squaredNorm(), r2 = 0.5 * (y - d.X * b2).squaredNorm();
    CHECK(l1 - l2 == doctest::Approx(r1 - r2).epsilon(1e-12));
    CHECK(r1 - l1 == doctest::Approx(0.5 * y.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("gradient: zero case and gaussian identity")
{
    std::mt19937_64 rng(9);
    auto d = th::random_design(rng, 30, {4}, 1);
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(d.n());
    CHECK(loss_gradient(Family::gaussian, y0, d.X, Eigen::VectorXd::Zero(d.p())).isZero(0.0));
    Eigen::VectorXd y = th::random_vector(rng, d.n()), b = th::random_vector(rng, d.p());
    Eigen::VectorXd g = loss_gradient(Family::gaussian, y, d.X, b);
    Eigen::VectorXd ref = d.X.transpose() * (d.X * b - y);
    CHECK((g - ref).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + ref.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("gradient: central finite differences")
{
    std::mt19937_64 rng(10);
    for (auto fam : {Family::gaussian, Family::logistic}) {
        for (int rep = 0; rep < 10; ++rep) {
            auto d = th::random_design(rng, 25, {3, 2}, 1);
            Eigen::VectorXd b = th::random_vector(rng, d.p(), 0.5);
            Eigen::VectorXd y = fam == Family::gaussian ? th::gaussian_response(rng, d, b, 1.0)
                                                        : th::logistic_response(rng, d, b);
            Eigen::VectorXd g = loss_gradient(fam, y, d.X, b);
            for (Eigen::Index j = 0; j < d.p(); ++j) {
                double h = 1e-6 * (1.0 + std::abs(b[j]));
                Eigen::VectorXd bp = b, bm = b;
                bp[j] += h;
                bm[j] -= h;
                double fd = (loss(fam, y, d.X * bp) - loss(fam, y, d.X * bm)) / (2.0 * h);
                CHECK(std::abs(fd - g[j]) <= 1e-5 * std::max(1.0, std::abs(g[j])));
            }
        }
    }
}

TEST_CASE("loss: convexity along random chords")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u;
    for (auto fam : {Family::gaussian, Family::logistic}) {
        auto d = th::random_design(rng, 30, {3}, 1);
        Eigen::VectorXd y = fam == Family::gaussian ? th::random_vector(rng, d.n())
                                                    : th::logistic_response(rng, d, Eigen::VectorXd::Zero(d.p()));
        for (int rep = 0; rep < 50; ++rep) {
            Eigen::VectorXd b1 = th::random_vector(rng, d.p(), 2.0), b2 = th::random_vector(rng, d.p(), 2.0);
            double t = u(rng);
            double lhs = loss(fam, y, d.X * (t * b1 + (1 - t) * b2));
            double rhs = t * loss(fam, y, d.X * b1) + (1 - t) * loss(fam, y, d.X * b2);
            CHECK(lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("collapsed rows reproduce the full loss and gradient")
{
    std::mt19937_64 rng(12);
    auto d = th::random_design(rng, 60, {3, 2}, 0);
    Eigen::VectorXd b = th::random_vector(rng, d.p());
    for (auto fam : {Family::gaussian, Family::logistic}) {
        Eigen::VectorXd y = fam == Family::gaussian ? th::gaussian_response(rng, d, b, 1.0)
                                                    : th::logistic_response(rng, d, b);
        auto rows = collapse_rows(d.X, y);
        CHECK(rows.X.rows() == 6);
        CHECK(rows.count.sum() == 60.0);
        CHECK(loss(fam, rows, rows.X * b) == doctest::Approx(loss(fam, y, d.X * b)).epsilon(1e-12));
        Eigen::VectorXd g = rows.X.transpose() * working_residual(fam, rows, rows.X * b);
        CHECK((g - loss_gradient(fam, y, d.X, b)).norm() <= 1e-10 * (1.0 + g.norm()));
    }
}

TEST_CASE("fit_mle: intercept only")
{
    Eigen::MatrixXd Z = Eigen::MatrixXd::Ones(3, 1);
    Eigen::VectorXd y(3);
    y << 1, 2, 3;
    auto fit = fit_mle(Z, y, Family::gaussian);
    CHECK(fit.beta[0] == doctest::Approx(2.0).epsilon(1e-14));
    // sum(eta^2/2 - y eta) at eta = 2: 3*2 - 12
    CHECK(fit.loss == doctest::Approx(-6.0).epsilon(1e-14));

    Eigen::MatrixXd Z8 = Eigen::MatrixXd::Ones(8, 1);
    Eigen::VectorXd yl(8);
    yl << 1, 0, 0, 1, 1, 0, 1, 1;
    auto lf = fit_mle(Z8, yl, Family::logistic);
    CHECK(lf.beta[0] == doctest::Approx(std::log(5.0 / 3.0)).epsilon(1e-10));
    CHECK(null_intercept(Family::logistic, yl) == doctest::Approx(std::log(5.0 / 3.0)));
    CHECK_THROWS_AS(null_intercept(Family::logistic, Eigen::VectorXd::Ones(4)), DataError);
}

TEST_CASE("fit_mle: gaussian matches the normal equations")
{
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        auto d = th::random_design(rng, 50, {3, 3}, 2);
        Eigen::VectorXd y = th::gaussian_response(rng, d, th::random_vector(rng, d.p()), 1.0);
        auto fit = fit_mle(d.X, y, Family::gaussian);
        Eigen::VectorXd ref = (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * y);
        CHECK((fit.beta - ref).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
}

TEST_CASE("fit_mle: logistic stationarity, rank and separation errors")
{
    std::mt19937_64 rng(14);
    auto d = th::random_design(rng, 200, {3}, 1);
    Eigen::VectorXd b(d.p());
    b << -0.3, 0.8, -0.5, 0.7;
    Eigen::VectorXd y = th::logistic_response(rng, d, b);
    auto fit = fit_mle(d.X, y, Family::logistic);
    CHECK(loss_gradient(Family::logistic, y, d.X, fit.beta).lpNorm<Eigen::Infinity>() <=
          1e-7 * (1.0 + std::abs(fit.loss)));

    Eigen::MatrixXd Z(4, 3);
    Z << 1, 1, 0, 1, 0, 1, 1, 1, 0, 1, 0, 1;
    Eigen::MatrixXd Zd(4, 3);
    Zd << 1, 1, 2, 1, 0, 0, 1, 1, 2, 1, 0, 0;
    Eigen::VectorXd yy(4);
    yy << 1, 2, 3, 4;
    try {
        fit_mle(Zd, yy, Family::gaussian);
        FAIL("expected rank deficiency");
    } catch (const RankDeficientError& e) {
        CHECK(e.dependent_columns.size() == 1);
        CHECK(e.exit_code() == 4);
    }
    // perfectly separated classes
    Eigen::MatrixXd Zs(4, 2);
    Zs << 1, 0, 1, 0, 1, 1, 1, 1;
    Eigen::VectorXd ys(4);
    ys << 0, 0, 1, 1;
    // the gradient vanishes long before beta reaches the divergence bound
    auto sep = fit_mle(Zs, ys, Family::logistic);
    CHECK(sep.beta.norm() > 10.0);
    CHECK(sep.loss < 1e-6);
    MleOptions tight;
    tight.divergence_norm = 5.0;
    CHECK_THROWS_WITH_AS(fit_mle(Zs, ys, Family::logistic, tight), doctest::Contains("separation"), NumericalError);
    (void)Z;
}

TEST_CASE("family helpers")
{
    CHECK(parse_family("binomial") == Family::logistic);
    CHECK_THROWS_AS(parse_family("poisson"), ConfigError);
    CHECK(mean_function(Family::logistic, 0.0) == 0.5);
    CHECK(cumulant(Family::gaussian, 2.0) == 2.0);
    CHECK_THROWS_AS(validate_response(Family::logistic, Eigen::VectorXd::Constant(2, 0.5)), DataError);
}
