#include <glamer/model_io.hpp>

#include "helpers.hpp"

#include <doctest.h>

#include <cstring>

using namespace glamer;

namespace {

GlamerFit sample_fit(Family family, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto d = th::random_design(rng, 150, {6, 3}, 2);
    Eigen::VectorXd beta = th::random_vector(rng, d.p(), 0.7);
    beta.segment(1, 5) << 0.0, 0.4, 0.4, 1.1, 1.1;
    Eigen::VectorXd y = family == Family::gaussian ? th::gaussian_response(rng, d, beta, 0.5)
                                                   : th::logistic_response(rng, d, beta);
    NetConfig cfg;
    cfg.n_lambda = 15;
    SelectionCriterion ric;
    ric.kind = CriterionKind::ric;
    return glamer_net(d, y, family, cfg, ric).fit;
}

bool same_bits(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

} // namespace

TEST_CASE("model file round trip is bit exact")
{
    for (auto family : {Family::gaussian, Family::logistic}) {
        auto fit = sample_fit(family, family == Family::gaussian ? 71 : 72);
        Json settings = {{"linkage", "complete"}, {"seed", 5}};
        auto text = save_model(fit, settings);
        auto back = load_model(text);
        CHECK(back.model == fit.model);
        CHECK(back.md == fit.md);
        CHECK(back.family == fit.family);
        CHECK(back.schema.fingerprint() == fit.schema.fingerprint());
        CHECK(same_bits(back.beta.intercept, fit.beta.intercept));
        auto a = fit.beta.flatten(), b = back.beta.flatten();
        REQUIRE(a.size() == b.size());
        for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(same_bits(a[i], b[i]));
        CHECK(same_bits(back.train_loss, fit.train_loss));
        CHECK(save_model(back, settings) == text);
        CHECK(model_to_json(back, settings)["settings"] == settings);
    }
}

TEST_CASE("partition json names levels and marks the reference")
{
    Schema s = parse_schema("f,categorical,a|b|c|d\nx,continuous\n");
    PartitionModel m;
    m.groups = {Partition{{0, 2}, {1, 3}}, one_cluster(2)};
    auto j = partition_to_json(s, m);
    CHECK(j[0]["clusters"][0]["levels"] == Json::array({"a", "c"}));
    CHECK(j[0]["clusters"][0]["reference"] == true);
    CHECK(j[0]["clusters"][1]["reference"] == false);
    CHECK(j[1]["present"] == false);
    CHECK(partition_from_json(s, j) == m);
}

TEST_CASE("malformed model files raise DataError")
{
    auto fit = sample_fit(Family::gaussian, 73);
    Json j = model_to_json(fit, Json::object());
    CHECK_THROWS_AS(load_model("{not json"), DataError);
    CHECK_THROWS_AS(load_model("{}"), DataError);

    Json bad = j;
    bad["schema_fingerprint"] = "0000000000000000";
    CHECK_THROWS_WITH_AS(model_from_json(bad), doctest::Contains("fingerprint"), DataError);

    bad = j;
    bad["groups"][0]["clusters"][0]["levels"][0] = "nope";
    CHECK_THROWS_WITH_AS(model_from_json(bad), doctest::Contains("nope"), DataError);

    bad = j;
    bad["format"] = "something-else";
    CHECK_THROWS_AS(model_from_json(bad), DataError);
}
