#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tsm/harness.hpp"

using namespace tsm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig cfg(const std::string& alg, const std::string& env, uint64_t T, uint64_t seed = 1,
                     Objective obj = Objective::Gft) {
    ExperimentConfig c;
    c.algorithm = alg;
    c.env = parse_env(env);
    c.env_label = env;
    c.T = T;
    c.seed = seed;
    c.objective = obj;
    return c;
}

ExperimentConfig fixed(const std::string& alg, Instance in, uint64_t T, Objective obj = Objective::Gft) {
    ExperimentConfig c;
    c.algorithm = alg;
    c.env.kind = EnvKind::Fixed;
    c.env.instance = std::move(in);
    c.env_label = "inline";
    c.T = T;
    c.objective = obj;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("tsm_test_" + name); }

}  // namespace

TEST_CASE("env strings") {
    CHECK(parse_env("adversary1").kind == EnvKind::Adversary1);
    CHECK(parse_env("adversary2").kind == EnvKind::Adversary2);
    auto r = parse_env("random:2x5");
    CHECK(r.kind == EnvKind::Random);
    CHECK(r.m == 2);
    CHECK(r.n == 5);
    CHECK(r.positive_gft);
    CHECK_FALSE(parse_env("random:1x1:any").positive_gft);
    auto c = parse_env("contextual:d=3,m=2,n=2");
    CHECK(c.kind == EnvKind::Contextual);
    CHECK(c.d == 3);
    for (const char* bad : {"random:2", "random:0x1", "contextual:d=0,m=1,n=1", "contextual:q=1", "nothing"}) {
        CHECK_THROWS_WITH_AS(parse_env(bad), doctest::Contains(""), Error);
    }
    CHECK_THROWS_AS(parse_env("fixed:/nonexistent/x.json"), Error);
}

TEST_CASE("instance and contextual files") {
    const auto p = scratch("inst.json");
    std::ofstream(p) << R"({"seller_costs":[0.3],"buyer_values":[0.4]})";
    auto e = parse_env("fixed:" + p.string());
    CHECK(e.kind == EnvKind::Fixed);
    CHECK(e.instance.costs == std::vector<double>{0.3});
    CHECK(parse_env(p.string()).kind == EnvKind::Fixed);

    const auto q = scratch("ctx.json");
    std::ofstream(q) << R"({"d":2,"seller_vectors":[[0.1,0.1]],"buyer_vectors":[[0.5,0.3]],
                          "contexts":[[1,0],[0,1]]})";
    auto ce = parse_env(q.string());
    CHECK(ce.kind == EnvKind::Contextual);
    CHECK(ce.contexts.size() == 2);
    auto run = run_experiment(cfg("steiner_gft", q.string(), 40));
    CHECK(run.records.size() == 40);
    CHECK(run.invariant_violations == 0);

    std::ofstream(q) << R"({"d":2,"seller_vectors":[[0.1]],"buyer_vectors":[[0.5,0.3]]})";
    CHECK_THROWS_AS(parse_env(q.string()), Error);
    fs::remove(p);
    fs::remove(q);
}

TEST_CASE("bilateral gft run matches the worked example") {
    auto c = run_experiment(fixed("obs", Instance{{0.3}, {0.4}}, 1000000));
    CHECK(c.total_regret == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(c.records.back().t == 1000000);
    CHECK(c.records.back().cum_regret == doctest::Approx(0.2));
    CHECK(c.settle_round > 0);
}

TEST_CASE("empty horizon") {
    auto c = run_experiment(cfg("obs", "random:1x1", 0));
    CHECK(c.records.empty());
    CHECK(c.total_regret == 0);
}

TEST_CASE("two-price adversary forces linear gft regret") {
    for (const char* alg : {"obs", "otcs", "fictitious_profit"}) {
        auto c = run_experiment(cfg(alg, "adversary2", 10000));
        CHECK(c.total_regret >= 2500);
        CHECK(c.props.below_quarter == 0);
        CHECK(c.audit_ok);
    }
}

TEST_CASE("single-price adversary transcripts are consistent") {
    for (const char* alg : {"obs", "one_to_many"}) {
        auto c = run_experiment(cfg(alg, "adversary1", 5000));
        CHECK(c.audit_ok);
        CHECK(audit_transcript_json(transcript_to_json(c.instance, c.transcript)));
        uint64_t rounds = 0;
        for (const auto& e : c.transcript) rounds += e.repeat;
        CHECK(rounds == 5000);
        CHECK(c.records.back().t == 5000);
    }
}

TEST_CASE("unsupported combinations") {
    CHECK_THROWS_AS(run_experiment(cfg("otcs", "adversary1", 10)), Error);
    CHECK_THROWS_AS(run_experiment(cfg("segmented", "adversary2", 10)), Error);
    CHECK_THROWS_AS(run_experiment(cfg("steiner_gft", "random:1x1", 10)), Error);
    CHECK_THROWS_AS(run_experiment(cfg("obs", "contextual:d=2,m=1,n=1", 10)), Error);
    CHECK_THROWS_AS(run_experiment(cfg("steiner_gft", "contextual:d=2,m=2,n=2", 10)), Error);
    CHECK_THROWS_AS(run_experiment(cfg("one_to_many", "random:2x2", 10)), Error);
    CHECK_THROWS_AS(run_experiment(cfg("nope", "random:1x1", 10)), Error);
    try {
        run_experiment(cfg("otcs", "adversary1", 10));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnsupportedCombination);
    }
}

TEST_CASE("cumulative regret is monotone and sums the rounds") {
    for (const char* alg : {"obs", "segmented", "fictitious_profit"}) {
        auto c = run_experiment(cfg(alg, "random:3x3", 3000, 4, Objective::Profit));
        double prev = 0, sum = 0;
        for (const auto& r : c.records) {
            CHECK(r.cum_regret >= prev - 1e-12);
            CHECK(r.regret >= -1e-12);
            prev = r.cum_regret;
            sum += r.regret;
        }
        CHECK(c.records.size() == 3000);
        CHECK(sum == doctest::Approx(c.total_regret));
    }
}

TEST_CASE("long horizons are logged geometrically") {
    auto c = run_experiment(cfg("segmented", "random:2x2", 300000, 3));
    CHECK(c.records.size() < 400);
    CHECK(c.records.front().t == 1);
    CHECK(c.records.back().t == 300000);
    CHECK(c.records.back().cum_regret == doctest::Approx(c.total_regret));
    for (size_t k = 1; k < c.records.size(); ++k) CHECK(c.records[k].t > c.records[k - 1].t);
}

TEST_CASE("padding keeps the original instance in the summary") {
    auto c = run_experiment(cfg("segmented", "random:2x3", 2000, 9));
    CHECK(c.instance.m() == 2);
    CHECK(c.instance.n() == 3);
    auto s = summary_json(c);
    CHECK(s["instance"]["seller_costs"].size() == 2);
    CHECK(s["rounds"] == 2000);
    CHECK(s["invariant_violations"] == 0);
}

TEST_CASE("seeded runs are reproducible") {
    auto a = run_experiment(cfg("segmented", "random:3x3", 5000, 11));
    auto b = run_experiment(cfg("segmented", "random:3x3", 5000, 11));
    auto d = run_experiment(cfg("segmented", "random:3x3", 5000, 12));
    CHECK(a.total_regret == b.total_regret);
    CHECK(a.instance.costs == b.instance.costs);
    CHECK(a.instance.costs != d.instance.costs);
    auto ca = run_experiment(cfg("ellipsoid", "contextual:d=2,m=2,n=2", 300, 5));
    auto cb = run_experiment(cfg("ellipsoid", "contextual:d=2,m=2,n=2", 300, 5));
    CHECK(ca.total_regret == cb.total_regret);
}

TEST_CASE("random matching runs every round") {
    auto c = cfg("obs", "random:2x2", 500, 2);
    c.matching = MatchingKind::UniformRandom;
    auto r = run_experiment(c);
    CHECK(r.records.size() == 500);
}

TEST_CASE("config json round trip") {
    auto c = config_from_json(json::parse(
        R"({"algorithm":"otcs","env":"random:1x1","objective":"profit","horizon":77,"seed":5,"matching":"random",
            "mc_samples":123})"));
    CHECK(c.algorithm == "otcs");
    CHECK(c.objective == Objective::Profit);
    CHECK(c.T == 77);
    CHECK(c.matching == MatchingKind::UniformRandom);
    CHECK(c.mc.samples == 123);
    auto j = config_to_json(c);
    auto c2 = config_from_json(j);
    CHECK(c2.T == 77);
    CHECK(c2.seed == 5);
    CHECK(config_to_json(c2) == j);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"objective":"welfare"})")), Error);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"horizon":"long"})")), Error);

    auto inline_env = config_from_json(json::parse(R"({"env":{"seller_costs":[0.1],"buyer_values":[0.9]}})"));
    CHECK(inline_env.env.kind == EnvKind::Fixed);
}

TEST_CASE("profile json round trip") {
    for (const auto& p : {PriceProfile::single(0.25), PriceProfile::two(0.1, 0.7),
                          PriceProfile::segmented({0, 1}, 0.2, 0.3, {1, 0, 0}, 0.8, 0.6)}) {
        const auto q = profile_from_json(profile_to_json(p));
        for (int i = 0; i < 2; ++i) CHECK(q.seller_price(i) == p.seller_price(i));
        for (int j = 0; j < 3; ++j) CHECK(q.buyer_price(j) == p.buyer_price(j));
    }
    CHECK_THROWS_AS(profile_from_json(json::parse(R"({"kind":"three"})")), Error);
}

TEST_CASE("tampered transcripts fail the audit") {
    auto c = run_experiment(cfg("obs", "adversary2", 200, 1, Objective::Profit));
    json j = transcript_to_json(c.instance, c.transcript);
    CHECK(audit_transcript_json(j));
    auto& fb = j["entries"][0]["feedback"]["sellers"];
    fb[0] = 1 - fb[0].get<int>();
    CHECK_FALSE(audit_transcript_json(j));
}

TEST_CASE("csv output") {
    const auto p = scratch("curve.csv");
    auto c = run_experiment(fixed("obs", Instance{{0.3}, {0.4}}, 5));
    write_csv(c, p.string());
    const std::string text = slurp(p);
    CHECK(text.rfind("t,price_s,price_b,acc_sellers,acc_buyers,regret,cum_regret\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
    fs::remove(p);
}

TEST_CASE("sweep agrees with single runs and is deterministic") {
    const json grid = json::parse(R"({"algorithms":["obs","segmented"],"env":"random:2x2","horizons":[500,2000],
                                     "seeds":[1,2,3]})");
    const auto cfgs = expand_grid(grid);
    REQUIRE(cfgs.size() == 12);
    const auto rows1 = sweep(cfgs, 1);
    const auto rows4 = sweep(cfgs, 4);
    CHECK(sweep_table_csv(rows1) == sweep_table_csv(rows4));
    for (size_t k = 0; k < cfgs.size(); ++k) {
        CHECK(rows1[k].error.empty());
        CHECK(rows1[k].total_regret == run_experiment(cfgs[k]).total_regret);
    }
    const std::string table = sweep_table_csv(rows1);
    CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 12 + 4);

    const auto err = sweep(expand_grid(json::parse(R"({"runs":[{"algorithm":"otcs","env":"adversary1"}]})")));
    REQUIRE(err.size() == 1);
    CHECK_FALSE(err[0].error.empty());

    auto counted = expand_grid(json::parse(R"({"algorithm":"obs","env":"random:1x1","seed_count":4,"seed_start":10})"));
    REQUIRE(counted.size() == 4);
    CHECK(counted[3].seed == 13);
}
