#include <doctest.h>

#include "radar/config.hpp"
#include "radar/errors.hpp"

using namespace radar;

TEST_CASE("empty config parses to the default setup") {
    RunConfig cfg = parse_run_config("{}");
    CHECK(cfg.world.n_users == 2000);
    CHECK(cfg.world.n_items_initial == 20000);
    CHECK(cfg.world.latent_dim == 32);
    CHECK(cfg.retrieval.k_per_source == 250);
    CHECK(cfg.retrieval.sources.size() == 4);
    CHECK(cfg.pipeline.pool_multiplier == 50);
    CHECK(cfg.pipeline.store_k == 200);
    CHECK(cfg.pipeline.cadence_hours[0] == 24);
    CHECK(cfg.pipeline.cadence_hours[1] == 168);
    CHECK(cfg.pipeline.cadence_hours[2] == 336);
    CHECK(cfg.funnel.prerank_keep == 200);
    CHECK(cfg.funnel.slate_size == 50);
    CHECK(cfg.funnel.radar_enabled);
    CHECK(cfg.eval.k_eval == 200);
    CHECK(cfg.eval.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(cfg.scorers.get(ScorerKind::Ranker).noise_sigma == 0.05);
    CHECK(cfg.scorers.get(ScorerKind::PreRanker).noise_sigma == 0.5);
    CHECK(cfg.scorers.get(ScorerKind::TwoTower).noise_sigma == 0.3);
    CHECK(cfg.scorers.get(ScorerKind::TwoTower).embedding_rank == 16);
}

TEST_CASE("section values override defaults and flow into the funnel") {
    RunConfig cfg = parse_run_config(R"({
        "world": {"n_users": 100, "seed": 9},
        "retrieval": {"k_per_source": 50, "sources": ["dnn", "rule_based"]},
        "pipeline": {"cadence_hours": {"dormant": 400}},
        "funnel": {"slate_size": 20},
        "eval": {"seeds": [3]},
        "output_dir": "results"
    })");
    CHECK(cfg.world.n_users == 100);
    CHECK(cfg.world.seed == 9);
    CHECK(cfg.retrieval.k_per_source == 50);
    REQUIRE(cfg.retrieval.sources.size() == 2);
    CHECK(cfg.retrieval.sources[0] == Source::TwoTower);
    CHECK(cfg.retrieval.sources[1] == Source::RuleBased);
    CHECK(cfg.funnel.retrieval.k_per_source == 50);  // top-level retrieval feeds the funnel
    CHECK(cfg.pipeline.cadence_hours[2] == 400);
    CHECK(cfg.funnel.slate_size == 20);
    CHECK(cfg.eval.seeds == std::vector<std::uint64_t>{3});
    CHECK(cfg.output_dir == "results");
}

TEST_CASE("scorer list entries override by kind and require the kind field") {
    RunConfig cfg = parse_run_config(R"({
        "scorers": [{"kind": "two_tower", "embedding_rank": 8, "noise_sigma": 0.1}]
    })");
    CHECK(cfg.scorers.get(ScorerKind::TwoTower).embedding_rank == 8);
    CHECK(cfg.scorers.get(ScorerKind::TwoTower).noise_sigma == 0.1);
    CHECK(cfg.scorers.get(ScorerKind::Ranker).noise_sigma == 0.05);  // untouched

    CHECK_THROWS_WITH_AS(parse_run_config(R"({"scorers": [{"noise_sigma": 0.1}]})"),
                         doctest::Contains("scorers[0].kind"), ValidationError);
}

TEST_CASE("unknown fields are rejected with their path") {
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"world": {"bogus": 1}})"),
                         doctest::Contains("world.bogus"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"bogus": {}})"), doctest::Contains("bogus"),
                         ValidationError);
}

TEST_CASE("malformed values are rejected with their path") {
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"world": {"n_users": "many"}})"),
                         doctest::Contains("world.n_users"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"world": {"cohort_mix": [0.5, 0.5]}})"),
                         doctest::Contains("cohort_mix"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"pipeline": {"off_peak": [2]}})"),
                         doctest::Contains("off_peak"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"eval": {"seeds": []}})"),
                         doctest::Contains("seeds"), ValidationError);
    CHECK_THROWS_AS(parse_run_config("not json"), ValidationError);
}

TEST_CASE("cross-section rules are enforced at load") {
    CHECK_THROWS_WITH_AS(
        parse_run_config(
            R"({"world": {"latent_dim": 8}, "scorers": [{"kind": "two_tower", "embedding_rank": 16}]})"),
        doctest::Contains("embedding_rank"), ValidationError);
    CHECK_THROWS_WITH_AS(
        parse_run_config(R"({"scorers": [{"kind": "ranker", "noise_sigma": 0.9}]})"),
        doctest::Contains("ranker"), ValidationError);
    // slate bound only binds when radar is enabled
    CHECK_THROWS_AS(
        parse_run_config(
            R"({"funnel": {"slate_size": 500}, "pipeline": {"store_k": 100}, "retrieval": {}})"),
        ValidationError);
    RunConfig ok = parse_run_config(
        R"({"funnel": {"slate_size": 500, "radar_enabled": false}, "pipeline": {"store_k": 100}})");
    CHECK(ok.funnel.slate_size == 500);
}

TEST_CASE("cohort mix must sum to one") {
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"world": {"cohort_mix": [0.5, 0.4, 0.2]}})"),
                         doctest::Contains("cohort_mix"), ValidationError);
}
