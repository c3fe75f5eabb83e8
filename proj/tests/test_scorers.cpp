#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "radar/scorers.hpp"
#include "radar/world.hpp"

using namespace radar;

namespace {

WorldConfig small_config(std::uint64_t seed = 7) {
    WorldConfig c;
    c.n_users = 20;
    c.n_items_initial = 300;
    c.items_per_day = 10;
    c.latent_dim = 8;
    c.seed = seed;
    return c;
}

// Spearman rank correlation; assumes effectively distinct values.
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
            if (v[x] != v[y]) return v[x] < v[y];
            return x < y;
        });
        std::vector<double> r(v.size());
        for (std::size_t pos = 0; pos < idx.size(); ++pos) r[idx[pos]] = static_cast<double>(pos);
        return r;
    };
    auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double mean = (n - 1.0) / 2.0;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - mean) * (rb[i] - mean);
        var_a += (ra[i] - mean) * (ra[i] - mean);
        var_b += (rb[i] - mean) * (rb[i] - mean);
    }
    return cov / std::sqrt(var_a * var_b);
}

ScorerContext empty_context(const World& world) {
    ScorerContext ctx;
    ctx.prior = world.engagement_prior();
    ctx.built_at = world.clock;
    return ctx;
}

}  // namespace

TEST_CASE("embeddings: no truncation, no noise, no shrinkage reproduces interest exactly") {
    World w = generate_world(small_config());
    advance(w, 48);
    ScorerSpec spec = default_spec(ScorerKind::TwoTower);
    spec.embedding_rank = w.config.latent_dim;
    spec.noise_sigma = 0.0;
    spec.shrinkage_half_count = 0;  // personalization at full strength
    EmbeddingTable table = build_embeddings(w, spec);
    for (const auto& u : w.users) {
        auto emb = table.user(u.user_id);
        for (std::uint32_t d = 0; d < w.config.latent_dim; ++d)
            CHECK(emb[d] == u.interest[d]);
    }
    for (std::size_t i = 0; i < table.n_items(); ++i) {
        auto emb = table.item(static_cast<ItemId>(i));
        auto content = w.content(static_cast<ItemId>(i));
        for (std::uint32_t d = 0; d < w.config.latent_dim; ++d) CHECK(emb[d] == content[d]);
    }
}

TEST_CASE("embeddings: zero-history user on an empty log is pure noise around zero") {
    World w = generate_world(small_config());  // log empty, prior = 0
    ScorerSpec spec = default_spec(ScorerKind::TwoTower);
    spec.embedding_rank = 4;

    ScorerSpec noiseless = spec;
    noiseless.noise_sigma = 0.0;
    EmbeddingTable zero_table = build_embeddings(w, noiseless);
    for (int r = 0; r < 4; ++r) CHECK(zero_table.user(0)[r] == 0.0);

    EmbeddingTable table = build_embeddings(w, spec);
    double norm = 0.0;
    for (int r = 0; r < 4; ++r) norm += table.user(0)[r] * table.user(0)[r];
    CHECK(norm > 0.0);  // noise present
    // noise scale: sigma per coordinate in units of 1/sqrt(dim)
    CHECK(std::sqrt(norm / 4.0) < 5.0 * spec.noise_sigma / std::sqrt(8.0));
}

TEST_CASE("embeddings: rank above latent_dim is rejected") {
    World w = generate_world(small_config());
    ScorerSpec spec = default_spec(ScorerKind::TwoTower);
    spec.embedding_rank = w.config.latent_dim + 1;
    CHECK_THROWS_AS(build_embeddings(w, spec), SimError);
    spec.kind = ScorerKind::Ranker;
    CHECK_THROWS_AS(build_embeddings(w, spec), SimError);
}

TEST_CASE("embeddings: high rank low noise correlates better with true logits") {
    double corr_strong = 0.0, corr_weak = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        WorldConfig c;
        c.n_users = 10;
        c.n_items_initial = 1000;
        c.latent_dim = 32;
        c.seed = seed;
        World w = generate_world(c);
        advance(w, 72);

        auto eval_spec = [&](std::uint32_t rank, double sigma) {
            ScorerSpec spec = default_spec(ScorerKind::TwoTower);
            spec.embedding_rank = rank;
            spec.noise_sigma = sigma;
            ScorerContext ctx = empty_context(w);
            ctx.embeddings = build_embeddings(w, spec);
            ctx.embeddings_built = true;
            const std::size_t n = 1000;
            std::vector<double> scores(n), truth(n);
            for (std::size_t i = 0; i < n; ++i) {
                scores[i] = score(spec, w, ctx, 0, static_cast<ItemId>(i), w.clock, 0);
                truth[i] = true_logit(w, 0, static_cast<ItemId>(i), w.clock);
            }
            return spearman(scores, truth);
        };
        corr_strong += eval_spec(32, 0.0);
        corr_weak += eval_spec(8, 0.5);
    }
    CHECK(corr_strong / 10.0 > corr_weak / 10.0);
}

TEST_CASE("score: two-tower dot product on a hand-built rank-1 table") {
    World w = generate_world(small_config());
    ScorerContext ctx = empty_context(w);
    ctx.embeddings.rank = 1;
    ctx.embeddings.built_at = 0;
    ctx.embeddings.user_emb.assign(w.users.size(), 1.0);
    ctx.embeddings.item_emb.assign(w.n_items(), 1.0);
    ctx.embeddings_built = true;
    ScorerSpec spec = default_spec(ScorerKind::TwoTower);
    CHECK(score(spec, w, ctx, 0, 0, 0, 0) == 1.0);
}

TEST_CASE("score: ranker with zero noise and no shrinkage is exactly the true logit") {
    World w = generate_world(small_config());
    advance(w, 48);
    ScorerSpec spec = default_spec(ScorerKind::Ranker);
    spec.noise_sigma = 0.0;
    spec.shrinkage_half_count = 0;
    ScorerContext ctx = empty_context(w);
    for (UserId u = 0; u < 5; ++u)
        for (ItemId i = 0; i < 50; ++i)
            CHECK(score(spec, w, ctx, u, i, w.clock, 0) == true_logit(w, u, i, w.clock));
}

TEST_CASE("score: ranker noise is keyed by epoch and pure per key") {
    World w = generate_world(small_config());
    advance(w, 48);
    ScorerSpec spec = default_spec(ScorerKind::Ranker);
    ScorerContext ctx = empty_context(w);
    double a1 = score(spec, w, ctx, 1, 2, w.clock, 10);
    double a2 = score(spec, w, ctx, 1, 2, w.clock, 10);
    double b = score(spec, w, ctx, 1, 2, w.clock, 11);
    CHECK(a1 == a2);
    CHECK(a1 != b);
}

TEST_CASE("score: item-knn hand fixture takes the max similarity over history") {
    World w = generate_world(small_config());
    // user 0 engaged item 1 only
    w.log.push_back({0, 1, 0, true});
    w.users[0].history = {static_cast<std::uint32_t>(w.log.size() - 1)};

    ScorerContext ctx = empty_context(w);
    ctx.coengagement.rows.resize(w.n_items());
    auto link = [&](ItemId a, ItemId b, double s) {
        ctx.coengagement.rows[a].push_back({b, s});
        ctx.coengagement.rows[b].push_back({a, s});
    };
    link(1, 2, 0.7);
    link(1, 3, 0.2);
    for (auto& row : ctx.coengagement.rows) std::sort(row.begin(), row.end());
    ctx.coengagement_built = true;

    ScorerSpec spec = default_spec(ScorerKind::ItemKNN);
    CHECK(score(spec, w, ctx, 0, 2, 0, 0) == 0.7);
    CHECK(score(spec, w, ctx, 0, 3, 0, 0) == 0.2);
    CHECK(score(spec, w, ctx, 0, 4, 0, 0) == 0.0);
}

TEST_CASE("score: empty history gives the cold-start floor for both knn scorers") {
    World w = generate_world(small_config());
    ScorerContext ctx = empty_context(w);
    ctx.coengagement.rows.resize(w.n_items());
    ctx.coengagement_built = true;
    CHECK(w.users[0].history.empty());
    for (ItemId i = 0; i < 20; ++i) {
        CHECK(score(default_spec(ScorerKind::ItemKNN), w, ctx, 0, i, 0, 0) == 0.0);
        CHECK(score(default_spec(ScorerKind::ContentKNN), w, ctx, 0, i, 0, 0) == 0.0);
    }
}

TEST_CASE("score: missing tables are an error") {
    World w = generate_world(small_config());
    ScorerContext ctx = empty_context(w);
    CHECK_THROWS_AS(score(default_spec(ScorerKind::TwoTower), w, ctx, 0, 0, 0, 0), SimError);
    CHECK_THROWS_AS(score(default_spec(ScorerKind::ItemKNN), w, ctx, 0, 0, 0, 0), SimError);
}

TEST_CASE("co-engagement: identical audiences give similarity one, disjoint none") {
    World w = generate_world(small_config());
    w.log = {
        {0, 0, 0, true}, {0, 1, 0, true},  // users 0,1 engage items 0 and 1
        {1, 0, 0, true}, {1, 1, 0, true},
        {2, 2, 0, true},  // item 2 has a disjoint audience
    };
    CoEngagementIndex index = build_coengagement(w);
    CHECK(index.sim(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(index.sim(0, 2) == 0.0);
    CHECK(index.sim(1, 2) == 0.0);
    CHECK(index.sim(0, 0) == 0.0);  // diagonal absent
}

TEST_CASE("co-engagement: hand-computed cosines on a 4-user 3-item fixture") {
    World w = generate_world(small_config());
    // count vectors over users: item0 (2,1,0,0), item1 (1,1,1,0), item2 (0,0,1,1)
    w.log = {
        {0, 0, 0, true}, {0, 0, 0, true}, {0, 1, 0, true},
        {1, 0, 0, true}, {1, 1, 0, true},
        {2, 1, 0, true}, {2, 2, 0, true},
        {3, 2, 0, true},
    };
    CoEngagementIndex index = build_coengagement(w);
    CHECK(std::abs(index.sim(0, 1) - 3.0 / std::sqrt(15.0)) <= 1e-12);
    CHECK(std::abs(index.sim(1, 2) - 1.0 / std::sqrt(6.0)) <= 1e-12);
    CHECK(index.sim(0, 2) == 0.0);
}

TEST_CASE("co-engagement: symmetric exactly and bounded to [0,1]") {
    World w = generate_world(small_config(3));
    advance(w, 96);
    CoEngagementIndex index = build_coengagement(w);
    for (ItemId a = 0; a < w.n_items(); ++a) {
        for (const auto& [b, s] : index.rows[a]) {
            CHECK(index.sim(b, a) == s);
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
    }
    // empty log gives an empty index
    World fresh = generate_world(small_config(4));
    CoEngagementIndex empty_index = build_coengagement(fresh);
    for (const auto& row : empty_index.rows) CHECK(row.empty());
}

TEST_CASE("fidelity ordering: ranker beats pre-ranker on rank correlation") {
    double ranker_corr = 0.0, preranker_corr = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        WorldConfig c;
        c.n_users = 10;
        c.n_items_initial = 1000;
        c.latent_dim = 32;
        c.seed = seed;
        World w = generate_world(c);
        advance(w, 72);
        ScorerContext ctx = empty_context(w);
        const std::size_t n = 1000;
        std::vector<double> truth(n), r_scores(n), p_scores(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = true_logit(w, 0, static_cast<ItemId>(i), w.clock);
            r_scores[i] = score(default_spec(ScorerKind::Ranker), w, ctx, 0,
                                static_cast<ItemId>(i), w.clock, 1);
            p_scores[i] = score(default_spec(ScorerKind::PreRanker), w, ctx, 0,
                                static_cast<ItemId>(i), w.clock, 1);
        }
        ranker_corr += spearman(r_scores, truth);
        preranker_corr += spearman(p_scores, truth);
    }
    CHECK(ranker_corr / 10.0 > preranker_corr / 10.0);
}

TEST_CASE("score_all matches per-item score bit-exactly for every kind") {
    World w = generate_world(small_config(9));
    advance(w, 72);
    ScorerSet scorers = ScorerSet::defaults();
    scorers.get(ScorerKind::TwoTower).embedding_rank = 4;  // latent_dim is 8 here
    ScorerContext ctx = build_scorer_context(w, scorers);
    const std::size_t live = w.live_items(w.clock);
    std::vector<double> batch(live);
    for (int k = 0; k < kNumScorerKinds; ++k) {
        const ScorerSpec& spec = scorers.by_kind[k];
        score_all(spec, w, ctx, 3, w.clock, 42, batch);
        for (std::size_t i = 0; i < live; ++i)
            CHECK(batch[i] == score(spec, w, ctx, 3, static_cast<ItemId>(i), w.clock, 42));
    }
}

TEST_CASE("shrink factor follows h/(h+half) with 0 disabling shrinkage") {
    CHECK(shrink_factor(0, 5) == 0.0);
    CHECK(shrink_factor(5, 5) == 0.5);
    CHECK(shrink_factor(20, 5) == 0.8);
    CHECK(shrink_factor(0, 0) == 1.0);
    CHECK(shrink_factor(7, 0) == 1.0);
}
