#include "radar/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "radar/errors.hpp"

namespace radar {

void validate(const RetrievalConfig& c) {
    if (c.k_per_source < 1) throw ValidationError("retrieval.k_per_source: must be >= 1");
    if (c.freshness_boost_weight < 0.0)
        throw ValidationError("retrieval.freshness_boost_weight: must be >= 0");
    if (c.freshness_tau <= 0.0) throw ValidationError("retrieval.freshness_tau: must be > 0");
    if (c.sources.empty()) throw ValidationError("retrieval.sources: must not be empty");
    for (Source s : c.sources)
        if (s == Source::Radar)
            throw ValidationError("retrieval.sources: radar is not an online retrieval source");
}

namespace {

void add_freshness(const World& world, Hour t, FreshnessBoost boost, std::span<double> scores) {
    if (boost.weight == 0.0) return;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        double age = static_cast<double>(t - world.item_created[i]);
        scores[i] += boost.weight * std::exp(-age / boost.tau_hours);
    }
}

// Exact top-k of (score, id) under the standard comparator: partial selection
// with nth_element, then a full sort of the selected head. Identical result
// to fully sorting everything and truncating.
CandidateList select_topk(std::vector<double>&& scores, std::uint32_t k, Source source, Hour t) {
    const std::size_t n = scores.size();
    std::vector<ItemId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<ItemId>(i);

    auto cmp = [&scores](ItemId a, ItemId b) {
        return ranks_before(scores[a], a, scores[b], b);
    };
    const std::size_t keep = std::min<std::size_t>(k, n);
    if (keep < n) std::nth_element(ids.begin(), ids.begin() + keep, ids.end(), cmp);
    ids.resize(keep);
    std::sort(ids.begin(), ids.end(), cmp);

    CandidateList out;
    out.produced_at = t;
    out.entries.reserve(keep);
    for (ItemId id : ids) {
        Candidate c;
        c.item_id = id;
        c.score = scores[id];
        c.source = source;
        c.stage = Stage::Retrieved;
        c.source_mask = source_bit(source);
        c.stage_mask = stage_bit(Stage::Retrieved);
        out.entries.push_back(c);
    }
    return out;
}

ScorerKind scorer_for_source(Source source) {
    switch (source) {
        case Source::TwoTower: return ScorerKind::TwoTower;
        case Source::ItemKNN: return ScorerKind::ItemKNN;
        case Source::ContentKNN: return ScorerKind::ContentKNN;
        default: break;
    }
    throw SimError("retrieve_topk: unknown scorer-backed source");
}

}  // namespace

CandidateList retrieve_topk(const World& world, const ScorerContext& ctx, const ScorerSet& scorers,
                            UserId user, Source source, std::uint32_t k, Hour t,
                            FreshnessBoost boost) {
    if (k < 1) throw SimError("retrieve_topk: k must be >= 1");
    if (source == Source::Radar) throw SimError("retrieve_topk: radar is not an online source");
    if (source == Source::RuleBased) return rule_based_retrieve(world, k, t, boost);

    const ScorerKind kind = scorer_for_source(source);
    if (ctx.built_at > t) throw SimError("retrieve_topk: scorer tables built after t");

    const std::size_t live = world.live_items(t);
    std::vector<double> scores(live);
    score_all(scorers.get(kind), world, ctx, user, t, /*epoch=*/0, scores);
    add_freshness(world, t, boost, scores);
    return select_topk(std::move(scores), k, source, t);
}

CandidateList rule_based_retrieve(const World& world, std::uint32_t k, Hour t,
                                  FreshnessBoost boost) {
    if (k < 1) throw SimError("rule_based_retrieve: k must be >= 1");
    const std::size_t live = world.live_items(t);
    std::vector<double> scores(world.item_quality.begin(),
                               world.item_quality.begin() + live);
    add_freshness(world, t, boost, scores);
    return select_topk(std::move(scores), k, Source::RuleBased, t);
}

}  // namespace radar
