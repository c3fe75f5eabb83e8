#include "radar/funnel.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "radar/errors.hpp"
#include "radar/rng.hpp"

namespace radar {

void validate(const FunnelConfig& c, std::uint32_t store_k) {
    validate(c.retrieval);
    if (c.prerank_keep < 1) throw ValidationError("funnel.prerank_keep: must be >= 1");
    if (c.slate_size < 1) throw ValidationError("funnel.slate_size: must be >= 1");
    if (c.radar_enabled && c.slate_size > c.prerank_keep + store_k)
        throw ValidationError(
            "funnel.slate_size: must be <= prerank_keep + store_k when radar is enabled");
}

namespace {

void sort_candidates(std::vector<Candidate>& entries) {
    std::sort(entries.begin(), entries.end(), [](const Candidate& a, const Candidate& b) {
        return ranks_before(a.score, a.item_id, b.score, b.item_id);
    });
}

std::uint64_t request_epoch(UserId user, Hour t) {
    return mix64(0xF00DULL, user, static_cast<std::uint64_t>(t));
}

}  // namespace

CandidateList merge_dedup(std::span<const CandidateList> lists) {
    CandidateList out;
    std::unordered_map<ItemId, std::size_t> slot_of;
    for (const CandidateList& list : lists) {
        out.produced_at = std::max(out.produced_at, list.produced_at);
        for (const Candidate& c : list.entries) {
            auto [it, inserted] = slot_of.try_emplace(c.item_id, out.entries.size());
            if (inserted) {
                out.entries.push_back(c);
            } else {
                Candidate& survivor = out.entries[it->second];
                survivor.source_mask |= c.source_mask;
            }
        }
    }
    sort_candidates(out.entries);
    return out;
}

CandidateList prerank(const World& world, const ScorerContext& ctx, const ScorerSet& scorers,
                      const CandidateList& candidates, UserId user, Hour t, std::uint32_t keep,
                      std::uint64_t epoch) {
    for (const Candidate& c : candidates.entries) {
        if (c.stage != Stage::Retrieved || c.has_stage(Stage::RadarDirect))
            throw SimError("prerank: only Retrieved candidates may enter the pre-ranker");
    }
    const ScorerSpec& spec = scorers.get(ScorerKind::PreRanker);
    CandidateList out;
    out.produced_at = t;
    out.entries = candidates.entries;
    for (Candidate& c : out.entries) {
        c.score = score(spec, world, ctx, user, c.item_id, t, epoch);
        c.stage = Stage::PreRanked;
        c.stage_mask |= stage_bit(Stage::PreRanked);
    }
    sort_candidates(out.entries);
    if (out.entries.size() > keep) out.entries.resize(keep);
    return out;
}

ServeTrace serve(const World& world, const FunnelConfig& config, const ScorerContext& ctx,
                 const ScorerSet& scorers, RadarStore& store, UserId user, Hour t) {
    if (user >= world.users.size()) throw SimError("serve: unknown user");
    ServeTrace trace;
    trace.user_id = user;
    trace.t = t;
    const std::uint64_t epoch = request_epoch(user, t);

    // 1. Standard retrieval plus the radar fetch. Sources are independent;
    // a sequential deterministic walk in enum order is a conformant schedule.
    std::vector<CandidateList> standard;
    std::unordered_set<ItemId> online_items;
    for (Source source : config.retrieval.sources) {
        CandidateList list = retrieve_topk(world, ctx, scorers, user, source,
                                           config.retrieval.k_per_source, t,
                                           config.retrieval.boost());
        trace.retrieved_counts[static_cast<int>(source)] =
            static_cast<std::uint32_t>(list.entries.size());
        for (const Candidate& c : list.entries) online_items.insert(c.item_id);
        standard.push_back(std::move(list));
    }

    CandidateList radar_list;
    radar_list.produced_at = t;
    if (config.radar_enabled) {
        if (auto hit = store.get(user, t)) {
            trace.radar_hit = true;
            trace.radar_staleness = hit->staleness_hours;
            trace.radar_count = static_cast<std::uint32_t>(hit->entry->items.size());
            radar_list.entries.reserve(hit->entry->items.size());
            std::uint32_t unique = 0;
            for (const auto& [item, stored_score] : hit->entry->items) {
                Candidate c;
                c.item_id = item;
                c.score = stored_score;
                c.source = Source::Radar;
                c.stage = Stage::RadarDirect;
                c.source_mask = source_bit(Source::Radar);
                c.stage_mask = stage_bit(Stage::RadarDirect);
                radar_list.entries.push_back(c);
                if (!online_items.count(item)) ++unique;
            }
            if (trace.radar_count > 0)
                trace.radar_unique_fraction =
                    static_cast<double>(unique) / static_cast<double>(trace.radar_count);
        }
    }

    // 2. Standard sources go through pre-ranking; radar bypasses it.
    CandidateList standard_union = merge_dedup(standard);
    CandidateList preranked =
        prerank(world, ctx, scorers, standard_union, user, t, config.prerank_keep, epoch);
    trace.preranked_count = static_cast<std::uint32_t>(preranked.entries.size());

    // 3. Merge with radar precedence, then final ranking.
    std::array<CandidateList, 2> to_merge{std::move(radar_list), std::move(preranked)};
    CandidateList merged = merge_dedup(std::span<const CandidateList>(to_merge));
    trace.merged_count = static_cast<std::uint32_t>(merged.entries.size());
    trace.dedup_removed = trace.preranked_count + trace.radar_count - trace.merged_count;

    const ScorerSpec& ranker = scorers.get(ScorerKind::Ranker);
    for (Candidate& c : merged.entries) {
        const bool is_radar = c.stage == Stage::RadarDirect;
        if (config.rescore_radar || !is_radar)
            c.score = score(ranker, world, ctx, user, c.item_id, t, epoch);
    }
    sort_candidates(merged.entries);
    if (merged.entries.size() > config.slate_size) merged.entries.resize(config.slate_size);
    for (Candidate& c : merged.entries) {
        c.stage = Stage::FinalRanked;
        c.stage_mask |= stage_bit(Stage::FinalRanked);
    }
    trace.slate = std::move(merged);
    trace.slate.produced_at = t;
    return trace;
}

}  // namespace radar
