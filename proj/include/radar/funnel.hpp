#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "radar/ids.hpp"
#include "radar/retrieval.hpp"
#include "radar/scorers.hpp"
#include "radar/store.hpp"
#include "radar/world.hpp"

namespace radar {

struct FunnelConfig {
    RetrievalConfig retrieval;
    std::uint32_t prerank_keep = 200;
    std::uint32_t slate_size = 50;
    bool radar_enabled = true;
    // When true the final ranker rescores everything (epoch = request);
    // when false radar candidates keep their stored offline scores.
    bool rescore_radar = true;
};

void validate(const FunnelConfig& config, std::uint32_t store_k);

struct ServeTrace {
    UserId user_id = 0;
    Hour t = 0;
    // Indexed by Source; the radar slot stays 0 (tracked separately).
    std::array<std::uint32_t, kNumSources> retrieved_counts{};
    std::uint32_t preranked_count = 0;
    bool radar_hit = false;
    std::uint32_t radar_count = 0;
    Hour radar_staleness = -1;
    std::uint32_t merged_count = 0;
    std::uint32_t dedup_removed = 0;
    // Fraction of radar candidates not produced by any online source in the
    // same request; absent when there were no radar candidates.
    std::optional<double> radar_unique_fraction;
    CandidateList slate;
};

// Merges lists in the given precedence order (callers put Radar first, then
// standard sources in enum order): one entry per item, the survivor keeps
// the earliest list's score/stage and accumulates all source tags. Output is
// re-sorted by surviving score with the standard tie-break.
CandidateList merge_dedup(std::span<const CandidateList> lists);

// Re-scores Retrieved candidates with the pre-ranker and keeps the best
// `keep`. RadarDirect candidates must never enter (SimError).
CandidateList prerank(const World& world, const ScorerContext& ctx, const ScorerSet& scorers,
                      const CandidateList& candidates, UserId user, Hour t, std::uint32_t keep,
                      std::uint64_t epoch);

// The online path: parallel per-source retrieval plus the radar fetch,
// pre-ranking for standard sources only, merge/dedup with radar precedence,
// final ranking to a slate. Deterministic given (world, store, config, t).
ServeTrace serve(const World& world, const FunnelConfig& config, const ScorerContext& ctx,
                 const ScorerSet& scorers, RadarStore& store, UserId user, Hour t);

}  // namespace radar
