#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "radar/ids.hpp"
#include "radar/retrieval.hpp"
#include "radar/scorers.hpp"
#include "radar/store.hpp"
#include "radar/world.hpp"

namespace radar {

struct PipelineConfig {
    // Refresh cadence per cohort, indexed by Cohort.
    std::array<Hour, kNumCohorts> cadence_hours{24, 168, 336};
    // Daily window [start, end) in which refresh jobs may run.
    int off_peak_start = 2;
    int off_peak_end = 6;
    std::uint32_t pool_multiplier = 50;
    std::uint32_t store_k = 200;
    std::uint64_t refresh_seed = 0xADA6;
};

void validate(const PipelineConfig& config);

bool in_off_peak(const PipelineConfig& config, Hour t);

struct RefreshJob {
    UserId user_id = 0;
    Hour due_since = 0;
    std::optional<Hour> executed_at;
    std::uint64_t pool_size = 0;
    std::uint64_t compute_units = 0;
};

// Users whose entries are at least a cadence old (never-refreshed users are
// always due), in user_id order; empty outside the off-peak window.
std::vector<RefreshJob> due_refreshes(const PipelineConfig& config, const RadarStore& store,
                                      const std::vector<UserProfile>& users, Hour now);

// One offline refresh: per-source pools of pool_multiplier * k_per_source
// candidates (unboosted), union-deduplicated, rescored with the offline
// scorer under epoch key mix(refresh_seed, version), top store_k kept with
// 6-decimal scores. The offline scorer and pool size are parameters so the
// scaling ablations run through the identical path.
RadarEntry build_refresh_entry(const World& world, const ScorerContext& ctx,
                               const ScorerSet& scorers, const RetrievalConfig& retrieval,
                               UserId user, Hour t, std::uint64_t version, ScorerKind offline_kind,
                               std::uint32_t pool_multiplier, std::uint32_t store_k,
                               std::uint64_t refresh_seed, std::uint64_t* pool_size_out = nullptr);

RadarEntry run_refresh(const World& world, const PipelineConfig& config,
                       const RetrievalConfig& retrieval, const ScorerContext& ctx,
                       const ScorerSet& scorers, UserId user, Hour t, std::uint64_t version,
                       std::uint64_t* pool_size_out = nullptr);

// Called once per simulated hour after refreshes, with the sessions that
// occurred in that hour. Serving and trace collection hang off this.
using HourHook = std::function<void(const World&, const ScorerContext&, Hour,
                                    std::span<const SessionEvent>)>;

// Advances the world hour by hour up to t_end: ingestion and sessions via
// advance(), scorer tables rebuilt at each day boundary, due refreshes
// executed inside the off-peak window in user_id order. Returns the executed
// job log.
std::vector<RefreshJob> run_pipeline(World& world, const PipelineConfig& config,
                                     const RetrievalConfig& retrieval, const ScorerSet& scorers,
                                     RadarStore& store, Hour t_end, const HourHook& hook = {});

}  // namespace radar
