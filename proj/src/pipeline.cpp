#include "radar/pipeline.hpp"

#include <algorithm>

#include "radar/errors.hpp"
#include "radar/parallel.hpp"
#include "radar/rng.hpp"
#include "radar/textio.hpp"

namespace radar {

void validate(const PipelineConfig& c) {
    if (!(0 <= c.off_peak_start && c.off_peak_start < c.off_peak_end && c.off_peak_end <= 24))
        throw ValidationError("pipeline.off_peak: need 0 <= start < end <= 24");
    if (c.pool_multiplier < 1) throw ValidationError("pipeline.pool_multiplier: must be >= 1");
    if (c.store_k < 1) throw ValidationError("pipeline.store_k: must be >= 1");
    for (Hour cadence : c.cadence_hours)
        if (cadence < 1) throw ValidationError("pipeline.cadence_hours: must be >= 1");
}

bool in_off_peak(const PipelineConfig& config, Hour t) {
    const Hour hour_of_day = t % 24;
    return hour_of_day >= config.off_peak_start && hour_of_day < config.off_peak_end;
}

std::vector<RefreshJob> due_refreshes(const PipelineConfig& config, const RadarStore& store,
                                      const std::vector<UserProfile>& users, Hour now) {
    std::vector<RefreshJob> jobs;
    if (!in_off_peak(config, now)) return jobs;
    for (const auto& user : users) {
        auto entry = store.peek(user.user_id);
        const Hour cadence = config.cadence_hours[static_cast<int>(user.cohort)];
        if (!entry) {
            jobs.push_back({user.user_id, 0, std::nullopt, 0, 0});
        } else if (now - entry->refreshed_at >= cadence) {
            jobs.push_back({user.user_id, entry->refreshed_at + cadence, std::nullopt, 0, 0});
        }
    }
    return jobs;
}

RadarEntry build_refresh_entry(const World& world, const ScorerContext& ctx,
                               const ScorerSet& scorers, const RetrievalConfig& retrieval,
                               UserId user, Hour t, std::uint64_t version, ScorerKind offline_kind,
                               std::uint32_t pool_multiplier, std::uint32_t store_k,
                               std::uint64_t refresh_seed, std::uint64_t* pool_size_out) {
    const std::size_t live = world.live_items(t);
    const std::uint64_t per_source =
        std::min<std::uint64_t>(live, static_cast<std::uint64_t>(pool_multiplier) *
                                          retrieval.k_per_source);

    // Union of the per-source pools. The offline pipeline retrieves broad and
    // unboosted; freshness tilts are an online-serving concern.
    std::vector<char> in_pool(live, 0);
    if (per_source > 0 && live > 0) {
        for (Source source : retrieval.sources) {
            CandidateList list =
                retrieve_topk(world, ctx, scorers, user, source,
                              static_cast<std::uint32_t>(per_source), t, FreshnessBoost{});
            for (const Candidate& c : list.entries) in_pool[c.item_id] = 1;
        }
    }
    std::vector<ItemId> pool;
    pool.reserve(live);
    for (std::size_t i = 0; i < live; ++i)
        if (in_pool[i]) pool.push_back(static_cast<ItemId>(i));
    if (pool_size_out) *pool_size_out = pool.size();

    const std::uint64_t epoch = mix64(refresh_seed, version);
    std::vector<double> scores(live);
    score_all(scorers.get(offline_kind), world, ctx, user, t, epoch, scores);

    std::sort(pool.begin(), pool.end(), [&](ItemId a, ItemId b) {
        return ranks_before(quantize6(scores[a]), a, quantize6(scores[b]), b);
    });
    if (pool.size() > store_k) pool.resize(store_k);

    RadarEntry entry;
    entry.user_id = user;
    entry.refreshed_at = t;
    entry.version = version;
    entry.items.reserve(pool.size());
    for (ItemId id : pool) entry.items.emplace_back(id, quantize6(scores[id]));
    return entry;
}

RadarEntry run_refresh(const World& world, const PipelineConfig& config,
                       const RetrievalConfig& retrieval, const ScorerContext& ctx,
                       const ScorerSet& scorers, UserId user, Hour t, std::uint64_t version,
                       std::uint64_t* pool_size_out) {
    if (!in_off_peak(config, t)) throw SimError("run_refresh: t outside the off-peak window");
    if (user >= world.users.size()) throw SimError("run_refresh: unknown user");
    return build_refresh_entry(world, ctx, scorers, retrieval, user, t, version,
                               ScorerKind::Ranker, config.pool_multiplier, config.store_k,
                               config.refresh_seed, pool_size_out);
}

std::vector<RefreshJob> run_pipeline(World& world, const PipelineConfig& config,
                                     const RetrievalConfig& retrieval, const ScorerSet& scorers,
                                     RadarStore& store, Hour t_end, const HourHook& hook) {
    if (t_end < world.clock) throw SimError("run_pipeline: t_end before current clock");
    std::vector<RefreshJob> executed;
    ScorerContext ctx = build_scorer_context(world, scorers);
    while (world.clock < t_end) {
        auto events = advance(world, 1);
        const Hour h = world.clock;
        if (h % 24 == 0) ctx = build_scorer_context(world, scorers);
        if (in_off_peak(config, h)) {
            auto jobs = due_refreshes(config, store, world.users, h);
            std::vector<RadarEntry> entries(jobs.size());
            std::vector<std::uint64_t> pool_sizes(jobs.size());
            parallel_for(jobs.size(), [&](std::size_t i) {
                const UserId user = jobs[i].user_id;
                auto current = store.peek(user);
                const std::uint64_t version = current ? current->version + 1 : 1;
                entries[i] = run_refresh(world, config, retrieval, ctx, scorers, user, h, version,
                                         &pool_sizes[i]);
            });
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                store.put(entries[i]);
                jobs[i].executed_at = h;
                jobs[i].pool_size = pool_sizes[i];
                jobs[i].compute_units = pool_sizes[i];
                executed.push_back(jobs[i]);
            }
        }
        if (hook) hook(world, ctx, h, events);
    }
    return executed;
}

}  // namespace radar
