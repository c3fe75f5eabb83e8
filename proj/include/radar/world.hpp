#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "radar/errors.hpp"
#include "radar/ids.hpp"
#include "radar/rng.hpp"

namespace radar {

struct WorldConfig {
    std::uint32_t n_users = 2000;
    std::uint32_t n_items_initial = 20000;
    std::uint32_t items_per_day = 250;
    std::uint32_t latent_dim = 32;
    // fractions: highly_active, moderately_active, dormant
    std::array<double, 3> cohort_mix{0.30, 0.40, 0.30};
    double drift_rate = 0.10;      // per-session interest mixing coefficient
    double engagement_bias = 3.2;  // global logit offset, subtracted
    std::uint32_t horizon_days = 28;
    std::uint64_t seed = 42;

    bool operator==(const WorldConfig&) const = default;
};

// Throws ValidationError naming the offending field.
void validate(const WorldConfig& config);

// Engagement-model constants. The catalog has a small population of "hot"
// items: quality-boosted and with content pulled toward a per-world
// mainstream direction, which is what makes popularity discoverable from
// content geometry. These are model constants, not configuration.
namespace model {
inline constexpr double kLogitScale = 4.0;
inline constexpr double kHotFraction = 0.02;
inline constexpr double kHotQualityBoost = 3.0;
inline constexpr double kHotContentPull = 1.5;
inline constexpr double kQualityNoiseSd = 0.15;
inline constexpr int kEngagementsPerSession = 1;
inline constexpr double kSessionsPerWeek[kNumCohorts][2] = {
    {7.2, 9.8},    // highly active: daily or more
    {2.15, 2.85},  // moderately active: 2-3 per week
    {0.12, 0.35},  // dormant: at most one session every few weeks
};
inline constexpr double kSessionJitterLo = 0.85;
inline constexpr double kSessionJitterHi = 1.15;
}  // namespace model

struct EngagementRecord {
    UserId user_id = 0;
    ItemId item_id = 0;
    Hour time = 0;
    bool engaged = true;

    bool operator==(const EngagementRecord&) const = default;
};

struct UserProfile {
    UserId user_id = 0;
    Cohort cohort = Cohort::HighlyActive;
    std::vector<double> interest;        // unit vector, latent_dim
    std::vector<std::uint32_t> history;  // log indices of this user's session engagements
    double sessions_per_week = 0.0;
    double next_session_at = 0.0;  // scheduling state, fractional hours

    bool operator==(const UserProfile&) const = default;
};

struct SessionEvent {
    UserId user_id = 0;
    Hour at = 0;
};

struct World {
    WorldConfig config;
    std::vector<UserProfile> users;

    // Items, struct-of-arrays. Content rows are contiguous for the kernels.
    std::vector<double> item_content;  // n_items * latent_dim, unit rows
    std::vector<double> item_quality;
    std::vector<Hour> item_created;

    std::vector<EngagementRecord> log;
    Hour clock = 0;
    Rng rng;

    // Per-world mainstream direction hot items lean toward.
    std::vector<double> mainstream;

    // Running sum of engaged item contents; basis of the population
    // engagement prior the scorers shrink toward.
    std::vector<double> engaged_content_sum;
    std::uint64_t engaged_count = 0;

    std::size_t n_items() const { return item_quality.size(); }
    std::span<const double> content(ItemId i) const {
        return {item_content.data() + static_cast<std::size_t>(i) * config.latent_dim,
                config.latent_dim};
    }
    // Items are created in id order with non-decreasing created_at, so the
    // live prefix at time t is items [0, live_items(t)).
    std::size_t live_items(Hour t) const;

    // Normalized mean content of all engaged records; zero vector while the
    // log has no engagements.
    std::vector<double> engagement_prior() const;

    bool operator==(const World&) const = default;
};

World generate_world(const WorldConfig& config);

// s = scale * (interest . content) + quality - engagement_bias.
// Throws SimError if the item is not live at t.
double true_logit(const World& world, UserId user, ItemId item, Hour t);

double sigmoid(double x);

inline double engagement_probability(const World& world, UserId user, ItemId item, Hour t) {
    return sigmoid(true_logit(world, user, item, t));
}

// Advances the clock hour by hour: ingests items at day boundaries, runs the
// sessions that come due (interest drift, then one engagement draw per
// session). Returns the executed session events in deterministic order.
std::vector<SessionEvent> advance(World& world, Hour hours);

// Draws n_eval distinct live items with probability proportional to
// sigmoid(true_logit) at the current clock. Appends records to the log (eval
// draws are not session history). Returns ids in ascending order.
std::vector<ItemId> sample_holdout(World& world, UserId user, std::uint32_t n_eval);

// Canonical line-delimited snapshot; equal worlds produce byte-equal files.
std::string serialize_world(const World& world);
void write_snapshot(const World& world, const std::filesystem::path& path);

}  // namespace radar
