#pragma once

#include <cstdint>
#include <vector>

#include "radar/ids.hpp"
#include "radar/scorers.hpp"
#include "radar/world.hpp"

namespace radar {

struct Candidate {
    ItemId item_id = 0;
    double score = 0.0;
    Source source = Source::TwoTower;
    Stage stage = Stage::Retrieved;
    std::uint8_t source_mask = 0;  // union of sources that produced this item
    std::uint8_t stage_mask = 0;   // union of stages this candidate has passed

    bool has_stage(Stage s) const { return stage_mask & (1u << static_cast<int>(s)); }
};

inline std::uint8_t source_bit(Source s) { return static_cast<std::uint8_t>(1u << static_cast<int>(s)); }
inline std::uint8_t stage_bit(Stage s) { return static_cast<std::uint8_t>(1u << static_cast<int>(s)); }

// Sorted by score descending, ties by ascending item_id, no duplicates.
struct CandidateList {
    std::vector<Candidate> entries;
    Hour produced_at = 0;
};

struct FreshnessBoost {
    double weight = 0.0;
    double tau_hours = 72.0;
};

struct RetrievalConfig {
    std::uint32_t k_per_source = 250;
    std::vector<Source> sources{Source::TwoTower, Source::ItemKNN, Source::ContentKNN,
                                Source::RuleBased};
    double freshness_boost_weight = 0.0;
    double freshness_tau = 72.0;

    FreshnessBoost boost() const { return {freshness_boost_weight, freshness_tau}; }
};

void validate(const RetrievalConfig& config);

// Comparator shared by every ranked surface: score descending, ascending
// item_id on exact ties. A total order, so outputs are reproducible.
inline bool ranks_before(double score_a, ItemId a, double score_b, ItemId b) {
    if (score_a != score_b) return score_a > score_b;
    return a < b;
}

// Exact brute-force top-k over live items for one source's scorer plus
// weight * exp(-age_hours / tau). k beyond the live catalog returns the whole
// catalog ranked.
CandidateList retrieve_topk(const World& world, const ScorerContext& ctx, const ScorerSet& scorers,
                            UserId user, Source source, std::uint32_t k, Hour t,
                            FreshnessBoost boost);

// User-independent popularity proxy: quality + freshness boost.
CandidateList rule_based_retrieve(const World& world, std::uint32_t k, Hour t,
                                  FreshnessBoost boost);

}  // namespace radar
