#pragma once

#include <cstdint>
#include <string>

namespace radar {

using UserId = std::uint32_t;
using ItemId = std::uint32_t;
using Hour = std::int64_t;

enum class Cohort : std::uint8_t { HighlyActive = 0, ModeratelyActive = 1, Dormant = 2 };
inline constexpr int kNumCohorts = 3;

// Retrieval sources. Enum order is the dedup precedence order among the
// standard sources; Radar always takes precedence over all of them.
enum class Source : std::uint8_t { TwoTower = 0, ItemKNN = 1, ContentKNN = 2, RuleBased = 3, Radar = 4 };
inline constexpr int kNumSources = 5;

enum class Stage : std::uint8_t { Retrieved = 0, PreRanked = 1, RadarDirect = 2, FinalRanked = 3 };

inline const char* cohort_name(Cohort c) {
    switch (c) {
        case Cohort::HighlyActive: return "highly_active";
        case Cohort::ModeratelyActive: return "moderately_active";
        case Cohort::Dormant: return "dormant";
    }
    return "?";
}

inline const char* source_name(Source s) {
    switch (s) {
        case Source::TwoTower: return "dnn";
        case Source::ItemKNN: return "item_knn";
        case Source::ContentKNN: return "content_knn";
        case Source::RuleBased: return "rule_based";
        case Source::Radar: return "radar";
    }
    return "?";
}

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Retrieved: return "retrieved";
        case Stage::PreRanked: return "preranked";
        case Stage::RadarDirect: return "radar_direct";
        case Stage::FinalRanked: return "final_ranked";
    }
    return "?";
}

}  // namespace radar
