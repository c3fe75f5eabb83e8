#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "radar/ids.hpp"
#include "radar/world.hpp"

namespace radar {

enum class ScorerKind : std::uint8_t {
    TwoTower = 0,
    ItemKNN = 1,
    ContentKNN = 2,
    PreRanker = 3,
    Ranker = 4
};
inline constexpr int kNumScorerKinds = 5;

const char* scorer_kind_name(ScorerKind k);

// KNN scorers look at the user's most recent engagements only.
inline constexpr std::size_t kHistoryWindow = 20;

struct ScorerSpec {
    ScorerKind kind = ScorerKind::Ranker;
    std::uint32_t embedding_rank = 16;  // TwoTower only
    double noise_sigma = 0.05;
    // History size at which personalization is half strength; 0 disables
    // shrinkage entirely.
    std::uint32_t shrinkage_half_count = 5;
    std::uint64_t seed = 0;
};

// Per-kind defaults: TwoTower sigma 0.3 (per embedding coordinate, in units
// of the natural 1/sqrt(dim) coordinate scale), PreRanker 0.5 and Ranker
// 0.05 (absolute, on the logit).
ScorerSpec default_spec(ScorerKind kind);

struct ScorerSet {
    std::array<ScorerSpec, kNumScorerKinds> by_kind;

    static ScorerSet defaults();
    const ScorerSpec& get(ScorerKind k) const { return by_kind[static_cast<int>(k)]; }
    ScorerSpec& get(ScorerKind k) { return by_kind[static_cast<int>(k)]; }
};

struct EmbeddingTable {
    std::uint32_t rank = 0;
    Hour built_at = 0;
    std::vector<double> user_emb;  // n_users * rank
    std::vector<double> item_emb;  // live items at built_at * rank

    std::size_t n_users() const { return rank ? user_emb.size() / rank : 0; }
    std::size_t n_items() const { return rank ? item_emb.size() / rank : 0; }
    std::span<const double> user(UserId u) const {
        return {user_emb.data() + static_cast<std::size_t>(u) * rank, rank};
    }
    std::span<const double> item(ItemId i) const {
        return {item_emb.data() + static_cast<std::size_t>(i) * rank, rank};
    }
};

// Sparse symmetric cosine similarities between item co-engagement count
// vectors. Items nobody engaged have empty rows; the diagonal is absent.
struct CoEngagementIndex {
    Hour built_at = 0;
    std::vector<std::vector<std::pair<ItemId, double>>> rows;  // sorted by neighbor id

    double sim(ItemId a, ItemId b) const;
};

// Everything the scorers need beyond the world itself, captured at one build
// instant so scoring stays a pure function while the world moves on.
struct ScorerContext {
    bool embeddings_built = false;
    bool coengagement_built = false;
    EmbeddingTable embeddings;
    CoEngagementIndex coengagement;
    std::vector<double> prior;  // population engagement prior at build time
    Hour built_at = 0;
};

double shrink_factor(std::size_t history_size, std::uint32_t half_count);

// s * interest + (1 - s) * prior with s the shrink factor for the user's
// history size: the personalization actually visible to the models.
std::vector<double> shrunk_user_vector(const World& world, UserId user, const ScorerSpec& spec,
                                       std::span<const double> prior);

EmbeddingTable build_embeddings(const World& world, const ScorerSpec& spec);
CoEngagementIndex build_coengagement(const World& world);
ScorerContext build_scorer_context(const World& world, const ScorerSet& scorers);

// Point score of one (user, item) pair at time t. Ranker and PreRanker noise
// is keyed by (spec seed, world seed, user, item, epoch): stable within one
// refresh or request, fresh across epochs.
double score(const ScorerSpec& spec, const World& world, const ScorerContext& ctx, UserId user,
             ItemId item, Hour t, std::uint64_t epoch);

// Batch scores for every live item at t (out.size() == world.live_items(t)).
// Bit-identical to per-item score() calls.
void score_all(const ScorerSpec& spec, const World& world, const ScorerContext& ctx, UserId user,
               Hour t, std::uint64_t epoch, std::span<double> out);

// Most recent engaged item ids, oldest first, at most kHistoryWindow.
std::vector<ItemId> recent_engaged_items(const World& world, UserId user);

}  // namespace radar
