#include "radar/scorers.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "radar/errors.hpp"
#include "radar/kernels.hpp"
#include "radar/rng.hpp"

namespace radar {

namespace {
constexpr std::uint64_t kUserNoiseTag = 0xA11CE;
constexpr std::uint64_t kItemNoiseTag = 0xB00657;
constexpr std::uint64_t kLogitNoiseTag = 0x10617;
}  // namespace

const char* scorer_kind_name(ScorerKind k) {
    switch (k) {
        case ScorerKind::TwoTower: return "two_tower";
        case ScorerKind::ItemKNN: return "item_knn";
        case ScorerKind::ContentKNN: return "content_knn";
        case ScorerKind::PreRanker: return "pre_ranker";
        case ScorerKind::Ranker: return "ranker";
    }
    return "?";
}

ScorerSpec default_spec(ScorerKind kind) {
    ScorerSpec s;
    s.kind = kind;
    s.seed = 0x5CA1AB1EULL + static_cast<std::uint64_t>(kind);
    switch (kind) {
        case ScorerKind::TwoTower: s.noise_sigma = 0.3; break;
        case ScorerKind::PreRanker: s.noise_sigma = 0.5; break;
        case ScorerKind::Ranker: s.noise_sigma = 0.05; break;
        default: s.noise_sigma = 0.0; break;
    }
    return s;
}

ScorerSet ScorerSet::defaults() {
    ScorerSet set;
    for (int k = 0; k < kNumScorerKinds; ++k)
        set.by_kind[k] = default_spec(static_cast<ScorerKind>(k));
    return set;
}

double CoEngagementIndex::sim(ItemId a, ItemId b) const {
    if (a >= rows.size()) return 0.0;
    const auto& row = rows[a];
    auto it = std::lower_bound(row.begin(), row.end(), b,
                               [](const auto& e, ItemId id) { return e.first < id; });
    if (it == row.end() || it->first != b) return 0.0;
    return it->second;
}

double shrink_factor(std::size_t history_size, std::uint32_t half_count) {
    if (half_count == 0) return 1.0;
    return static_cast<double>(history_size) /
           static_cast<double>(history_size + half_count);
}

std::vector<double> shrunk_user_vector(const World& world, UserId user, const ScorerSpec& spec,
                                       std::span<const double> prior) {
    const auto& profile = world.users[user];
    const double s = shrink_factor(profile.history.size(), spec.shrinkage_half_count);
    std::vector<double> out(world.config.latent_dim);
    for (std::uint32_t d = 0; d < world.config.latent_dim; ++d)
        out[d] = s * profile.interest[d] + (1.0 - s) * (d < prior.size() ? prior[d] : 0.0);
    return out;
}

EmbeddingTable build_embeddings(const World& world, const ScorerSpec& spec) {
    if (spec.kind != ScorerKind::TwoTower)
        throw SimError("build_embeddings: spec.kind must be two_tower");
    const std::uint32_t dim = world.config.latent_dim;
    if (spec.embedding_rank < 1 || spec.embedding_rank > dim)
        throw SimError("build_embeddings: embedding_rank must be in [1, latent_dim]");

    EmbeddingTable table;
    table.rank = spec.embedding_rank;
    table.built_at = world.clock;
    const double coord_scale = 1.0 / std::sqrt(static_cast<double>(dim));
    const auto prior = world.engagement_prior();

    table.user_emb.resize(static_cast<std::size_t>(world.users.size()) * table.rank);
    for (const auto& u : world.users) {
        auto shrunk = shrunk_user_vector(world, u.user_id, spec, prior);
        double* row = table.user_emb.data() + static_cast<std::size_t>(u.user_id) * table.rank;
        for (std::uint32_t r = 0; r < table.rank; ++r) {
            double noise = spec.noise_sigma == 0.0
                               ? 0.0
                               : spec.noise_sigma * coord_scale *
                                     keyed_gaussian(mix64(world.config.seed, spec.seed,
                                                          kUserNoiseTag, u.user_id, r));
            row[r] = shrunk[r] + noise;
        }
    }

    const std::size_t live = world.live_items(world.clock);
    table.item_emb.resize(live * table.rank);
    for (std::size_t i = 0; i < live; ++i) {
        auto content = world.content(static_cast<ItemId>(i));
        double* row = table.item_emb.data() + i * table.rank;
        for (std::uint32_t r = 0; r < table.rank; ++r) {
            double noise = spec.noise_sigma == 0.0
                               ? 0.0
                               : spec.noise_sigma * coord_scale *
                                     keyed_gaussian(mix64(world.config.seed, spec.seed,
                                                          kItemNoiseTag, i, r));
            row[r] = content[r] + noise;
        }
    }
    return table;
}

CoEngagementIndex build_coengagement(const World& world) {
    CoEngagementIndex index;
    index.built_at = world.clock;
    index.rows.resize(world.n_items());

    // Engagement counts per (user, item), grouped per user in item order.
    std::vector<std::vector<std::pair<ItemId, double>>> per_user(world.users.size());
    {
        std::vector<std::unordered_map<ItemId, double>> acc(world.users.size());
        for (const auto& rec : world.log) {
            if (rec.engaged) acc[rec.user_id][rec.item_id] += 1.0;
        }
        for (std::size_t u = 0; u < acc.size(); ++u) {
            per_user[u].assign(acc[u].begin(), acc[u].end());
            std::sort(per_user[u].begin(), per_user[u].end());
        }
    }

    std::vector<double> norm_sq(world.n_items(), 0.0);
    for (const auto& counts : per_user)
        for (const auto& [item, c] : counts) norm_sq[item] += c * c;

    std::unordered_map<std::uint64_t, double> pair_dot;
    for (const auto& counts : per_user) {
        for (std::size_t a = 0; a < counts.size(); ++a) {
            for (std::size_t b = a + 1; b < counts.size(); ++b) {
                std::uint64_t key = (static_cast<std::uint64_t>(counts[a].first) << 32) |
                                    counts[b].first;
                pair_dot[key] += counts[a].second * counts[b].second;
            }
        }
    }

    for (const auto& [key, dot] : pair_dot) {
        ItemId a = static_cast<ItemId>(key >> 32);
        ItemId b = static_cast<ItemId>(key & 0xFFFFFFFFULL);
        double sim = dot / std::sqrt(norm_sq[a] * norm_sq[b]);
        index.rows[a].push_back({b, sim});
        index.rows[b].push_back({a, sim});
    }
    for (auto& row : index.rows) std::sort(row.begin(), row.end());
    return index;
}

ScorerContext build_scorer_context(const World& world, const ScorerSet& scorers) {
    ScorerContext ctx;
    ctx.embeddings = build_embeddings(world, scorers.get(ScorerKind::TwoTower));
    ctx.embeddings_built = true;
    ctx.coengagement = build_coengagement(world);
    ctx.coengagement_built = true;
    ctx.prior = world.engagement_prior();
    ctx.built_at = world.clock;
    return ctx;
}

std::vector<ItemId> recent_engaged_items(const World& world, UserId user) {
    const auto& history = world.users[user].history;
    const std::size_t take = std::min(history.size(), kHistoryWindow);
    std::vector<ItemId> out;
    out.reserve(take);
    for (std::size_t i = history.size() - take; i < history.size(); ++i)
        out.push_back(world.log[history[i]].item_id);
    return out;
}

namespace {

double logit_noise(const ScorerSpec& spec, const World& world, UserId user, ItemId item,
                   std::uint64_t epoch) {
    if (spec.noise_sigma == 0.0) return 0.0;
    return spec.noise_sigma * keyed_gaussian(mix64(world.config.seed, spec.seed, kLogitNoiseTag,
                                                   user, item, epoch));
}

void check_live(const World& world, ItemId item, Hour t) {
    if (item >= world.n_items() || world.item_created[item] > t)
        throw SimError("item not live");
}

// Normalized mean content of the user's recent engagements; empty optional
// when there is no history (the cold-start floor).
std::vector<double> content_profile(const World& world, UserId user) {
    auto recent = recent_engaged_items(world, user);
    std::vector<double> mean(world.config.latent_dim, 0.0);
    if (recent.empty()) return mean;
    for (ItemId item : recent) {
        auto c = world.content(item);
        for (std::uint32_t d = 0; d < world.config.latent_dim; ++d) mean[d] += c[d];
    }
    double norm = std::sqrt(kernels::dot(mean.data(), mean.data(), mean.size()));
    if (norm > 0.0)
        for (double& v : mean) v /= norm;
    return mean;
}

}  // namespace

double score(const ScorerSpec& spec, const World& world, const ScorerContext& ctx, UserId user,
             ItemId item, Hour t, std::uint64_t epoch) {
    check_live(world, item, t);
    switch (spec.kind) {
        case ScorerKind::TwoTower: {
            if (!ctx.embeddings_built) throw SimError("score: embedding table missing");
            if (item >= ctx.embeddings.n_items()) return 0.0;  // not embedded yet
            auto u = ctx.embeddings.user(user);
            auto i = ctx.embeddings.item(item);
            return kernels::dot(u, i);
        }
        case ScorerKind::ItemKNN: {
            if (!ctx.coengagement_built) throw SimError("score: co-engagement index missing");
            auto recent = recent_engaged_items(world, user);
            if (recent.empty()) return 0.0;
            double best = 0.0;
            for (ItemId e : recent) best = std::max(best, ctx.coengagement.sim(e, item));
            return best;
        }
        case ScorerKind::ContentKNN: {
            auto profile = content_profile(world, user);
            bool empty = true;
            for (double v : profile)
                if (v != 0.0) empty = false;
            if (empty) return 0.0;
            return kernels::dot(profile.data(), world.content(item).data(),
                                world.config.latent_dim);
        }
        case ScorerKind::PreRanker:
        case ScorerKind::Ranker: {
            auto shrunk = shrunk_user_vector(world, user, spec, ctx.prior);
            double alignment = kernels::dot(shrunk.data(), world.content(item).data(),
                                            world.config.latent_dim);
            return model::kLogitScale * alignment + world.item_quality[item] -
                   world.config.engagement_bias + logit_noise(spec, world, user, item, epoch);
        }
    }
    throw SimError("score: unknown scorer kind");
}

void score_all(const ScorerSpec& spec, const World& world, const ScorerContext& ctx, UserId user,
               Hour t, std::uint64_t epoch, std::span<double> out) {
    const std::size_t live = world.live_items(t);
    if (out.size() != live) throw SimError("score_all: output size must equal live item count");
    switch (spec.kind) {
        case ScorerKind::TwoTower: {
            if (!ctx.embeddings_built) throw SimError("score_all: embedding table missing");
            const std::size_t embedded = std::min(live, ctx.embeddings.n_items());
            kernels::matvec(ctx.embeddings.item_emb.data(), embedded, ctx.embeddings.rank,
                            ctx.embeddings.user(user).data(), out.data());
            for (std::size_t i = embedded; i < live; ++i) out[i] = 0.0;
            return;
        }
        case ScorerKind::ItemKNN: {
            if (!ctx.coengagement_built) throw SimError("score_all: co-engagement index missing");
            std::fill(out.begin(), out.end(), 0.0);
            for (ItemId e : recent_engaged_items(world, user)) {
                if (e >= ctx.coengagement.rows.size()) continue;
                for (const auto& [nbr, s] : ctx.coengagement.rows[e]) {
                    if (nbr < live) out[nbr] = std::max(out[nbr], s);
                }
            }
            return;
        }
        case ScorerKind::ContentKNN: {
            auto profile = content_profile(world, user);
            bool empty = true;
            for (double v : profile)
                if (v != 0.0) empty = false;
            if (empty) {
                std::fill(out.begin(), out.end(), 0.0);
                return;
            }
            kernels::matvec(world.item_content.data(), live, world.config.latent_dim,
                            profile.data(), out.data());
            return;
        }
        case ScorerKind::PreRanker:
        case ScorerKind::Ranker: {
            auto shrunk = shrunk_user_vector(world, user, spec, ctx.prior);
            kernels::matvec(world.item_content.data(), live, world.config.latent_dim,
                            shrunk.data(), out.data());
            for (std::size_t i = 0; i < live; ++i) {
                out[i] = model::kLogitScale * out[i] + world.item_quality[i] -
                         world.config.engagement_bias +
                         logit_noise(spec, world, user, static_cast<ItemId>(i), epoch);
            }
            return;
        }
    }
    throw SimError("score_all: unknown scorer kind");
}

}  // namespace radar
