#include "radar/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "radar/kernels.hpp"
#include "radar/textio.hpp"

namespace radar {

void validate(const WorldConfig& c) {
    if (c.n_users < 1) throw ValidationError("world.n_users: must be >= 1");
    if (c.n_items_initial < 1) throw ValidationError("world.n_items_initial: must be >= 1");
    if (c.items_per_day < 1) throw ValidationError("world.items_per_day: must be >= 1");
    if (c.latent_dim < 2) throw ValidationError("world.latent_dim: must be >= 2");
    if (c.horizon_days < 1) throw ValidationError("world.horizon_days: must be >= 1");
    double sum = 0.0;
    for (double f : c.cohort_mix) {
        if (f < 0.0) throw ValidationError("world.cohort_mix: fractions must be >= 0");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("world.cohort_mix: must sum to 1");
    if (!(c.drift_rate >= 0.0 && c.drift_rate < 1.0))
        throw ValidationError("world.drift_rate: must be in [0, 1)");
    if (!std::isfinite(c.engagement_bias))
        throw ValidationError("world.engagement_bias: must be finite");
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

// Gaussian vector with E|g|^2 = 1 (coordinates N(0, 1/dim)).
void fill_unit_scale_gaussian(Rng& rng, std::span<double> out) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(out.size()));
    for (double& v : out) v = rng.next_gaussian() * scale;
}

void normalize(std::span<double> v) {
    double norm = std::sqrt(kernels::dot(v.data(), v.data(), v.size()));
    if (norm == 0.0) return;
    for (double& x : v) x /= norm;
}

// Draw order per item is fixed: hot flag, content coordinates, quality.
void ingest_items(World& w, std::uint32_t count, Hour created_at) {
    const std::uint32_t dim = w.config.latent_dim;
    for (std::uint32_t n = 0; n < count; ++n) {
        bool hot = w.rng.next_unit() < model::kHotFraction;
        std::size_t off = w.item_content.size();
        w.item_content.resize(off + dim);
        std::span<double> row(w.item_content.data() + off, dim);
        fill_unit_scale_gaussian(w.rng, row);
        if (hot) {
            for (std::uint32_t d = 0; d < dim; ++d)
                row[d] += model::kHotContentPull * w.mainstream[d];
        }
        normalize(row);
        double quality = model::kQualityNoiseSd * w.rng.next_gaussian();
        if (hot) quality += model::kHotQualityBoost;
        w.item_quality.push_back(quality);
        w.item_created.push_back(created_at);
    }
}

// Largest-remainder apportionment of n users over the mix; ties broken by
// cohort enum order.
std::array<std::uint32_t, kNumCohorts> cohort_counts(const WorldConfig& c) {
    std::array<std::uint32_t, kNumCohorts> counts{};
    std::array<double, kNumCohorts> remainders{};
    std::uint32_t assigned = 0;
    for (int i = 0; i < kNumCohorts; ++i) {
        double exact = c.cohort_mix[i] * static_cast<double>(c.n_users);
        counts[i] = static_cast<std::uint32_t>(std::floor(exact));
        remainders[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    std::array<int, kNumCohorts> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (std::uint32_t left = c.n_users - assigned, i = 0; i < left; ++i) ++counts[order[i]];
    return counts;
}

double session_interval_hours(double sessions_per_week) { return 168.0 / sessions_per_week; }

// One engagement draw proportional to sigmoid(true_logit) over live items,
// excluding `taken` (empty for session draws). Rejection sampling with an
// exact weighted-scan fallback keeps it fast and exactly distributed.
ItemId draw_engagement(World& w, const UserProfile& user, Hour t,
                       const std::vector<ItemId>& taken) {
    const std::size_t n_live = w.live_items(t);
    const int max_attempts = 20000;
    auto is_taken = [&](ItemId id) {
        return std::binary_search(taken.begin(), taken.end(), id);
    };
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        ItemId candidate = static_cast<ItemId>(w.rng.next_below(n_live));
        if (is_taken(candidate)) continue;
        double p = engagement_probability(w, user.user_id, candidate, t);
        if (w.rng.next_unit() < p) return candidate;
    }
    // Exact fallback: cumulative scan over remaining weights.
    double total = 0.0;
    for (std::size_t i = 0; i < n_live; ++i) {
        if (is_taken(static_cast<ItemId>(i))) continue;
        total += engagement_probability(w, user.user_id, static_cast<ItemId>(i), t);
    }
    if (total > 0.0) {
        double target = w.rng.next_unit() * total;
        double acc = 0.0;
        ItemId last = 0;
        for (std::size_t i = 0; i < n_live; ++i) {
            ItemId id = static_cast<ItemId>(i);
            if (is_taken(id)) continue;
            acc += engagement_probability(w, user.user_id, id, t);
            last = id;
            if (acc >= target) return id;
        }
        return last;
    }
    // All remaining weights are zero: lowest remaining id.
    for (std::size_t i = 0; i < n_live; ++i) {
        if (!is_taken(static_cast<ItemId>(i))) return static_cast<ItemId>(i);
    }
    throw SimError("draw_engagement: no items left to draw");
}

void record_engagement(World& w, UserId user, ItemId item, Hour t, bool session_history) {
    w.log.push_back({user, item, t, true});
    if (session_history)
        w.users[user].history.push_back(static_cast<std::uint32_t>(w.log.size() - 1));
    auto content = w.content(item);
    for (std::uint32_t d = 0; d < w.config.latent_dim; ++d)
        w.engaged_content_sum[d] += content[d];
    ++w.engaged_count;
}

void run_session(World& w, UserProfile& user, Hour t) {
    const double gamma = w.config.drift_rate;
    if (gamma > 0.0) {
        std::vector<double> g(w.config.latent_dim);
        fill_unit_scale_gaussian(w.rng, g);
        for (std::uint32_t d = 0; d < w.config.latent_dim; ++d)
            user.interest[d] = (1.0 - gamma) * user.interest[d] + gamma * g[d];
        normalize(user.interest);
    }
    static const std::vector<ItemId> none;
    for (int n = 0; n < model::kEngagementsPerSession; ++n) {
        ItemId item = draw_engagement(w, user, t, none);
        record_engagement(w, user.user_id, item, t, /*session_history=*/true);
    }
}

}  // namespace

std::size_t World::live_items(Hour t) const {
    auto it = std::upper_bound(item_created.begin(), item_created.end(), t);
    return static_cast<std::size_t>(it - item_created.begin());
}

std::vector<double> World::engagement_prior() const {
    std::vector<double> prior(config.latent_dim, 0.0);
    if (engaged_count == 0) return prior;
    for (std::uint32_t d = 0; d < config.latent_dim; ++d) prior[d] = engaged_content_sum[d];
    normalize(prior);
    return prior;
}

World generate_world(const WorldConfig& config) {
    validate(config);
    World w;
    w.config = config;
    w.rng = Rng(config.seed);
    w.clock = 0;
    w.engaged_content_sum.assign(config.latent_dim, 0.0);

    w.mainstream.resize(config.latent_dim);
    fill_unit_scale_gaussian(w.rng, w.mainstream);
    normalize(w.mainstream);

    auto counts = cohort_counts(config);
    w.users.reserve(config.n_users);
    UserId next_id = 0;
    for (int c = 0; c < kNumCohorts; ++c) {
        for (std::uint32_t n = 0; n < counts[c]; ++n) {
            UserProfile u;
            u.user_id = next_id++;
            u.cohort = static_cast<Cohort>(c);
            u.interest.resize(config.latent_dim);
            fill_unit_scale_gaussian(w.rng, u.interest);
            normalize(u.interest);
            const double lo = model::kSessionsPerWeek[c][0];
            const double hi = model::kSessionsPerWeek[c][1];
            u.sessions_per_week = lo + w.rng.next_unit() * (hi - lo);
            u.next_session_at = w.rng.next_unit() * session_interval_hours(u.sessions_per_week);
            w.users.push_back(std::move(u));
        }
    }

    ingest_items(w, config.n_items_initial, 0);
    return w;
}

double true_logit(const World& world, UserId user, ItemId item, Hour t) {
    if (item >= world.n_items() || world.item_created[item] > t)
        throw SimError("item not live");
    const auto& interest = world.users[user].interest;
    double alignment = kernels::dot(interest.data(), world.content(item).data(),
                                    world.config.latent_dim);
    return model::kLogitScale * alignment + world.item_quality[item] -
           world.config.engagement_bias;
}

std::vector<SessionEvent> advance(World& world, Hour hours) {
    if (hours < 1) throw SimError("advance: hours must be >= 1");
    std::vector<SessionEvent> events;
    const Hour end = world.clock + hours;
    for (Hour h = world.clock + 1; h <= end; ++h) {
        if (h % 24 == 0) ingest_items(world, world.config.items_per_day, h);
        for (auto& user : world.users) {
            while (user.next_session_at <= static_cast<double>(h)) {
                run_session(world, user, h);
                double jitter = model::kSessionJitterLo +
                                world.rng.next_unit() *
                                    (model::kSessionJitterHi - model::kSessionJitterLo);
                user.next_session_at += session_interval_hours(user.sessions_per_week) * jitter;
                events.push_back({user.user_id, h});
            }
        }
        world.clock = h;
    }
    return events;
}

std::vector<ItemId> sample_holdout(World& world, UserId user, std::uint32_t n_eval) {
    if (n_eval < 1) throw SimError("sample_holdout: n_eval must be >= 1");
    const std::size_t n_live = world.live_items(world.clock);
    if (n_eval > n_live) throw SimError("sample_holdout: n_eval exceeds live catalog");

    std::vector<ItemId> taken;
    taken.reserve(n_eval);
    for (std::uint32_t k = 0; k < n_eval; ++k) {
        if (n_live - taken.size() == n_eval - k) {
            // Remaining draws must take every remaining live item.
            for (std::size_t i = 0; i < n_live; ++i) {
                ItemId id = static_cast<ItemId>(i);
                if (!std::binary_search(taken.begin(), taken.end(), id)) {
                    taken.insert(std::lower_bound(taken.begin(), taken.end(), id), id);
                }
            }
            break;
        }
        ItemId id = draw_engagement(world, world.users[user], world.clock, taken);
        taken.insert(std::lower_bound(taken.begin(), taken.end(), id), id);
    }
    for (ItemId id : taken)
        record_engagement(world, user, id, world.clock, /*session_history=*/false);
    return taken;
}

std::string serialize_world(const World& w) {
    std::ostringstream out;
    out << "radar-world 1\n";
    out << "config n_users=" << w.config.n_users << " n_items_initial=" << w.config.n_items_initial
        << " items_per_day=" << w.config.items_per_day << " latent_dim=" << w.config.latent_dim
        << " cohort_mix=" << format_fixed6(w.config.cohort_mix[0]) << ','
        << format_fixed6(w.config.cohort_mix[1]) << ',' << format_fixed6(w.config.cohort_mix[2])
        << " drift_rate=" << format_fixed6(w.config.drift_rate)
        << " engagement_bias=" << format_fixed6(w.config.engagement_bias)
        << " horizon_days=" << w.config.horizon_days << " seed=" << w.config.seed << '\n';
    out << "clock " << w.clock << '\n';
    out << "rng " << rng_state_to_hex(w.rng) << '\n';
    auto write_vec = [&out](std::span<const double> v) {
        for (std::size_t d = 0; d < v.size(); ++d) {
            if (d) out << ',';
            out << format_fixed6(v[d]);
        }
    };
    for (const auto& u : w.users) {
        out << "user id=" << u.user_id << " cohort=" << cohort_name(u.cohort)
            << " sessions_per_week=" << format_fixed6(u.sessions_per_week) << " history=";
        if (u.history.empty()) {
            out << '-';
        } else {
            for (std::size_t i = 0; i < u.history.size(); ++i) {
                if (i) out << ',';
                out << u.history[i];
            }
        }
        out << " interest=";
        write_vec(u.interest);
        out << '\n';
    }
    for (std::size_t i = 0; i < w.n_items(); ++i) {
        out << "item id=" << i << " created_at=" << w.item_created[i]
            << " quality=" << format_fixed6(w.item_quality[i]) << " content=";
        write_vec(w.content(static_cast<ItemId>(i)));
        out << '\n';
    }
    for (const auto& rec : w.log) {
        out << "log user=" << rec.user_id << " item=" << rec.item_id << " time=" << rec.time
            << " engaged=" << (rec.engaged ? 1 : 0) << '\n';
    }
    return out.str();
}

void write_snapshot(const World& world, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimError("cannot open snapshot path: " + path.string());
    out << serialize_world(world);
}

}  // namespace radar
