#include "radar/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "radar/errors.hpp"

namespace radar {

void validate_run_config(const RunConfig& c) {
    validate(c.world);
    validate(c.retrieval);
    validate(c.pipeline);
    validate(c.funnel, c.pipeline.store_k);
    validate(c.eval);
    for (const auto& spec : c.scorers.by_kind) {
        if (spec.noise_sigma < 0.0)
            throw ValidationError(std::string("scorers.") + scorer_kind_name(spec.kind) +
                                  ".noise_sigma: must be >= 0");
    }
    const auto& tt = c.scorers.get(ScorerKind::TwoTower);
    if (tt.embedding_rank < 1 || tt.embedding_rank > c.world.latent_dim)
        throw ValidationError("scorers.two_tower.embedding_rank: must be in [1, world.latent_dim]");
    if (!(c.scorers.get(ScorerKind::Ranker).noise_sigma <
          c.scorers.get(ScorerKind::PreRanker).noise_sigma))
        throw ValidationError("scorers: ranker.noise_sigma must be < pre_ranker.noise_sigma");
    if (c.output_dir.empty()) throw ValidationError("output_dir: must not be empty");
}

RunConfig default_run_config() { return RunConfig{}; }

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw ValidationError("config: " + path + ": " + why);
}

void expect_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown field");
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

std::uint64_t get_uint(const json& obj, const std::string& path, const char* key,
                       std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(path + "." + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

void parse_world(const json& obj, WorldConfig& w) {
    const std::string path = "world";
    expect_keys(obj, path,
                {"n_users", "n_items_initial", "items_per_day", "latent_dim", "cohort_mix",
                 "drift_rate", "engagement_bias", "horizon_days", "seed"});
    w.n_users = static_cast<std::uint32_t>(get_uint(obj, path, "n_users", w.n_users));
    w.n_items_initial =
        static_cast<std::uint32_t>(get_uint(obj, path, "n_items_initial", w.n_items_initial));
    w.items_per_day =
        static_cast<std::uint32_t>(get_uint(obj, path, "items_per_day", w.items_per_day));
    w.latent_dim = static_cast<std::uint32_t>(get_uint(obj, path, "latent_dim", w.latent_dim));
    if (obj.contains("cohort_mix")) {
        const auto& mix = obj.at("cohort_mix");
        if (!mix.is_array() || mix.size() != 3)
            fail(path + ".cohort_mix", "expected an array of 3 fractions");
        for (int i = 0; i < 3; ++i) {
            if (!mix[i].is_number()) fail(path + ".cohort_mix", "expected numbers");
            w.cohort_mix[i] = mix[i].get<double>();
        }
    }
    w.drift_rate = get_number(obj, path, "drift_rate", w.drift_rate);
    w.engagement_bias = get_number(obj, path, "engagement_bias", w.engagement_bias);
    w.horizon_days = static_cast<std::uint32_t>(get_uint(obj, path, "horizon_days", w.horizon_days));
    w.seed = get_uint(obj, path, "seed", w.seed);
}

ScorerKind parse_scorer_kind(const std::string& name, const std::string& path) {
    if (name == "two_tower" || name == "dnn") return ScorerKind::TwoTower;
    if (name == "item_knn") return ScorerKind::ItemKNN;
    if (name == "content_knn") return ScorerKind::ContentKNN;
    if (name == "pre_ranker") return ScorerKind::PreRanker;
    if (name == "ranker") return ScorerKind::Ranker;
    fail(path, "unknown scorer kind '" + name + "'");
}

void parse_scorers(const json& arr, ScorerSet& scorers) {
    if (!arr.is_array()) fail("scorers", "expected a list of scorer specs");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "scorers[" + std::to_string(i) + "]";
        const auto& obj = arr[i];
        if (!obj.is_object()) fail(path, "expected an object");
        expect_keys(obj, path,
                    {"kind", "embedding_rank", "noise_sigma", "shrinkage_half_count", "seed"});
        if (!obj.contains("kind")) fail(path + ".kind", "missing required field");
        ScorerKind kind = parse_scorer_kind(get_string(obj, path, "kind", ""), path + ".kind");
        ScorerSpec& spec = scorers.get(kind);
        spec.embedding_rank =
            static_cast<std::uint32_t>(get_uint(obj, path, "embedding_rank", spec.embedding_rank));
        spec.noise_sigma = get_number(obj, path, "noise_sigma", spec.noise_sigma);
        spec.shrinkage_half_count = static_cast<std::uint32_t>(
            get_uint(obj, path, "shrinkage_half_count", spec.shrinkage_half_count));
        spec.seed = get_uint(obj, path, "seed", spec.seed);
    }
}

Source parse_source(const std::string& name, const std::string& path) {
    if (name == "two_tower" || name == "dnn") return Source::TwoTower;
    if (name == "item_knn") return Source::ItemKNN;
    if (name == "content_knn") return Source::ContentKNN;
    if (name == "rule_based") return Source::RuleBased;
    fail(path, "unknown source '" + name + "'");
}

void parse_retrieval(const json& obj, RetrievalConfig& r) {
    const std::string path = "retrieval";
    expect_keys(obj, path, {"k_per_source", "sources", "freshness_boost_weight", "freshness_tau"});
    r.k_per_source =
        static_cast<std::uint32_t>(get_uint(obj, path, "k_per_source", r.k_per_source));
    if (obj.contains("sources")) {
        const auto& arr = obj.at("sources");
        if (!arr.is_array()) fail(path + ".sources", "expected a list of source names");
        r.sources.clear();
        for (const auto& v : arr) {
            if (!v.is_string()) fail(path + ".sources", "expected strings");
            r.sources.push_back(parse_source(v.get<std::string>(), path + ".sources"));
        }
    }
    r.freshness_boost_weight =
        get_number(obj, path, "freshness_boost_weight", r.freshness_boost_weight);
    r.freshness_tau = get_number(obj, path, "freshness_tau", r.freshness_tau);
}

void parse_pipeline(const json& obj, PipelineConfig& p) {
    const std::string path = "pipeline";
    expect_keys(obj, path,
                {"cadence_hours", "off_peak", "pool_multiplier", "store_k", "refresh_seed"});
    if (obj.contains("cadence_hours")) {
        const auto& c = obj.at("cadence_hours");
        if (!c.is_object()) fail(path + ".cadence_hours", "expected an object keyed by cohort");
        expect_keys(c, path + ".cadence_hours", {"highly_active", "moderately_active", "dormant"});
        p.cadence_hours[0] = static_cast<Hour>(
            get_uint(c, path + ".cadence_hours", "highly_active", p.cadence_hours[0]));
        p.cadence_hours[1] = static_cast<Hour>(
            get_uint(c, path + ".cadence_hours", "moderately_active", p.cadence_hours[1]));
        p.cadence_hours[2] =
            static_cast<Hour>(get_uint(c, path + ".cadence_hours", "dormant", p.cadence_hours[2]));
    }
    if (obj.contains("off_peak")) {
        const auto& w = obj.at("off_peak");
        if (!w.is_array() || w.size() != 2 || !w[0].is_number_unsigned() ||
            !w[1].is_number_unsigned())
            fail(path + ".off_peak", "expected [start_hour, end_hour)");
        p.off_peak_start = w[0].get<int>();
        p.off_peak_end = w[1].get<int>();
    }
    p.pool_multiplier =
        static_cast<std::uint32_t>(get_uint(obj, path, "pool_multiplier", p.pool_multiplier));
    p.store_k = static_cast<std::uint32_t>(get_uint(obj, path, "store_k", p.store_k));
    p.refresh_seed = get_uint(obj, path, "refresh_seed", p.refresh_seed);
}

void parse_funnel(const json& obj, FunnelConfig& f) {
    const std::string path = "funnel";
    expect_keys(obj, path, {"prerank_keep", "slate_size", "radar_enabled", "rescore_radar"});
    f.prerank_keep =
        static_cast<std::uint32_t>(get_uint(obj, path, "prerank_keep", f.prerank_keep));
    f.slate_size = static_cast<std::uint32_t>(get_uint(obj, path, "slate_size", f.slate_size));
    f.radar_enabled = get_bool(obj, path, "radar_enabled", f.radar_enabled);
    f.rescore_radar = get_bool(obj, path, "rescore_radar", f.rescore_radar);
}

void parse_eval(const json& obj, EvalPlan& e) {
    const std::string path = "eval";
    expect_keys(obj, path, {"k_eval", "n_eval_per_user", "eval_day", "seeds", "cohort_split"});
    e.k_eval = static_cast<std::uint32_t>(get_uint(obj, path, "k_eval", e.k_eval));
    e.n_eval_per_user =
        static_cast<std::uint32_t>(get_uint(obj, path, "n_eval_per_user", e.n_eval_per_user));
    e.eval_day = static_cast<std::uint32_t>(get_uint(obj, path, "eval_day", e.eval_day));
    if (obj.contains("seeds")) {
        const auto& arr = obj.at("seeds");
        if (!arr.is_array() || arr.empty()) fail(path + ".seeds", "expected a non-empty list");
        e.seeds.clear();
        for (const auto& v : arr) {
            if (!v.is_number_unsigned()) fail(path + ".seeds", "expected non-negative integers");
            e.seeds.push_back(v.get<std::uint64_t>());
        }
    }
    e.cohort_split = get_bool(obj, path, "cohort_split", e.cohort_split);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw ValidationError("config: top level must be an object");
    expect_keys(root, "config",
                {"world", "scorers", "retrieval", "pipeline", "funnel", "eval", "output_dir"});

    RunConfig cfg;
    auto section = [&](const char* key) -> const json& {
        const auto& v = root.at(key);
        if (!v.is_object() && std::string(key) != "scorers") fail(key, "expected an object");
        return v;
    };
    if (root.contains("world")) parse_world(section("world"), cfg.world);
    if (root.contains("scorers")) parse_scorers(root.at("scorers"), cfg.scorers);
    if (root.contains("retrieval")) parse_retrieval(section("retrieval"), cfg.retrieval);
    if (root.contains("pipeline")) parse_pipeline(section("pipeline"), cfg.pipeline);
    if (root.contains("funnel")) parse_funnel(section("funnel"), cfg.funnel);
    if (root.contains("eval")) parse_eval(section("eval"), cfg.eval);
    cfg.output_dir = get_string(root, "config", "output_dir", cfg.output_dir);
    cfg.funnel.retrieval = cfg.retrieval;
    validate_run_config(cfg);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ValidationError("config: cannot open file: " + path.string());
    std::ostringstream buf;
    buf << file.rdbuf();
    return parse_run_config(buf.str());
}

}  // namespace radar
