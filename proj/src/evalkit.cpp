#include "radar/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "radar/errors.hpp"
#include "radar/parallel.hpp"
#include "radar/textio.hpp"

namespace radar {

void validate(const EvalPlan& p) {
    if (p.k_eval < 1) throw ValidationError("eval.k_eval: must be >= 1");
    if (p.n_eval_per_user < 1) throw ValidationError("eval.n_eval_per_user: must be >= 1");
    if (p.seeds.empty()) throw ValidationError("eval.seeds: must not be empty");
}

std::optional<double> recall_at_k(const CandidateList& retrieved,
                                  const std::unordered_set<ItemId>& truth, std::uint32_t k) {
    if (truth.empty()) return std::nullopt;
    const std::size_t top = std::min<std::size_t>(k, retrieved.entries.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < top; ++i)
        if (truth.count(retrieved.entries[i].item_id)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

CandidateList entry_to_candidates(const RadarEntry& entry) {
    CandidateList out;
    out.produced_at = entry.refreshed_at;
    out.entries.reserve(entry.items.size());
    for (const auto& [item, score] : entry.items) {
        Candidate c;
        c.item_id = item;
        c.score = score;
        c.source = Source::Radar;
        c.stage = Stage::RadarDirect;
        c.source_mask = source_bit(Source::Radar);
        c.stage_mask = stage_bit(Stage::RadarDirect);
        out.entries.push_back(c);
    }
    return out;
}

void ExperimentReport::canonicalize() {
    auto key = [](const ReportRow& r) {
        return std::tie(r.experiment, r.seed, r.cohort, r.source, r.config, r.k, r.aux_name);
    };
    std::sort(rows.begin(), rows.end(),
              [&](const ReportRow& a, const ReportRow& b) { return key(a) < key(b); });
}

void ExperimentReport::append(const ExperimentReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::string render_report(const ExperimentReport& report, ReportFormat format) {
    ExperimentReport canon = report;
    canon.canonicalize();
    std::ostringstream out;
    if (format == ReportFormat::Csv) {
        out << "experiment,seed,cohort,source,config,k,recall,aux_name,aux_value\n";
        for (const auto& r : canon.rows) {
            out << r.experiment << ',' << r.seed << ',' << r.cohort << ',' << r.source << ','
                << r.config << ',' << r.k << ',' << format_fixed6(r.recall) << ',' << r.aux_name
                << ',' << format_fixed6(r.aux_value) << '\n';
        }
    } else {
        for (const auto& r : canon.rows) {
            out << "{\"experiment\":\"" << r.experiment << "\",\"seed\":" << r.seed
                << ",\"cohort\":\"" << r.cohort << "\",\"source\":\"" << r.source
                << "\",\"config\":\"" << r.config << "\",\"k\":" << r.k
                << ",\"recall\":" << format_fixed6(r.recall) << ",\"aux_name\":\"" << r.aux_name
                << "\",\"aux_value\":" << format_fixed6(r.aux_value) << "}\n";
        }
    }
    return out.str();
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& path,
                 ReportFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimError("cannot open report path for writing: " + path.string());
    out << render_report(report, format);
}

std::string render_summary_csv(const ExperimentReport& report) {
    struct Acc {
        std::vector<double> values;
    };
    std::map<std::tuple<std::string, std::string, std::string, std::string, std::uint32_t>, Acc>
        groups;
    for (const auto& r : report.rows) {
        if (!r.aux_name.empty() && r.aux_name != "users") continue;
        groups[{r.experiment, r.cohort, r.source, r.config, r.k}].values.push_back(r.recall);
    }
    std::ostringstream out;
    out << "experiment,cohort,source,config,k,mean_recall,stddev_recall,n\n";
    for (const auto& [key, acc] : groups) {
        const auto& v = acc.values;
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        if (v.size() > 1) {
            for (double x : v) var += (x - mean) * (x - mean);
            var /= static_cast<double>(v.size() - 1);
        }
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
            << std::get<3>(key) << ',' << std::get<4>(key) << ',' << format_fixed6(mean) << ','
            << format_fixed6(std::sqrt(var)) << ',' << v.size() << '\n';
    }
    return out.str();
}

void emit_summary(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimError("cannot open summary path for writing: " + path.string());
    out << render_summary_csv(report);
}

EvalRun prepare_eval_run(const RunConfig& config, std::uint64_t seed, bool with_pipeline) {
    RunConfig cfg = config;
    cfg.world.seed = seed;
    validate_run_config(cfg);

    EvalRun run{generate_world(cfg.world), RadarStore(cfg.pipeline.store_k), {}, {}, 0, {}, {}};
    run.t_eval = eval_instant(cfg.eval);
    if (with_pipeline) {
        run.jobs = run_pipeline(run.world, cfg.pipeline, cfg.retrieval, cfg.scorers, run.store,
                                run.t_eval);
    } else if (run.t_eval > 0) {
        advance(run.world, run.t_eval);
    }
    run.ctx = build_scorer_context(run.world, cfg.scorers);

    // Holdouts are drawn only now, after every table and entry exists.
    run.holdouts.reserve(run.world.users.size());
    run.holdout_sets.reserve(run.world.users.size());
    for (const auto& user : run.world.users) {
        auto ids = sample_holdout(run.world, user.user_id, cfg.eval.n_eval_per_user);
        run.holdout_sets.emplace_back(ids.begin(), ids.end());
        run.holdouts.push_back(std::move(ids));
    }
    return run;
}

std::vector<ServeTrace> serve_all_users(const World& world, const FunnelConfig& funnel,
                                        const ScorerContext& ctx, const ScorerSet& scorers,
                                        RadarStore& store, Hour t) {
    std::vector<ServeTrace> traces(world.users.size());
    parallel_for(world.users.size(), [&](std::size_t u) {
        traces[u] = serve(world, funnel, ctx, scorers, store, static_cast<UserId>(u), t);
    });
    return traces;
}

std::optional<OverlapSummary> overlap_metrics(std::span<const ServeTrace> traces) {
    std::vector<double> fractions;
    for (const auto& trace : traces)
        if (trace.radar_unique_fraction) fractions.push_back(*trace.radar_unique_fraction);
    if (fractions.empty()) return std::nullopt;
    std::sort(fractions.begin(), fractions.end());
    OverlapSummary s;
    s.n_traces = fractions.size();
    double sum = 0.0;
    for (double f : fractions) sum += f;
    s.mean = sum / static_cast<double>(fractions.size());
    for (std::size_t i = 0; i <= 10; ++i)
        s.deciles[i] = fractions[i * (fractions.size() - 1) / 10];
    return s;
}

namespace {

struct MacroAccumulator {
    double sum = 0.0;
    std::uint64_t n = 0;
    void add(std::optional<double> r) {
        if (r) {
            sum += *r;
            ++n;
        }
    }
    double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
};

const char* kCohortKeys[kNumCohorts] = {"highly_active", "moderately_active", "dormant"};

// Standalone Table 1 sources; rule-based feeds the pools but is not a
// reported baseline.
const std::array<Source, 3> kStandaloneSources{Source::TwoTower, Source::ItemKNN,
                                               Source::ContentKNN};

}  // namespace

ExperimentReport table1_rows(const EvalRun& run, const RunConfig& config, std::uint64_t seed,
                             bool cohort_split) {
    const std::uint32_t k = config.eval.k_eval;
    const std::size_t n_users = run.world.users.size();
    const std::string experiment = cohort_split ? "table3" : "table1";

    // Per-user recall per source (parallel), reduced in user order.
    constexpr std::size_t kRadarSlot = 3;
    std::vector<std::array<std::optional<double>, 4>> per_user(n_users);
    const bool store_empty = run.store.size() == 0;
    parallel_for(n_users, [&](std::size_t u) {
        const UserId user = static_cast<UserId>(u);
        const auto& truth = run.holdout_sets[u];
        for (std::size_t s = 0; s < kStandaloneSources.size(); ++s) {
            CandidateList list =
                retrieve_topk(run.world, run.ctx, config.scorers, user, kStandaloneSources[s], k,
                              run.t_eval, config.retrieval.boost());
            per_user[u][s] = recall_at_k(list, truth, k);
        }
        if (auto entry = run.store.peek(user))
            per_user[u][kRadarSlot] = recall_at_k(entry_to_candidates(*entry), truth, k);
    });

    ExperimentReport report;
    auto emit_group = [&](const std::string& cohort, auto&& user_in_group) {
        for (std::size_t s = 0; s < 4; ++s) {
            const std::string source =
                s == kRadarSlot ? "radar" : source_name(kStandaloneSources[s]);
            if (s != kRadarSlot && cohort_split && source != "dnn") continue;  // table3: radar vs dnn
            MacroAccumulator acc;
            for (std::size_t u = 0; u < n_users; ++u)
                if (user_in_group(u)) acc.add(per_user[u][s]);
            ReportRow row;
            row.experiment = experiment;
            row.seed = seed;
            row.cohort = cohort;
            row.source = source;
            row.k = k;
            row.recall = acc.mean();
            if (s == kRadarSlot && store_empty) {
                row.aux_name = "store_empty";
                row.aux_value = 1.0;
            } else if (acc.n == 0) {
                row.aux_name = "empty_cohort";
                row.aux_value = 0.0;
            } else {
                row.aux_name = "users";
                row.aux_value = static_cast<double>(acc.n);
            }
            report.rows.push_back(std::move(row));
        }
    };

    emit_group("all", [](std::size_t) { return true; });
    if (cohort_split) {
        for (int c = 0; c < kNumCohorts; ++c) {
            emit_group(kCohortKeys[c], [&, c](std::size_t u) {
                return run.world.users[u].cohort == static_cast<Cohort>(c);
            });
        }
    }
    return report;
}

ExperimentReport table2_rows(const EvalRun& run, const RunConfig& config, std::uint64_t seed) {
    const std::uint32_t k = config.eval.k_eval;
    const std::size_t n_users = run.world.users.size();

    struct Cell {
        const char* name;
        ScorerKind kind;
        std::uint32_t multiplier;
    };
    const std::array<Cell, 4> cells{{
        {"YY", ScorerKind::Ranker, config.pipeline.pool_multiplier},
        {"NY", ScorerKind::PreRanker, config.pipeline.pool_multiplier},
        {"YN", ScorerKind::Ranker, 1},
        {"NN", ScorerKind::PreRanker, 1},
    }};

    ExperimentReport report;
    for (const Cell& cell : cells) {
        std::vector<std::optional<double>> recalls(n_users);
        parallel_for(n_users, [&](std::size_t u) {
            RadarEntry entry = build_refresh_entry(
                run.world, run.ctx, config.scorers, config.retrieval, static_cast<UserId>(u),
                run.t_eval, /*version=*/1, cell.kind, cell.multiplier, config.pipeline.store_k,
                config.pipeline.refresh_seed);
            recalls[u] = recall_at_k(entry_to_candidates(entry), run.holdout_sets[u], k);
        });
        MacroAccumulator acc;
        for (const auto& r : recalls) acc.add(r);
        ReportRow row;
        row.experiment = "table2";
        row.seed = seed;
        row.source = "radar";
        row.config = cell.name;
        row.k = k;
        row.recall = acc.mean();
        row.aux_name = "users";
        row.aux_value = static_cast<double>(acc.n);
        report.rows.push_back(std::move(row));
    }
    return report;
}

ExperimentReport curve_rows(const EvalRun& run, const RunConfig& config, std::uint64_t seed,
                            Source source, std::span<const std::uint32_t> ks) {
    for (std::size_t i = 1; i < ks.size(); ++i)
        if (ks[i] <= ks[i - 1]) throw SimError("recall_curve: ks must be strictly increasing");
    if (ks.empty()) return {};

    const std::size_t n_users = run.world.users.size();
    const std::uint32_t k_max = ks.back();
    std::vector<std::vector<std::optional<double>>> per_user(n_users);
    parallel_for(n_users, [&](std::size_t u) {
        CandidateList list = retrieve_topk(run.world, run.ctx, config.scorers,
                                           static_cast<UserId>(u), source, k_max, run.t_eval,
                                           config.retrieval.boost());
        per_user[u].reserve(ks.size());
        for (std::uint32_t k : ks)
            per_user[u].push_back(recall_at_k(list, run.holdout_sets[u], k));
    });

    ExperimentReport report;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        MacroAccumulator acc;
        for (std::size_t u = 0; u < n_users; ++u) acc.add(per_user[u][i]);
        ReportRow row;
        row.experiment = "curve";
        row.seed = seed;
        row.source = source_name(source);
        row.k = ks[i];
        row.recall = acc.mean();
        row.aux_name = "users";
        row.aux_value = static_cast<double>(acc.n);
        report.rows.push_back(std::move(row));
    }
    return report;
}

ExperimentReport overlap_rows(EvalRun& run, const RunConfig& config, std::uint64_t seed) {
    ExperimentReport report;
    for (double weight : {0.0, 1.0}) {
        FunnelConfig funnel = config.funnel;
        funnel.radar_enabled = true;
        funnel.retrieval.freshness_boost_weight = weight;
        auto traces = serve_all_users(run.world, funnel, run.ctx, config.scorers, run.store,
                                      run.t_eval);
        auto summary = overlap_metrics(traces);
        ReportRow row;
        row.experiment = "overlap";
        row.seed = seed;
        row.source = "radar";
        row.config = "boost=" + format_fixed6(weight);
        row.k = 0;
        if (!summary) {
            row.aux_name = "no_radar_hits";
            row.aux_value = 1.0;
            report.rows.push_back(row);
            continue;
        }
        row.recall = summary->mean;
        row.aux_name = "traces";
        row.aux_value = static_cast<double>(summary->n_traces);
        report.rows.push_back(row);
        for (std::size_t d = 0; d <= 10; ++d) {
            ReportRow decile = row;
            decile.aux_name = "decile_" + std::to_string(d);
            decile.aux_value = summary->deciles[d];
            report.rows.push_back(std::move(decile));
        }
    }
    return report;
}

namespace {

template <typename PerSeed>
ExperimentReport over_seeds(const RunConfig& config, bool with_pipeline, PerSeed&& per_seed) {
    ExperimentReport report;
    for (std::uint64_t seed : config.eval.seeds) {
        EvalRun run = prepare_eval_run(config, seed, with_pipeline);
        report.append(per_seed(run, seed));
    }
    report.canonicalize();
    return report;
}

}  // namespace

ExperimentReport run_table1(const RunConfig& config) {
    return over_seeds(config, true, [&](EvalRun& run, std::uint64_t seed) {
        return table1_rows(run, config, seed, /*cohort_split=*/false);
    });
}

ExperimentReport run_table2(const RunConfig& config) {
    return over_seeds(config, false, [&](EvalRun& run, std::uint64_t seed) {
        return table2_rows(run, config, seed);
    });
}

ExperimentReport run_table3(const RunConfig& config) {
    return over_seeds(config, true, [&](EvalRun& run, std::uint64_t seed) {
        return table1_rows(run, config, seed, /*cohort_split=*/true);
    });
}

ExperimentReport run_curve(const RunConfig& config) {
    return over_seeds(config, false, [&](EvalRun& run, std::uint64_t seed) {
        return curve_rows(run, config, seed, Source::TwoTower, kDefaultCurveKs);
    });
}

ExperimentReport run_overlap(const RunConfig& config) {
    return over_seeds(config, true, [&](EvalRun& run, std::uint64_t seed) {
        return overlap_rows(run, config, seed);
    });
}

std::string render_traces_csv(std::span<const ServeTrace> traces) {
    std::ostringstream out;
    out << "user,t,retrieved_dnn,retrieved_item_knn,retrieved_content_knn,retrieved_rule_based,"
           "preranked,radar_hit,radar_count,radar_staleness,merged,dedup_removed,"
           "radar_unique_fraction,slate_size\n";
    for (const auto& tr : traces) {
        out << tr.user_id << ',' << tr.t << ','
            << tr.retrieved_counts[static_cast<int>(Source::TwoTower)] << ','
            << tr.retrieved_counts[static_cast<int>(Source::ItemKNN)] << ','
            << tr.retrieved_counts[static_cast<int>(Source::ContentKNN)] << ','
            << tr.retrieved_counts[static_cast<int>(Source::RuleBased)] << ','
            << tr.preranked_count << ',' << (tr.radar_hit ? 1 : 0) << ',' << tr.radar_count << ','
            << tr.radar_staleness << ',' << tr.merged_count << ',' << tr.dedup_removed << ',';
        if (tr.radar_unique_fraction)
            out << format_fixed6(*tr.radar_unique_fraction);
        else
            out << '-';
        out << ',' << tr.slate.entries.size() << '\n';
    }
    return out.str();
}

std::string render_jobs_csv(std::span<const RefreshJob> jobs) {
    std::ostringstream out;
    out << "user_id,due_since,executed_at,pool_size,compute_units\n";
    for (const auto& job : jobs) {
        out << job.user_id << ',' << job.due_since << ',';
        if (job.executed_at)
            out << *job.executed_at;
        else
            out << '-';
        out << ',' << job.pool_size << ',' << job.compute_units << '\n';
    }
    return out.str();
}

std::string render_stats_csv(const StoreStats& stats) {
    std::ostringstream out;
    out << "metric,value\n";
    out << "n_entries," << stats.n_entries << '\n';
    out << "hit_count," << stats.hit_count << '\n';
    out << "miss_count," << stats.miss_count << '\n';
    for (std::size_t b = 0; b < kNumStalenessBuckets; ++b)
        out << staleness_bucket_label(b) << ',' << stats.staleness_histogram[b] << '\n';
    return out.str();
}

}  // namespace radar
