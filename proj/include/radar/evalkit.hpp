#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "radar/funnel.hpp"
#include "radar/ids.hpp"
#include "radar/pipeline.hpp"
#include "radar/run_config.hpp"
#include "radar/scorers.hpp"
#include "radar/store.hpp"
#include "radar/world.hpp"

namespace radar {

inline constexpr Hour kEvalHourOfDay = 12;

inline Hour eval_instant(const EvalPlan& plan) {
    return static_cast<Hour>(plan.eval_day) * 24 + kEvalHourOfDay;
}

// |top-k(retrieved) ∩ truth| / |truth|; nullopt (user skipped, never zero)
// when truth is empty.
std::optional<double> recall_at_k(const CandidateList& retrieved,
                                  const std::unordered_set<ItemId>& truth, std::uint32_t k);

CandidateList entry_to_candidates(const RadarEntry& entry);

struct ReportRow {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string cohort = "all";
    std::string source;
    std::string config;
    std::uint32_t k = 0;
    double recall = 0.0;
    std::string aux_name;
    double aux_value = 0.0;
};

// Canonical rows: sorted, 6-decimal floats, byte-stable output.
struct ExperimentReport {
    std::vector<ReportRow> rows;

    void canonicalize();
    void append(const ExperimentReport& other);
};

enum class ReportFormat { Csv, Jsonl };

std::string render_report(const ExperimentReport& report, ReportFormat format);
void emit_report(const ExperimentReport& report, const std::filesystem::path& path,
                 ReportFormat format);

// Per-group (experiment, cohort, source, config, k) mean and sample stddev of
// recall over seeds.
std::string render_summary_csv(const ExperimentReport& report);
void emit_summary(const ExperimentReport& report, const std::filesystem::path& path);

// One seed's prepared world: advanced to the eval instant (optionally with
// the refresh pipeline warming the store along the way), scorer tables built
// fresh at the eval instant, then per-user holdouts drawn. Holdouts are drawn
// strictly after tables and entries exist, so nothing the scorers see leaks
// from the evaluation sets.
struct EvalRun {
    World world;
    RadarStore store;
    std::vector<RefreshJob> jobs;
    ScorerContext ctx;
    Hour t_eval = 0;
    std::vector<std::vector<ItemId>> holdouts;             // per user, ascending ids
    std::vector<std::unordered_set<ItemId>> holdout_sets;  // same, as sets
};

EvalRun prepare_eval_run(const RunConfig& config, std::uint64_t seed, bool with_pipeline);

// Serves every user once at t; trace order is user order regardless of
// execution schedule.
std::vector<ServeTrace> serve_all_users(const World& world, const FunnelConfig& funnel,
                                        const ScorerContext& ctx, const ScorerSet& scorers,
                                        RadarStore& store, Hour t);

// Mean radar-unique fraction over traces with radar candidates, plus the
// 0%,10%,...,100% quantiles. nullopt when no trace had radar candidates.
struct OverlapSummary {
    double mean = 0.0;
    std::array<double, 11> deciles{};
    std::size_t n_traces = 0;
};
std::optional<OverlapSummary> overlap_metrics(std::span<const ServeTrace> traces);

// Single-seed row producers (compose these to share one EvalRun across
// experiments) and the all-seeds drivers behind the CLI.
ExperimentReport table1_rows(const EvalRun& run, const RunConfig& config, std::uint64_t seed,
                             bool cohort_split);
ExperimentReport table2_rows(const EvalRun& run, const RunConfig& config, std::uint64_t seed);
ExperimentReport curve_rows(const EvalRun& run, const RunConfig& config, std::uint64_t seed,
                            Source source, std::span<const std::uint32_t> ks);
ExperimentReport overlap_rows(EvalRun& run, const RunConfig& config, std::uint64_t seed);

ExperimentReport run_table1(const RunConfig& config);
ExperimentReport run_table2(const RunConfig& config);
ExperimentReport run_table3(const RunConfig& config);
ExperimentReport run_curve(const RunConfig& config);
ExperimentReport run_overlap(const RunConfig& config);

// Byte-stable writers for the simulation run artifacts.
std::string render_traces_csv(std::span<const ServeTrace> traces);
std::string render_jobs_csv(std::span<const RefreshJob> jobs);
std::string render_stats_csv(const StoreStats& stats);

inline constexpr std::array<std::uint32_t, 6> kDefaultCurveKs{10, 50, 100, 200, 500, 1000};

}  // namespace radar
