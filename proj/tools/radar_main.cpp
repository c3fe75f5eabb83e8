#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "radar/config.hpp"
#include "radar/errors.hpp"
#include "radar/evalkit.hpp"
#include "radar/kernels.hpp"
#include "radar/parallel.hpp"

namespace fs = std::filesystem;
using namespace radar;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
};

RunConfig resolve_config(const CliOptions& opt) {
    RunConfig cfg = opt.config_path.empty() ? default_run_config() : load_run_config(opt.config_path);
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    if (opt.seed) {
        cfg.world.seed = *opt.seed;
        cfg.eval.seeds = {*opt.seed};
    }
    validate_run_config(cfg);
    return cfg;
}

ReportFormat resolve_format(const CliOptions& opt) {
    if (opt.format == "csv") return ReportFormat::Csv;
    if (opt.format == "jsonl") return ReportFormat::Jsonl;
    throw ValidationError("--format: expected csv or jsonl");
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimError("cannot open output path: " + path.string());
    out << bytes;
}

void cmd_gen(const CliOptions& opt) {
    RunConfig cfg = resolve_config(opt);
    fs::create_directories(cfg.output_dir);
    World world = generate_world(cfg.world);
    write_snapshot(world, fs::path(cfg.output_dir) / "world.snapshot");
    std::cout << "wrote " << (fs::path(cfg.output_dir) / "world.snapshot").string() << " ("
              << world.users.size() << " users, " << world.n_items() << " items)\n";
}

void cmd_run(const CliOptions& opt) {
    RunConfig cfg = resolve_config(opt);
    fs::create_directories(cfg.output_dir);

    World world = generate_world(cfg.world);
    RadarStore store(cfg.pipeline.store_k);
    std::vector<ServeTrace> traces;

    auto hook = [&](const World& w, const ScorerContext& ctx, Hour h,
                    std::span<const SessionEvent> events) {
        if (events.empty()) return;
        std::vector<ServeTrace> hour_traces(events.size());
        parallel_for(events.size(), [&](std::size_t i) {
            hour_traces[i] =
                serve(w, cfg.funnel, ctx, cfg.scorers, store, events[i].user_id, h);
        });
        for (auto& t : hour_traces) traces.push_back(std::move(t));
    };

    const Hour t_end = static_cast<Hour>(cfg.world.horizon_days) * 24;
    auto jobs = run_pipeline(world, cfg.pipeline, cfg.retrieval, cfg.scorers, store, t_end, hook);

    const fs::path out(cfg.output_dir);
    write_file(out / "traces.csv", render_traces_csv(traces));
    write_file(out / "jobs.csv", render_jobs_csv(jobs));
    write_file(out / "stats.csv", render_stats_csv(store.stats()));
    store.save(out / "store.kv");
    std::cout << "simulated " << cfg.world.horizon_days << " days: " << traces.size()
              << " sessions served, " << jobs.size() << " refreshes executed ("
              << kernels::backend_name() << " kernels)\n";
}

void cmd_experiment(const CliOptions& opt, const std::string& which) {
    RunConfig cfg = resolve_config(opt);
    ReportFormat format = resolve_format(opt);
    fs::create_directories(cfg.output_dir);

    ExperimentReport report;
    if (which == "table1")
        report = run_table1(cfg);
    else if (which == "table2")
        report = run_table2(cfg);
    else if (which == "table3")
        report = run_table3(cfg);
    else if (which == "curve")
        report = run_curve(cfg);
    else if (which == "overlap")
        report = run_overlap(cfg);
    else
        throw ValidationError("unknown experiment name: " + which);

    const fs::path out(cfg.output_dir);
    const std::string ext = format == ReportFormat::Csv ? ".csv" : ".jsonl";
    emit_report(report, out / (which + ext), format);
    emit_summary(report, out / (which + "_summary.csv"));
    std::cout << "wrote " << (out / (which + ext)).string() << " and "
              << (out / (which + "_summary.csv")).string() << " (" << report.rows.size()
              << " rows, " << cfg.eval.seeds.size() << " seeds)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radar: offline-refreshed candidate store simulator and experiment kit"};
    app.require_subcommand(1);

    CliOptions opt;
    std::string experiment;
    auto add_common = [&](CLI::App* cmd, bool with_format) {
        cmd->add_option("--config", opt.config_path, "experiment config file (JSON)");
        cmd->add_option("--out", opt.out_dir, "output directory (overrides config)");
        cmd->add_option("--seed", opt.seed, "single seed overriding the config seed list");
        if (with_format)
            cmd->add_option("--format", opt.format, "report format: csv or jsonl")
                ->check(CLI::IsMember({"csv", "jsonl"}));
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a world snapshot");
    add_common(gen, false);
    CLI::App* run = app.add_subcommand("run", "simulate the full pipeline and serving loop");
    add_common(run, false);
    for (const char* name : {"table1", "table2", "table3", "curve", "overlap"}) {
        CLI::App* cmd = app.add_subcommand(
            name, std::string("run the ") + name + " experiment over all seeds");
        add_common(cmd, true);
        cmd->callback([&experiment, name] { experiment = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed())
            cmd_gen(opt);
        else if (run->parsed())
            cmd_run(opt);
        else
            cmd_experiment(opt, experiment);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 2;
    }
}
