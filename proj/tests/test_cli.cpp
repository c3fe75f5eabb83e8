#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

const std::string kCli = RADAR_CLI_PATH;

int run_cli(const std::string& args, const fs::path& log) {
    std::string cmd = kCli + " " + args + " >" + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

fs::path scratch_dir() {
    fs::path dir = fs::temp_directory_path() / "radar_cli_tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// A config small enough that every CLI path runs in well under a second.
fs::path write_tiny_config(const fs::path& dir, bool radar_enabled = true) {
    fs::path p = dir / (radar_enabled ? "tiny.json" : "tiny_noradar.json");
    std::ofstream out(p);
    out << R"({
  "world": {"n_users": 40, "n_items_initial": 400, "items_per_day": 20,
             "latent_dim": 16, "horizon_days": 2, "seed": 11},
  "scorers": [{"kind": "two_tower", "embedding_rank": 8}],
  "retrieval": {"k_per_source": 20},
  "pipeline": {"pool_multiplier": 3, "store_k": 20},
  "funnel": {"prerank_keep": 25, "slate_size": 10, "radar_enabled": )"
        << (radar_enabled ? "true" : "false") << R"(},
  "eval": {"k_eval": 20, "n_eval_per_user": 5, "eval_day": 1, "seeds": [1, 2]}
})";
    return p;
}

}  // namespace

TEST_CASE("cli: gen writes byte-identical snapshots on identical configs") {
    fs::path dir = scratch_dir();
    fs::path cfg = write_tiny_config(dir);
    CHECK(run_cli("gen --config " + cfg.string() + " --out " + (dir / "g1").string(),
                  dir / "gen1.log") == 0);
    CHECK(run_cli("gen --config " + cfg.string() + " --out " + (dir / "g2").string(),
                  dir / "gen2.log") == 0);
    std::string s1 = read_file(dir / "g1" / "world.snapshot");
    std::string s2 = read_file(dir / "g2" / "world.snapshot");
    CHECK(!s1.empty());
    CHECK(s1 == s2);
    CHECK(s1.rfind("radar-world 1\n", 0) == 0);
}

TEST_CASE("cli: run produces the manifest and byte-identical reruns") {
    fs::path dir = scratch_dir();
    fs::path cfg = write_tiny_config(dir);
    CHECK(run_cli("run --config " + cfg.string() + " --out " + (dir / "r1").string(),
                  dir / "run1.log") == 0);
    CHECK(run_cli("run --config " + cfg.string() + " --out " + (dir / "r2").string(),
                  dir / "run2.log") == 0);
    for (const char* name : {"traces.csv", "jobs.csv", "stats.csv", "store.kv"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(dir / "r1" / name));
        CHECK(read_file(dir / "r1" / name) == read_file(dir / "r2" / name));
        CHECK(!read_file(dir / "r1" / name).empty());
    }
}

TEST_CASE("cli: disabling radar yields traces with zero radar hits") {
    fs::path dir = scratch_dir();
    fs::path cfg = write_tiny_config(dir, /*radar_enabled=*/false);
    CHECK(run_cli("run --config " + cfg.string() + " --out " + (dir / "nr").string(),
                  dir / "run.log") == 0);
    std::string traces = read_file(dir / "nr" / "traces.csv");
    std::istringstream in(traces);
    std::string line;
    std::getline(in, line);  // header
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        // radar_hit is column 8 (1-based), radar_count column 9
        std::size_t pos = 0;
        for (int c = 0; c < 7; ++c) pos = line.find(',', pos) + 1;
        CHECK(line.substr(pos, 2) == "0,");
    }
    CHECK(rows > 0);
}

TEST_CASE("cli: table1 runs all seeds and writes report plus summary") {
    fs::path dir = scratch_dir();
    fs::path cfg = write_tiny_config(dir);
    CHECK(run_cli("table1 --config " + cfg.string() + " --out " + (dir / "t1").string(),
                  dir / "t1.log") == 0);
    std::string report = read_file(dir / "t1" / "table1.csv");
    CHECK(report.rfind("experiment,seed,cohort,source,config,k,recall,aux_name,aux_value\n", 0) ==
          0);
    // 4 source rows x 2 seeds
    CHECK(std::count(report.begin(), report.end(), '\n') == 1 + 4 * 2);
    for (const char* source : {"dnn", "item_knn", "content_knn", "radar"})
        CHECK(report.find(source) != std::string::npos);
    CHECK(!read_file(dir / "t1" / "table1_summary.csv").empty());

    // byte-identical on rerun
    CHECK(run_cli("table1 --config " + cfg.string() + " --out " + (dir / "t1b").string(),
                  dir / "t1b.log") == 0);
    CHECK(read_file(dir / "t1" / "table1.csv") == read_file(dir / "t1b" / "table1.csv"));
}

TEST_CASE("cli: seed flag narrows the seed list and format switches to jsonl") {
    fs::path dir = scratch_dir();
    fs::path cfg = write_tiny_config(dir);
    CHECK(run_cli("table2 --config " + cfg.string() + " --out " + (dir / "t2").string() +
                      " --seed 9 --format jsonl",
                  dir / "t2.log") == 0);
    std::string report = read_file(dir / "t2" / "table2.jsonl");
    CHECK(report.find("\"seed\":9") != std::string::npos);
    CHECK(report.find("\"seed\":1") == std::string::npos);
    CHECK(report.find("\"config\":\"YY\"") != std::string::npos);
}

TEST_CASE("cli: curve points are non-decreasing in k per seed") {
    fs::path dir = scratch_dir();
    fs::path cfg = write_tiny_config(dir);
    CHECK(run_cli("curve --config " + cfg.string() + " --out " + (dir / "cv").string() +
                      " --seed 1",
                  dir / "cv.log") == 0);
    std::string report = read_file(dir / "cv" / "curve.csv");
    std::istringstream in(report);
    std::string line;
    std::getline(in, line);
    double prev = -1.0;
    int rows = 0;
    while (std::getline(in, line)) {
        auto cols = [&] {
            std::vector<std::string> out;
            std::size_t start = 0;
            while (true) {
                std::size_t pos = line.find(',', start);
                out.push_back(line.substr(start, pos - start));
                if (pos == std::string::npos) break;
                start = pos + 1;
            }
            return out;
        }();
        double recall = std::stod(cols[6]);
        CHECK(recall >= prev);
        prev = recall;
        ++rows;
    }
    CHECK(rows == 6);  // default k ladder
}

TEST_CASE("cli: validation failures exit 1 with a diagnostic") {
    fs::path dir = scratch_dir();
    fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << R"({"world": {"latent_dim": 8}, "scorers": [{"kind": "two_tower", "embedding_rank": 16}]})";
    }
    CHECK(run_cli("gen --config " + bad.string() + " --out " + (dir / "x").string(),
                  dir / "bad.log") == 1);
    CHECK(read_file(dir / "bad.log").find("embedding_rank") != std::string::npos);

    CHECK(run_cli("gen --config " + (dir / "missing.json").string() + " --out " +
                      (dir / "x").string(),
                  dir / "missing.log") == 1);

    // unknown subcommand
    CHECK(run_cli("frobnicate", dir / "unknown.log") == 1);
    // help exits 0
    CHECK(run_cli("--help", dir / "help.log") == 0);
}
