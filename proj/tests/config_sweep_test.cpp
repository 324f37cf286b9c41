#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "vrstream/config.hpp"
#include "vrstream/sweep.hpp"

using namespace vrstream;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("vrstream_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(ParseConfigTest, EmptyDocumentGivesDefaults) {
    const auto cfg = parse_config("");
    const SimConfig sim;
    const SweepSpec sweep;
    EXPECT_EQ(serialize_config(cfg.sim, cfg.sweep), serialize_config(sim, sweep));
    EXPECT_EQ(cfg.sim.chunks, 1000);
    EXPECT_EQ(cfg.sweep.seeds, 20);
    EXPECT_EQ(cfg.sweep.betas.size(), 5u);
}

TEST(ParseConfigTest, CommentsAndWhitespace) {
    const auto cfg = parse_config("# header\n\n  chunks = 50   # short run\nlambda=3\r\navg_snr_db = 20\n");
    EXPECT_EQ(cfg.sim.chunks, 50);
    EXPECT_EQ(cfg.sim.lambda, 3.0);
    EXPECT_NEAR(cfg.sim.link.avg_snr, 100.0, 1e-9);
}

TEST(ParseConfigTest, OutOfRangeNamesLineAndKey) {
    try {
        parse_config("chunks = 10\nbeta = 1.5\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.key(), "beta");
        EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
    }
}

TEST(ParseConfigTest, RejectsBadDocuments) {
    EXPECT_THROW(parse_config("colour = blue\n"), ConfigError);
    EXPECT_THROW(parse_config("chunks 10\n"), ConfigError);
    EXPECT_THROW(parse_config("chunks = 10\nchunks = 20\n"), ConfigError);
    EXPECT_THROW(parse_config("beta = 0.5\nbetas = 0.6\n"), ConfigError);
    EXPECT_THROW(parse_config("avg_snr = 10\navg_snr_db = 10\n"), ConfigError);
    EXPECT_THROW(parse_config("chunks = ten\n"), ConfigError);
    EXPECT_THROW(parse_config("lambda = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("ladder = 1, 3, 2\n"), ConfigError);
    EXPECT_THROW(parse_config("policies = main, oracle\n"), ConfigError);
    EXPECT_THROW(parse_config("fading_period = 3\n"), ConfigError);
    EXPECT_THROW(parse_config("seeds = 0\n"), ConfigError);
}

TEST(ParseConfigTest, PolicyListRoundTrips) {
    const auto cfg = parse_config("policies = main, greedy\n");
    ASSERT_EQ(cfg.sweep.policies.size(), 2u);
    EXPECT_EQ(cfg.sweep.policies[0], Policy::main);
    EXPECT_EQ(cfg.sweep.policies[1], Policy::greedy);
    const auto again = parse_config(serialize_config(cfg.sim, cfg.sweep));
    EXPECT_EQ(again.sweep.policies, cfg.sweep.policies);
}

TEST(ParseConfigTest, SerializeParseRoundTrip) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        SimConfig sim;
        SweepSpec sweep;
        sim.chunks = 2 + static_cast<int>(u(rng) * 5000);
        sim.lambda = 0.01 + 50 * u(rng);
        sim.quality.b = 0.05 + 0.9 * u(rng);
        sim.link.avg_snr = std::pow(10.0, 3 * u(rng));
        sim.link.target_ber = std::pow(10.0, -1 - 6 * u(rng));
        sim.ladder = RateLadder({0.5 + u(rng), 2.0 + u(rng), 3.5 + u(rng)});
        sim.motion = trial % 2 ? ViewportMotion::iid : ViewportMotion::lazy_walk;
        sim.freeze_weights = trial % 3 == 0;
        sim.rounding = trial % 5 == 0 ? RoundingRule::skip_unaffordable : RoundingRule::strict_break;
        sweep.betas = {u(rng), u(rng)};
        sweep.seeds = 1 + trial;
        sweep.base_seed = (static_cast<std::uint64_t>(trial) << 40) + 7;
        sweep.trace = trial % 2 == 0;
        const std::string text = serialize_config(sim, sweep);
        const auto parsed = parse_config(text);
        EXPECT_EQ(serialize_config(parsed.sim, parsed.sweep), text);
        EXPECT_EQ(parsed.sim.lambda, sim.lambda);
        EXPECT_EQ(parsed.sim.link.avg_snr, sim.link.avg_snr);
        EXPECT_EQ(parsed.sweep.base_seed, sweep.base_seed);
    }
}

class SweepTest : public ::testing::Test {
protected:
    static SweepSpec small_spec(const fs::path& dir) {
        SweepSpec spec;
        spec.betas = {0.9, 0.5, 0.8};
        spec.seeds = 3;
        spec.output_dir = dir.string();
        return spec;
    }
    static SimConfig small_sim() {
        SimConfig sim;
        sim.chunks = 40;
        return sim;
    }
};

TEST_F(SweepTest, WritesTablesAndIsReproducible) {
    const auto dir = scratch_dir("sweep");
    const auto spec = small_spec(dir);
    const auto result = run_sweep(spec, small_sim(), 2);
    for (const char* name : {"qoe_vs_beta.csv", "fov_bitrate_vs_beta.csv", "fov_rate_hist.csv", "all_rate_hist.csv",
                             "summary.txt"}) {
        EXPECT_TRUE(fs::exists(dir / name)) << name;
    }
    EXPECT_FALSE(fs::exists(dir / "per_chunk.csv"));
    EXPECT_EQ(result.summaries.size(), 12u);

    std::map<std::string, std::string> first;
    for (const auto& e : fs::directory_iterator(dir)) first[e.path().filename().string()] = slurp(e.path());

    const auto rerun_dir = scratch_dir("sweep_rerun");
    auto rerun_spec = spec;
    rerun_spec.output_dir = rerun_dir.string();
    run_sweep(rerun_spec, small_sim(), 1);
    for (const auto& [name, body] : first) EXPECT_EQ(slurp(rerun_dir / name), body) << name;

    // Rows sorted by policy name, then beta.
    const auto qoe = csv_rows(first["qoe_vs_beta.csv"]);
    ASSERT_EQ(qoe.size(), 12u);
    EXPECT_EQ(qoe.front()[0], "baseline");
    EXPECT_EQ(qoe.front()[1], "0.5");
    EXPECT_EQ(qoe.back()[0], "main-qpsk");
    EXPECT_EQ(qoe.back()[1], "0.9");

    fs::remove_all(dir);
    fs::remove_all(rerun_dir);
}

TEST_F(SweepTest, HistogramRowsSumToOne) {
    const auto dir = scratch_dir("hist");
    run_sweep(small_spec(dir), small_sim(), 1);
    for (const char* name : {"fov_rate_hist.csv", "all_rate_hist.csv"}) {
        std::map<std::pair<std::string, std::string>, double> sums;
        bool saw_08 = false;
        for (const auto& row : csv_rows(slurp(dir / name))) {
            ASSERT_EQ(row.size(), 5u);
            sums[{row[0], row[1]}] += std::stod(row[3]);
            saw_08 |= row[1] == "0.8";
        }
        EXPECT_TRUE(saw_08);
        EXPECT_EQ(sums.size(), 12u);
        // Shares are printed with six significant digits.
        for (const auto& [key, s] : sums) EXPECT_NEAR(s, 1.0, 5e-6) << key.first << ' ' << key.second;
    }
    fs::remove_all(dir);
}

TEST_F(SweepTest, InMemoryHistogramsSumToOne) {
    const auto r = run_sweep_runs(small_spec(scratch_dir("unused")), small_sim(), 1);
    for (const auto& s : r.summaries) {
        double fov = 0.0, all = 0.0;
        for (const auto& h : s.fov_hist) fov += h.mean;
        for (const auto& h : s.all_hist) all += h.mean;
        EXPECT_NEAR(fov, 1.0, 1e-9);
        EXPECT_NEAR(all, 1.0, 1e-9);
    }
}

TEST_F(SweepTest, TraceWritesPerChunkRows) {
    const auto dir = scratch_dir("trace");
    auto spec = small_spec(dir);
    spec.trace = true;
    spec.betas = {0.7};
    spec.policies = {Policy::greedy};
    spec.seeds = 2;
    run_sweep(spec, small_sim(), 1);
    EXPECT_EQ(csv_rows(slurp(dir / "per_chunk.csv")).size(), 80u);
    fs::remove_all(dir);
}

TEST_F(SweepTest, UnwritableDirectoryFails) {
    const auto blocker = scratch_dir("blocker");
    { std::ofstream(blocker) << "x"; }
    auto spec = small_spec(blocker / "sub");
    spec.seeds = 1;
    spec.betas = {0.5};
    try {
        run_sweep(spec, small_sim(), 1);
        FAIL() << "expected runtime_error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("sub"), std::string::npos);
    }
    fs::remove_all(blocker);
}
