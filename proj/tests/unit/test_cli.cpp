#include <cstdlib>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "hawkesmm/hjb.hpp"
#include "hawkesmm/serialization.hpp"
#include "tempdir.hpp"

namespace {

int run_cli(const std::string& args, const std::filesystem::path& log) {
    const std::string cmd = std::string("\"") + HAWKESMM_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path write_config(const TempDir& dir, const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p;
}

const char* kSmallSolve = R"({
  "intensity": {"mu": 0.1, "kernel": {"type": "expsum", "weights": [0.45, 0.45], "rates": [1.0, 1.0]}},
  "grid": {"i_min": -5, "i_max": 5, "c_max": 3.6, "m_c": 5, "T": 0.5, "snapshot_stride": 2}
})";

}  // namespace

TEST(Cli, UnknownSubcommandIsConfigError) {
    TempDir dir;
    EXPECT_EQ(run_cli("frobnicate", dir / "log.txt"), 2);
}

TEST(Cli, MissingConfigFlagIsConfigError) {
    TempDir dir;
    EXPECT_EQ(run_cli("solve", dir / "log.txt"), 2);
}

TEST(Cli, InvalidPowerLawIsConfigError) {
    TempDir dir;
    const auto cfg = write_config(dir, "bad.json", R"({"kernel": {"target":
        {"type": "powerlaw", "lam": 0.1, "alpha": 0.7, "beta": 1.4, "eps": 0.01}}})");
    EXPECT_EQ(run_cli("kernel-approx --config \"" + cfg.string() + "\" --out \"" + (dir / "o").string() + "\"",
                      dir / "log.txt"),
              2);
}

TEST(Cli, MissingKernelFileIsIoError) {
    TempDir dir;
    const auto cfg = write_config(dir, "cfg.json", R"({"intensity": {"kernel_file": "nowhere.json"},
        "grid": {"i_min": -2, "i_max": 2, "c_max": 1, "m_c": 3}})");
    EXPECT_EQ(run_cli("solve --config \"" + cfg.string() + "\" --out \"" + (dir / "o").string() + "\"",
                      dir / "log.txt"),
              3);
}

TEST(Cli, MissingConfigFileIsIoError) {
    TempDir dir;
    EXPECT_EQ(run_cli("solve --config \"" + (dir / "absent.json").string() + "\"", dir / "log.txt"), 3);
}

TEST(Cli, KernelApproxPassthrough) {
    TempDir dir;
    const auto cfg = write_config(dir, "cfg.json", R"({"kernel": {"target":
        {"type": "expsum", "weights": [0.45, 0.45], "rates": [1.0, 1.0]}}})");
    const auto out = dir / "o";
    ASSERT_EQ(run_cli("kernel-approx --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"", dir / "log.txt"),
              0);
    std::ifstream in(out / "approx_report.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "n,sup_err,l1_err");
    EXPECT_EQ(row.substr(0, row.find(',')), "2");
    EXPECT_EQ(std::stod(row.substr(row.find(',') + 1)), 0.0);
}

TEST(Cli, SolveProducesSymmetricValues) {
    TempDir dir;
    const auto cfg = write_config(dir, "cfg.json", kSmallSolve);
    const auto out = dir / "o";
    ASSERT_EQ(run_cli("solve --config \"" + cfg.string() + "\" --out \"" + out.string() + "\" --threads 2",
                      dir / "log.txt"),
              0);
    for (const char* f : {"value.bin", "value.csv", "feedback.csv", "solve_summary.json", "resolved_config.json"}) {
        EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
    }
    std::ifstream bin(out / "value.bin", std::ios::binary);
    const auto v = hawkesmm::hjb::ValueGrid::read_binary(bin);
    const double T = v.time_of_step(v.steps().back());
    EXPECT_NEAR(T, 0.5, 1e-12);
    const auto terminal = hawkesmm::MarketState{3, {0.9, 0.0}, {0.0, 1.8}, 0.0};
    EXPECT_EQ(v.value_at(T, terminal), 0.0);
    for (int i : {0, 2, 4}) {
        const hawkesmm::MarketState a{i, {0.9, 1.8}, {0.0, 2.7}, 0.0};
        const hawkesmm::MarketState b{-i, {0.0, 2.7}, {0.9, 1.8}, 0.0};
        EXPECT_NEAR(v.value_at(0.0, a), v.value_at(0.0, b), 1e-10) << i;
    }
}

TEST(Cli, SeedOverrideChangesSimulation) {
    TempDir dir;
    const auto cfg = write_config(dir, "cfg.json", R"({"seed": 1,
      "intensity": {"kernel": {"type": "expsum", "weights": [0.9], "rates": [1.0]}},
      "simulation": {"T": 1.0, "n_episodes": 20, "control": {"type": "constant", "ask": 0.0, "bid": 0.0}}})");
    auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    ASSERT_EQ(run_cli("simulate --config \"" + cfg.string() + "\" --out \"" + (dir / "a").string() + "\"", dir / "l"), 0);
    ASSERT_EQ(run_cli("simulate --config \"" + cfg.string() + "\" --out \"" + (dir / "b").string() + "\"", dir / "l"), 0);
    ASSERT_EQ(run_cli("simulate --config \"" + cfg.string() + "\" --seed 2 --out \"" + (dir / "c").string() + "\"",
                      dir / "l"),
              0);
    EXPECT_EQ(read(dir / "a" / "episodes.csv"), read(dir / "b" / "episodes.csv"));
    EXPECT_NE(read(dir / "a" / "episodes.csv"), read(dir / "c" / "episodes.csv"));
}
