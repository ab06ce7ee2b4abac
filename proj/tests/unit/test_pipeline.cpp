#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "hawkesmm/pipeline.hpp"
#include "hawkesmm/serialization.hpp"
#include "tempdir.hpp"

using namespace hawkesmm;
using namespace hawkesmm::pipeline;

namespace {

std::string first_line(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

Json small_compare() {
    return Json::parse(R"({
      "seed": 5,
      "intensity": {"mu": 0.1, "kernel": {"type": "expsum", "weights": [0.45, 0.45], "rates": [1.0, 1.0]}},
      "grid": {"i_min": -6, "i_max": 6, "c_max": 3.6, "m_c": 5, "T": 0.5},
      "comparison": {
        "models": [
          {"name": "a", "mu": 1.0, "kernel": {"type": "expsum", "weights": [], "rates": []},
           "grid": {"i_min": -6, "i_max": 6, "T": 0.5}},
          {"name": "b", "mu": 1.0, "kernel": {"type": "expsum", "weights": [], "rates": []},
           "grid": {"i_min": -6, "i_max": 6, "T": 0.5}}
        ],
        "probe": {"inventory": -4, "c_ask": [0, 2], "c_bid": [0, 2]},
        "slice": {"c_ask": [1, 0], "c_bid": [1, 0], "component": 2},
        "n_episodes": 200
      }
    })");
}

}  // namespace

TEST(OlsSlope, KnownLine) {
    EXPECT_NEAR(ols_slope({1, 2, 3, 4}, {3, 5, 7, 9}), 2.0, 1e-14);
    EXPECT_NEAR(ols_slope({8, 16, 32, 64}, {-1, -1.5, -2, -3}), -63.0 / 1840.0, 1e-15);
    EXPECT_THROW(ols_slope({1}, {1}), std::invalid_argument);
}

TEST(Pipeline, KernelApproxExpSumPassthrough) {
    TempDir dir;
    const auto cfg = ExperimentConfig::from_json(Json::parse(R"({"kernel": {"target":
        {"type": "expsum", "weights": [0.45, 0.45], "rates": [1.0, 1.0]}}})"));
    const auto res = kernel_approx(cfg, {dir.path(), 1});
    ASSERT_EQ(res.reports.size(), 1u);
    EXPECT_EQ(res.reports[0].sup_err, 0.0);
    EXPECT_EQ(first_line(dir / "approx_report.csv"), "n,sup_err,l1_err");
    EXPECT_EQ(std::get<ExpSumKernel>(kernel_from_json(read_json(dir / "kernel.json"))),
              ExpSumKernel({0.45, 0.45}, {1.0, 1.0}));
    EXPECT_TRUE(std::filesystem::exists(dir / "resolved_config.json"));
}

TEST(Pipeline, KernelApproxPowerLaw) {
    TempDir dir;
    const auto cfg = ExperimentConfig::from_json(Json::parse(R"({"kernel": {"n": [16, 64], "target":
        {"type": "powerlaw", "lam": 0.1, "alpha": 0.7, "beta": 0.4, "eps": 0.01}}})"));
    const auto res = kernel_approx(cfg, {dir.path(), 1});
    ASSERT_EQ(res.reports.size(), 2u);
    EXPECT_LT(res.reports[1].sup_err, res.reports[0].sup_err);
    for (const auto& r : res.reports) EXPECT_LE(r.l1_err, 1e-10);
    EXPECT_TRUE(std::filesystem::exists(dir / "kernel_n16.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "kernel_n64.json"));
    EXPECT_EQ(first_line(dir / "approx_details.csv"), "n,terms,k0_err,clamped_weights");
}

TEST(Pipeline, SolveWritesArtifacts) {
    TempDir dir;
    const auto cfg = ExperimentConfig::from_json(Json::parse(R"({
      "intensity": {"kernel": {"type": "expsum", "weights": [0.9], "rates": [1.0]}},
      "grid": {"i_min": -4, "i_max": 4, "c_max": 3.6, "m_c": 5, "snapshot_stride": 3}})"));
    const auto res = solve(cfg, {dir.path(), 1});
    for (const char* f : {"value.bin", "value.csv", "feedback.csv", "solve_summary.json", "resolved_config.json"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    std::ifstream in(dir / "value.bin", std::ios::binary);
    const auto back = hjb::ValueGrid::read_binary(in);
    EXPECT_EQ(back.steps(), res.solution.values.steps());
    EXPECT_EQ(back.slice(0), res.solution.values.slice(0));
    EXPECT_EQ(first_line(dir / "feedback.csv"), "t,i,c_a1,c_b1,ask,bid");
}

TEST(Pipeline, SimulateWritesArtifacts) {
    TempDir dir;
    const auto cfg = ExperimentConfig::from_json(Json::parse(R"({
      "seed": 4,
      "intensity": {"kernel": {"type": "expsum", "weights": [0.9], "rates": [1.0]}},
      "simulation": {"T": 1.0, "n_episodes": 50, "initial": {"inventory": 2},
                     "control": {"type": "constant", "ask": 0.05, "bid": 0.05},
                     "price": {"sigma": 0.01, "p0": 100, "dt": 0.1}}})"));
    const auto res = simulate(cfg, {dir.path(), 1});
    EXPECT_EQ(res.estimate.n_episodes, 50u);
    EXPECT_EQ(first_line(dir / "events.csv"), "time,side,spread");
    EXPECT_EQ(first_line(dir / "episodes.csv"), "episode,seed,fills_ask,fills_bid,spread_revenue,penalty,total");
    EXPECT_EQ(first_line(dir / "value_estimate.csv"), "strategy,mean,stderr,n_episodes");
    EXPECT_EQ(first_line(dir / "price.csv"), "t,price");
}

TEST(Pipeline, SimulateOptimalNeedsMatchingHorizon) {
    TempDir dir;
    const auto cfg = ExperimentConfig::from_json(Json::parse(R"({
      "intensity": {"kernel": {"type": "expsum", "weights": [0.9], "rates": [1.0]}},
      "grid": {"i_min": -4, "i_max": 4, "c_max": 3.6, "m_c": 5, "T": 1.0},
      "simulation": {"T": 2.0, "n_episodes": 10, "control": {"type": "optimal"}}})"));
    EXPECT_THROW(simulate(cfg, {dir.path(), 1}), ConfigError);
}

TEST(Pipeline, CompareIdenticalBeliefsHaveZeroGap) {
    TempDir dir;
    const auto cfg = ExperimentConfig::from_json(small_compare());
    const auto res = compare(cfg, {dir.path(), 1});
    ASSERT_EQ(res.ordering.size(), 2u);
    const auto& same = res.ordering[1];
    EXPECT_EQ(same.better, "b");
    EXPECT_EQ(same.worse, "a");
    EXPECT_EQ(same.pde_gap, 0.0);
    EXPECT_EQ(same.mc_gap.mean, 0.0);
    EXPECT_GE(res.min_diff_fig2, -1e-2);
    EXPECT_GE(res.min_diff_fig3, -1e-2);
    EXPECT_EQ(first_line(dir / "fig1_values.csv"), "t,V0,V1,V2");
    EXPECT_EQ(first_line(dir / "fig2_diff.csv"), "i,c_b2,diff");
    EXPECT_EQ(first_line(dir / "fig3_diff.csv"), "i,c_b2,diff");
    EXPECT_EQ(first_line(dir / "comparison.csv"), "strategy,probe,pde_value,mc_mean,mc_stderr,n_episodes");
}

TEST(Pipeline, CompareRejectsMismatchedSlice) {
    TempDir dir;
    Json j = small_compare();
    j["comparison"]["slice"]["component"] = 3;
    EXPECT_THROW(compare(ExperimentConfig::from_json(j), {dir.path(), 1}), ConfigError);
}

TEST(Pipeline, BranchingPlainMode) {
    TempDir dir;
    const auto cfg = ExperimentConfig::from_json(Json::parse(R"({
      "seed": 2,
      "intensity": {"kernel": {"type": "expsum", "weights": [0.9], "rates": [1.0]}},
      "grid": {"i_min": -6, "i_max": 6, "c_max": 5.4, "m_c": 7},
      "particle": {"n_trees": 500, "probes": [{"inventory": 0}, {"inventory": -2, "c_ask": [1.0]}]}})"));
    const auto res = branching_run(cfg, {dir.path(), 1});
    ASSERT_EQ(res.estimates.size(), 2u);
    EXPECT_EQ(first_line(dir / "branching_estimates.csv"), "t,i,c_a1,c_b1,mean,stderr,n_trees,mean_tree_size");
    EXPECT_TRUE(std::filesystem::exists(dir / "branching_summary.json"));
}

TEST(Pipeline, BranchingConvergenceMode) {
    TempDir dir;
    const auto cfg = ExperimentConfig::from_json(Json::parse(R"({
      "seed": 2,
      "kernel": {"target": {"type": "powerlaw", "lam": 0.1, "alpha": 0.7, "beta": 0.4, "eps": 0.01}},
      "intensity": {"mu": 0.1},
      "particle": {"n_trees": 300, "n_values": [8, 16], "reference_n": 32,
                   "expansion": {"proxy": true, "grid": {"i_min": -6, "i_max": 6, "c_max": 30, "m_c": 7}},
                   "probes": [{"inventory": 1, "theta_ask": 2}]}})"));
    const auto res = branching_run(cfg, {dir.path(), 1});
    EXPECT_EQ(res.convergence.size(), 2u);
    ASSERT_EQ(res.slopes.size(), 1u);
    EXPECT_TRUE(std::isfinite(res.slopes[0]));
    EXPECT_EQ(first_line(dir / "fig4_convergence.csv"), "n,probe,u_n,stderr,u_ref,log_rel_diff");
    for (const char* f : {"branching_n8.csv", "branching_n16.csv", "branching_n32.csv"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
}
