#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hawkesmm/branching.hpp"
#include "hawkesmm/config.hpp"
#include "hawkesmm/hjb.hpp"
#include "hawkesmm/kernels.hpp"
#include "hawkesmm/marketsim.hpp"

namespace hawkesmm::pipeline {

struct RunContext {
    std::filesystem::path out_dir;
    unsigned threads = 0;
};

/// Writes resolved_config.json into the output directory.
void write_resolved_config(const ExperimentConfig& cfg, const RunContext& ctx);

// kernel-approx: kernel_n<n>.json, approx_report.csv, approx_details.csv
struct KernelApproxResult {
    std::vector<ApproxReport> reports;
    std::vector<double> k0_errors;
};
KernelApproxResult kernel_approx(const ExperimentConfig& cfg, const RunContext& ctx);

// solve: value.bin, value.csv, feedback.csv, solve_summary.json
struct SolveResult {
    hjb::Solution solution;
};
SolveResult solve(const ExperimentConfig& cfg, const RunContext& ctx);

// simulate: events.csv (episode 0), episodes.csv, value_estimate.csv, price.csv
struct SimulateResult {
    marketsim::StrategyValueEstimate estimate;
    EventLog first_log;
};
SimulateResult simulate(const ExperimentConfig& cfg, const RunContext& ctx);

// compare: fig1_values.csv, fig2_diff.csv, fig3_diff.csv, comparison.csv, ordering.csv
struct StrategyOutcome {
    std::string name;
    std::vector<double> pde;                                 // per MC probe
    std::vector<marketsim::StrategyValueEstimate> mc;       // per MC probe
};
struct OrderingRow {
    std::size_t probe = 0;
    std::string better, worse;
    double pde_gap = 0.0;
    double pde_relative_gain = 0.0;  // gap / |worse|
    marketsim::PairedDifference mc_gap;
    double mc_relative_gain = 0.0;
};
struct CompareResult {
    std::vector<StrategyOutcome> strategies;  // belief 0, belief 1, optimal
    std::vector<OrderingRow> ordering;
    double min_diff_fig2 = 0.0;
    double min_diff_fig3 = 0.0;
};
CompareResult compare(const ExperimentConfig& cfg, const RunContext& ctx);

// branching: branching_estimates.csv or branching_n<n>.csv + fig4_convergence.csv
struct ConvergenceRow {
    std::size_t n = 0;
    std::size_t probe = 0;
    double u_n = 0.0;
    double stderr_ = 0.0;
    double u_ref = 0.0;
    double log_rel_diff = 0.0;
};
struct BranchingResult {
    std::vector<branching::Estimate> estimates;  // per probe (plain mode) or per (n, probe)
    std::vector<ConvergenceRow> convergence;
    std::vector<double> slopes;  // OLS slope of log_rel_diff on n, per probe
    double kink_fraction = 0.0;
};
BranchingResult branching_run(const ExperimentConfig& cfg, const RunContext& ctx);

/// Ordinary least-squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hawkesmm::pipeline
