#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hawkesmm/hawkes.hpp"
#include "hawkesmm/hjb.hpp"
#include "hawkesmm/kernels.hpp"
#include "hawkesmm/serialization.hpp"

namespace hawkesmm {

struct KernelSection {
    Kernel target = ExpSumKernel();
    std::vector<std::size_t> n{16, 64, 256};
    double report_T = 1.0;
    laplace::InversionOptions inversion;
};

struct IntensitySection {
    double mu = 0.1;
    double k_over_sigma = 20.0;
    ExpSumKernel kernel;
    std::optional<std::string> kernel_file;  // as written in the config
};

/// Grid keys without the model parameters, which come from the intensity.
struct GridSection {
    Json grid = Json::object();
};

/// A probe state. theta_* scale the kernel weights (c = theta * weights, a
/// past of theta events at time 0); c_* give the coordinates directly.
struct ProbeSpec {
    int inventory = 0;
    std::optional<double> theta_ask, theta_bid;
    std::optional<std::vector<double>> c_ask, c_bid;

    MarketState state(const ExpSumKernel& kernel) const;
};

struct ExpansionSpec {
    std::string type = "presolve";  // "presolve" or "constant"
    double ask = 0.0, bid = 0.0;    // constant
    bool proxy = false;             // presolve on a one-exponential proxy
    Json grid = Json::object();     // presolve grid keys
};

struct ParticleSection {
    std::optional<double> lifetime_rate;  // default 1 / T
    std::size_t max_particles = 1'000'000;
    std::size_t n_trees = 10'000;
    double T = 1.0;
    double t = 0.0;
    bool short_circuit = true;
    double mu_penalty = 0.1;
    double r = 0.0;
    ExpansionSpec expansion;
    std::vector<ProbeSpec> probes;
    std::vector<std::size_t> n_values;  // non-empty: convergence study on kernel.target
    std::size_t reference_n = 256;
};

struct ControlSpec {
    std::string type = "constant";  // "constant" or "optimal"
    double ask = 0.0, bid = 0.0;
};

struct PriceSpec {
    double sigma = 0.01;
    double p0 = 100.0;
    double dt = 1e-3;
    double drift = 0.0;
};

struct SimulationSection {
    double T = 1.0;
    double mu_penalty = 0.1;
    ProbeSpec initial;
    ControlSpec control;
    std::size_t n_episodes = 1000;
    std::size_t max_events = 10'000'000;
    std::optional<PriceSpec> price;
};

struct BeliefModel {
    std::string name;
    double mu = 0.1;
    ExpSumKernel kernel;
    Json grid = Json::object();
};

struct ComparisonSection {
    std::vector<BeliefModel> models;  // exactly two: the Poisson and the one-exponential belief
    ProbeSpec probe;
    std::vector<double> slice_c_ask{10.0, 0.0};
    std::vector<double> slice_c_bid{10.0, 0.0};
    std::size_t slice_component = 2;  // 1-based c_bid component varied in fig2/fig3
    std::size_t n_episodes = 20'000;
    std::vector<ProbeSpec> mc_probes;  // empty: the fig1 probe only
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::filesystem::path base_dir;  // relative paths in the config resolve here
    std::optional<KernelSection> kernel;
    std::optional<IntensitySection> intensity;
    std::optional<GridSection> grid;
    std::optional<ParticleSection> particle;
    std::optional<SimulationSection> simulation;
    std::optional<ComparisonSection> comparison;

    /// Parses and validates; ConfigError on unknown keys, wrong types or
    /// invalid values, IoError when a referenced kernel file is missing.
    static ExperimentConfig from_json(const Json& j, const std::filesystem::path& base_dir = {});
    static ExperimentConfig load(const std::filesystem::path& path);

    /// Every section with defaults filled in.
    Json resolved() const;

    const KernelSection& need_kernel() const;
    const IntensitySection& need_intensity() const;
    const GridSection& need_grid() const;
    const ParticleSection& need_particle() const;
    const SimulationSection& need_simulation() const;
    const ComparisonSection& need_comparison() const;

    IntensitySpec intensity_spec() const;
    /// Grid of the intensity model; dt resolved to the stable step when unset.
    hjb::GridSpec grid_spec() const;
};

/// GridSpec from grid keys and a model.
hjb::GridSpec make_grid(const Json& grid_keys, const ExpSumKernel& kernel, double mu_base, double k_over_sigma);

}  // namespace hawkesmm
