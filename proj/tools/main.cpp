#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hawkesmm/common.hpp"
#include "hawkesmm/config.hpp"
#include "hawkesmm/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kIo = 3, kNumerical = 4 };

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config, "Experiment configuration (JSON)")->required();
    cmd->add_option("--out", flags.out, "Output directory (default: output_dir from the config)");
    cmd->add_option("--seed", flags.seed, "Master seed, overrides the config");
    cmd->add_option("--threads", flags.threads, "Worker threads (0 = available parallelism)");
}

int report(const char* kind, const std::exception& e, int code) {
    std::cerr << "hawkesmm: " << kind << ": " << e.what() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Market making with Hawkes order flows: kernel approximation, HJB solver, branching estimator, "
                 "closed-loop simulation"};
    app.require_subcommand(1);
    Flags flags;
    auto* kernel = app.add_subcommand("kernel-approx", "Exponential-sum approximation of the configured kernel");
    auto* solve = app.add_subcommand("solve", "Solve the HJB equation of the intensity model on the grid");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo episodes of a control in the intensity model");
    auto* compare = app.add_subcommand("compare", "Value of the belief controls and the optimal control");
    auto* branch = app.add_subcommand("branching", "Branching Monte Carlo estimates at probe states");
    for (auto* cmd : {kernel, solve, simulate, compare, branch}) add_common(cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        auto cfg = hawkesmm::ExperimentConfig::load(flags.config);
        if (flags.seed) cfg.seed = *flags.seed;
        hawkesmm::pipeline::RunContext ctx;
        ctx.out_dir = flags.out.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(flags.out);
        ctx.threads = flags.threads;
        std::filesystem::create_directories(ctx.out_dir);

        if (kernel->parsed()) {
            const auto res = hawkesmm::pipeline::kernel_approx(cfg, ctx);
            for (const auto& r : res.reports) std::cout << "n=" << r.n << " sup_err=" << r.sup_err << " l1_err=" << r.l1_err << '\n';
        } else if (solve->parsed()) {
            const auto res = hawkesmm::pipeline::solve(cfg, ctx);
            std::cout << "steps=" << res.solution.values.grid().steps()
                      << " cells=" << res.solution.values.lattice().cells() << '\n';
        } else if (simulate->parsed()) {
            const auto res = hawkesmm::pipeline::simulate(cfg, ctx);
            std::cout << "mean=" << res.estimate.mean << " stderr=" << res.estimate.stderr_ << '\n';
        } else if (compare->parsed()) {
            const auto res = hawkesmm::pipeline::compare(cfg, ctx);
            for (const auto& r : res.ordering) {
                std::cout << "probe " << r.probe << ": " << r.better << " - " << r.worse << " pde=" << r.pde_gap
                          << " mc=" << r.mc_gap.mean << " +- " << r.mc_gap.stderr_ << '\n';
            }
        } else if (branch->parsed()) {
            const auto res = hawkesmm::pipeline::branching_run(cfg, ctx);
            for (std::size_t p = 0; p < res.slopes.size(); ++p) {
                std::cout << "probe " << p << ": slope=" << res.slopes[p] << '\n';
            }
            for (const auto& e : res.estimates) std::cout << "mean=" << e.mean << " stderr=" << e.stderr_ << '\n';
        }
        std::cout << "outputs in " << ctx.out_dir.string() << '\n';
    } catch (const hawkesmm::ConfigError& e) {
        return report("config error", e, kConfig);
    } catch (const hawkesmm::IoError& e) {
        return report("i/o error", e, kIo);
    } catch (const std::filesystem::filesystem_error& e) {
        return report("i/o error", e, kIo);
    } catch (const hawkesmm::NumericalError& e) {
        return report("numerical failure", e, kNumerical);
    } catch (const std::invalid_argument& e) {
        return report("config error", e, kConfig);
    } catch (const std::domain_error& e) {
        return report("config error", e, kConfig);
    } catch (const std::exception& e) {
        return report("numerical failure", e, kNumerical);
    }
    return kOk;
}
