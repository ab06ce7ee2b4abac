#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hawkesmm/config.hpp"
#include "hawkesmm/hawkes.hpp"
#include "hawkesmm/hjb.hpp"
#include "hawkesmm/kernels.hpp"
#include "hawkesmm/marketsim.hpp"
#include "hawkesmm/pipeline.hpp"
#include "hawkesmm/serialization.hpp"
#include "stats.hpp"

using namespace hawkesmm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path config_path(const std::string& name) { return fs::path(HAWKESMM_SOURCE_DIR) / "configs" / name; }

std::string fmt(double x, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

// ---------------------------------------------------------------- criteria

Outcome kernel_matching(const fs::path&) {
    const auto cfg = ExperimentConfig::load(config_path("kernel_powerlaw.json"));
    const auto& target = std::get<PowerLawKernel>(cfg.need_kernel().target);
    std::vector<double> sup;
    double worst_k0 = 0.0, worst_l1 = 0.0;
    for (std::size_t n : {16, 64, 256}) {
        const auto approx = approximate_power_law(target, n, cfg.need_kernel().inversion);
        worst_k0 = std::max(worst_k0, std::abs(approx.kernel.at_zero() - target.at_zero()));
        worst_l1 = std::max(worst_l1, std::abs(approx.kernel.l1_norm() - target.l1_norm()));
        sup.push_back(sup_error(target, approx.kernel, 1.0));
    }
    bool monotone = true;
    for (std::size_t k = 1; k < sup.size(); ++k) monotone = monotone && sup[k] <= 1.05 * sup[k - 1];
    return {worst_k0 <= 1e-8 && worst_l1 <= 1e-8 && monotone,
            "max|dK(0)|=" + fmt(worst_k0) + " max|dL1|=" + fmt(worst_l1) + " sup=" + fmt(sup[0]) + "," +
                fmt(sup[1]) + "," + fmt(sup[2])};
}

Outcome hawkes_stationarity(const fs::path&) {
    const IntensitySpec spec{0.1, ExpSumKernel({0.9}, {1.0}), 20.0, {}};
    const double T = 1e4;
    const std::size_t replicas = 64;
    ConstantQuoter q(0.0, 0.0);
    auto exp1 = [](double x) { return 1.0 - std::exp(-x); };
    double count_ask = 0.0, count_bid = 0.0;
    std::vector<double> pooled;
    std::size_t single_below = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
        const auto res = simulate(spec, q, T, derive_seed(20240601, r), MarketState::zero(1));
        count_ask += static_cast<double>(res.log.count(Side::Ask));
        count_bid += static_cast<double>(res.log.count(Side::Bid));
        for (Side s : {Side::Ask, Side::Bid}) {
            const auto inc = compensator_increments(spec, res.log, s, MarketState::zero(1));
            if (teststats::ks_one_sample(inc, exp1).p <= 0.01) ++single_below;
            pooled.insert(pooled.end(), inc.begin(), inc.end());
        }
    }
    const auto ks = teststats::ks_one_sample(pooled, exp1);
    const double rate_ask = count_ask / (T * static_cast<double>(replicas));
    const double rate_bid = count_bid / (T * static_cast<double>(replicas));
    const double oracle = 0.1 / (1.0 - 0.9);
    const bool ok = std::abs(rate_ask - oracle) <= 0.05 * oracle && std::abs(rate_bid - oracle) <= 0.05 * oracle &&
                    ks.p > 0.01;
    return {ok, "rate ask=" + fmt(rate_ask) + " bid=" + fmt(rate_bid) + " over " + std::to_string(replicas) +
                    " runs, pooled KS D=" + fmt(ks.d) + " p=" + fmt(ks.p) + " (" + std::to_string(single_below) + "/" +
                    std::to_string(2 * replicas) + " single runs at p<=0.01)"};
}

Outcome hamiltonian_closed_forms(const fs::path&) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> I(-1.0, 0.5), phi(1e-3, 20.0), d(0.0, 1.0);
    const double k = 20.0;
    std::size_t dominance_failures = 0, foc_failures = 0, interior = 0;
    double worst_foc = 0.0;
    for (int c = 0; c < 1000; ++c) {
        const double inc = I(gen), p = phi(gen);
        const auto h = hjb::hamiltonian_max(inc, p, k);
        for (int j = 0; j < 100; ++j) {
            if (hjb::hamiltonian_at(inc, p, k, d(gen)) > h.value + 1e-15) ++dominance_failures;
        }
        if (h.spread > 0.0) {
            ++interior;
            const double foc = p * std::exp(-k * h.spread) * (1.0 - k * (h.spread + inc));
            worst_foc = std::max(worst_foc, std::abs(foc));
            if (std::abs(foc) > 1e-8) ++foc_failures;
        }
    }
    return {dominance_failures == 0 && foc_failures == 0,
            "dominance failures=" + std::to_string(dominance_failures) + " interior cases=" + std::to_string(interior) +
                " max|FOC|=" + fmt(worst_foc)};
}

Outcome strategy_ordering(const fs::path& work) {
    const auto cfg = ExperimentConfig::load(config_path("compare.json"));
    const auto res = pipeline::compare(cfg, {work / "compare", 0});
    bool ok = true;
    std::string detail;
    for (const auto& r : res.ordering) {
        if (r.probe != 0) continue;
        const bool row_ok = r.mc_gap.lower95() > 0.0 && r.mc_relative_gain >= 0.04 && r.mc_relative_gain <= 0.20;
        ok = ok && row_ok;
        detail += r.better + ">" + r.worse + ": gain=" + fmt(100.0 * r.mc_relative_gain, 3) +
                  "% lower95=" + fmt(r.mc_gap.lower95()) + "; ";
    }
    return {ok, detail};
}

Outcome pde_mc_cross_validation(const fs::path& work) {
    std::string detail;
    bool ok = true;

    const auto bcfg = ExperimentConfig::load(config_path("branching_one_exp.json"));
    const auto branch = pipeline::branching_run(bcfg, {work / "branching_one_exp", 0});
    const auto solved = hjb::solve(bcfg.grid_spec());
    const auto& probes = bcfg.need_particle().probes;
    const auto kernel = bcfg.intensity_spec().kernel;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const double pde = solved.values.value_at(0.0, probes[p].state(kernel));
        const auto& e = branch.estimates[p];
        const double tol = std::max(3.0 * e.stderr_, 0.02 * std::abs(pde));
        ok = ok && std::abs(e.mean - pde) <= tol;
        detail += "branch i=" + std::to_string(probes[p].inventory) + " " + fmt(e.mean) + " vs " + fmt(pde) + "; ";
    }

    const auto spec = bcfg.intensity_spec();
    const hjb::GridSpec grid = bcfg.grid_spec();
    const auto fixed = hjb::evaluate_fixed_control([](double, const MarketState&) { return Spreads{0.05, 0.05}; }, grid);
    const ConstantQuoter q(0.05, 0.05);
    for (int i : {0, -5, -10}) {
        const auto s = MarketState::zero(1, i);
        const auto mc = marketsim::estimate_value(spec, q, grid.T, s, 40000, derive_seed(bcfg.seed, 100 + i),
                                                  grid.mu_penalty, 0);
        const double pde = fixed.value_at(0.0, s);
        const double tol = std::max(3.0 * mc.stderr_, 0.03 * std::abs(pde));
        ok = ok && std::abs(mc.mean - pde) <= tol;
        detail += "mc i=" + std::to_string(i) + " " + fmt(mc.mean) + " vs " + fmt(pde) + "; ";
    }
    return {ok, detail};
}

Outcome figure4_trend(const fs::path& work) {
    const auto cfg = ExperimentConfig::load(config_path("fig4.json"));
    const auto res = pipeline::branching_run(cfg, {work / "fig4", 0});
    bool ok = res.slopes.size() == 3;
    std::string detail = "slopes=";
    for (double s : res.slopes) {
        ok = ok && std::isfinite(s) && s < 0.0;
        detail += fmt(s) + " ";
    }
    return {ok, detail};
}

// Every regular file under `dir`, by relative path, with its bytes.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), dir).string()] = std::string(std::istreambuf_iterator<char>(in), {});
    }
    return files;
}

Outcome determinism(const fs::path& work) {
    const std::vector<std::pair<std::string, std::string>> stages{
        {"kernel-approx", R"({"kernel": {"n": [16, 64],
            "target": {"type": "powerlaw", "lam": 0.1, "alpha": 0.7, "beta": 0.4, "eps": 0.01}}})"},
        {"solve", R"({"intensity": {"kernel": {"type": "expsum", "weights": [0.45, 0.45], "rates": [1.0, 1.0]}},
            "grid": {"i_min": -6, "i_max": 6, "c_max": 3.6, "m_c": 5, "snapshot_stride": 3}})"},
        {"simulate", R"({"seed": 3, "intensity": {"kernel": {"type": "expsum", "weights": [0.9], "rates": [1.0]}},
            "simulation": {"n_episodes": 500, "initial": {"inventory": -3},
                           "control": {"type": "constant", "ask": 0.05, "bid": 0.05},
                           "price": {"sigma": 0.01, "p0": 100, "dt": 0.01}}})"},
        {"compare", R"({"seed": 4,
            "intensity": {"kernel": {"type": "expsum", "weights": [0.45, 0.45], "rates": [1.0, 1.0]}},
            "grid": {"i_min": -6, "i_max": 6, "c_max": 3.6, "m_c": 5},
            "comparison": {"models": [
                {"name": "poisson", "mu": 1.0, "kernel": {"type": "expsum", "weights": [], "rates": []},
                 "grid": {"i_min": -6, "i_max": 6}},
                {"name": "one_exp", "kernel": {"type": "expsum", "weights": [0.9], "rates": [1.0]},
                 "grid": {"i_min": -6, "i_max": 6, "c_max": 7.2, "m_c": 9}}],
              "probe": {"inventory": -4, "c_ask": [0, 2], "c_bid": [0, 2]},
              "slice": {"c_ask": [1, 0], "c_bid": [1, 0], "component": 2},
              "n_episodes": 500}})"},
        {"branching", R"({"seed": 5,
            "kernel": {"target": {"type": "powerlaw", "lam": 0.1, "alpha": 0.7, "beta": 0.4, "eps": 0.01}},
            "intensity": {"mu": 0.1},
            "particle": {"n_trees": 2000, "n_values": [8, 16], "reference_n": 32,
                         "expansion": {"proxy": true, "grid": {"i_min": -6, "i_max": 6, "c_max": 30, "m_c": 7}},
                         "probes": [{"inventory": 1, "theta_ask": 2}, {"inventory": -2}]}})"},
    };
    std::vector<std::string> bad;
    for (const auto& [name, text] : stages) {
        const auto cfg = ExperimentConfig::from_json(Json::parse(text));
        std::vector<std::map<std::string, std::string>> runs;
        for (unsigned threads : {1u, 2u}) {
            const fs::path dir = work / "determinism" / (name + "_" + std::to_string(threads));
            fs::remove_all(dir);
            const pipeline::RunContext ctx{dir, threads};
            if (name == "kernel-approx") pipeline::kernel_approx(cfg, ctx);
            if (name == "solve") pipeline::solve(cfg, ctx);
            if (name == "simulate") pipeline::simulate(cfg, ctx);
            if (name == "compare") pipeline::compare(cfg, ctx);
            if (name == "branching") pipeline::branching_run(cfg, ctx);
            runs.push_back(snapshot(dir));
        }
        if (runs[0] != runs[1] || runs[0].empty()) bad.push_back(name);
    }
    std::string detail = std::to_string(stages.size()) + " stages run twice";
    for (const auto& b : bad) detail += ", differs: " + b;
    return {bad.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::string work_dir = "acceptance_work";
    std::vector<std::string> known;
    std::vector<std::string> only;
    app.add_option("--work-dir", work_dir, "Directory for stage outputs");
    app.add_option("--known-failure", known, "Criteria reported without failing the run");
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome(const fs::path&)>>> criteria{
        {"kernel_matching", kernel_matching},
        {"hawkes_stationarity", hawkes_stationarity},
        {"hamiltonian_closed_forms", hamiltonian_closed_forms},
        {"strategy_ordering", strategy_ordering},
        {"pde_mc_cross_validation", pde_mc_cross_validation},
        {"figure4_trend", figure4_trend},
        {"determinism", determinism},
    };
    const std::set<std::string> known_set(known.begin(), known.end());
    const std::set<std::string> only_set(only.begin(), only.end());
    fs::create_directories(work_dir);

    int failures = 0;
    for (const auto& [name, check] : criteria) {
        if (!only_set.empty() && !only_set.count(name)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check(fs::path(work_dir));
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool known_failure = !o.pass && known_set.count(name);
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << fmt(secs, 3) << " s) " << o.detail
                  << (known_failure ? " [known failure]" : "") << std::endl;
        if (!o.pass && !known_failure) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
