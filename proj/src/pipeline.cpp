#include "hawkesmm/pipeline.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace hawkesmm::pipeline {
namespace {

std::filesystem::path out(const RunContext& ctx, const std::string& name) { return ctx.out_dir / name; }

void write_stream(const std::filesystem::path& p, const std::function<void(std::ostream&)>& body) {
    std::ostringstream os;
    body(os);
    write_text(p, os.str());
}

std::string f(double x) { return format_double(x); }

branching::ParticleConfig particle_config(const ParticleSection& p, std::uint64_t seed) {
    branching::ParticleConfig c;
    c.lifetime_rate = p.lifetime_rate.value_or(1.0 / p.T);
    c.max_particles = p.max_particles;
    c.T = p.T;
    c.seed = seed;
    c.short_circuit = p.short_circuit;
    return c;
}

Json grid_keys_or_top(const Json& keys, const ExperimentConfig& cfg, const std::string& what) {
    if (!keys.empty()) return keys;
    if (cfg.grid) return cfg.grid->grid;
    throw ConfigError(what + ": no grid given and no top-level grid section");
}

}  // namespace

void write_resolved_config(const ExperimentConfig& cfg, const RunContext& ctx) {
    write_text(out(ctx, "resolved_config.json"), cfg.resolved().dump(2) + "\n");
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope: need two or more pairs");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("ols_slope: x values are all equal");
    return sxy / sxx;
}

// ------------------------------------------------------------ kernel-approx

KernelApproxResult kernel_approx(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto& ks = cfg.need_kernel();
    KernelApproxResult res;
    if (const auto* e = std::get_if<ExpSumKernel>(&ks.target)) {
        res.reports.push_back(make_report(ks.target, *e, e->size(), ks.report_T));
        res.k0_errors.push_back(0.0);
        write_text(out(ctx, "kernel.json"), kernel_to_json(Kernel(*e)).dump(2) + "\n");
    } else {
        const auto& target = std::get<PowerLawKernel>(ks.target);
        const double k0 = target.at_zero();
        for (std::size_t n : ks.n) {
            const auto approx = approximate_power_law(target, n, ks.inversion);
            auto report = make_report(ks.target, approx.kernel, n, ks.report_T, approx.clamped_weights);
            res.k0_errors.push_back(std::abs(approx.kernel.at_zero() - k0));
            write_text(out(ctx, "kernel_n" + std::to_string(n) + ".json"),
                       kernel_to_json(Kernel(approx.kernel)).dump(2) + "\n");
            res.reports.push_back(std::move(report));
        }
    }
    write_stream(out(ctx, "approx_report.csv"), [&](std::ostream& os) {
        os << ApproxReport::csv_header() << '\n';
        for (const auto& r : res.reports) os << r.csv_row() << '\n';
    });
    write_stream(out(ctx, "approx_details.csv"), [&](std::ostream& os) {
        os << "n,terms,k0_err,clamped_weights\n";
        for (std::size_t k = 0; k < res.reports.size(); ++k) {
            const auto& r = res.reports[k];
            os << r.n << ',' << r.kernel.size() << ',' << f(res.k0_errors[k]) << ',' << r.clamped_weights << '\n';
        }
    });
    write_resolved_config(cfg, ctx);
    return res;
}

// -------------------------------------------------------------------- solve

SolveResult solve(const ExperimentConfig& cfg, const RunContext& ctx) {
    const hjb::GridSpec grid = cfg.grid_spec();
    SolveResult res{hjb::solve(grid, {ctx.threads})};
    const auto& values = res.solution.values;
    {
        std::ostringstream os(std::ios::binary);
        values.write_binary(os);
        write_text(out(ctx, "value.bin"), os.str());
    }
    write_stream(out(ctx, "value.csv"), [&](std::ostream& os) { values.write_csv(os); });
    write_stream(out(ctx, "feedback.csv"), [&](std::ostream& os) { res.solution.feedback.write_csv(os); });
    Json summary{{"steps", grid.steps()},
                 {"dt", grid.step_size()},
                 {"snapshots", values.snapshots()},
                 {"cells", values.lattice().cells()},
                 {"stability_product", grid.step_size() * grid.stability_rate()},
                 {"kink_fraction", branching::kink_fraction(values)}};
    write_text(out(ctx, "solve_summary.json"), summary.dump(2) + "\n");
    write_resolved_config(cfg, ctx);
    return res;
}

// ----------------------------------------------------------------- simulate

SimulateResult simulate(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto& sim = cfg.need_simulation();
    const IntensitySpec spec = cfg.intensity_spec();
    const MarketState initial = sim.initial.state(spec.kernel);

    std::unique_ptr<Quoter> control;
    std::string name;
    if (sim.control.type == "optimal") {
        hjb::GridSpec grid = cfg.grid_spec();
        if (std::abs(grid.T - sim.T) > 1e-12) throw ConfigError("simulation.T must equal grid.T for the optimal control");
        auto table = std::make_shared<const hjb::FeedbackTable>(hjb::solve(grid, {ctx.threads}).feedback);
        control = std::make_unique<marketsim::BeliefQuoter>(table, spec.kernel);
        name = "optimal";
    } else {
        control = std::make_unique<ConstantQuoter>(sim.control.ask, sim.control.bid);
        name = "constant";
    }

    struct Row {
        std::size_t ask = 0, bid = 0;
        double revenue = 0.0, penalty = 0.0, total = 0.0;
        std::uint64_t seed = 0;
    };
    std::vector<Row> rows(sim.n_episodes);
    EventLog first;
    parallel_for(sim.n_episodes, ctx.threads, [&](std::size_t k) {
        auto q = control->clone();
        const std::uint64_t seed = derive_seed(cfg.seed, k);
        auto ep = marketsim::run_episode(spec, *q, sim.T, initial, seed, sim.mu_penalty, sim.max_events);
        rows[k] = {ep.log.count(Side::Ask), ep.log.count(Side::Bid), ep.spread_revenue, ep.penalty, ep.total, seed};
        if (k == 0) first = std::move(ep.log);
    });
    std::vector<double> totals(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) totals[k] = rows[k].total;
    SimulateResult res{marketsim::summarize_totals(std::move(totals), name, "intensity"), std::move(first)};

    write_stream(out(ctx, "events.csv"), [&](std::ostream& os) { res.first_log.write_csv(os); });
    write_stream(out(ctx, "episodes.csv"), [&](std::ostream& os) {
        os << "episode,seed,fills_ask,fills_bid,spread_revenue,penalty,total\n";
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto& r = rows[k];
            os << k << ',' << r.seed << ',' << r.ask << ',' << r.bid << ',' << f(r.revenue) << ',' << f(r.penalty)
               << ',' << f(r.total) << '\n';
        }
    });
    write_stream(out(ctx, "value_estimate.csv"), [&](std::ostream& os) {
        os << "strategy,mean,stderr,n_episodes\n";
        os << name << ',' << f(res.estimate.mean) << ',' << f(res.estimate.stderr_) << ',' << res.estimate.n_episodes
           << '\n';
    });
    if (sim.price) {
        const auto& p = *sim.price;
        const double drift = p.drift;
        const auto path = simulate_price([drift](double, double) { return drift; }, p.sigma, p.p0, sim.T, p.dt,
                                         derive_seed(cfg.seed, ~std::uint64_t{0}));
        write_stream(out(ctx, "price.csv"), [&](std::ostream& os) {
            os << "t,price\n";
            for (std::size_t k = 0; k < path.size(); ++k) {
                os << f(std::min(static_cast<double>(k) * p.dt, sim.T)) << ',' << f(path[k]) << '\n';
            }
        });
    }
    write_resolved_config(cfg, ctx);
    return res;
}

// ------------------------------------------------------------------ compare

CompareResult compare(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto& cs = cfg.need_comparison();
    const IntensitySpec truth = cfg.intensity_spec();
    const hjb::GridSpec true_grid = cfg.grid_spec();
    const hjb::SolveOptions so{ctx.threads};

    // Optimal control of the true model and the value of each belief control in it.
    auto optimal = hjb::solve(true_grid, so);
    std::vector<std::shared_ptr<const hjb::FeedbackTable>> tables;
    std::vector<hjb::ValueGrid> values;
    for (const auto& m : cs.models) {
        hjb::GridSpec g = make_grid(grid_keys_or_top(m.grid, cfg, "comparison model " + m.name), m.kernel, m.mu,
                                    truth.k_over_sigma);
        if (std::abs(g.T - true_grid.T) > 1e-12) throw ConfigError("comparison: belief grids must share the horizon T");
        auto table = std::make_shared<const hjb::FeedbackTable>(hjb::solve(g, so).feedback);
        values.push_back(hjb::evaluate_fixed_control(marketsim::projected_feedback(table, truth.kernel), true_grid, so));
        tables.push_back(std::move(table));
    }
    tables.push_back(std::make_shared<const hjb::FeedbackTable>(std::move(optimal.feedback)));
    values.push_back(std::move(optimal.values));
    const std::vector<std::string> names{cs.models[0].name, cs.models[1].name, "optimal"};

    // fig1: values along time at the probe.
    const MarketState probe = cs.probe.state(truth.kernel);
    write_stream(out(ctx, "fig1_values.csv"), [&](std::ostream& os) {
        os << "t,V0,V1,V2\n";
        for (std::size_t step : values[2].steps()) {
            const double t = values[2].time_of_step(step);
            os << f(t);
            for (const auto& v : values) os << ',' << f(v.value_at(t, probe));
            os << '\n';
        }
    });

    // fig2/fig3: optimal minus each belief over (i, c_bid component) at t = 0.
    CompareResult res;
    const std::size_t comp = cs.slice_component - 1;
    if (cs.slice_c_ask.size() != truth.kernel.size() || cs.slice_c_bid.size() != truth.kernel.size() ||
        comp >= truth.kernel.size()) {
        throw ConfigError("comparison.slice does not match the true kernel dimension");
    }
    auto diff_file = [&](const std::string& name, const hjb::ValueGrid& other, double& min_diff) {
        min_diff = INFINITY;
        write_stream(out(ctx, name), [&](std::ostream& os) {
            os << "i,c_b" << cs.slice_component << ",diff\n";
            for (int i = true_grid.i_min; i <= true_grid.i_max; ++i) {
                for (std::size_t m = 0; m < true_grid.m_c[comp]; ++m) {
                    MarketState s = MarketState::zero(truth.kernel.size(), i);
                    s.c_ask = cs.slice_c_ask;
                    s.c_bid = cs.slice_c_bid;
                    s.c_bid[comp] = static_cast<double>(m) * true_grid.spacing(comp);
                    const double d = values[2].value_at(0.0, s) - other.value_at(0.0, s);
                    min_diff = std::min(min_diff, d);
                    os << i << ',' << f(s.c_bid[comp]) << ',' << f(d) << '\n';
                }
            }
        });
    };
    diff_file("fig2_diff.csv", values[1], res.min_diff_fig2);
    diff_file("fig3_diff.csv", values[0], res.min_diff_fig3);

    // Monte Carlo of each strategy with shared seeds at the probes.
    std::vector<MarketState> probes;
    if (cs.mc_probes.empty()) {
        probes.push_back(probe);
    } else {
        for (const auto& p : cs.mc_probes) probes.push_back(p.state(truth.kernel));
    }
    const double mu_penalty = true_grid.mu_penalty;
    for (std::size_t s = 0; s < 3; ++s) {
        StrategyOutcome o;
        o.name = names[s];
        const marketsim::BeliefQuoter quoter(tables[s], truth.kernel);
        for (std::size_t p = 0; p < probes.size(); ++p) {
            o.pde.push_back(values[s].value_at(0.0, probes[p]));
            o.mc.push_back(marketsim::estimate_value(truth, quoter, true_grid.T, probes[p], cs.n_episodes,
                                                     derive_seed(cfg.seed, p), mu_penalty, ctx.threads, o.name,
                                                     "truth"));
        }
        res.strategies.push_back(std::move(o));
    }
    for (std::size_t p = 0; p < probes.size(); ++p) {
        for (auto [hi, lo] : {std::pair<std::size_t, std::size_t>{2, 1}, {1, 0}}) {
            OrderingRow r;
            r.probe = p;
            r.better = names[hi];
            r.worse = names[lo];
            const double vh = res.strategies[hi].pde[p], vl = res.strategies[lo].pde[p];
            r.pde_gap = vh - vl;
            r.pde_relative_gain = r.pde_gap / std::abs(vl);
            r.mc_gap = marketsim::paired_difference(res.strategies[hi].mc[p], res.strategies[lo].mc[p]);
            r.mc_relative_gain = r.mc_gap.mean / std::abs(res.strategies[lo].mc[p].mean);
            res.ordering.push_back(r);
        }
    }

    write_stream(out(ctx, "comparison.csv"), [&](std::ostream& os) {
        os << "strategy,probe,pde_value,mc_mean,mc_stderr,n_episodes\n";
        for (const auto& s : res.strategies) {
            for (std::size_t p = 0; p < probes.size(); ++p) {
                os << s.name << ',' << p << ',' << f(s.pde[p]) << ',' << f(s.mc[p].mean) << ',' << f(s.mc[p].stderr_)
                   << ',' << s.mc[p].n_episodes << '\n';
            }
        }
    });
    write_stream(out(ctx, "ordering.csv"), [&](std::ostream& os) {
        os << "probe,better,worse,pde_gap,pde_relative_gain,mc_gap,mc_gap_stderr,mc_gap_lower95,mc_relative_gain\n";
        for (const auto& r : res.ordering) {
            os << r.probe << ',' << r.better << ',' << r.worse << ',' << f(r.pde_gap) << ',' << f(r.pde_relative_gain)
               << ',' << f(r.mc_gap.mean) << ',' << f(r.mc_gap.stderr_) << ',' << f(r.mc_gap.lower95()) << ','
               << f(r.mc_relative_gain) << '\n';
        }
    });
    write_resolved_config(cfg, ctx);
    return res;
}

// ---------------------------------------------------------------- branching

BranchingResult branching_run(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto& ps = cfg.need_particle();
    const auto& is = cfg.need_intensity();
    const auto pc = particle_config(ps, cfg.seed);
    BranchingResult res;

    // Expansion point of the Hamiltonian.
    std::shared_ptr<hjb::ValueGrid> presolve;
    auto expansion_for = [&](const ExpSumKernel& model_kernel, bool proxy) -> branching::ExpansionPoint {
        if (ps.expansion.type == "constant") {
            return branching::constant_expansion(ps.expansion.ask, ps.expansion.bid, is.k_over_sigma);
        }
        if (!presolve) {
            ExpSumKernel k = model_kernel;
            if (proxy) {
                Kernel target = model_kernel;
                if (cfg.kernel && !ps.n_values.empty()) target = cfg.kernel->target;
                k = rescale_match(ExpSumKernel(), at_zero(target), l1_norm(target));
            }
            Json keys = grid_keys_or_top(ps.expansion.grid, cfg, "particle.expansion");
            hjb::GridSpec g = make_grid(keys, k, is.mu, is.k_over_sigma);
            if (g.T + 1e-12 < ps.T) throw ConfigError("particle.expansion.grid.T must cover particle.T");
            presolve = std::make_shared<hjb::ValueGrid>(hjb::solve(g, {ctx.threads}).values);
            res.kink_fraction = branching::kink_fraction(*presolve);
        }
        if (proxy) return branching::presolve_expansion(*presolve, branching::total_excitation_state);
        return branching::presolve_expansion(*presolve);
    };

    auto run_model = [&](const ExpSumKernel& kernel, const branching::ExpansionPoint& expansion,
                         const std::string& file) {
        IntensitySpec spec;
        spec.mu = is.mu;
        spec.kernel = kernel;
        spec.k_over_sigma = is.k_over_sigma;
        const auto poly = branching::taylor_generator(spec, ps.mu_penalty, expansion, ps.r);
        std::vector<branching::Estimate> est;
        std::ostringstream os;
        os << branching::estimate_csv_header(kernel.size()) << '\n';
        for (const auto& probe : ps.probes) {
            MarketState s = probe.state(kernel);
            s.clock = ps.t;
            auto e = branching::estimate_u(ps.t, s, poly, pc, ps.n_trees, ctx.threads);
            os << branching::estimate_csv_row(ps.t, s, e) << '\n';
            e.samples.clear();
            est.push_back(std::move(e));
        }
        write_text(out(ctx, file), os.str());
        return est;
    };

    if (ps.n_values.empty()) {
        const bool proxy = ps.expansion.proxy;
        res.estimates = run_model(is.kernel, expansion_for(is.kernel, proxy), "branching_estimates.csv");
    } else {
        const auto& ks = cfg.need_kernel();
        const auto* target = std::get_if<PowerLawKernel>(&ks.target);
        if (!target) throw ConfigError("particle.n_values needs a power-law kernel.target");
        const auto expansion = expansion_for(ExpSumKernel(), true);
        std::vector<std::size_t> ns = ps.n_values;
        ns.push_back(ps.reference_n);
        std::vector<std::vector<branching::Estimate>> per_n;
        for (std::size_t n : ns) {
            const auto approx = approximate_power_law(*target, n, ks.inversion);
            per_n.push_back(run_model(approx.kernel, expansion, "branching_n" + std::to_string(n) + ".csv"));
        }
        const auto& ref = per_n.back();
        for (std::size_t p = 0; p < ps.probes.size(); ++p) {
            std::vector<double> xs, ys;
            for (std::size_t k = 0; k + 1 < ns.size(); ++k) {
                ConvergenceRow row;
                row.n = ns[k];
                row.probe = p;
                row.u_n = per_n[k][p].mean;
                row.stderr_ = per_n[k][p].stderr_;
                row.u_ref = ref[p].mean;
                row.log_rel_diff = std::log(std::abs(row.u_n - row.u_ref) / std::abs(row.u_ref));
                xs.push_back(static_cast<double>(row.n));
                ys.push_back(row.log_rel_diff);
                res.convergence.push_back(row);
            }
            res.slopes.push_back(xs.size() >= 2 ? ols_slope(xs, ys) : NAN);
        }
        for (const auto& v : per_n) res.estimates.insert(res.estimates.end(), v.begin(), v.end());
        write_stream(out(ctx, "fig4_convergence.csv"), [&](std::ostream& os) {
            os << "n,probe,u_n,stderr,u_ref,log_rel_diff\n";
            for (const auto& r : res.convergence) {
                os << r.n << ',' << r.probe << ',' << f(r.u_n) << ',' << f(r.stderr_) << ',' << f(r.u_ref) << ','
                   << f(r.log_rel_diff) << '\n';
            }
        });
    }
    Json summary{{"kink_fraction", res.kink_fraction}, {"slopes", Json::array()}, {"trees", Json::array()}};
    for (double s : res.slopes) summary["slopes"].push_back(s);
    for (const auto& e : res.estimates) {
        summary["trees"].push_back(Json{{"mean_tree_size", e.mean_tree_size}, {"max_tree_size", e.max_tree_size}});
    }
    write_text(out(ctx, "branching_summary.json"), summary.dump(2) + "\n");
    write_resolved_config(cfg, ctx);
    return res;
}

}  // namespace hawkesmm::pipeline
