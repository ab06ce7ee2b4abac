#include "hawkesmm/config.hpp"

#include <stdexcept>

namespace hawkesmm {
namespace {

template <class T>
T opt(const Json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

template <class T>
std::optional<T> maybe(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) return std::nullopt;
    return opt<T>(j, key, T{}, where);
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

laplace::InversionOptions parse_inversion(const Json& j) {
    reject_unknown_keys(j, {"method", "stehfest_order", "talbot_nodes"}, "kernel.inversion");
    laplace::InversionOptions o;
    const auto method = opt<std::string>(j, "method", "stehfest", "kernel.inversion");
    if (method == "stehfest") {
        o.method = laplace::Method::GaverStehfest;
    } else if (method == "talbot") {
        o.method = laplace::Method::FixedTalbot;
    } else {
        throw ConfigError("kernel.inversion.method: expected 'stehfest' or 'talbot'");
    }
    o.stehfest_order = opt<int>(j, "stehfest_order", o.stehfest_order, "kernel.inversion");
    o.talbot_nodes = opt<int>(j, "talbot_nodes", o.talbot_nodes, "kernel.inversion");
    require(o.stehfest_order >= 2 && o.stehfest_order % 2 == 0, "kernel.inversion.stehfest_order must be even and >= 2");
    require(o.talbot_nodes >= 4, "kernel.inversion.talbot_nodes must be >= 4");
    return o;
}

Json inversion_json(const laplace::InversionOptions& o) {
    return Json{{"method", o.method == laplace::Method::GaverStehfest ? "stehfest" : "talbot"},
                {"stehfest_order", o.stehfest_order},
                {"talbot_nodes", o.talbot_nodes}};
}

const std::vector<std::string> kGridKeys{"i_min", "i_max", "c_max", "m_c", "dt", "T", "r", "mu_penalty", "snapshot_stride"};

Json parse_grid_keys(const Json& j, const std::string& where) {
    reject_unknown_keys(j, kGridKeys, where);
    return j;
}

ExpSumKernel load_kernel_file(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw IoError("kernel file '" + p.string() + "' does not exist");
    return expsum_from_json(read_json(p));
}

ProbeSpec parse_probe(const Json& j, const std::string& where) {
    reject_unknown_keys(j, {"inventory", "theta_ask", "theta_bid", "c_ask", "c_bid"}, where);
    ProbeSpec p;
    p.inventory = opt<int>(j, "inventory", 0, where);
    p.theta_ask = maybe<double>(j, "theta_ask", where);
    p.theta_bid = maybe<double>(j, "theta_bid", where);
    p.c_ask = maybe<std::vector<double>>(j, "c_ask", where);
    p.c_bid = maybe<std::vector<double>>(j, "c_bid", where);
    require(!(p.theta_ask && p.c_ask), where + ": give theta_ask or c_ask, not both");
    require(!(p.theta_bid && p.c_bid), where + ": give theta_bid or c_bid, not both");
    for (const auto& v : {p.theta_ask, p.theta_bid}) require(!v || *v >= 0.0, where + ": theta must be >= 0");
    for (const auto& v : {p.c_ask, p.c_bid}) {
        if (v) {
            for (double x : *v) require(x >= 0.0, where + ": c must be >= 0");
        }
    }
    return p;
}

Json probe_json(const ProbeSpec& p) {
    Json j{{"inventory", p.inventory}};
    if (p.theta_ask) j["theta_ask"] = *p.theta_ask;
    if (p.theta_bid) j["theta_bid"] = *p.theta_bid;
    if (p.c_ask) j["c_ask"] = *p.c_ask;
    if (p.c_bid) j["c_bid"] = *p.c_bid;
    return j;
}

Json expsum_json(const ExpSumKernel& k) { return kernel_to_json(Kernel(k)); }

KernelSection parse_kernel(const Json& j) {
    reject_unknown_keys(j, {"target", "n", "report_T", "inversion"}, "kernel");
    KernelSection s;
    require(j.contains("target"), "kernel: missing key 'target'");
    s.target = kernel_from_json(j["target"]);
    s.n = opt<std::vector<std::size_t>>(j, "n", s.n, "kernel");
    s.report_T = opt<double>(j, "report_T", s.report_T, "kernel");
    if (j.contains("inversion")) s.inversion = parse_inversion(j["inversion"]);
    require(!s.n.empty(), "kernel.n must not be empty");
    for (std::size_t n : s.n) require(n >= 2, "kernel.n entries must be >= 2");
    require(s.report_T > 0.0, "kernel.report_T must be > 0");
    if (const auto* p = std::get_if<PowerLawKernel>(&s.target)) {
        require(p->alpha() + p->beta() > 1.0, "kernel.target: power law needs alpha + beta > 1 to be integrable");
    }
    return s;
}

IntensitySection parse_intensity(const Json& j, const std::filesystem::path& base) {
    reject_unknown_keys(j, {"mu", "k_over_sigma", "kernel", "kernel_file"}, "intensity");
    IntensitySection s;
    s.mu = opt<double>(j, "mu", s.mu, "intensity");
    s.k_over_sigma = opt<double>(j, "k_over_sigma", s.k_over_sigma, "intensity");
    require(s.mu >= 0.0, "intensity.mu must be >= 0");
    require(s.k_over_sigma > 0.0, "intensity.k_over_sigma must be > 0");
    require(!(j.contains("kernel") && j.contains("kernel_file")), "intensity: give kernel or kernel_file, not both");
    if (j.contains("kernel")) {
        s.kernel = expsum_from_json(j["kernel"]);
    } else if (j.contains("kernel_file")) {
        s.kernel_file = opt<std::string>(j, "kernel_file", "", "intensity");
        s.kernel = load_kernel_file(base / *s.kernel_file);
    }
    return s;
}

ExpansionSpec parse_expansion(const Json& j) {
    reject_unknown_keys(j, {"type", "ask", "bid", "proxy", "grid"}, "particle.expansion");
    ExpansionSpec e;
    e.type = opt<std::string>(j, "type", e.type, "particle.expansion");
    require(e.type == "presolve" || e.type == "constant", "particle.expansion.type: expected 'presolve' or 'constant'");
    e.ask = opt<double>(j, "ask", e.ask, "particle.expansion");
    e.bid = opt<double>(j, "bid", e.bid, "particle.expansion");
    e.proxy = opt<bool>(j, "proxy", e.proxy, "particle.expansion");
    if (j.contains("grid")) e.grid = parse_grid_keys(j["grid"], "particle.expansion.grid");
    return e;
}

ParticleSection parse_particle(const Json& j) {
    const std::string w = "particle";
    reject_unknown_keys(j,
                        {"lifetime_rate", "max_particles", "n_trees", "T", "t", "short_circuit", "mu_penalty", "r",
                         "expansion", "probes", "n_values", "reference_n"},
                        w);
    ParticleSection s;
    s.lifetime_rate = maybe<double>(j, "lifetime_rate", w);
    s.max_particles = opt<std::size_t>(j, "max_particles", s.max_particles, w);
    s.n_trees = opt<std::size_t>(j, "n_trees", s.n_trees, w);
    s.T = opt<double>(j, "T", s.T, w);
    s.t = opt<double>(j, "t", s.t, w);
    s.short_circuit = opt<bool>(j, "short_circuit", s.short_circuit, w);
    s.mu_penalty = opt<double>(j, "mu_penalty", s.mu_penalty, w);
    s.r = opt<double>(j, "r", s.r, w);
    if (j.contains("expansion")) s.expansion = parse_expansion(j["expansion"]);
    if (j.contains("probes")) {
        require(j["probes"].is_array(), "particle.probes must be an array");
        for (std::size_t k = 0; k < j["probes"].size(); ++k) {
            s.probes.push_back(parse_probe(j["probes"][k], "particle.probes[" + std::to_string(k) + "]"));
        }
    }
    s.n_values = opt<std::vector<std::size_t>>(j, "n_values", s.n_values, w);
    s.reference_n = opt<std::size_t>(j, "reference_n", s.reference_n, w);
    require(!s.lifetime_rate || *s.lifetime_rate > 0.0, "particle.lifetime_rate must be > 0");
    require(s.n_trees >= 2, "particle.n_trees must be >= 2");
    require(s.T > 0.0 && s.t >= 0.0 && s.t < s.T, "particle: need 0 <= t < T");
    require(s.mu_penalty >= 0.0, "particle.mu_penalty must be >= 0");
    require(s.max_particles >= 1, "particle.max_particles must be >= 1");
    for (std::size_t n : s.n_values) require(n >= 2 && n < s.reference_n, "particle.n_values must lie in [2, reference_n)");
    if (s.probes.empty()) s.probes.push_back(ProbeSpec{});
    return s;
}

SimulationSection parse_simulation(const Json& j) {
    const std::string w = "simulation";
    reject_unknown_keys(j, {"T", "mu_penalty", "initial", "control", "n_episodes", "max_events", "price"}, w);
    SimulationSection s;
    s.T = opt<double>(j, "T", s.T, w);
    s.mu_penalty = opt<double>(j, "mu_penalty", s.mu_penalty, w);
    if (j.contains("initial")) s.initial = parse_probe(j["initial"], "simulation.initial");
    if (j.contains("control")) {
        const Json& c = j["control"];
        reject_unknown_keys(c, {"type", "ask", "bid"}, "simulation.control");
        s.control.type = opt<std::string>(c, "type", s.control.type, "simulation.control");
        require(s.control.type == "constant" || s.control.type == "optimal",
                "simulation.control.type: expected 'constant' or 'optimal'");
        s.control.ask = opt<double>(c, "ask", 0.0, "simulation.control");
        s.control.bid = opt<double>(c, "bid", 0.0, "simulation.control");
        require(s.control.ask >= 0.0 && s.control.bid >= 0.0, "simulation.control: spreads must be >= 0");
    }
    s.n_episodes = opt<std::size_t>(j, "n_episodes", s.n_episodes, w);
    s.max_events = opt<std::size_t>(j, "max_events", s.max_events, w);
    if (j.contains("price")) {
        const Json& p = j["price"];
        reject_unknown_keys(p, {"sigma", "p0", "dt", "drift"}, "simulation.price");
        PriceSpec ps;
        ps.sigma = opt<double>(p, "sigma", ps.sigma, "simulation.price");
        ps.p0 = opt<double>(p, "p0", ps.p0, "simulation.price");
        ps.dt = opt<double>(p, "dt", ps.dt, "simulation.price");
        ps.drift = opt<double>(p, "drift", ps.drift, "simulation.price");
        require(ps.sigma >= 0.0 && ps.dt > 0.0, "simulation.price: need sigma >= 0 and dt > 0");
        s.price = ps;
    }
    require(s.T > 0.0, "simulation.T must be > 0");
    require(s.mu_penalty >= 0.0, "simulation.mu_penalty must be >= 0");
    require(s.n_episodes >= 2, "simulation.n_episodes must be >= 2");
    require(s.max_events >= 1, "simulation.max_events must be >= 1");
    return s;
}

ComparisonSection parse_comparison(const Json& j) {
    const std::string w = "comparison";
    reject_unknown_keys(j, {"models", "probe", "slice", "n_episodes", "mc_probes"}, w);
    ComparisonSection s;
    require(j.contains("models") && j["models"].is_array() && j["models"].size() == 2,
            "comparison.models must list exactly two belief models (Poisson, one exponential)");
    for (std::size_t k = 0; k < 2; ++k) {
        const Json& m = j["models"][k];
        const std::string mw = "comparison.models[" + std::to_string(k) + "]";
        reject_unknown_keys(m, {"name", "mu", "kernel", "grid"}, mw);
        BeliefModel b;
        b.name = opt<std::string>(m, "name", "delta" + std::to_string(k), mw);
        b.mu = opt<double>(m, "mu", b.mu, mw);
        require(b.mu >= 0.0, mw + ".mu must be >= 0");
        if (m.contains("kernel")) b.kernel = expsum_from_json(m["kernel"]);
        if (m.contains("grid")) b.grid = parse_grid_keys(m["grid"], mw + ".grid");
        s.models.push_back(std::move(b));
    }
    if (j.contains("probe")) s.probe = parse_probe(j["probe"], "comparison.probe");
    if (j.contains("slice")) {
        const Json& sl = j["slice"];
        reject_unknown_keys(sl, {"c_ask", "c_bid", "component"}, "comparison.slice");
        s.slice_c_ask = opt<std::vector<double>>(sl, "c_ask", s.slice_c_ask, "comparison.slice");
        s.slice_c_bid = opt<std::vector<double>>(sl, "c_bid", s.slice_c_bid, "comparison.slice");
        s.slice_component = opt<std::size_t>(sl, "component", s.slice_component, "comparison.slice");
    }
    s.n_episodes = opt<std::size_t>(j, "n_episodes", s.n_episodes, w);
    if (j.contains("mc_probes")) {
        require(j["mc_probes"].is_array(), "comparison.mc_probes must be an array");
        for (std::size_t k = 0; k < j["mc_probes"].size(); ++k) {
            s.mc_probes.push_back(parse_probe(j["mc_probes"][k], "comparison.mc_probes[" + std::to_string(k) + "]"));
        }
    }
    require(s.n_episodes >= 2, "comparison.n_episodes must be >= 2");
    require(s.slice_component >= 1, "comparison.slice.component is 1-based");
    return s;
}

}  // namespace

MarketState ProbeSpec::state(const ExpSumKernel& kernel) const {
    const std::size_t n = kernel.size();
    MarketState s = MarketState::zero(n, inventory);
    auto fill = [&](std::vector<double>& c, const std::optional<double>& theta,
                    const std::optional<std::vector<double>>& explicit_c, const char* side) {
        if (theta) {
            for (std::size_t d = 0; d < n; ++d) c[d] = *theta * kernel.weights()[d];
        } else if (explicit_c) {
            if (explicit_c->size() != n) {
                throw ConfigError(std::string("probe c_") + side + " has " + std::to_string(explicit_c->size()) +
                                  " entries, the kernel has " + std::to_string(n));
            }
            c = *explicit_c;
        }
    };
    fill(s.c_ask, theta_ask, c_ask, "ask");
    fill(s.c_bid, theta_bid, c_bid, "bid");
    return s;
}

hjb::GridSpec make_grid(const Json& grid_keys, const ExpSumKernel& kernel, double mu_base, double k_over_sigma) {
    Json j = grid_keys;
    j["mu_base"] = mu_base;
    j["k_over_sigma"] = k_over_sigma;
    hjb::GridSpec g = grid_from_json(j, &kernel);
    try {
        if (!(g.dt > 0.0)) g = g.with_stable_dt();
        g.validate();
    } catch (const NumericalError& e) {
        throw ConfigError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return g;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
    reject_unknown_keys(j,
                        {"seed", "output_dir", "kernel", "intensity", "grid", "particle", "simulation", "comparison"},
                        "config");
    ExperimentConfig c;
    c.base_dir = base_dir;
    c.seed = opt<std::uint64_t>(j, "seed", c.seed, "config");
    c.output_dir = opt<std::string>(j, "output_dir", c.output_dir, "config");
    try {
        if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"]);
        if (j.contains("intensity")) c.intensity = parse_intensity(j["intensity"], base_dir);
        if (j.contains("grid")) c.grid = GridSection{parse_grid_keys(j["grid"], "grid")};
        if (j.contains("particle")) c.particle = parse_particle(j["particle"]);
        if (j.contains("simulation")) c.simulation = parse_simulation(j["simulation"]);
        if (j.contains("comparison")) c.comparison = parse_comparison(j["comparison"]);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    return from_json(read_json(path), path.parent_path());
}

Json ExperimentConfig::resolved() const {
    Json j{{"seed", seed}, {"output_dir", output_dir}};
    if (kernel) {
        j["kernel"] = Json{{"target", kernel_to_json(kernel->target)},
                           {"n", kernel->n},
                           {"report_T", kernel->report_T},
                           {"inversion", inversion_json(kernel->inversion)}};
    }
    if (intensity) {
        j["intensity"] = Json{{"mu", intensity->mu}, {"k_over_sigma", intensity->k_over_sigma},
                              {"kernel", expsum_json(intensity->kernel)}};
    }
    if (grid && intensity) {
        Json g = grid_to_json(grid_spec());
        g.erase("kernel");
        g.erase("mu_base");
        g.erase("k_over_sigma");
        j["grid"] = g;
    } else if (grid) {
        j["grid"] = grid->grid;
    }
    if (particle) {
        const auto& p = *particle;
        Json probes = Json::array();
        for (const auto& pr : p.probes) probes.push_back(probe_json(pr));
        Json e{{"type", p.expansion.type}};
        if (p.expansion.type == "constant") {
            e["ask"] = p.expansion.ask;
            e["bid"] = p.expansion.bid;
        } else {
            e["proxy"] = p.expansion.proxy;
            e["grid"] = p.expansion.grid;
        }
        j["particle"] = Json{{"lifetime_rate", p.lifetime_rate.value_or(1.0 / p.T)},
                             {"max_particles", p.max_particles},
                             {"n_trees", p.n_trees},
                             {"T", p.T},
                             {"t", p.t},
                             {"short_circuit", p.short_circuit},
                             {"mu_penalty", p.mu_penalty},
                             {"r", p.r},
                             {"expansion", e},
                             {"probes", probes},
                             {"n_values", p.n_values},
                             {"reference_n", p.reference_n}};
    }
    if (simulation) {
        const auto& s = *simulation;
        Json control{{"type", s.control.type}};
        if (s.control.type == "constant") {
            control["ask"] = s.control.ask;
            control["bid"] = s.control.bid;
        }
        j["simulation"] = Json{{"T", s.T},
                               {"mu_penalty", s.mu_penalty},
                               {"initial", probe_json(s.initial)},
                               {"control", control},
                               {"n_episodes", s.n_episodes},
                               {"max_events", s.max_events}};
        if (s.price) {
            j["simulation"]["price"] =
                Json{{"sigma", s.price->sigma}, {"p0", s.price->p0}, {"dt", s.price->dt}, {"drift", s.price->drift}};
        }
    }
    if (comparison) {
        const auto& c = *comparison;
        Json models = Json::array();
        for (const auto& m : c.models) {
            models.push_back(Json{{"name", m.name}, {"mu", m.mu}, {"kernel", expsum_json(m.kernel)}, {"grid", m.grid}});
        }
        Json mc = Json::array();
        for (const auto& pr : c.mc_probes) mc.push_back(probe_json(pr));
        j["comparison"] = Json{{"models", models},
                               {"probe", probe_json(c.probe)},
                               {"slice", Json{{"c_ask", c.slice_c_ask}, {"c_bid", c.slice_c_bid}, {"component", c.slice_component}}},
                               {"n_episodes", c.n_episodes},
                               {"mc_probes", mc}};
    }
    return j;
}

const KernelSection& ExperimentConfig::need_kernel() const {
    if (!kernel) throw ConfigError("config: section 'kernel' is required here");
    return *kernel;
}
const IntensitySection& ExperimentConfig::need_intensity() const {
    if (!intensity) throw ConfigError("config: section 'intensity' is required here");
    return *intensity;
}
const GridSection& ExperimentConfig::need_grid() const {
    if (!grid) throw ConfigError("config: section 'grid' is required here");
    return *grid;
}
const ParticleSection& ExperimentConfig::need_particle() const {
    if (!particle) throw ConfigError("config: section 'particle' is required here");
    return *particle;
}
const SimulationSection& ExperimentConfig::need_simulation() const {
    if (!simulation) throw ConfigError("config: section 'simulation' is required here");
    return *simulation;
}
const ComparisonSection& ExperimentConfig::need_comparison() const {
    if (!comparison) throw ConfigError("config: section 'comparison' is required here");
    return *comparison;
}

IntensitySpec ExperimentConfig::intensity_spec() const {
    const auto& s = need_intensity();
    IntensitySpec spec;
    spec.mu = s.mu;
    spec.kernel = s.kernel;
    spec.k_over_sigma = s.k_over_sigma;
    return spec;
}

hjb::GridSpec ExperimentConfig::grid_spec() const {
    const auto& s = need_intensity();
    return make_grid(need_grid().grid, s.kernel, s.mu, s.k_over_sigma);
}

}  // namespace hawkesmm
