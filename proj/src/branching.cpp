#include "hawkesmm/branching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hawkesmm::branching {

double BranchLabel::sign() const {
    if (kind != Kind::Jump) return 1.0;
    int zeros = 0;
    for (std::uint8_t k = 0; k < degree; ++k) zeros += eps[k] == 0 ? 1 : 0;
    return zeros % 2 == 0 ? 1.0 : -1.0;
}

std::size_t BranchLabel::children() const {
    switch (kind) {
        case Kind::Const: return 0;
        case Kind::Linear: return 1;
        case Kind::Jump: return degree;
    }
    return 0;
}

GeneratorPoly::GeneratorPoly(ExpSumKernel kernel, CoefficientFn coefficients, TermMask mask)
    : kernel_(std::move(kernel)), coefficients_(std::move(coefficients)), mask_(mask) {
    if (!coefficients_) throw std::invalid_argument("generator: coefficient function is empty");
    if (mask_.f0) labels_.push_back({BranchLabel::Kind::Const});
    if (mask_.f1) labels_.push_back({BranchLabel::Kind::Linear});
    for (Side side : {Side::Ask, Side::Bid}) {
        const std::size_t j = side_index(side);
        if (mask_.f21[j]) {
            for (std::uint8_t e = 0; e < 2; ++e) labels_.push_back({BranchLabel::Kind::Jump, side, 1, {e, 0}});
        }
        if (mask_.f22[j]) {
            for (std::uint8_t e1 = 0; e1 < 2; ++e1) {
                for (std::uint8_t e2 = 0; e2 < 2; ++e2) {
                    labels_.push_back({BranchLabel::Kind::Jump, side, 2, {e1, e2}});
                }
            }
        }
    }
}

Coefficients GeneratorPoly::coefficients(double t, const MarketState& state) const {
    Coefficients c = coefficients_(t, state);
    if (!mask_.f0) c.f0 = 0.0;
    if (!mask_.f1) c.f1 = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
        if (!mask_.f21[j]) c.f21[j] = 0.0;
        if (!mask_.f22[j]) c.f22[j] = 0.0;
    }
    return c;
}

double GeneratorPoly::evaluate(double t, const MarketState& state, double u, double da, double db) const {
    const Coefficients c = coefficients(t, state);
    return c.f0 + c.f1 * u + c.f21[0] * da + c.f22[0] * da * da + c.f21[1] * db + c.f22[1] * db * db;
}

double GeneratorPoly::coefficient(const BranchLabel& label, const Coefficients& c) const {
    switch (label.kind) {
        case BranchLabel::Kind::Const: return c.f0;
        case BranchLabel::Kind::Linear: return c.f1;
        case BranchLabel::Kind::Jump: {
            const std::size_t j = side_index(label.side);
            return label.degree == 1 ? c.f21[j] : c.f22[j];
        }
    }
    return 0.0;
}

SampledLabel sample_label(Rng& rng, const GeneratorPoly& poly) {
    const auto& labels = poly.labels();
    if (labels.empty()) throw std::invalid_argument("sample_label: the generator has no terms");
    return {labels[rng.index(labels.size())], 1.0 / static_cast<double>(labels.size())};
}

// --------------------------------------------------------------- expansion

ExpansionPoint constant_expansion(double ask, double bid, double k_over_sigma) {
    const double kink = 1.0 / k_over_sigma;
    if (!(ask < kink) || !(bid < kink)) {
        throw std::domain_error("expansion point must lie below sigma/k = " + format_double(kink) +
                                "; above the kink the Hamiltonian is linear, use a state-dependent expansion");
    }
    return [ask, bid](double, const MarketState&) { return std::array<double, 2>{ask, bid}; };
}

MarketState total_excitation_state(const MarketState& state) {
    MarketState out;
    out.inventory = state.inventory;
    out.clock = state.clock;
    out.c_ask = {state.excitation(Side::Ask)};
    out.c_bid = {state.excitation(Side::Bid)};
    return out;
}

ExpansionPoint presolve_expansion(const hjb::ValueGrid& coarse, std::function<MarketState(const MarketState&)> project) {
    return [&coarse, project = std::move(project)](double t, const MarketState& state) {
        MarketState s = project ? project(state) : state;
        const auto& g = coarse.grid();
        s.inventory = std::clamp(s.inventory, g.i_min, g.i_max);
        const auto [da, db] = coarse.increments_at(t, s);
        return std::array<double, 2>{da, db};
    };
}

double kink_fraction(const hjb::ValueGrid& coarse) {
    const auto& g = coarse.grid();
    const auto& lat = coarse.lattice();
    const double kink = 1.0 / g.k_over_sigma;
    std::size_t above = 0, total = 0;
    const std::size_t sc = lat.side_cells();
    for (std::size_t s = 0; s < coarse.snapshots(); ++s) {
        const auto& u = coarse.slice(s);
        for (int i = g.i_min; i <= g.i_max; ++i) {
            const int ia = std::max(i - 1, g.i_min);
            const int ib = std::min(i + 1, g.i_max);
            for (std::size_t ka = 0; ka < sc; ++ka) {
                const auto& ja = lat.jump(ka);
                for (std::size_t kb = 0; kb < sc; ++kb) {
                    const auto& jb = lat.jump(kb);
                    const double here = u[lat.index(i, ka, kb)];
                    double ua = 0.0, ub = 0.0;
                    for (std::size_t e = 0; e < ja.index.size(); ++e) ua += ja.weight[e] * u[lat.index(ia, ja.index[e], kb)];
                    for (std::size_t e = 0; e < jb.index.size(); ++e) ub += jb.weight[e] * u[lat.index(ib, ka, jb.index[e])];
                    above += (ua - here >= kink ? 1 : 0) + (ub - here >= kink ? 1 : 0);
                    total += 2;
                }
            }
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(above) / static_cast<double>(total);
}

std::array<double, 3> hamiltonian_derivatives(double increment, double phi, double k_over_sigma) {
    const double kink = 1.0 / k_over_sigma;
    if (increment >= kink) return {phi * increment, phi, 0.0};
    const double e = phi * std::exp(k_over_sigma * increment - 1.0);
    return {e * kink, e, e * k_over_sigma};
}

GeneratorPoly taylor_generator(const IntensitySpec& spec, double mu_penalty, ExpansionPoint expansion, double r) {
    spec.validate();
    if (!(mu_penalty >= 0.0)) throw std::invalid_argument("taylor_generator: mu_penalty must be >= 0");
    if (!expansion) throw std::invalid_argument("taylor_generator: expansion point is empty");
    const bool has_flow = spec.rate_map ? true : (spec.mu > 0.0 || !spec.kernel.empty());
    TermMask mask;
    mask.f0 = has_flow || mu_penalty > 0.0;
    mask.f1 = r != 0.0;
    mask.f21 = {has_flow, has_flow};
    mask.f22 = {has_flow, has_flow};
    auto fn = [spec, mu_penalty, expansion = std::move(expansion), r](double t, const MarketState& s) {
        Coefficients c;
        const double i = static_cast<double>(s.inventory);
        c.f0 = -mu_penalty * i * i;
        c.f1 = -r;
        const auto i0 = expansion(t, s);
        for (Side side : {Side::Ask, Side::Bid}) {
            const std::size_t j = side_index(side);
            const double phi = spec.phi(s.excitation(side));
            const auto [h0, h1, h2] = hamiltonian_derivatives(i0[j], phi, spec.k_over_sigma);
            c.f0 += h0 - h1 * i0[j] + 0.5 * h2 * i0[j] * i0[j];
            c.f21[j] = h1 - h2 * i0[j];
            c.f22[j] = 0.5 * h2;
        }
        return c;
    };
    return GeneratorPoly(spec.kernel, std::move(fn), mask);
}

// ---------------------------------------------------------------- particles

namespace {

struct TreeRun {
    const GeneratorPoly& poly;
    const ParticleConfig& cfg;
    Rng& rng;
    TreeStats& stats;

    double particle(double t, const MarketState& state) {
        if (++stats.particles > cfg.max_particles) {
            throw NumericalError("branching tree exceeded " + std::to_string(cfg.max_particles) +
                                 " particles; reduce T or the lifetime rate");
        }
        const double tau = rng.exponential(cfg.lifetime_rate);
        if (t + tau >= cfg.T) return 0.0;
        const double s = t + tau;
        const MarketState x = advance(poly.kernel(), state, tau);
        const auto& labels = poly.labels();
        const std::size_t pick = rng.index(labels.size());
        const BranchLabel& label = labels[pick];
        const double p = 1.0 / static_cast<double>(labels.size());
        stats.labels += 1;
        stats.log_inverse_probability -= std::log(p);
        stats.label_counts[pick] += 1;

        const double density = cfg.lifetime_rate * std::exp(-cfg.lifetime_rate * tau);
        const double coef = poly.coefficient(label, poly.coefficients(s, x));
        double weight = label.sign() * coef / (p * density);
        if (!std::isfinite(weight)) throw NumericalError("branching weight is not finite");

        for (std::size_t k = 0; k < label.children(); ++k) {
            double child;
            if (label.kind == BranchLabel::Kind::Jump && label.eps[k] == 1) {
                child = particle(s, apply_event(poly.kernel(), x, label.side));
            } else {
                child = particle(s, x);
            }
            weight *= child;
            if (weight == 0.0 && cfg.short_circuit) return 0.0;
        }
        return weight;
    }
};

}  // namespace

double run_particle(double t, const MarketState& state, const GeneratorPoly& poly, const ParticleConfig& cfg, Rng& rng,
                    TreeStats* stats) {
    if (!(cfg.lifetime_rate > 0.0)) throw std::invalid_argument("particle: lifetime_rate must be > 0");
    if (!(t < cfg.T)) throw std::invalid_argument("particle: need t < T");
    TreeStats local;
    TreeStats& st = stats ? *stats : local;
    st = TreeStats{};
    st.label_counts.assign(poly.labels().size(), 0);
    if (poly.labels().empty()) return 0.0;
    TreeRun run{poly, cfg, rng, st};
    return run.particle(t, state);
}

Estimate estimate_u(double t, const MarketState& state, const GeneratorPoly& poly, const ParticleConfig& cfg,
                    std::size_t n_trees, unsigned threads) {
    if (n_trees < 2) throw std::invalid_argument("estimate_u: need at least 2 trees");
    Estimate e;
    e.n_trees = n_trees;
    e.samples.resize(n_trees);
    e.tree_sizes.resize(n_trees);
    parallel_for(n_trees, threads, [&](std::size_t k) {
        Rng rng(derive_seed(cfg.seed, k));
        TreeStats st;
        e.samples[k] = run_particle(t, state, poly, cfg, rng, &st);
        e.tree_sizes[k] = st.particles;
    });
    double sum = 0.0;
    for (double x : e.samples) sum += x;
    e.mean = sum / static_cast<double>(n_trees);
    double ss = 0.0;
    for (double x : e.samples) ss += (x - e.mean) * (x - e.mean);
    e.stderr_ = std::sqrt(ss / static_cast<double>(n_trees - 1) / static_cast<double>(n_trees));
    std::size_t total = 0;
    for (std::size_t s : e.tree_sizes) {
        total += s;
        e.max_tree_size = std::max(e.max_tree_size, s);
    }
    e.mean_tree_size = static_cast<double>(total) / static_cast<double>(n_trees);
    return e;
}

std::string estimate_csv_header(std::size_t n) {
    std::string h = "t,i";
    for (std::size_t d = 0; d < n; ++d) h += ",c_a" + std::to_string(d + 1);
    for (std::size_t d = 0; d < n; ++d) h += ",c_b" + std::to_string(d + 1);
    return h + ",mean,stderr,n_trees,mean_tree_size";
}

std::string estimate_csv_row(double t, const MarketState& state, const Estimate& e) {
    std::ostringstream os;
    os << format_double(t) << ',' << state.inventory;
    for (double c : state.c_ask) os << ',' << format_double(c);
    for (double c : state.c_bid) os << ',' << format_double(c);
    os << ',' << format_double(e.mean) << ',' << format_double(e.stderr_) << ',' << e.n_trees << ','
       << format_double(e.mean_tree_size);
    return os.str();
}

}  // namespace hawkesmm::branching
