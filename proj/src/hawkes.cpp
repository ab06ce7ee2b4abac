#include "hawkesmm/hawkes.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hawkesmm {

MarketState MarketState::zero(std::size_t n, int inventory) {
    MarketState s;
    s.inventory = inventory;
    s.c_ask.assign(n, 0.0);
    s.c_bid.assign(n, 0.0);
    return s;
}

double MarketState::excitation(Side s) const {
    const auto& v = c(s);
    return std::accumulate(v.begin(), v.end(), 0.0);
}

void IntensitySpec::validate() const {
    if (!rate_map && !(mu >= 0.0)) throw std::invalid_argument("intensity: mu must be >= 0");
    if (!(k_over_sigma > 0.0)) throw std::invalid_argument("intensity: k_over_sigma must be > 0");
}

double base_intensity(const IntensitySpec& spec, const MarketState& state, Side side) {
    return spec.phi(state.excitation(side));
}

double controlled_intensity(const IntensitySpec& spec, const MarketState& state, Side side, double spread) {
    if (!(spread >= 0.0)) throw std::domain_error("spread must be >= 0, got " + format_double(spread));
    return std::exp(-spec.k_over_sigma * spread) * base_intensity(spec, state, side);
}

void advance_in_place(const ExpSumKernel& kernel, MarketState& state, double dt) {
    if (!(dt >= 0.0)) throw std::domain_error("advance needs dt >= 0");
    if (dt == 0.0) return;
    const auto& rates = kernel.rates();
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double decay = std::exp(-rates[i] * dt);
        state.c_ask[i] *= decay;
        state.c_bid[i] *= decay;
    }
    state.clock += dt;
}

MarketState advance(const ExpSumKernel& kernel, MarketState state, double dt) {
    advance_in_place(kernel, state, dt);
    return state;
}

void apply_event_in_place(const ExpSumKernel& kernel, MarketState& state, Side side) {
    auto& c = state.c(side);
    const auto& w = kernel.weights();
    for (std::size_t i = 0; i < w.size(); ++i) c[i] += w[i];
    state.inventory += side == Side::Ask ? -1 : 1;
}

MarketState apply_event(const ExpSumKernel& kernel, MarketState state, Side side) {
    apply_event_in_place(kernel, state, side);
    return state;
}

// ------------------------------------------------------------------ EventLog

std::size_t EventLog::count(Side s) const {
    std::size_t k = 0;
    for (const auto& e : events) k += e.side == s ? 1 : 0;
    return k;
}

std::vector<double> EventLog::times(Side s) const {
    std::vector<double> out;
    for (const auto& e : events) {
        if (e.side == s) out.push_back(e.time);
    }
    return out;
}

void EventLog::write_csv(std::ostream& os) const {
    os << "time,side,spread\n";
    for (const auto& e : events) {
        os << format_double(e.time) << ',' << to_string(e.side) << ',' << format_double(e.spread) << '\n';
    }
}

EventLog EventLog::read_csv(std::istream& is) {
    EventLog log;
    std::string line;
    if (!std::getline(is, line) || line != "time,side,spread") {
        throw std::invalid_argument("event log CSV: missing header time,side,spread");
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string time, side, spread;
        if (!std::getline(row, time, ',') || !std::getline(row, side, ',') || !std::getline(row, spread)) {
            throw std::invalid_argument("event log CSV: malformed row '" + line + "'");
        }
        log.events.push_back({std::stod(time), side_from_string(side), std::stod(spread)});
    }
    return log;
}

// ---------------------------------------------------------------- simulation

SimulationResult simulate(const IntensitySpec& spec, Quoter& quoter, double T, std::uint64_t seed,
                          MarketState initial, const SimulationOptions& opts) {
    spec.validate();
    if (!(T > 0.0)) throw std::invalid_argument("simulate needs T > 0");
    const std::size_t n = spec.kernel.size();
    if (initial.c_ask.size() != n || initial.c_bid.size() != n) {
        throw std::invalid_argument("initial state dimension does not match the kernel");
    }
    Rng rng(seed);
    SimulationResult out;
    MarketState& state = out.final_state;
    state = std::move(initial);
    quoter.reset(state);

    double t = state.clock;
    while (t < T) {
        const double base_ask = base_intensity(spec, state, Side::Ask);
        const double base_bid = base_intensity(spec, state, Side::Bid);
        const double bound = base_ask + base_bid;
        if (!(bound > 0.0)) {
            advance_in_place(spec.kernel, state, T - t);
            break;
        }
        const double candidate = t + rng.exponential(bound);
        const double u = rng.uniform() * bound;
        if (candidate >= T) {
            advance_in_place(spec.kernel, state, T - t);
            break;
        }
        advance_in_place(spec.kernel, state, candidate - t);
        t = candidate;
        ++out.candidates;

        const Spreads q = quoter.quote(t, state);
        const double la = controlled_intensity(spec, state, Side::Ask, q.ask);
        const double lb = controlled_intensity(spec, state, Side::Bid, q.bid);
        if (la + lb > bound * (1.0 + 1e-12)) {
            throw NumericalError("thinning acceptance ratio exceeds one; the rate map is not nondecreasing");
        }
        Side side;
        if (u < la) {
            side = Side::Ask;
        } else if (u < la + lb) {
            side = Side::Bid;
        } else {
            continue;
        }
        apply_event_in_place(spec.kernel, state, side);
        const Event ev{t, side, q.on(side)};
        out.log.events.push_back(ev);
        quoter.on_fill(t, side);
        if (opts.on_event) opts.on_event(ev, state);
        if (out.log.events.size() > opts.max_events) {
            throw NumericalError("more than " + std::to_string(opts.max_events) +
                                 " events simulated; the kernel L1 norm is likely >= 1 (explosive flow)");
        }
    }
    state.clock = T;
    return out;
}

std::vector<double> compensator_increments(const IntensitySpec& spec, const EventLog& log, Side side,
                                           const MarketState& initial) {
    if (spec.rate_map) throw std::invalid_argument("compensator_increments supports the affine rate map only");
    const auto& w = spec.kernel.weights();
    const auto& r = spec.kernel.rates();
    std::vector<double> c = initial.c(side);
    double last = initial.clock;
    double acc = 0.0;
    std::vector<double> out;
    for (const auto& e : log.events) {
        const double dt = e.time - last;
        acc += spec.mu * dt;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double decay = std::exp(-r[i] * dt);
            acc += c[i] * (1.0 - decay) / r[i];
            c[i] *= decay;
        }
        last = e.time;
        if (e.side == side) {
            out.push_back(acc);
            acc = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += w[i];
        }
    }
    return out;
}

std::vector<double> simulate_price(const std::function<double(double, double)>& drift, double sigma,
                                   double p0, double T, double dt, std::uint64_t seed) {
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("simulate_price needs T > 0 and dt > 0");
    const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    Rng rng(seed);
    std::vector<double> path(steps + 1);
    path[0] = p0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double h = std::min(dt, T - t);
        // Box-Muller from two portable uniforms.
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        path[k + 1] = path[k] + drift(t, path[k]) * h + sigma * std::sqrt(h) * g;
    }
    return path;
}

}  // namespace hawkesmm
