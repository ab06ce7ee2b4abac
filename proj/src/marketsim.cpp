#include "hawkesmm/marketsim.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hawkesmm::marketsim {
namespace {

constexpr double kSameRate = 1e-12;

}  // namespace

Episode run_episode(const IntensitySpec& true_spec, Quoter& control, double T, const MarketState& initial,
                    std::uint64_t seed, double mu_penalty, std::size_t max_events) {
    if (!(mu_penalty >= 0.0)) throw std::invalid_argument("episode: mu_penalty must be >= 0");
    Episode ep;
    ep.seed = seed;
    double last = initial.clock;
    int inventory = initial.inventory;
    double dwell = 0.0;
    SimulationOptions opts;
    opts.max_events = max_events;
    opts.on_event = [&](const Event& e, const MarketState& after) {
        const double di = static_cast<double>(inventory);
        dwell += di * di * (e.time - last);
        ep.spread_revenue += e.spread;
        last = e.time;
        inventory = after.inventory;
    };
    auto result = simulate(true_spec, control, T, seed, initial, opts);
    const double di = static_cast<double>(inventory);
    dwell += di * di * (T - last);
    ep.penalty = -mu_penalty * dwell;
    ep.total = ep.spread_revenue + ep.penalty;
    ep.final_inventory = result.final_state.inventory;
    ep.log = std::move(result.log);
    return ep;
}

StrategyValueEstimate estimate_value(const IntensitySpec& true_spec, const Quoter& control, double T,
                                     const MarketState& initial, std::size_t n_episodes, std::uint64_t master_seed,
                                     double mu_penalty, unsigned threads, std::string strategy, std::string model) {
    if (n_episodes < 2) throw std::invalid_argument("estimate_value: need at least 2 episodes");
    std::vector<double> totals(n_episodes);
    std::vector<std::size_t> fills(n_episodes);
    parallel_for(n_episodes, threads, [&](std::size_t k) {
        auto q = control.clone();
        const Episode ep = run_episode(true_spec, *q, T, initial, derive_seed(master_seed, k), mu_penalty);
        totals[k] = ep.total;
        fills[k] = ep.log.events.size();
    });
    StrategyValueEstimate out = summarize_totals(std::move(totals), std::move(strategy), std::move(model));
    out.mean_fills = static_cast<double>(std::accumulate(fills.begin(), fills.end(), std::size_t{0})) /
                     static_cast<double>(n_episodes);
    return out;
}

StrategyValueEstimate summarize_totals(std::vector<double> totals, std::string strategy, std::string model) {
    if (totals.size() < 2) throw std::invalid_argument("summarize_totals: need at least 2 episodes");
    StrategyValueEstimate out;
    out.strategy = std::move(strategy);
    out.model = std::move(model);
    out.n_episodes = totals.size();
    const auto n = static_cast<double>(totals.size());
    double sum = 0.0;
    for (double x : totals) sum += x;
    out.mean = sum / n;
    double ss = 0.0;
    for (double x : totals) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    out.totals = std::move(totals);
    return out;
}

PairedDifference paired_difference(const StrategyValueEstimate& a, const StrategyValueEstimate& b) {
    if (a.totals.size() != b.totals.size() || a.totals.size() < 2) {
        throw std::invalid_argument("paired_difference: estimates need the same number (>= 2) of episodes");
    }
    const std::size_t n = a.totals.size();
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += a.totals[k] - b.totals[k];
    PairedDifference d;
    d.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = a.totals[k] - b.totals[k] - d.mean;
        ss += x * x;
    }
    d.stderr_ = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    return d;
}

std::vector<double> project_excitation(const std::vector<double>& c, const ExpSumKernel& from, const ExpSumKernel& to) {
    if (c.size() != from.size()) throw std::invalid_argument("project_excitation: state does not match its kernel");
    if (from == to) return c;
    const double total = std::accumulate(c.begin(), c.end(), 0.0);
    const auto& wt = to.weights();
    const double to_weight = std::accumulate(wt.begin(), wt.end(), 0.0);
    std::vector<double> out(to.size(), 0.0);
    for (std::size_t k = 0; k < to.size(); ++k) {
        const double rate = to.rates()[k];
        double group_c = 0.0, group_w = 0.0;
        for (std::size_t i = 0; i < from.size(); ++i) {
            if (std::abs(from.rates()[i] - rate) <= kSameRate * std::max(1.0, rate)) {
                group_c += c[i];
                group_w += from.weights()[i];
            }
        }
        if (group_w > 0.0) {
            out[k] = wt[k] * group_c / group_w;
        } else if (to_weight > 0.0) {
            out[k] = total * wt[k] / to_weight;
        }
    }
    return out;
}

MarketState project_state(const MarketState& state, const ExpSumKernel& from, const ExpSumKernel& to) {
    MarketState out;
    out.inventory = state.inventory;
    out.clock = state.clock;
    out.c_ask = project_excitation(state.c_ask, from, to);
    out.c_bid = project_excitation(state.c_bid, from, to);
    return out;
}

BeliefQuoter::BeliefQuoter(std::shared_ptr<const hjb::FeedbackTable> table, ExpSumKernel true_kernel)
    : table_(std::move(table)), true_kernel_(std::move(true_kernel)) {
    if (!table_) throw std::invalid_argument("BeliefQuoter: no feedback table");
}

void BeliefQuoter::reset(const MarketState& initial) {
    belief_ = project_state(initial, true_kernel_, table_->grid().kernel);
}

Spreads BeliefQuoter::quote(double t, const MarketState& state) {
    advance_in_place(table_->grid().kernel, belief_, t - belief_.clock);
    belief_.inventory = state.inventory;
    return table_->at(t, belief_);
}

void BeliefQuoter::on_fill(double t, Side side) {
    advance_in_place(table_->grid().kernel, belief_, t - belief_.clock);
    const int inventory = belief_.inventory;
    apply_event_in_place(table_->grid().kernel, belief_, side);
    belief_.inventory = inventory;
}

std::unique_ptr<Quoter> BeliefQuoter::clone() const { return std::make_unique<BeliefQuoter>(*this); }

FeedbackFunction projected_feedback(std::shared_ptr<const hjb::FeedbackTable> table, const ExpSumKernel& true_kernel) {
    if (!table) throw std::invalid_argument("projected_feedback: no feedback table");
    return [table, true_kernel](double t, const MarketState& s) {
        return table->at(t, project_state(s, true_kernel, table->grid().kernel));
    };
}

}  // namespace hawkesmm::marketsim
