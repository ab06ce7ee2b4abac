#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hawkesmm/hawkes.hpp"
#include "hawkesmm/hjb.hpp"

namespace hawkesmm::marketsim {

/// One closed-loop run of a strategy on [0, T].
struct Episode {
    EventLog log;
    double spread_revenue = 0.0;  // sum of quoted spreads at fills
    double penalty = 0.0;         // -mu int_0^T i_s^2 ds, exact
    double total = 0.0;
    std::uint64_t seed = 0;
    int final_inventory = 0;
};

Episode run_episode(const IntensitySpec& true_spec, Quoter& control, double T, const MarketState& initial,
                    std::uint64_t seed, double mu_penalty, std::size_t max_events = 10'000'000);

struct StrategyValueEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n_episodes = 0;
    std::string strategy;
    std::string model;
    std::vector<double> totals;  // per episode, in episode order
    double mean_fills = 0.0;
};

/// Episode k runs with seed derive_seed(master_seed, k) on its own clone of
/// `control`. Strategies estimated with the same master seed share their
/// event-time randomness, which makes paired differences much tighter.
StrategyValueEstimate estimate_value(const IntensitySpec& true_spec, const Quoter& control, double T,
                                     const MarketState& initial, std::size_t n_episodes,
                                     std::uint64_t master_seed, double mu_penalty, unsigned threads = 0,
                                     std::string strategy = {}, std::string model = {});

/// Mean and standard error of per-episode totals.
StrategyValueEstimate summarize_totals(std::vector<double> totals, std::string strategy = {}, std::string model = {});

struct PairedDifference {
    double mean = 0.0;
    double stderr_ = 0.0;
    /// One-sided 95% lower confidence bound of mean(a - b).
    double lower95() const { return mean - 1.6448536269514722 * stderr_; }
};

/// Statistics of a.totals - b.totals episode by episode.
PairedDifference paired_difference(const StrategyValueEstimate& a, const StrategyValueEstimate& b);

/// Lift coordinates a maker with kernel `to` holds when the true history
/// produced coordinates `c` under kernel `from`. Components of `to` whose
/// rate appears in `from` are exact: the shared event sum of that rate is
/// rescaled by the believed weight. Other rates get a share of the total
/// excitation proportional to their weight.
std::vector<double> project_excitation(const std::vector<double>& c, const ExpSumKernel& from, const ExpSumKernel& to);
MarketState project_state(const MarketState& state, const ExpSumKernel& from, const ExpSumKernel& to);

/// Maker quoting from its own solved model. It keeps a believed lift state
/// driven by its own kernel and the observed fills; the inventory is the
/// true one.
class BeliefQuoter final : public Quoter {
public:
    BeliefQuoter(std::shared_ptr<const hjb::FeedbackTable> table, ExpSumKernel true_kernel);

    void reset(const MarketState& initial) override;
    Spreads quote(double t, const MarketState& state) override;
    void on_fill(double t, Side side) override;
    std::unique_ptr<Quoter> clone() const override;

    const MarketState& belief() const { return belief_; }

private:
    std::shared_ptr<const hjb::FeedbackTable> table_;
    ExpSumKernel true_kernel_;
    MarketState belief_;
};

/// The same strategy as a feedback of the true state: quotes at the
/// projection of the true state. Equals BeliefQuoter on every path when the
/// projection is exact.
FeedbackFunction projected_feedback(std::shared_ptr<const hjb::FeedbackTable> table, const ExpSumKernel& true_kernel);

}  // namespace hawkesmm::marketsim
