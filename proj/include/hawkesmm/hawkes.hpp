#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "hawkesmm/common.hpp"
#include "hawkesmm/kernels.hpp"

namespace hawkesmm {

/// Markovian state of the market maker problem without the price variable:
/// inventory and the per-exponential intensity memories of each side.
struct MarketState {
    int inventory = 0;
    std::vector<double> c_ask;
    std::vector<double> c_bid;
    double clock = 0.0;

    static MarketState zero(std::size_t n, int inventory = 0);

    std::vector<double>& c(Side s) { return s == Side::Ask ? c_ask : c_bid; }
    const std::vector<double>& c(Side s) const { return s == Side::Ask ? c_ask : c_bid; }
    double excitation(Side s) const;  // sum of the c components of one side

    bool operator==(const MarketState&) const = default;
};

/// Baseline intensity and kernel shared by both sides, and the fill
/// sensitivity k / sigma of lambda^delta = exp(-(k/sigma) delta) lambda^0.
struct IntensitySpec {
    double mu = 0.0;
    ExpSumKernel kernel;
    double k_over_sigma = 1.0;
    /// Optional nondecreasing rate map Phi replacing x -> mu + x.
    std::function<double(double)> rate_map;

    void validate() const;
    double phi(double excitation) const { return rate_map ? rate_map(excitation) : mu + excitation; }
};

double base_intensity(const IntensitySpec& spec, const MarketState& state, Side side);

/// exp(-(k/sigma) spread) * base; std::domain_error for negative spread.
double controlled_intensity(const IntensitySpec& spec, const MarketState& state, Side side, double spread);

/// Exact decay of every c component over dt >= 0; clock moves by dt.
MarketState advance(const ExpSumKernel& kernel, MarketState state, double dt);
void advance_in_place(const ExpSumKernel& kernel, MarketState& state, double dt);

/// Jump of one market order: c(side) += weights, inventory -1 on ask, +1 on bid.
MarketState apply_event(const ExpSumKernel& kernel, MarketState state, Side side);
void apply_event_in_place(const ExpSumKernel& kernel, MarketState& state, Side side);

struct Event {
    double time = 0.0;
    Side side = Side::Ask;
    double spread = 0.0;  // quote on the filled side at the fill
    bool operator==(const Event&) const = default;
};

struct EventLog {
    std::vector<Event> events;

    std::size_t count(Side s) const;
    std::vector<double> times(Side s) const;
    void write_csv(std::ostream& os) const;  // header time,side,spread
    static EventLog read_csv(std::istream& is);
    bool operator==(const EventLog&) const = default;
};

struct Spreads {
    double ask = 0.0;
    double bid = 0.0;
    double on(Side s) const { return s == Side::Ask ? ask : bid; }
};

/// A quoting strategy. Stateless feedback controls only implement quote();
/// strategies that filter the event stream with their own beliefs also
/// override reset() and on_fill().
class Quoter {
public:
    virtual ~Quoter() = default;
    virtual void reset(const MarketState& /*initial*/) {}
    virtual Spreads quote(double t, const MarketState& state) = 0;
    virtual void on_fill(double /*t*/, Side /*side*/) {}
    virtual std::unique_ptr<Quoter> clone() const = 0;
};

using FeedbackFunction = std::function<Spreads(double, const MarketState&)>;

class FunctionQuoter final : public Quoter {
public:
    explicit FunctionQuoter(FeedbackFunction f) : f_(std::move(f)) {}
    Spreads quote(double t, const MarketState& s) override { return f_(t, s); }
    std::unique_ptr<Quoter> clone() const override { return std::make_unique<FunctionQuoter>(f_); }

private:
    FeedbackFunction f_;
};

class ConstantQuoter final : public Quoter {
public:
    ConstantQuoter(double ask, double bid) : spreads_{ask, bid} {}
    Spreads quote(double, const MarketState&) override { return spreads_; }
    std::unique_ptr<Quoter> clone() const override { return std::make_unique<ConstantQuoter>(*this); }

private:
    Spreads spreads_;
};

struct SimulationOptions {
    std::size_t max_events = 10'000'000;
    /// Called after every accepted event with the post-jump state.
    std::function<void(const Event&, const MarketState&)> on_event;
};

struct SimulationResult {
    EventLog log;
    MarketState final_state;
    std::size_t candidates = 0;
};

/// Exact Ogata thinning on [state.clock, T]. The dominating rate is the sum
/// of both uncontrolled intensities at the current candidate, valid because
/// they do not increase between events and exp(-(k/sigma) delta) <= 1.
SimulationResult simulate(const IntensitySpec& spec, Quoter& quoter, double T, std::uint64_t seed,
                          MarketState initial, const SimulationOptions& opts = {});

/// Integrated uncontrolled intensity between consecutive events of `side`
/// (spreads assumed zero). Under the model these are i.i.d. Exp(1).
std::vector<double> compensator_increments(const IntensitySpec& spec, const EventLog& log, Side side,
                                           const MarketState& initial);

/// Euler-Maruyama path of dP = d(t, P) dt + sigma dW on a uniform grid.
std::vector<double> simulate_price(const std::function<double(double, double)>& drift, double sigma,
                                   double p0, double T, double dt, std::uint64_t seed);

}  // namespace hawkesmm
