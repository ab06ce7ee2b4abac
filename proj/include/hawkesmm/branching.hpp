#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "hawkesmm/common.hpp"
#include "hawkesmm/hawkes.hpp"
#include "hawkesmm/hjb.hpp"

namespace hawkesmm::branching {

/// Coefficients of f(U, D_a U, D_b U) = f0 + f1 U + sum_j f21_j D_j U + f22_j (D_j U)^2
/// at one (t, state). Index 0 is the ask side, 1 the bid side.
struct Coefficients {
    double f0 = 0.0;
    double f1 = 0.0;
    std::array<double, 2> f21{0.0, 0.0};
    std::array<double, 2> f22{0.0, 0.0};
};

/// Which polynomial terms exist. Absent terms get no branch label.
struct TermMask {
    bool f0 = true;
    bool f1 = true;
    std::array<bool, 2> f21{true, true};
    std::array<bool, 2> f22{true, true};
};

struct BranchLabel {
    enum class Kind : std::uint8_t { Const, Linear, Jump };
    Kind kind = Kind::Const;
    Side side = Side::Ask;                 // Jump only
    std::uint8_t degree = 0;               // Jump only: 1 or 2
    std::array<std::uint8_t, 2> eps{0, 0};  // Jump only: child k sits at x + eps[k] * Delta^side

    /// (-1)^(degree - sum eps) for jump labels, +1 otherwise.
    double sign() const;
    std::size_t children() const;
    bool operator==(const BranchLabel&) const = default;
};

/// Second-order polynomial generator of the semilinear equation
///   d_t U + L U + f(U, D_a U, D_b U) = 0,  U(T) = 0,
/// where L is the decay drift of the exp-sum lift and D_j are the jump
/// differences of one ask or bid event under `kernel`.
class GeneratorPoly {
public:
    using CoefficientFn = std::function<Coefficients(double, const MarketState&)>;

    GeneratorPoly() = default;
    GeneratorPoly(ExpSumKernel kernel, CoefficientFn coefficients, TermMask mask);

    const ExpSumKernel& kernel() const { return kernel_; }
    const TermMask& mask() const { return mask_; }
    const std::vector<BranchLabel>& labels() const { return labels_; }

    /// Coefficients with absent terms zeroed.
    Coefficients coefficients(double t, const MarketState& state) const;
    /// f evaluated at (U, D_a U, D_b U).
    double evaluate(double t, const MarketState& state, double u, double da, double db) const;
    /// Coefficient multiplying the monomial selected by `label`.
    double coefficient(const BranchLabel& label, const Coefficients& c) const;

private:
    ExpSumKernel kernel_;
    CoefficientFn coefficients_;
    TermMask mask_;
    std::vector<BranchLabel> labels_;
};

struct SampledLabel {
    BranchLabel label;
    double probability;
};

/// Uniform draw over poly.labels(); std::invalid_argument on an empty set.
SampledLabel sample_label(Rng& rng, const GeneratorPoly& poly);

/// Point of expansion (I0_ask, I0_bid) of the Hamiltonian at a given (t, state).
using ExpansionPoint = std::function<std::array<double, 2>(double, const MarketState&)>;

/// Constant expansion point; std::domain_error unless both are below sigma/k.
ExpansionPoint constant_expansion(double ask, double bid, double k_over_sigma);

/// Expansion at the jump increments of a coarse pre-solve, read by
/// interpolation (inventory clamped to the grid). `project` maps a state of
/// the estimated model to a state of the pre-solve model.
ExpansionPoint presolve_expansion(const hjb::ValueGrid& coarse,
                                  std::function<MarketState(const MarketState&)> project = {});

/// Map from a state with arbitrary exp-sum dimension onto a one-component
/// model: the total excitation of each side.
MarketState total_excitation_state(const MarketState& state);

/// Fraction of pre-solve cells (all snapshots, both sides) whose jump
/// increment is at or above sigma/k, where the Hamiltonian is linear.
double kink_fraction(const hjb::ValueGrid& coarse);

/// Taylor expansion to second order of H_j(I) = sup_delta phi_j e^{-(k/sigma) delta}(delta + I)
/// around I0_j, plus the running penalty -mu_penalty i^2 and discount -r U.
/// Where I0 >= sigma/k the Hamiltonian is linear and reproduced exactly.
GeneratorPoly taylor_generator(const IntensitySpec& spec, double mu_penalty, ExpansionPoint expansion,
                               double r = 0.0);

/// Derivatives (H, H', H'') of the exact Hamiltonian at I.
std::array<double, 3> hamiltonian_derivatives(double increment, double phi, double k_over_sigma);

struct ParticleConfig {
    double lifetime_rate = 1.0;         // rho = Exp(lifetime_rate)
    std::size_t max_particles = 1'000'000;
    double T = 1.0;
    std::uint64_t seed = 0;
    /// Stop expanding a tree once a particle outlives T (the product is
    /// then zero). Changes tree-size statistics, not the estimator.
    bool short_circuit = true;
};

struct TreeStats {
    std::size_t particles = 0;
    std::size_t labels = 0;
    double log_inverse_probability = 0.0;  // sum of -log P(label) over drawn labels
    std::vector<std::size_t> label_counts;  // per entry of poly.labels()
};

/// One tree's product estimate of U(t, state).
double run_particle(double t, const MarketState& state, const GeneratorPoly& poly, const ParticleConfig& cfg,
                    Rng& rng, TreeStats* stats = nullptr);

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n_trees = 0;
    double mean_tree_size = 0.0;
    std::size_t max_tree_size = 0;
    std::vector<double> samples;
    std::vector<std::size_t> tree_sizes;
};

/// Mean and standard error over n_trees independent trees. Tree k uses the
/// stream derive_seed(cfg.seed, k), so results do not depend on `threads`.
Estimate estimate_u(double t, const MarketState& state, const GeneratorPoly& poly, const ParticleConfig& cfg,
                    std::size_t n_trees, unsigned threads = 0);

/// Header "t,i,c...,mean,stderr,n_trees,mean_tree_size" for states with n
/// components per side; c lists ask components then bid components.
std::string estimate_csv_header(std::size_t n);
std::string estimate_csv_row(double t, const MarketState& state, const Estimate& e);

}  // namespace hawkesmm::branching
