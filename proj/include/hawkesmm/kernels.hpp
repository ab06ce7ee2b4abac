#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hawkesmm/laplace.hpp"

namespace hawkesmm {

/// K(t) = sum_i w_i exp(-r_i t). Weights are intensity jumps, rates are in
/// 1/time. Zero terms is allowed and denotes the zero kernel (Poisson flow).
class ExpSumKernel {
public:
    ExpSumKernel() = default;
    ExpSumKernel(std::vector<double> weights, std::vector<double> rates);

    std::size_t size() const { return weights_.size(); }
    bool empty() const { return weights_.empty(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& rates() const { return rates_; }

    double eval(double t) const;
    double at_zero() const;
    double l1_norm() const;

    bool operator==(const ExpSumKernel&) const = default;

private:
    std::vector<double> weights_;
    std::vector<double> rates_;
};

/// K(t) = lam / (lam + (t+eps)^alpha) * (t+eps)^(-beta), a completely
/// monotone kernel with power-law tail; eps shifts the singularity at 0.
class PowerLawKernel {
public:
    PowerLawKernel(double lam, double alpha, double beta, double eps);

    double lam() const { return lam_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double eps() const { return eps_; }

    double eval(double t) const;
    double at_zero() const { return eval(0.0); }

    /// Integrable iff alpha + beta > 1. Quadrature on [0, 100] plus the
    /// convergent asymptotic series of the tail.
    double l1_norm() const;

    /// Laplace transform of the unshifted spectral density g, i.e.
    /// lam / ((lam + s^alpha) s^beta). K(t) = int e^{-p(t+eps)} g(p) dp.
    laplace::Transform spectral_transform() const;

    /// e^{-p eps} g(p): the density of the measure m with K(t) = int e^{-pt} m(dp).
    /// Returns the p -> 0 limit (zero) at p = 0.
    double measure_density(double p, const laplace::InversionOptions& opts = {}) const;

    bool operator==(const PowerLawKernel&) const = default;

private:
    double lam_, alpha_, beta_, eps_;
};

using Kernel = std::variant<ExpSumKernel, PowerLawKernel>;

/// Kernel value at t >= 0; std::domain_error for negative t.
double eval(const Kernel& k, double t);
double l1_norm(const Kernel& k);
double at_zero(const Kernel& k);

/// Accuracy of an exp-sum approximation against its target.
struct ApproxReport {
    ExpSumKernel kernel;
    double sup_err = 0.0;  // max |K - K~| on the uniform report grid
    double l1_err = 0.0;   // | ||K||_1 - ||K~||_1 |
    std::size_t n = 0;     // number of Riemann terms requested
    std::size_t clamped_weights = 0;

    std::string csv_row() const;  // "n,sup_err,l1_err"
    static std::string csv_header() { return "n,sup_err,l1_err"; }
};

/// max over `points` uniform nodes of [0, T] of |target - approx|.
double sup_error(const Kernel& target, const ExpSumKernel& approx, double T, std::size_t points = 1000);

/// Adds one exponential a e^{-b t} so that the result has value K0 at zero
/// and L1 norm l1. Returns the input unchanged when it already matches K0.
/// Throws std::domain_error when the input overshoots either target.
ExpSumKernel rescale_match(const ExpSumKernel& kernel, double K0, double l1);

/// How a Riemann cell [a_i, a_{i+1}] of the spectral measure is turned into a weight.
enum class CellRule {
    Quadrature,     // integral of the density over the cell (adaptive Simpson)
    RightEndpoint,  // density(a_{i+1}) * mesh
};

/// Riemann-sum approximation of K(x) = int e^{-ux} m(du) on the grid
/// a_i = i / sqrt(n), i = 0..n; term i has rate a_{i+1}. Throws
/// std::domain_error if the density is negative anywhere it is sampled.
ExpSumKernel riemann_approx(const std::function<double(double)>& measure_density, std::size_t n,
                            CellRule rule = CellRule::Quadrature, double cell_tol = 1e-10);

struct PowerLawApproximation {
    ExpSumKernel kernel;         // n + 1 terms after matching K(0) and the L1 norm
    ExpSumKernel riemann;        // n terms before matching
    std::size_t clamped_weights = 0;  // negative inverted densities set to zero
};

/// Riemann sum of the power-law spectral density with right-endpoint
/// weights e^{-c eps} g(c) / sqrt(n) at rates c = (i+1)/sqrt(n), followed by
/// rescale_match onto the target's K(0) and L1 norm.
PowerLawApproximation approximate_power_law(const PowerLawKernel& target, std::size_t n,
                                            const laplace::InversionOptions& opts = {});

/// Report for an approximation against `target` on [0, T].
ApproxReport make_report(const Kernel& target, const ExpSumKernel& approx, std::size_t n, double T,
                         std::size_t clamped = 0);

/// Per-exponential lift coordinates c_i(t) = sum_j w_i exp(-r_i (t - T_j))
/// for event times T_j <= t.
std::vector<double> theta_to_c(std::span<const double> jump_times, const ExpSumKernel& kernel, double t);

}  // namespace hawkesmm
