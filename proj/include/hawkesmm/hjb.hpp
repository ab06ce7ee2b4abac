#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hawkesmm/hawkes.hpp"
#include "hawkesmm/kernels.hpp"

namespace hawkesmm::hjb {

/// Discretisation and model parameters of the inventory-penalised problem
///   sup E[ int delta^a dN^a + delta^b dN^b - mu_penalty i^2 ds ]
/// on [0, T] with intensities exp(-(k/sigma) delta) (mu_base + sum c).
struct GridSpec {
    int i_min = -10;
    int i_max = 10;
    std::vector<double> c_max;       // per kernel component, shared by both sides
    std::vector<std::size_t> m_c;    // grid points per component (>= 2)
    double dt = 0.0;                 // <= 0 selects the largest stable step
    double T = 1.0;
    double r = 0.0;
    double mu_penalty = 0.1;
    double k_over_sigma = 20.0;
    double mu_base = 0.1;
    ExpSumKernel kernel;
    std::size_t snapshot_stride = 1;  // keep every k-th time slice (0 and T always kept)

    /// Throws std::invalid_argument when shapes or ranges are inconsistent,
    /// NumericalError when dt violates the explicit-scheme bound.
    void validate() const;

    std::size_t dims() const { return kernel.size(); }
    double spacing(std::size_t d) const { return c_max[d] / static_cast<double>(m_c[d] - 1); }

    /// L such that the explicit upwind scheme is monotone iff dt * L <= 1:
    /// r + sum over both sides of gamma_d c_max_d / dc_d + 2 (mu_base + sum c_max).
    double stability_rate() const;

    std::size_t steps() const;     // number of backward steps
    double step_size() const;      // T / steps()

    /// Copy with dt set to the largest stable step with an integer step count.
    GridSpec with_stable_dt(double safety = 0.95) const;
};

/// Flat indexing of the (i, c^a, c^b) lattice and interpolation stencils.
class StateLattice {
public:
    StateLattice() = default;
    explicit StateLattice(const GridSpec& grid);

    struct Stencil {
        std::vector<std::size_t> index;  // flat per-side indices
        std::vector<double> weight;
    };

    std::size_t dims() const { return dims_; }
    std::size_t inventories() const { return n_inv_; }
    std::size_t side_cells() const { return side_cells_; }
    std::size_t cells() const { return n_inv_ * side_cells_ * side_cells_; }
    int i_min() const { return i_min_; }
    int i_max() const { return i_max_; }

    std::size_t index(int i, std::size_t ka, std::size_t kb) const {
        return (static_cast<std::size_t>(i - i_min_) * side_cells_ + ka) * side_cells_ + kb;
    }
    std::size_t stride(std::size_t d) const { return stride_[d]; }
    std::size_t digit(std::size_t flat, std::size_t d) const { return (flat / stride_[d]) % points_[d]; }
    double coordinate(std::size_t flat, std::size_t d) const {
        return static_cast<double>(digit(flat, d)) * spacing_[d];
    }
    double excitation(std::size_t flat) const { return excitation_[flat]; }

    /// Multilinear stencil of an arbitrary point, clamped to [0, c_max].
    Stencil interpolation(std::span<const double> c) const;
    /// Stencil of c(flat) + kernel weights, clamped at c_max.
    const Stencil& jump(std::size_t flat) const { return jump_[flat]; }

private:
    std::size_t dims_ = 0;
    int i_min_ = 0;
    int i_max_ = 0;
    std::size_t n_inv_ = 0;
    std::size_t side_cells_ = 1;
    std::vector<std::size_t> points_;
    std::vector<std::size_t> stride_;
    std::vector<double> spacing_;
    std::vector<double> c_max_;
    std::vector<double> excitation_;
    std::vector<Stencil> jump_;
};

/// Value function snapshots U(t_k, i, c^a, c^b) on the lattice of `grid`.
class ValueGrid {
public:
    ValueGrid() = default;
    explicit ValueGrid(GridSpec grid);

    const GridSpec& grid() const { return grid_; }
    const StateLattice& lattice() const { return lattice_; }
    const std::vector<std::size_t>& steps() const { return steps_; }
    const std::vector<double>& slice(std::size_t snapshot) const { return slices_[snapshot]; }
    std::size_t snapshots() const { return slices_.size(); }
    double time_of_step(std::size_t step) const { return static_cast<double>(step) * grid_.step_size(); }

    /// Snapshot index holding `step`, or npos.
    std::size_t find_step(std::size_t step) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Interpolated value at time t and an arbitrary state: linear between
    /// snapshots, multilinear in c (clamped). Throws std::out_of_range when
    /// the inventory is outside [i_min, i_max].
    double value_at(double t, const MarketState& state) const;

    /// Jump increments D_a U and D_b U at an arbitrary state, interpolated.
    std::pair<double, double> increments_at(double t, const MarketState& state) const;

    void add_slice(std::size_t step, std::vector<double> values);

    void write_csv(std::ostream& os) const;
    void write_binary(std::ostream& os) const;
    static ValueGrid read_binary(std::istream& is);

private:
    double interpolate(const std::vector<double>& values, const MarketState& state) const;

    GridSpec grid_;
    StateLattice lattice_;
    std::vector<std::size_t> steps_;
    std::vector<std::vector<double>> slices_;
};

/// Optimal spreads (sigma/k - D U)_+ for each snapshot of a ValueGrid.
class FeedbackTable {
public:
    FeedbackTable() = default;
    explicit FeedbackTable(const ValueGrid& values);

    const GridSpec& grid() const { return grid_; }
    const std::vector<std::size_t>& steps() const { return steps_; }
    const std::vector<double>& ask(std::size_t snapshot) const { return ask_[snapshot]; }
    const std::vector<double>& bid(std::size_t snapshot) const { return bid_[snapshot]; }
    std::size_t find_step(std::size_t step) const;

    /// Spreads at time t and an arbitrary state (interpolated, inventory clamped).
    Spreads at(double t, const MarketState& state) const;

    void write_csv(std::ostream& os) const;

private:
    GridSpec grid_;
    StateLattice lattice_;
    std::vector<std::size_t> steps_;
    std::vector<std::vector<double>> ask_;
    std::vector<std::vector<double>> bid_;
};

struct HamiltonianMax {
    double spread;
    double value;
};

/// sup over delta >= 0 of phi e^{-k delta} (delta + I): attained at
/// (1/k - I)_+. Throws std::domain_error for phi < 0.
HamiltonianMax hamiltonian_max(double increment, double phi, double k_over_sigma);

/// phi e^{-k delta} (delta + I) for a given spread.
double hamiltonian_at(double increment, double phi, double k_over_sigma, double spread);

struct SolveOptions {
    unsigned threads = 0;
};

/// One explicit step from the slice at t + dt to the slice at t.
/// `spreads`, when non-null, freezes the control: element [cell] of the ask
/// and bid arrays replaces the supremum (linear evaluation equation).
std::vector<double> step_backward(const std::vector<double>& next, const GridSpec& grid,
                                  const StateLattice& lattice, const SolveOptions& opts = {},
                                  const std::vector<double>* ask_spreads = nullptr,
                                  const std::vector<double>* bid_spreads = nullptr);

struct Solution {
    ValueGrid values;
    FeedbackTable feedback;
};

/// Backward sweep from the zero terminal condition.
Solution solve(const GridSpec& grid, const SolveOptions& opts = {});

/// Value of applying a fixed feedback in the model described by `true_grid`.
/// The control is sampled at every cell and time step t_{k+1} before the
/// step to t_k. Must be safe to call concurrently.
ValueGrid evaluate_fixed_control(const FeedbackFunction& control, const GridSpec& true_grid,
                                 const SolveOptions& opts = {});

/// Same for a table; exact array lookup when the table lives on the true
/// grid at every step, interpolation otherwise.
ValueGrid evaluate_fixed_control(const FeedbackTable& control, const GridSpec& true_grid,
                                 const SolveOptions& opts = {});

}  // namespace hawkesmm::hjb
