#include "hawkesmm/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "hawkesmm/serialization.hpp"

namespace hawkesmm::hjb {
namespace {

constexpr char kMagic[8] = {'H', 'M', 'M', 'V', 'G', 'R', 'I', 'D'};
constexpr std::uint32_t kBinaryVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError("value grid snapshot is truncated");
    return v;
}

// Bracketing snapshots of step position x (in units of dt) and the weight
// of the upper one.
struct TimeBracket {
    std::size_t lo, hi;
    double w_hi;
};

TimeBracket bracket(const std::vector<std::size_t>& steps, double x) {
    if (steps.empty()) throw std::logic_error("no snapshots stored");
    if (x <= static_cast<double>(steps.front())) return {0, 0, 0.0};
    if (x >= static_cast<double>(steps.back())) return {steps.size() - 1, steps.size() - 1, 0.0};
    const auto it = std::upper_bound(steps.begin(), steps.end(), x,
                                     [](double v, std::size_t s) { return v < static_cast<double>(s); });
    const std::size_t hi = static_cast<std::size_t>(it - steps.begin());
    const std::size_t lo = hi - 1;
    const double span = static_cast<double>(steps[hi] - steps[lo]);
    return {lo, hi, (x - static_cast<double>(steps[lo])) / span};
}

double pair_interpolate(const StateLattice& lat, const std::vector<double>& values, int i,
                        const StateLattice::Stencil& sa, const StateLattice::Stencil& sb) {
    double acc = 0.0;
    for (std::size_t a = 0; a < sa.index.size(); ++a) {
        for (std::size_t b = 0; b < sb.index.size(); ++b) {
            acc += sa.weight[a] * sb.weight[b] * values[lat.index(i, sa.index[a], sb.index[b])];
        }
    }
    return acc;
}

std::vector<double> shifted(const std::vector<double>& c, const ExpSumKernel& k) {
    std::vector<double> out = c;
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += k.weights()[d];
    return out;
}

void check_state(const GridSpec& g, const MarketState& s) {
    if (s.c_ask.size() != g.dims() || s.c_bid.size() != g.dims()) {
        throw std::invalid_argument("state dimension does not match the grid kernel");
    }
}

}  // namespace

// -------------------------------------------------------------------- GridSpec

void GridSpec::validate() const {
    if (!(i_min < 0 && 0 < i_max)) throw std::invalid_argument("grid: need i_min < 0 < i_max");
    const std::size_t n = kernel.size();
    if (c_max.size() != n || m_c.size() != n) {
        throw std::invalid_argument("grid: c_max and m_c need one entry per kernel component");
    }
    for (std::size_t d = 0; d < n; ++d) {
        if (m_c[d] < 2) throw std::invalid_argument("grid: m_c must be >= 2");
        if (!(c_max[d] > kernel.weights()[d])) {
            throw std::invalid_argument("grid: c_max must exceed the kernel weight in every component");
        }
    }
    if (!(T > 0.0)) throw std::invalid_argument("grid: T must be > 0");
    if (!(r >= 0.0)) throw std::invalid_argument("grid: r must be >= 0");
    if (!(mu_penalty >= 0.0)) throw std::invalid_argument("grid: mu_penalty must be >= 0");
    if (!(k_over_sigma > 0.0)) throw std::invalid_argument("grid: k_over_sigma must be > 0");
    if (!(mu_base >= 0.0)) throw std::invalid_argument("grid: mu_base must be >= 0");
    if (snapshot_stride == 0) throw std::invalid_argument("grid: snapshot_stride must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("grid: dt must be > 0 (use with_stable_dt)");
    const double bound = step_size() * stability_rate();
    if (bound > 1.0 + 1e-12) {
        throw NumericalError("grid: dt * (r + sum gamma c_max / dc + 2 sup phi) = " + format_double(bound) +
                             " exceeds 1; reduce dt below " + format_double(1.0 / stability_rate()));
    }
}

double GridSpec::stability_rate() const {
    double drift = 0.0;
    double sup_excitation = 0.0;
    for (std::size_t d = 0; d < kernel.size(); ++d) {
        drift += 2.0 * kernel.rates()[d] * c_max[d] / spacing(d);
        sup_excitation += c_max[d];
    }
    return r + drift + 2.0 * (mu_base + sup_excitation);
}

std::size_t GridSpec::steps() const {
    if (!(dt > 0.0)) throw std::invalid_argument("grid: dt must be > 0");
    return static_cast<std::size_t>(std::max(1.0, std::ceil(T / dt - 1e-9)));
}

double GridSpec::step_size() const { return T / static_cast<double>(steps()); }

GridSpec GridSpec::with_stable_dt(double safety) const {
    GridSpec g = *this;
    const double rate = stability_rate();
    const auto n = static_cast<std::size_t>(std::ceil(T * rate / safety));
    g.dt = T / static_cast<double>(std::max<std::size_t>(n, 1));
    return g;
}

// ---------------------------------------------------------------- StateLattice

StateLattice::StateLattice(const GridSpec& grid)
    : dims_(grid.dims()),
      i_min_(grid.i_min),
      i_max_(grid.i_max),
      n_inv_(static_cast<std::size_t>(grid.i_max - grid.i_min + 1)),
      points_(grid.m_c),
      stride_(grid.dims()),
      spacing_(grid.dims()),
      c_max_(grid.c_max) {
    side_cells_ = 1;
    for (std::size_t d = dims_; d-- > 0;) {
        stride_[d] = side_cells_;
        side_cells_ *= points_[d];
        spacing_[d] = grid.spacing(d);
    }
    excitation_.resize(side_cells_);
    jump_.resize(side_cells_);
    std::vector<double> c(dims_);
    for (std::size_t flat = 0; flat < side_cells_; ++flat) {
        double sum = 0.0;
        for (std::size_t d = 0; d < dims_; ++d) {
            c[d] = coordinate(flat, d);
            sum += c[d];
        }
        excitation_[flat] = sum;
        for (std::size_t d = 0; d < dims_; ++d) c[d] += grid.kernel.weights()[d];
        jump_[flat] = interpolation(c);
    }
}

StateLattice::Stencil StateLattice::interpolation(std::span<const double> c) const {
    Stencil s;
    s.index.push_back(0);
    s.weight.push_back(1.0);
    for (std::size_t d = 0; d < dims_; ++d) {
        const double x = std::clamp(c[d], 0.0, c_max_[d]) / spacing_[d];
        auto k = static_cast<std::size_t>(std::floor(x));
        if (k >= points_[d] - 1) k = points_[d] - 2;
        double frac = x - static_cast<double>(k);
        if (frac < 1e-9) frac = 0.0;
        if (frac > 1.0 - 1e-9) frac = 1.0;
        Stencil next;
        for (std::size_t e = 0; e < s.index.size(); ++e) {
            if (frac < 1.0) {
                next.index.push_back(s.index[e] + k * stride_[d]);
                next.weight.push_back(s.weight[e] * (1.0 - frac));
            }
            if (frac > 0.0) {
                next.index.push_back(s.index[e] + (k + 1) * stride_[d]);
                next.weight.push_back(s.weight[e] * frac);
            }
        }
        s = std::move(next);
    }
    return s;
}

// ------------------------------------------------------------------ ValueGrid

ValueGrid::ValueGrid(GridSpec grid) : grid_(std::move(grid)), lattice_(grid_) {}

std::size_t ValueGrid::find_step(std::size_t step) const {
    const auto it = std::lower_bound(steps_.begin(), steps_.end(), step);
    return it != steps_.end() && *it == step ? static_cast<std::size_t>(it - steps_.begin()) : npos;
}

void ValueGrid::add_slice(std::size_t step, std::vector<double> values) {
    if (values.size() != lattice_.cells()) throw std::invalid_argument("slice size does not match the lattice");
    const auto it = std::lower_bound(steps_.begin(), steps_.end(), step);
    const auto pos = it - steps_.begin();
    if (it != steps_.end() && *it == step) {
        slices_[static_cast<std::size_t>(pos)] = std::move(values);
        return;
    }
    steps_.insert(it, step);
    slices_.insert(slices_.begin() + pos, std::move(values));
}

double ValueGrid::interpolate(const std::vector<double>& values, const MarketState& state) const {
    if (state.inventory < grid_.i_min || state.inventory > grid_.i_max) {
        throw std::out_of_range("inventory " + std::to_string(state.inventory) + " outside the grid");
    }
    return pair_interpolate(lattice_, values, state.inventory, lattice_.interpolation(state.c_ask),
                            lattice_.interpolation(state.c_bid));
}

double ValueGrid::value_at(double t, const MarketState& state) const {
    check_state(grid_, state);
    const auto b = bracket(steps_, t / grid_.step_size());
    const double lo = interpolate(slices_[b.lo], state);
    if (b.w_hi == 0.0) return lo;
    return (1.0 - b.w_hi) * lo + b.w_hi * interpolate(slices_[b.hi], state);
}

std::pair<double, double> ValueGrid::increments_at(double t, const MarketState& state) const {
    check_state(grid_, state);
    MarketState ask = state;
    ask.inventory = std::max(state.inventory - 1, grid_.i_min);
    ask.c_ask = shifted(state.c_ask, grid_.kernel);
    MarketState bid = state;
    bid.inventory = std::min(state.inventory + 1, grid_.i_max);
    bid.c_bid = shifted(state.c_bid, grid_.kernel);
    const double here = value_at(t, state);
    return {value_at(t, ask) - here, value_at(t, bid) - here};
}

void ValueGrid::write_csv(std::ostream& os) const {
    const std::size_t n = grid_.dims();
    os << "t,i";
    for (std::size_t d = 0; d < n; ++d) os << ",c_a" << d + 1;
    for (std::size_t d = 0; d < n; ++d) os << ",c_b" << d + 1;
    os << ",value\n";
    const std::size_t sc = lattice_.side_cells();
    for (std::size_t s = 0; s < slices_.size(); ++s) {
        const std::string t = format_double(time_of_step(steps_[s]));
        for (int i = grid_.i_min; i <= grid_.i_max; ++i) {
            for (std::size_t ka = 0; ka < sc; ++ka) {
                for (std::size_t kb = 0; kb < sc; ++kb) {
                    os << t << ',' << i;
                    for (std::size_t d = 0; d < n; ++d) os << ',' << format_double(lattice_.coordinate(ka, d));
                    for (std::size_t d = 0; d < n; ++d) os << ',' << format_double(lattice_.coordinate(kb, d));
                    os << ',' << format_double(slices_[s][lattice_.index(i, ka, kb)]) << '\n';
                }
            }
        }
    }
}

void ValueGrid::write_binary(std::ostream& os) const {
    os.write(kMagic, sizeof kMagic);
    put(os, kBinaryVersion);
    const std::string header = grid_to_json(grid_).dump();
    put(os, static_cast<std::uint64_t>(header.size()));
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    put(os, static_cast<std::uint64_t>(lattice_.cells()));
    put(os, static_cast<std::uint64_t>(slices_.size()));
    for (std::size_t s = 0; s < slices_.size(); ++s) {
        put(os, static_cast<std::uint64_t>(steps_[s]));
        os.write(reinterpret_cast<const char*>(slices_[s].data()),
                 static_cast<std::streamsize>(slices_[s].size() * sizeof(double)));
    }
    if (!os) throw IoError("failed writing value grid snapshot");
}

ValueGrid ValueGrid::read_binary(std::istream& is) {
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw IoError("not a value grid snapshot (bad magic)");
    }
    const auto version = get<std::uint32_t>(is);
    if (version != kBinaryVersion) {
        throw IoError("unsupported value grid snapshot version " + std::to_string(version));
    }
    const auto header_size = get<std::uint64_t>(is);
    std::string header(header_size, '\0');
    is.read(header.data(), static_cast<std::streamsize>(header_size));
    if (!is) throw IoError("value grid snapshot is truncated");
    ValueGrid out(grid_from_json(Json::parse(header)));
    const auto cells = get<std::uint64_t>(is);
    if (cells != out.lattice_.cells()) throw IoError("value grid snapshot: cell count does not match its grid");
    const auto count = get<std::uint64_t>(is);
    for (std::uint64_t s = 0; s < count; ++s) {
        const auto step = get<std::uint64_t>(is);
        std::vector<double> values(cells);
        is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(cells * sizeof(double)));
        if (!is) throw IoError("value grid snapshot is truncated");
        out.add_slice(step, std::move(values));
    }
    return out;
}

// -------------------------------------------------------------- FeedbackTable

FeedbackTable::FeedbackTable(const ValueGrid& values)
    : grid_(values.grid()), lattice_(values.lattice()), steps_(values.steps()) {
    const double s = 1.0 / grid_.k_over_sigma;
    const std::size_t sc = lattice_.side_cells();
    for (std::size_t k = 0; k < values.snapshots(); ++k) {
        const auto& u = values.slice(k);
        std::vector<double> ask(u.size()), bid(u.size());
        for (int i = grid_.i_min; i <= grid_.i_max; ++i) {
            const int ia = std::max(i - 1, grid_.i_min);
            const int ib = std::min(i + 1, grid_.i_max);
            for (std::size_t ka = 0; ka < sc; ++ka) {
                const auto& ja = lattice_.jump(ka);
                for (std::size_t kb = 0; kb < sc; ++kb) {
                    const auto& jb = lattice_.jump(kb);
                    const std::size_t idx = lattice_.index(i, ka, kb);
                    double ua = 0.0, ub = 0.0;
                    for (std::size_t e = 0; e < ja.index.size(); ++e) ua += ja.weight[e] * u[lattice_.index(ia, ja.index[e], kb)];
                    for (std::size_t e = 0; e < jb.index.size(); ++e) ub += jb.weight[e] * u[lattice_.index(ib, ka, jb.index[e])];
                    ask[idx] = std::max(s - (ua - u[idx]), 0.0);
                    bid[idx] = std::max(s - (ub - u[idx]), 0.0);
                }
            }
        }
        ask_.push_back(std::move(ask));
        bid_.push_back(std::move(bid));
    }
}

std::size_t FeedbackTable::find_step(std::size_t step) const {
    const auto it = std::lower_bound(steps_.begin(), steps_.end(), step);
    return it != steps_.end() && *it == step ? static_cast<std::size_t>(it - steps_.begin()) : ValueGrid::npos;
}

Spreads FeedbackTable::at(double t, const MarketState& state) const {
    check_state(grid_, state);
    const int i = std::clamp(state.inventory, grid_.i_min, grid_.i_max);
    const auto sa = lattice_.interpolation(state.c_ask);
    const auto sb = lattice_.interpolation(state.c_bid);
    const auto b = bracket(steps_, t / grid_.step_size());
    Spreads out{pair_interpolate(lattice_, ask_[b.lo], i, sa, sb), pair_interpolate(lattice_, bid_[b.lo], i, sa, sb)};
    if (b.w_hi > 0.0) {
        out.ask = (1.0 - b.w_hi) * out.ask + b.w_hi * pair_interpolate(lattice_, ask_[b.hi], i, sa, sb);
        out.bid = (1.0 - b.w_hi) * out.bid + b.w_hi * pair_interpolate(lattice_, bid_[b.hi], i, sa, sb);
    }
    out.ask = std::max(out.ask, 0.0);
    out.bid = std::max(out.bid, 0.0);
    return out;
}

void FeedbackTable::write_csv(std::ostream& os) const {
    const std::size_t n = grid_.dims();
    os << "t,i";
    for (std::size_t d = 0; d < n; ++d) os << ",c_a" << d + 1;
    for (std::size_t d = 0; d < n; ++d) os << ",c_b" << d + 1;
    os << ",ask,bid\n";
    const std::size_t sc = lattice_.side_cells();
    for (std::size_t s = 0; s < steps_.size(); ++s) {
        const std::string t = format_double(static_cast<double>(steps_[s]) * grid_.step_size());
        for (int i = grid_.i_min; i <= grid_.i_max; ++i) {
            for (std::size_t ka = 0; ka < sc; ++ka) {
                for (std::size_t kb = 0; kb < sc; ++kb) {
                    const std::size_t idx = lattice_.index(i, ka, kb);
                    os << t << ',' << i;
                    for (std::size_t d = 0; d < n; ++d) os << ',' << format_double(lattice_.coordinate(ka, d));
                    for (std::size_t d = 0; d < n; ++d) os << ',' << format_double(lattice_.coordinate(kb, d));
                    os << ',' << format_double(ask_[s][idx]) << ',' << format_double(bid_[s][idx]) << '\n';
                }
            }
        }
    }
}

// ------------------------------------------------------------------ Hamiltonian

HamiltonianMax hamiltonian_max(double increment, double phi, double k_over_sigma) {
    if (!(phi >= 0.0)) throw std::domain_error("hamiltonian_max: rate must be >= 0");
    const double spread = std::max(1.0 / k_over_sigma - increment, 0.0);
    return {spread, phi * std::exp(-k_over_sigma * spread) * (spread + increment)};
}

double hamiltonian_at(double increment, double phi, double k_over_sigma, double spread) {
    return phi * std::exp(-k_over_sigma * spread) * (spread + increment);
}

// ---------------------------------------------------------------------- sweep

std::vector<double> step_backward(const std::vector<double>& next, const GridSpec& grid,
                                  const StateLattice& lattice, const SolveOptions& opts,
                                  const std::vector<double>* ask_spreads, const std::vector<double>* bid_spreads) {
    if (next.size() != lattice.cells()) throw std::invalid_argument("step_backward: slice size mismatch");
    const bool frozen = ask_spreads != nullptr && bid_spreads != nullptr;
    const double dt = grid.step_size();
    const double kappa = grid.k_over_sigma;
    const std::size_t n = lattice.dims();
    const std::size_t sc = lattice.side_cells();
    const auto& rates = grid.kernel.rates();
    std::vector<double> out(next.size());

    parallel_for(lattice.inventories(), opts.threads, [&](std::size_t slab) {
        const int i = lattice.i_min() + static_cast<int>(slab);
        const int ia = std::max(i - 1, grid.i_min);
        const int ib = std::min(i + 1, grid.i_max);
        const double running = -grid.mu_penalty * static_cast<double>(i) * static_cast<double>(i);
        for (std::size_t ka = 0; ka < sc; ++ka) {
            const auto& ja = lattice.jump(ka);
            const double phi_a = grid.mu_base + lattice.excitation(ka);
            for (std::size_t kb = 0; kb < sc; ++kb) {
                const auto& jb = lattice.jump(kb);
                const double phi_b = grid.mu_base + lattice.excitation(kb);
                const std::size_t idx = lattice.index(i, ka, kb);
                const double u = next[idx];

                // Upwind transport toward c = 0: gamma c / dc = gamma * digit.
                double drift = 0.0;
                for (std::size_t d = 0; d < n; ++d) {
                    const std::size_t da = lattice.digit(ka, d);
                    if (da > 0) {
                        drift += rates[d] * static_cast<double>(da) * (next[idx - lattice.stride(d) * sc] - u);
                    }
                    const std::size_t db = lattice.digit(kb, d);
                    if (db > 0) drift += rates[d] * static_cast<double>(db) * (next[idx - lattice.stride(d)] - u);
                }

                double ua = 0.0, ub = 0.0;
                for (std::size_t e = 0; e < ja.index.size(); ++e) ua += ja.weight[e] * next[lattice.index(ia, ja.index[e], kb)];
                for (std::size_t e = 0; e < jb.index.size(); ++e) ub += jb.weight[e] * next[lattice.index(ib, ka, jb.index[e])];
                const double inc_a = ua - u;
                const double inc_b = ub - u;

                double h;
                if (frozen) {
                    h = hamiltonian_at(inc_a, phi_a, kappa, (*ask_spreads)[idx]) +
                        hamiltonian_at(inc_b, phi_b, kappa, (*bid_spreads)[idx]);
                } else {
                    h = hamiltonian_max(inc_a, phi_a, kappa).value + hamiltonian_max(inc_b, phi_b, kappa).value;
                }
                const double v = u + dt * (-grid.r * u + drift + running + h);
                if (!std::isfinite(v)) {
                    throw NumericalError("HJB step produced a non-finite value; check dt * (r + sum gamma c_max / dc + "
                                         "2 sup phi) <= 1");
                }
                out[idx] = v;
            }
        }
    });
    return out;
}

Solution solve(const GridSpec& grid_in, const SolveOptions& opts) {
    GridSpec grid = grid_in.dt > 0.0 ? grid_in : grid_in.with_stable_dt();
    grid.validate();
    Solution sol{ValueGrid(grid), {}};
    const StateLattice& lattice = sol.values.lattice();
    const std::size_t steps = grid.steps();
    std::vector<double> u(lattice.cells(), 0.0);
    sol.values.add_slice(steps, u);
    for (std::size_t k = steps; k-- > 0;) {
        u = step_backward(u, grid, lattice, opts);
        if (k % grid.snapshot_stride == 0 || k == 0) sol.values.add_slice(k, u);
    }
    sol.feedback = FeedbackTable(sol.values);
    return sol;
}

namespace {

ValueGrid sweep_with_control(const GridSpec& grid_in, const SolveOptions& opts,
                             const std::function<void(std::size_t, double, std::vector<double>&,
                                                      std::vector<double>&)>& fill) {
    GridSpec grid = grid_in.dt > 0.0 ? grid_in : grid_in.with_stable_dt();
    grid.validate();
    ValueGrid values(grid);
    const StateLattice& lattice = values.lattice();
    const std::size_t steps = grid.steps();
    std::vector<double> u(lattice.cells(), 0.0);
    std::vector<double> ask(lattice.cells()), bid(lattice.cells());
    values.add_slice(steps, u);
    for (std::size_t k = steps; k-- > 0;) {
        fill(k + 1, static_cast<double>(k + 1) * grid.step_size(), ask, bid);
        u = step_backward(u, grid, lattice, opts, &ask, &bid);
        if (k % grid.snapshot_stride == 0 || k == 0) values.add_slice(k, u);
    }
    return values;
}

}  // namespace

ValueGrid evaluate_fixed_control(const FeedbackFunction& control, const GridSpec& true_grid, const SolveOptions& opts) {
    return sweep_with_control(true_grid, opts, [&](std::size_t, double t, std::vector<double>& ask, std::vector<double>& bid) {
        const StateLattice lattice(true_grid);
        const std::size_t sc = lattice.side_cells();
        const std::size_t n = lattice.dims();
        parallel_for(lattice.inventories(), opts.threads, [&](std::size_t slab) {
            MarketState s = MarketState::zero(n, lattice.i_min() + static_cast<int>(slab));
            s.clock = t;
            for (std::size_t ka = 0; ka < sc; ++ka) {
                for (std::size_t d = 0; d < n; ++d) s.c_ask[d] = lattice.coordinate(ka, d);
                for (std::size_t kb = 0; kb < sc; ++kb) {
                    for (std::size_t d = 0; d < n; ++d) s.c_bid[d] = lattice.coordinate(kb, d);
                    const Spreads q = control(t, s);
                    if (!(q.ask >= 0.0) || !(q.bid >= 0.0)) throw std::domain_error("control returned a negative spread");
                    const std::size_t idx = lattice.index(s.inventory, ka, kb);
                    ask[idx] = q.ask;
                    bid[idx] = q.bid;
                }
            }
        });
    });
}

ValueGrid evaluate_fixed_control(const FeedbackTable& control, const GridSpec& true_grid, const SolveOptions& opts) {
    GridSpec grid = true_grid.dt > 0.0 ? true_grid : true_grid.with_stable_dt();
    const GridSpec& cg = control.grid();
    const bool same_lattice = cg.i_min == grid.i_min && cg.i_max == grid.i_max && cg.c_max == grid.c_max &&
                              cg.m_c == grid.m_c && cg.kernel.size() == grid.kernel.size() &&
                              cg.steps() == grid.steps();
    bool every_step = same_lattice;
    if (same_lattice) {
        for (std::size_t k = 1; k <= grid.steps(); ++k) every_step = every_step && control.find_step(k) != ValueGrid::npos;
    }
    if (!every_step) {
        return evaluate_fixed_control(FeedbackFunction([&control](double t, const MarketState& s) { return control.at(t, s); }),
                                      grid, opts);
    }
    return sweep_with_control(grid, opts, [&](std::size_t step, double, std::vector<double>& ask, std::vector<double>& bid) {
        const std::size_t snap = control.find_step(step);
        ask = control.ask(snap);
        bid = control.bid(snap);
    });
}

}  // namespace hawkesmm::hjb
