#include "hawkesmm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hawkesmm/common.hpp"
#include "hawkesmm/quadrature.hpp"

namespace hawkesmm {
namespace {

void require_time(double t) {
    if (!(t >= 0.0)) throw std::domain_error("kernel evaluated at negative time " + format_double(t));
}

bool close(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)); }

}  // namespace

// ---------------------------------------------------------------- ExpSumKernel

ExpSumKernel::ExpSumKernel(std::vector<double> weights, std::vector<double> rates)
    : weights_(std::move(weights)), rates_(std::move(rates)) {
    if (weights_.size() != rates_.size()) {
        throw std::invalid_argument("exp-sum kernel: weights and rates differ in length");
    }
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
            throw std::invalid_argument("exp-sum kernel: weight " + std::to_string(i) + " must be >= 0");
        }
        if (!(rates_[i] > 0.0) || !std::isfinite(rates_[i])) {
            throw std::invalid_argument("exp-sum kernel: rate " + std::to_string(i) + " must be > 0");
        }
    }
}

double ExpSumKernel::eval(double t) const {
    require_time(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) acc += weights_[i] * std::exp(-rates_[i] * t);
    return acc;
}

double ExpSumKernel::at_zero() const {
    double acc = 0.0;
    for (double w : weights_) acc += w;
    return acc;
}

double ExpSumKernel::l1_norm() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) acc += weights_[i] / rates_[i];
    return acc;
}

// -------------------------------------------------------------- PowerLawKernel

PowerLawKernel::PowerLawKernel(double lam, double alpha, double beta, double eps)
    : lam_(lam), alpha_(alpha), beta_(beta), eps_(eps) {
    if (!(lam > 0.0) || !std::isfinite(lam)) throw std::invalid_argument("power-law kernel: lam must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("power-law kernel: alpha must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("power-law kernel: beta must lie in (0, 1)");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("power-law kernel: eps must be > 0");
}

double PowerLawKernel::eval(double t) const {
    require_time(t);
    const double x = t + eps_;
    return lam_ / (lam_ + std::pow(x, alpha_)) * std::pow(x, -beta_);
}

double PowerLawKernel::l1_norm() const {
    const double decay = alpha_ + beta_;
    if (!(decay > 1.0)) {
        throw std::domain_error("power-law kernel is not integrable: alpha + beta must exceed 1");
    }
    constexpr double cut = 100.0;
    auto f = [this](double t) { return eval(t); };
    // Panels follow the eps-scale boundary layer near zero.
    const double edges[] = {0.0, 0.01, 0.1, 1.0, 10.0, cut};
    double body = 0.0;
    for (std::size_t k = 0; k + 1 < std::size(edges); ++k) {
        body += quadrature::adaptive_simpson(f, edges[k], edges[k + 1], 1e-13);
    }
    // Tail: lam x^{-(a+b)} sum_k (-lam x^{-a})^k, integrated term by term from X.
    const double X = cut + eps_;
    const double ratio = lam_ * std::pow(X, -alpha_);
    if (!(ratio < 1.0)) throw NumericalError("power-law tail series does not converge at the cut");
    double tail = 0.0;
    double coeff = lam_ * std::pow(X, 1.0 - decay);
    for (int k = 0; k < 200; ++k) {
        const double term = coeff / (decay + k * alpha_ - 1.0);
        tail += term;
        if (std::fabs(term) < 1e-18 * std::fabs(tail)) break;
        coeff *= -ratio;
    }
    return body + tail;
}

laplace::Transform PowerLawKernel::spectral_transform() const {
    const long double lam = lam_, a = alpha_, b = beta_;
    laplace::Transform F;
    F.real = [lam, a, b](long double s) { return lam / ((lam + std::pow(s, a)) * std::pow(s, b)); };
    F.complex = [lam, a, b](std::complex<long double> s) {
        return lam / ((lam + std::pow(s, a)) * std::pow(s, b));
    };
    return F;
}

double PowerLawKernel::measure_density(double p, const laplace::InversionOptions& opts) const {
    if (p < 0.0) throw std::domain_error("spectral density evaluated at negative p");
    if (p == 0.0) {
        const double decay = alpha_ + beta_;
        if (decay > 1.0) return 0.0;
        if (decay == 1.0) return lam_;
        throw std::domain_error("spectral density is unbounded at p = 0");
    }
    return std::exp(-p * eps_) * laplace::invert(spectral_transform(), p, opts);
}

// ------------------------------------------------------------------- dispatch

double eval(const Kernel& k, double t) {
    return std::visit([t](const auto& kernel) { return kernel.eval(t); }, k);
}

double l1_norm(const Kernel& k) {
    return std::visit([](const auto& kernel) { return kernel.l1_norm(); }, k);
}

double at_zero(const Kernel& k) {
    return std::visit([](const auto& kernel) { return kernel.at_zero(); }, k);
}

// ------------------------------------------------------------- approximation

std::string ApproxReport::csv_row() const {
    return std::to_string(n) + "," + format_double(sup_err) + "," + format_double(l1_err);
}

double sup_error(const Kernel& target, const ExpSumKernel& approx, double T, std::size_t points) {
    if (!(T > 0.0)) throw std::invalid_argument("sup_error needs T > 0");
    if (points < 2) throw std::invalid_argument("sup_error needs at least two grid points");
    double worst = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        const double t = T * static_cast<double>(k) / static_cast<double>(points - 1);
        worst = std::max(worst, std::fabs(eval(target, t) - approx.eval(t)));
    }
    return worst;
}

ExpSumKernel rescale_match(const ExpSumKernel& kernel, double K0, double l1) {
    const double missing_mass = K0 - kernel.at_zero();
    const double missing_l1 = l1 - kernel.l1_norm();
    if (close(K0, kernel.at_zero())) {
        if (!close(l1, kernel.l1_norm())) {
            throw std::domain_error("rescale_match: K(0) already matches but the L1 norm does not");
        }
        return kernel;
    }
    if (missing_mass < 0.0) {
        throw std::domain_error("rescale_match: approximation overshoots K(0); refine the mesh");
    }
    if (!(missing_l1 > 0.0)) {
        throw std::domain_error("rescale_match: approximation overshoots the L1 norm; refine the mesh");
    }
    std::vector<double> w = kernel.weights();
    std::vector<double> r = kernel.rates();
    w.push_back(missing_mass);
    r.push_back(missing_mass / missing_l1);
    return ExpSumKernel(std::move(w), std::move(r));
}

ExpSumKernel riemann_approx(const std::function<double(double)>& measure_density, std::size_t n,
                            CellRule rule, double cell_tol) {
    if (n < 2) throw std::invalid_argument("riemann_approx needs n >= 2");
    const double mesh = 1.0 / std::sqrt(static_cast<double>(n));
    auto density = [&measure_density](double u) {
        const double m = measure_density(u);
        if (m < 0.0) {
            throw std::domain_error("measure density is negative at u = " + format_double(u) +
                                    "; the kernel is not completely monotone");
        }
        return m;
    };
    std::vector<double> weights;
    std::vector<double> rates;
    weights.reserve(n);
    rates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(i) * mesh;
        const double hi = static_cast<double>(i + 1) * mesh;
        const double w = rule == CellRule::Quadrature ? quadrature::adaptive_simpson(density, lo, hi, cell_tol)
                                                      : density(hi) * mesh;
        weights.push_back(std::max(w, 0.0));
        rates.push_back(hi);
    }
    return ExpSumKernel(std::move(weights), std::move(rates));
}

PowerLawApproximation approximate_power_law(const PowerLawKernel& target, std::size_t n,
                                            const laplace::InversionOptions& opts) {
    if (n < 2) throw std::invalid_argument("approximate_power_law needs n >= 2");
    const double mesh = 1.0 / std::sqrt(static_cast<double>(n));
    PowerLawApproximation out;
    std::vector<double> weights(n);
    std::vector<double> rates(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = static_cast<double>(i + 1) * mesh;
        double w = target.measure_density(c, opts) * mesh;
        if (w < 0.0) {
            w = 0.0;
            ++out.clamped_weights;
        }
        weights[i] = w;
        rates[i] = c;
    }
    out.riemann = ExpSumKernel(std::move(weights), std::move(rates));
    out.kernel = rescale_match(out.riemann, target.at_zero(), target.l1_norm());
    return out;
}

ApproxReport make_report(const Kernel& target, const ExpSumKernel& approx, std::size_t n, double T,
                         std::size_t clamped) {
    ApproxReport r;
    r.kernel = approx;
    r.n = n;
    r.sup_err = sup_error(target, approx, T);
    r.l1_err = std::fabs(l1_norm(target) - approx.l1_norm());
    r.clamped_weights = clamped;
    return r;
}

std::vector<double> theta_to_c(std::span<const double> jump_times, const ExpSumKernel& kernel, double t) {
    std::vector<double> c(kernel.size(), 0.0);
    for (double tj : jump_times) {
        if (tj > t) throw std::domain_error("theta_to_c: event time after evaluation time");
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] += kernel.weights()[i] * std::exp(-kernel.rates()[i] * (t - tj));
        }
    }
    return c;
}

}  // namespace hawkesmm
