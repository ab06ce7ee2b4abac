#include "hawkesmm/laplace.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hawkesmm/common.hpp"

namespace hawkesmm::laplace {
namespace {

long double factorial(int k) {
    long double f = 1.0L;
    for (int j = 2; j <= k; ++j) f *= static_cast<long double>(j);
    return f;
}

void require_positive(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw std::domain_error("Laplace inversion point must be positive and finite, got " +
                                format_double(p));
    }
}

}  // namespace

std::vector<long double> stehfest_weights(int order) {
    if (order < 2 || order % 2 != 0) {
        throw std::invalid_argument("Gaver-Stehfest order must be even and >= 2");
    }
    const int half = order / 2;
    std::vector<long double> v(static_cast<std::size_t>(order));
    for (int k = 1; k <= order; ++k) {
        long double sum = 0.0L;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            sum += std::pow(static_cast<long double>(j), half) * factorial(2 * j) /
                   (factorial(half - j) * factorial(j) * factorial(j - 1) * factorial(k - j) *
                    factorial(2 * j - k));
        }
        v[static_cast<std::size_t>(k - 1)] = ((k + half) % 2 == 0 ? 1.0L : -1.0L) * sum;
    }
    return v;
}

double invert_stehfest(const RealTransform& F, double p, int order) {
    require_positive(p);
    const auto weights = stehfest_weights(order);
    const long double step = std::numbers::ln2_v<long double> / static_cast<long double>(p);
    long double acc = 0.0L;
    for (int k = 1; k <= order; ++k) {
        const long double sample = F(step * k);
        if (!std::isfinite(sample)) {
            throw NumericalError("transform is not finite at s = " +
                                 format_double(static_cast<double>(step * k)));
        }
        acc += weights[static_cast<std::size_t>(k - 1)] * sample;
    }
    const auto value = static_cast<double>(acc * step);
    if (!std::isfinite(value)) throw NumericalError("Gaver-Stehfest produced a non-finite value");
    return value;
}

double invert_talbot(const ComplexTransform& F, double p, int nodes) {
    require_positive(p);
    if (!F) throw std::invalid_argument("fixed Talbot inversion needs the complex transform");
    if (nodes < 2) throw std::invalid_argument("fixed Talbot needs at least two nodes");
    using cld = std::complex<long double>;
    const long double t = p;
    const long double m = nodes;
    const long double r = 2.0L * m / (5.0L * t);
    const cld f0 = F(cld(r, 0.0L));
    long double acc = 0.5L * std::real(f0) * std::exp(r * t);
    for (int k = 1; k < nodes; ++k) {
        const long double theta = static_cast<long double>(k) * std::numbers::pi_v<long double> / m;
        const long double cot = std::cos(theta) / std::sin(theta);
        const cld s(r * theta * cot, r * theta);
        const long double sigma = theta + (theta * cot - 1.0L) * cot;
        const cld fs = F(s);
        if (!std::isfinite(fs.real()) || !std::isfinite(fs.imag())) {
            throw NumericalError("transform is not finite on the Talbot contour");
        }
        acc += std::real(std::exp(t * s) * fs * cld(1.0L, sigma));
    }
    const auto value = static_cast<double>(acc * r / m);
    if (!std::isfinite(value)) throw NumericalError("fixed Talbot produced a non-finite value");
    return value;
}

double invert(const Transform& F, double p, const InversionOptions& opts) {
    switch (opts.method) {
        case Method::GaverStehfest:
            if (!F.real) throw std::invalid_argument("Gaver-Stehfest needs the real transform");
            return invert_stehfest(F.real, p, opts.stehfest_order);
        case Method::FixedTalbot:
            return invert_talbot(F.complex, p, opts.talbot_nodes);
    }
    throw std::invalid_argument("unknown inversion method");
}

}  // namespace hawkesmm::laplace
