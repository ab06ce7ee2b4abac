#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace hawkesmm::laplace {

using RealTransform = std::function<long double(long double)>;
using ComplexTransform = std::function<std::complex<long double>(std::complex<long double>)>;

/// A Laplace transform F(s). Gaver-Stehfest only samples F on the positive
/// real axis; the fixed Talbot contour needs the analytic continuation.
struct Transform {
    RealTransform real;
    ComplexTransform complex;  // optional
};

enum class Method { GaverStehfest, FixedTalbot };

struct InversionOptions {
    Method method = Method::GaverStehfest;
    int stehfest_order = 14;  // even
    int talbot_nodes = 32;
};

/// Gaver-Stehfest weights V_k, k = 1..order, in extended precision.
std::vector<long double> stehfest_weights(int order);

/// Value at p > 0 of the function whose Laplace transform is F.
/// Throws std::domain_error for p <= 0 and NumericalError when F produces a
/// non-finite sample.
double invert(const Transform& F, double p, const InversionOptions& opts = {});

double invert_stehfest(const RealTransform& F, double p, int order = 14);
double invert_talbot(const ComplexTransform& F, double p, int nodes = 32);

}  // namespace hawkesmm::laplace
