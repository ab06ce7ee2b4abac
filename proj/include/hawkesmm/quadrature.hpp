#pragma once

#include <functional>

namespace hawkesmm::quadrature {

/// Adaptive Simpson rule on [a, b] to absolute tolerance `abs_tol`.
/// Throws NumericalError when the integrand returns a non-finite value or
/// the recursion depth is exhausted without meeting the tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-10, int max_depth = 50);

}  // namespace hawkesmm::quadrature
