#include "hawkesmm/quadrature.hpp"

#include <cmath>
#include <string>

#include "hawkesmm/common.hpp"

namespace hawkesmm::quadrature {
namespace {

struct Panel {
    double a, b, fa, fm, fb, whole;
};

double checked(const std::function<double(double)>& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y)) {
        throw NumericalError("integrand is not finite at x = " + format_double(x));
    }
    return y;
}

double refine(const std::function<double(double)>& f, const Panel& p, double tol, int depth) {
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = checked(f, lm);
    const double frm = checked(f, rm);
    const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const double delta = left + right - p.whole;
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) {
        throw NumericalError("adaptive Simpson did not converge on [" + format_double(p.a) + ", " +
                             format_double(p.b) + "]");
    }
    return refine(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1) +
           refine(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int max_depth) {
    if (a == b) return 0.0;
    const double fa = checked(f, a);
    const double fb = checked(f, b);
    const double m = 0.5 * (a + b);
    const double fm = checked(f, m);
    const Panel whole{a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb)};
    return refine(f, whole, abs_tol, max_depth);
}

}  // namespace hawkesmm::quadrature
