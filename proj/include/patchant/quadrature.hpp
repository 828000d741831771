#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "patchant/errors.hpp"

namespace patchant::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;  // absolute error estimate
    double l1 = 0.0;     // integral of |f|
};

struct Options {
    double rel_tol = 1e-10;  // relative to the L1 norm of the integrand
    double abs_tol = 0.0;
    unsigned max_depth = 20;
};

// Adaptive Gauss-Kronrod (15/31) on [a, b]. Fails with AccuracyError when the error estimate exceeds
// max(rel_tol * L1, abs_tol) after max_depth bisections.
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    Result r;
    if (a == b) return r;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    // Boost 1.74 reports the local error unscaled by the half-width, so integrate over [0, 1] where
    // that factor is a constant 1/2.
    const double w = b - a;
    auto g = [&](double x) { return f(a + w * x) * w; };
    r.value = GK::integrate(g, 0.0, 1.0, opt.max_depth, opt.rel_tol, &r.error, &r.l1);
    r.l1 = std::abs(r.l1);
    if (!std::isfinite(r.value)) throw AccuracyError("non-finite integral", r.value, r.error);
    return r;
}

// Sum of adaptive integrals between consecutive breakpoints (must be non-decreasing).
template <class F>
Result integrate_piecewise(F&& f, std::span<const double> breakpoints, const Options& opt = {}) {
    Result total;
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        const Result r = integrate(f, breakpoints[i - 1], breakpoints[i], opt);
        total.value += r.value;
        total.error += r.error;
        total.l1 += r.l1;
    }
    return total;
}

// Throws AccuracyError if r misses its tolerance.
void check_accuracy(const Result& r, const Options& opt, const std::string& what);

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// 16-point Gauss-Legendre on each panel between consecutive breakpoints.
Rule composite_gauss_legendre(std::span<const double> breakpoints);

// Breakpoints [0, lo*g, lo*g^2, ..., hi] refining geometrically toward zero, then `uniform_panels`
// equal panels from `lo` to `hi`.
std::vector<double> graded_breakpoints(double smallest, double lo, double hi, std::size_t uniform_panels);

}  // namespace patchant::quad
