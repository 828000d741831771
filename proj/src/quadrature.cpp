#include "patchant/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>

namespace patchant::quad {

void check_accuracy(const Result& r, const Options& opt, const std::string& what) {
    const double allowed = std::max(opt.rel_tol * r.l1, opt.abs_tol);
    // Kronrod estimates are pessimistic; allow a modest margin before declaring failure.
    if (!(r.error <= 10.0 * allowed) && r.error > 1e-300)
        throw AccuracyError(what + ": quadrature did not converge", r.value, r.error);
}

Rule composite_gauss_legendre(std::span<const double> breakpoints) {
    using G = boost::math::quadrature::gauss<double, 16>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    Rule rule;
    for (std::size_t p = 1; p < breakpoints.size(); ++p) {
        const double a = breakpoints[p - 1];
        const double b = breakpoints[p];
        if (!(b > a)) continue;
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        // Boost stores non-negative abscissae only; x[0] = 0 for odd orders, 16 is even.
        for (std::size_t i = 0; i < x.size(); ++i) {
            rule.nodes.push_back(mid - half * x[i]);
            rule.weights.push_back(half * w[i]);
            rule.nodes.push_back(mid + half * x[i]);
            rule.weights.push_back(half * w[i]);
        }
    }
    return rule;
}

std::vector<double> graded_breakpoints(double smallest, double lo, double hi, std::size_t uniform_panels) {
    std::vector<double> bp{0.0};
    for (double x = smallest; x < lo; x *= 4.0) bp.push_back(x);
    bp.push_back(lo);
    const std::size_t n = std::max<std::size_t>(uniform_panels, 1);
    for (std::size_t i = 1; i <= n; ++i) bp.push_back(lo + (hi - lo) * static_cast<double>(i) / n);
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return bp;
}

}  // namespace patchant::quad
