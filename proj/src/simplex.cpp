#include "patchant/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "patchant/errors.hpp"

namespace patchant {

namespace {

struct Vertex {
    std::vector<double> x;
    double f;
};

}  // namespace

SimplexResult minimize_box(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                           const std::vector<double>& lower, const std::vector<double>& upper,
                           const SimplexOptions& opt, const std::function<void(std::vector<double>&)>& project) {
    const std::size_t n = x0.size();
    if (n == 0 || lower.size() != n || upper.size() != n) throw ValidationError("simplex dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lower[i] < upper[i])) throw ValidationError("simplex box must have lower < upper");
    }

    SimplexResult res;
    auto admit = [&](std::vector<double> x) {
        for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
        if (project) project(x);
        return x;
    };
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    Vertex best{admit(x0), 0.0};
    best.f = eval(best.x);

    for (int attempt = 0; attempt <= opt.restarts; ++attempt) {
        std::vector<Vertex> s;
        s.push_back(best);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x = best.x;
            const double step = opt.initial_step * (attempt == 0 ? 1.0 : 0.5);
            x[i] += (x[i] + step <= upper[i]) ? step : -step;
            x = admit(x);
            s.push_back({x, eval(x)});
        }
        bool converged = false;
        while (res.evaluations < opt.max_evaluations) {
            std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
            double diam = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                for (std::size_t i = 0; i < n; ++i)
                    diam = std::max(diam, std::abs(s[k].x[i] - s[0].x[i]) / (upper[i] - lower[i]));
            }
            if (diam < opt.x_tol || (std::isfinite(s[n].f) && s[n].f - s[0].f < opt.f_tol)) {
                converged = true;
                break;
            }
            std::vector<double> c(n, 0.0);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < n; ++i) c[i] += s[k].x[i] / static_cast<double>(n);
            auto along = [&](double t) {
                std::vector<double> x(n);
                for (std::size_t i = 0; i < n; ++i) x[i] = c[i] + t * (s[n].x[i] - c[i]);
                return admit(x);
            };
            Vertex r{along(-1.0), 0.0};
            r.f = eval(r.x);
            if (r.f < s[0].f) {
                Vertex e{along(-2.0), 0.0};
                e.f = eval(e.x);
                s[n] = e.f < r.f ? e : r;
                continue;
            }
            if (r.f < s[n - 1].f) {
                s[n] = r;
                continue;
            }
            Vertex k{along(r.f < s[n].f ? -0.5 : 0.5), 0.0};
            k.f = eval(k.x);
            if (k.f < std::min(r.f, s[n].f)) {
                s[n] = k;
                continue;
            }
            for (std::size_t j = 1; j <= n; ++j) {
                for (std::size_t i = 0; i < n; ++i) s[j].x[i] = s[0].x[i] + 0.5 * (s[j].x[i] - s[0].x[i]);
                s[j].x = admit(s[j].x);
                s[j].f = eval(s[j].x);
            }
        }
        std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        if (s[0].f <= best.f) best = s[0];
        res.converged = converged;
        if (!converged) break;
    }
    res.x = best.x;
    res.f = best.f;
    return res;
}

}  // namespace patchant
