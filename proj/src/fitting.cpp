#include "patchant/fitting.hpp"

#include <boost/math/tools/minima.hpp>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "patchant/errors.hpp"

namespace patchant {

double poisson_nll(std::span<const double> mu, std::span<const double> counts) {
    if (mu.size() != counts.size()) throw ValidationError("model and counts differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double m = std::max(mu[i], kMinExpectedCount);
        s += m - (counts[i] > 0.0 ? counts[i] * std::log(m) : 0.0);
    }
    return s;
}

double neg_log_likelihood(const DecayCurve& model, const DecayHistogram& hist, double amplitude, double background) {
    if (model.t.size() != hist.size() || model.intensity.size() != hist.size())
        throw ValidationError("model grid has " + std::to_string(model.t.size()) + " points, histogram has " +
                              std::to_string(hist.size()) + " bins");
    for (std::size_t i = 0; i < hist.size(); ++i) {
        if (std::abs(model.t[i] - hist.bin_start[i]) > 1e-9 * std::max(hist.bin_width, 1.0))
            throw ValidationError("model grid is not aligned with histogram bin " + std::to_string(i));
    }
    std::vector<double> mu(hist.size());
    for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = amplitude * model.intensity[i] + background;
    return poisson_nll(mu, hist.counts);
}

Nuisance profile_nuisance(std::span<const double> model, std::span<const double> counts, bool fit_background) {
    if (model.size() != counts.size()) throw ValidationError("model and counts differ in length");
    double sm = 0.0, sc = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        sm += model[i];
        sc += counts[i];
    }
    Nuisance best;
    if (!(sm > 0.0)) {
        best.nll = poisson_nll(std::vector<double>(model.size(), 0.0), counts);
        return best;
    }
    auto nll = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < model.size(); ++i) {
            const double m = std::max(a * model[i] + b, kMinExpectedCount);
            s += m - (counts[i] > 0.0 ? counts[i] * std::log(m) : 0.0);
        }
        return s;
    };
    // Background pinned at zero: closed form.
    best.amplitude = sc / sm;
    best.nll = nll(best.amplitude, 0.0);
    if (!fit_background) return best;

    double a = best.amplitude, b = 0.0, f = best.nll;
    const auto n = static_cast<double>(model.size());
    for (int iter = 0; iter < 100; ++iter) {
        double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
        for (std::size_t i = 0; i < model.size(); ++i) {
            const double mu = std::max(a * model[i] + b, kMinExpectedCount);
            const double r = counts[i] / mu;
            ga += model[i] * (1.0 - r);
            gb += 1.0 - r;
            const double w = r / mu;
            haa += w * model[i] * model[i];
            hab += w * model[i];
            hbb += w;
        }
        if (b <= 0.0 && gb >= 0.0) {
            // background constrained at zero; amplitude optimum is the closed form above
            a = best.amplitude;
            b = 0.0;
            f = best.nll;
            break;
        }
        const double det = haa * hbb - hab * hab;
        if (!(det > 0.0)) break;
        double da = -(hbb * ga - hab * gb) / det;
        double db = -(haa * gb - hab * ga) / det;
        double step = 1.0;
        double na = a, nb = b, nf = f;
        for (int k = 0; k < 40; ++k) {
            na = std::max(0.0, a + step * da);
            nb = std::max(0.0, b + step * db);
            nf = nll(na, nb);
            if (nf <= f) break;
            step *= 0.5;
        }
        if (!(nf <= f)) break;
        const bool small = std::abs(na - a) <= 1e-12 * std::max(a, 1.0) && std::abs(nb - b) <= 1e-12 * std::max(sc / n, 1.0);
        a = na;
        b = nb;
        const double gain = f - nf;
        f = nf;
        if (small || gain < 1e-10) break;
    }
    if (f <= best.nll) best = {a, b, f};
    return best;
}

const FitParameter& FitResult::at(std::string_view name) const {
    for (const auto& p : parameters) {
        if (p.name == name) return p;
    }
    throw ValidationError("fit has no parameter named " + std::string(name));
}

namespace {

// Shape-parameter problem: maps optimizer coordinates to the two physical parameters and the model.
struct Problem {
    std::function<std::vector<double>(double, double)> model;  // per-bin shape for physical (p1, p2)
    std::function<std::pair<double, double>(const std::vector<double>&)> to_physical;
    std::vector<double> lower, upper;
    std::function<void(std::vector<double>&)> project;
    std::vector<std::vector<double>> starts;
    std::pair<double, double> phys_lower;  // for derivative stencils
    std::pair<double, double> phys_upper;
    std::string name1, name2;
};

struct StartOutcome {
    SimplexResult simplex;
    double start_nll = 0.0;
};

void validate_histogram_for_fit(const DecayHistogram& hist) {
    hist.validate();
    std::size_t nonzero = 0;
    for (double c : hist.counts) nonzero += c > 0.0 ? 1 : 0;
    if (nonzero < 50) throw ValidationError("histogram needs at least 50 non-empty bins, has " + std::to_string(nonzero));
}

FitResult run_fit(const Problem& pb, const DecayHistogram& hist, const FitOptions& opt) {
    auto objective = [&](const std::vector<double>& x) {
        const auto [p1, p2] = pb.to_physical(x);
        return profile_nuisance(pb.model(p1, p2), hist.counts, opt.fit_background).nll;
    };

    std::vector<StartOutcome> outcomes(pb.starts.size());
    auto work = [&](std::size_t k) {
        std::vector<double> x0 = pb.starts[k];
        pb.project(x0);
        outcomes[k].start_nll = objective(x0);
        outcomes[k].simplex = minimize_box(objective, x0, pb.lower, pb.upper, opt.simplex, pb.project);
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(pb.starts.size())));
    if (workers == 1) {
        for (std::size_t k = 0; k < pb.starts.size(); ++k) work(k);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < pb.starts.size(); k += workers) work(k);
            });
        }
        for (auto& t : pool) t.join();
    }

    FitResult res;
    std::size_t best = 0;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        res.start_nll.push_back(outcomes[k].start_nll);
        res.evaluations += outcomes[k].simplex.evaluations + 1;
        if (outcomes[k].simplex.f < outcomes[best].simplex.f) best = k;
    }
    const SimplexResult& sr = outcomes[best].simplex;
    res.converged = sr.converged && std::isfinite(sr.f);
    const auto [p1, p2] = pb.to_physical(sr.x);
    const std::vector<double> shape = pb.model(p1, p2);
    const Nuisance nu = profile_nuisance(shape, hist.counts, opt.fit_background);
    res.nll = nu.nll;

    // Fisher information of (p1, p2, amplitude[, background]) from finite-difference model derivatives.
    const std::size_t n = hist.size();
    const std::size_t dim = opt.fit_background ? 4 : 3;
    Eigen::MatrixXd jac(n, dim);
    auto derivative = [&](int which, double value, double lo, double hi) {
        const double h = 1e-4 * std::max(std::abs(value), which == 0 ? std::abs(p1) : std::abs(p1) * 0.1);
        double a = value - h, b = value + h;
        if (a < lo) a = value;
        if (b > hi) b = value;
        auto eval = [&](double v) { return which == 0 ? pb.model(v, p2) : pb.model(p1, v); };
        const std::vector<double> ma = a == value ? shape : eval(a);
        const std::vector<double> mb = b == value ? shape : eval(b);
        for (std::size_t i = 0; i < n; ++i) jac(static_cast<Eigen::Index>(i), which) = nu.amplitude * (mb[i] - ma[i]) / (b - a);
    };
    derivative(0, p1, pb.phys_lower.first, pb.phys_upper.first);
    // F_par may not exceed F_perp; step downward only when the constraint is active.
    derivative(1, p2, pb.phys_lower.second, std::min(pb.phys_upper.second, pb.name2 == "f_par" ? p1 : pb.phys_upper.second));
    for (std::size_t i = 0; i < n; ++i) {
        jac(static_cast<Eigen::Index>(i), 2) = shape[i];
        if (dim == 4) jac(static_cast<Eigen::Index>(i), 3) = 1.0;
    }
    Eigen::VectorXd inv_mu(n);
    for (std::size_t i = 0; i < n; ++i)
        inv_mu(static_cast<Eigen::Index>(i)) = 1.0 / std::max(nu.amplitude * shape[i] + nu.background, kMinExpectedCount);
    const Eigen::MatrixXd fisher = jac.transpose() * inv_mu.asDiagonal() * jac;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fisher);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::VectorXd inv_ev = eig.eigenvalues().unaryExpr([&](double v) { return 1.0 / std::max(v, 1e-14 * top); });
    const Eigen::MatrixXd cov = eig.eigenvectors() * inv_ev.asDiagonal() * eig.eigenvectors().transpose();

    res.parameters = {{pb.name1, p1, std::sqrt(cov(0, 0))},
                      {pb.name2, p2, std::sqrt(cov(1, 1))},
                      {"amplitude", nu.amplitude, std::sqrt(cov(2, 2))},
                      {"background", nu.background, dim == 4 ? std::sqrt(cov(3, 3)) : 0.0}};
    const double diff_sigma = std::sqrt(std::max(0.0, cov(0, 0) + cov(1, 1) - 2.0 * cov(0, 1)));
    if (pb.name2 == "f_par") res.near_degenerate = std::abs(p1 - p2) < diff_sigma;
    for (std::size_t i = 0; i < 2; ++i) {
        const double lo = pb.lower[i], hi = pb.upper[i];
        const double tol = 1e-3 * (hi - lo);
        if (sr.x[i] - lo < tol || hi - sr.x[i] < tol) res.boundary_pinned = true;
    }
    return res;
}

}  // namespace

FitResult fit_antenna(const DecayHistogram& hist, const RateEnsemble& ens, const FitOptions& opt) {
    validate_histogram_for_fit(hist);
    ens.validate();
    if (!(opt.f_min > 0.0) || !(opt.f_max > opt.f_min)) throw ValidationError("need 0 < f_min < f_max");
    if (opt.grid == 0) throw ValidationError("multi-start grid must be non-empty");
    const BinnedDecayModel model(ens, hist.bin_width, hist.size(), opt.irf_fwhm);

    Problem pb;
    pb.name1 = "f_perp";
    pb.name2 = "f_par";
    pb.model = [&](double fperp, double fpar) { return model.evaluate({fperp, fpar}); };
    pb.to_physical = [](const std::vector<double>& x) { return std::pair{std::exp(x[0]), std::exp(x[1])}; };
    pb.lower = {std::log(opt.f_min), std::log(opt.f_min)};
    pb.upper = {std::log(opt.f_max), std::log(opt.f_max)};
    pb.phys_lower = {opt.f_min, opt.f_min};
    pb.phys_upper = {opt.f_max, opt.f_max};
    pb.project = [](std::vector<double>& x) {
        if (x[1] > x[0]) x[0] = x[1] = 0.5 * (x[0] + x[1]);
    };
    // Log-spaced cell centres over the box; only pairs with F_par <= F_perp are admissible.
    const double span = pb.upper[0] - pb.lower[0];
    for (std::size_t i = 0; i < opt.grid; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double xi = pb.lower[0] + span * (static_cast<double>(i) + 0.5) / static_cast<double>(opt.grid);
            const double xj = pb.lower[1] + span * (static_cast<double>(j) + 0.5) / static_cast<double>(opt.grid);
            pb.starts.push_back({xi, xj});
        }
    }
    return run_fit(pb, hist, opt);
}

FitResult fit_reference(const DecayHistogram& hist, const FitOptions& opt) {
    validate_histogram_for_fit(hist);
    const double window = hist.bin_width * static_cast<double>(hist.size());
    // Rates from one tenth of the window's inverse to one per bin.
    const double g_lo = 0.1 / window;
    const double g_hi = 1.0 / hist.bin_width;
    constexpr double kMaxRelWidth = 1.0;

    Problem pb;
    pb.name1 = "gamma_c";
    pb.name2 = "w_c";
    const double bw = hist.bin_width;
    const std::size_t bins = hist.size();
    const double irf = opt.irf_fwhm;
    pb.model = [=](double gc, double wc) {
        return BinnedDecayModel(RateEnsemble{gc, wc, true}, bw, bins, irf).evaluate({1.0, 1.0});
    };
    // Coordinates (ln gamma_c, w_c / gamma_c).
    pb.to_physical = [](const std::vector<double>& x) {
        const double gc = std::exp(x[0]);
        return std::pair{gc, gc * x[1]};
    };
    pb.lower = {std::log(g_lo), 0.0};
    pb.upper = {std::log(g_hi), kMaxRelWidth};
    pb.phys_lower = {g_lo, 0.0};
    pb.phys_upper = {g_hi, g_hi * kMaxRelWidth};
    pb.project = [](std::vector<double>&) {};
    const std::size_t g = std::max<std::size_t>(1, std::min<std::size_t>(opt.grid, 3));
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            const double x0 = pb.lower[0] + (pb.upper[0] - pb.lower[0]) * (static_cast<double>(i) + 0.5) / static_cast<double>(g);
            const double x1 = kMaxRelWidth * (static_cast<double>(j) + 0.5) / static_cast<double>(g) * 0.5;
            pb.starts.push_back({x0, x1});
        }
    }
    FitResult res = run_fit(pb, hist, opt);

    // Near w_c = 0 the curve depends on w_c^2 and the Fisher width is too narrow. Profile the
    // likelihood at w_c = 0; if it lies within half a unit of the minimum the 1 sigma interval reaches zero.
    FitParameter& wc = res.parameters[1];
    const FitParameter& gc = res.parameters[0];
    if (wc.value > 0.0) {
        auto nll_at_zero = [&](double ln_gc) {
            return profile_nuisance(pb.model(std::exp(ln_gc), 0.0), hist.counts, opt.fit_background).nll;
        };
        const double span = 10.0 * std::max(gc.sigma / gc.value, 1e-4);
        std::uintmax_t iterations = 40;
        const auto best = boost::math::tools::brent_find_minima(nll_at_zero, std::log(gc.value) - span,
                                                                std::log(gc.value) + span, 24, iterations);
        res.evaluations += iterations;
        if (best.second - res.nll <= 0.5) wc.sigma = std::max(wc.sigma, wc.value);
    }
    return res;
}

}  // namespace patchant
