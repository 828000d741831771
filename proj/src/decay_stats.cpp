#include "patchant/decay_stats.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <gsl/gsl_sf_dawson.h>
#include <gsl/gsl_sf_erf.h>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "patchant/errors.hpp"
#include "patchant/quadrature.hpp"

namespace patchant {

namespace {

constexpr double kSigmaSpan = 8.0;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double ensemble_norm(const RateEnsemble& ens) {
    return ens.truncate_at_zero ? normal_cdf(ens.gamma_c / ens.w_c) : 1.0;
}

// int_0^inf N(q; mu, sigma) exp(-q t) dq / Z
double gaussian_laplace(double mu, double sigma, double t, double norm) {
    if (sigma == 0.0) return std::exp(-mu * t);
    const double z = (mu - sigma * sigma * t) / sigma;
    const double log_val = -mu * t + 0.5 * sigma * sigma * t * t + std::log(0.5) +
                           gsl_sf_log_erfc(-z / std::numbers::sqrt2);
    return std::exp(log_val) / norm;
}

// int_0^1 exp(-a (1 - c^2)) dc for any real a.
double orientation_factor(double a) {
    if (std::abs(a) < 1e-3) return 1.0 - a * (2.0 / 3.0) + a * a * (4.0 / 15.0) - a * a * a * (8.0 / 105.0);
    if (a > 0.0) {
        const double s = std::sqrt(a);
        return gsl_sf_dawson(s) / s;
    }
    const double s = std::sqrt(-a);
    return std::exp(-a) * 0.5 * std::sqrt(std::numbers::pi) * std::erf(s) / s;
}

// Gauss-Legendre nodes over the intrinsic-rate support, refined geometrically toward zero when the
// support reaches it (the slow emitters govern the late-time tail).
quad::Rule rate_rule(const RateEnsemble& ens, double panel_sigmas = 2.0, double grading = 8.0) {
    const double lo = ens.support_lo();
    const double hi = ens.support_hi();
    const double panel = panel_sigmas * std::max(ens.w_c, 1e-3 * ens.gamma_c);
    std::vector<double> bp;
    double start = lo;
    if (lo == 0.0) {
        bp.push_back(0.0);
        start = std::min(0.05 * hi, std::max(ens.gamma_c - 3.0 * ens.w_c, 0.05 * hi));
        for (double x = 1e-7 * hi; x < start; x *= grading) bp.push_back(x);
    }
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - start) / panel)));
    for (std::size_t i = 0; i <= panels; ++i) bp.push_back(start + (hi - start) * static_cast<double>(i) / panels);
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return quad::composite_gauss_legendre(bp);
}

double rate_scale(const RateEnsemble& ens, const PurcellPair& fp) {
    return std::max({fp.f_perp, fp.f_par, 0.5 * (fp.f_perp + fp.f_par)}) * ens.support_hi();
}

}  // namespace

double DecayHistogram::total() const noexcept {
    double s = 0.0;
    for (double c : counts) s += c;
    return s;
}

void DecayHistogram::validate() const {
    if (counts.empty()) throw ValidationError("histogram has no bins");
    if (bin_start.size() != counts.size()) throw ValidationError("histogram bin and count sizes differ");
    if (!(bin_width > 0.0)) throw ValidationError("histogram bin width must be positive");
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!(counts[i] >= 0.0) || counts[i] != std::floor(counts[i]))
            throw ValidationError("histogram counts must be non-negative integers (bin " + std::to_string(i) + ")");
        if (i > 0 && std::abs(bin_start[i] - bin_start[i - 1] - bin_width) > 1e-6 * bin_width)
            throw ValidationError("histogram bins are not uniform (bin " + std::to_string(i) + ")");
    }
}

DecayHistogram make_empty_histogram(double bin_width, double window) {
    if (!(bin_width > 0.0) || !(window >= bin_width)) throw ValidationError("need 0 < bin_width <= window");
    DecayHistogram h;
    h.bin_width = bin_width;
    h.window = window;
    const auto n = static_cast<std::size_t>(std::floor(window / bin_width + 1e-9));
    h.bin_start.resize(n);
    for (std::size_t i = 0; i < n; ++i) h.bin_start[i] = bin_width * static_cast<double>(i);
    h.counts.assign(n, 0.0);
    return h;
}

void PurcellPair::validate() const {
    if (!(f_perp > 0.0) || !(f_par > 0.0) || !std::isfinite(f_perp) || !std::isfinite(f_par))
        throw ValidationError("Purcell factors must be finite and positive");
}

void RateEnsemble::validate() const {
    if (!(gamma_c > 0.0) || !std::isfinite(gamma_c)) throw ValidationError("gamma_c must be positive");
    if (!(w_c >= 0.0) || !std::isfinite(w_c)) throw ValidationError("w_c must be non-negative");
}

double RateEnsemble::support_lo() const { return std::max(0.0, gamma_c - kSigmaSpan * w_c); }

double RateEnsemble::support_hi() const { return gamma_c + kSigmaSpan * w_c; }

double gamma_of_theta(double gamma_q, double theta, const PurcellPair& fp) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return 0.5 * gamma_q * (fp.f_perp * s * s + fp.f_par * (1.0 + c * c));
}

double pi1(double gamma_q, const RateEnsemble& ens) {
    ens.validate();
    if (ens.w_c == 0.0) throw DegenerateError("w_c = 0: intrinsic-rate distribution is a delta; use the degenerate path");
    if (gamma_q <= 0.0) return 0.0;
    const double z = (gamma_q - ens.gamma_c) / ens.w_c;
    return std::exp(-0.5 * z * z) / (ens.w_c * std::sqrt(2.0 * std::numbers::pi) * ensemble_norm(ens));
}

double pi2(double gamma, double gamma_q, const PurcellPair& fp) {
    fp.validate();
    if (!(fp.f_perp > fp.f_par))
        throw DegenerateError("pi2 requires F_perp > F_par; use the degenerate (delta) path");
    if (!(gamma_q > 0.0)) throw ValidationError("gamma_q must be positive");
    const double u = gamma / gamma_q;
    const double upper = 0.5 * (fp.f_perp + fp.f_par);
    if (!(u > fp.f_par && u < upper)) {
        // Closed lower edge: the limit value there is finite.
        if (u == fp.f_par) return 1.0 / (gamma_q * (fp.f_perp - fp.f_par));
        return 0.0;
    }
    return 1.0 / (gamma_q * std::sqrt((fp.f_perp - fp.f_par) * (fp.f_perp + fp.f_par - 2.0 * u)));
}

double pi_gamma(double gamma, const RateEnsemble& ens, const PurcellPair& fp) {
    ens.validate();
    fp.validate();
    if (ens.w_c == 0.0) {
        if (fp.degenerate()) throw DegenerateError("w_c = 0 with F_perp = F_par: pi(Gamma) is a delta");
        return pi2(gamma, ens.gamma_c, fp);
    }
    if (fp.degenerate()) return pi1(gamma / fp.f_perp, ens) / fp.f_perp;
    if (!(fp.f_perp > fp.f_par)) throw DegenerateError("pi_gamma requires F_perp >= F_par");
    if (!(gamma > 0.0)) return 0.0;

    const double a = fp.f_perp - fp.f_par;
    const double b = fp.f_perp + fp.f_par;
    const double q_edge = 2.0 * gamma / b;  // inverse-square-root edge of pi2
    const double lo = std::max(q_edge, ens.support_lo());
    const double hi = std::min(gamma / fp.f_par, ens.support_hi());
    if (!(hi > lo)) return 0.0;

    // q = q_edge cosh^2 s turns pi2 dq into the constant 2 ds / sqrt(a b).
    auto s_of = [&](double q) { return std::acosh(std::sqrt(std::max(1.0, q / q_edge))); };
    auto f = [&](double s) {
        const double c = std::cosh(s);
        return pi1(q_edge * c * c, ens);
    };
    std::vector<double> bp{s_of(lo)};
    for (double k : {-3.0, 0.0, 3.0}) {
        const double q = ens.gamma_c + k * ens.w_c;
        if (q > lo && q < hi) bp.push_back(s_of(q));
    }
    bp.push_back(s_of(hi));
    std::sort(bp.begin(), bp.end());
    const quad::Options opt{1e-10, 0.0, 18};
    quad::Result r = quad::integrate_piecewise(f, bp, opt);
    const double jac = 2.0 / std::sqrt(a * b);
    r.value *= jac;
    r.error *= jac;
    r.l1 *= jac;
    quad::check_accuracy(r, opt, "pi_gamma");
    return r.value;
}

double orientation_averaged_decay(double x, const PurcellPair& fp) {
    return std::exp(-fp.f_par * x) * orientation_factor(0.5 * x * (fp.f_perp - fp.f_par));
}

DecayCurve decay_curve(std::span<const double> t_grid, const RateEnsemble& ens, const PurcellPair& fp, double i0) {
    ens.validate();
    fp.validate();
    DecayCurve curve;
    curve.i0 = i0;
    curve.t.assign(t_grid.begin(), t_grid.end());
    curve.intensity.reserve(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
            throw ValidationError("time grid must start at t >= 0 and increase");
    }

    if (fp.degenerate()) {
        const double norm = ens.w_c == 0.0 ? 1.0 : ensemble_norm(ens);
        for (double t : t_grid)
            curve.intensity.push_back(i0 * gaussian_laplace(fp.f_perp * ens.gamma_c, fp.f_perp * ens.w_c, t, norm));
        return curve;
    }
    if (!(fp.f_perp > fp.f_par)) throw DegenerateError("decay_curve requires F_perp >= F_par");

    if (ens.w_c == 0.0) {
        // Laplace transform of pi2(.; gamma_c), written in c = cos(theta) where pi2 dGamma = dc.
        const double b = 0.5 * (fp.f_perp + fp.f_par);
        const double a = 0.5 * (fp.f_perp - fp.f_par);
        const quad::Options opt{1e-12, 0.0, 20};
        for (double t : t_grid) {
            auto f = [&](double c) { return std::exp(-ens.gamma_c * t * (b - a * c * c)); };
            curve.intensity.push_back(i0 * quad::integrate(f, 0.0, 1.0, opt).value);
        }
        return curve;
    }

    // Tabulate pi(Gamma) on Gauss-Legendre panels spanning its support, then Laplace-transform.
    const double lo = fp.f_par * ens.support_lo();
    const double hi = 0.5 * (fp.f_perp + fp.f_par) * ens.support_hi();
    std::vector<double> bp{lo};
    if (lo == 0.0) {
        for (double x = 1e-8 * hi; x < 0.02 * hi; x *= 4.0) bp.push_back(x);
    }
    for (double q : {ens.support_lo(), ens.gamma_c - 3.0 * ens.w_c, ens.gamma_c, ens.gamma_c + 3.0 * ens.w_c,
                     ens.support_hi()}) {
        for (double f : {fp.f_par, 0.5 * (fp.f_perp + fp.f_par)}) {
            const double g = f * q;
            if (g > lo && g < hi) bp.push_back(g);
        }
    }
    const double panel = hi / 64.0;
    for (double g = std::max(lo, 0.02 * hi); g < hi; g += panel) bp.push_back(g);
    bp.push_back(hi);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    const quad::Rule rule = quad::composite_gauss_legendre(bp);
    std::vector<double> weight(rule.nodes.size());
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) weight[k] = rule.weights[k] * pi_gamma(rule.nodes[k], ens, fp);
    for (double t : t_grid) {
        double s = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += weight[k] * std::exp(-rule.nodes[k] * t);
        curve.intensity.push_back(i0 * s);
    }
    return curve;
}

DecayCurve decay_curve_fast(std::span<const double> t_grid, const RateEnsemble& ens, const PurcellPair& fp,
                            double i0) {
    ens.validate();
    fp.validate();
    DecayCurve curve;
    curve.i0 = i0;
    curve.t.assign(t_grid.begin(), t_grid.end());
    if (ens.w_c == 0.0) {
        for (double t : t_grid) curve.intensity.push_back(i0 * orientation_averaged_decay(ens.gamma_c * t, fp));
        return curve;
    }
    const quad::Rule rule = rate_rule(ens);
    std::vector<double> w(rule.nodes.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = rule.weights[k] * pi1(rule.nodes[k], ens);
    for (double t : t_grid) {
        double s = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * orientation_averaged_decay(rule.nodes[k] * t, fp);
        curve.intensity.push_back(i0 * s);
    }
    return curve;
}

double one_over_e_time(const RateEnsemble& ens, const PurcellPair& fp) {
    const double target = std::exp(-1.0);
    auto f = [&](double t) {
        const double tt[1] = {t};
        return decay_curve(tt, ens, fp).intensity[0] - target;
    };
    double hi = 1.0 / rate_scale(ens, fp);
    while (f(hi) > 0.0) hi *= 2.0;
    double lo = 0.0;
    boost::math::tools::eps_tolerance<double> tol(48);
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, 1.0 - target, f(hi), tol, iters);
    return 0.5 * (r.first + r.second);
}

std::vector<double> gaussian_blur(std::span<const double> values, double step, double fwhm) {
    std::vector<double> out(values.begin(), values.end());
    if (!(fwhm >= step) || values.empty()) return out;
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const auto half = static_cast<long>(std::ceil(6.0 * sigma / step)) + 1;
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    for (long m = -half; m <= half; ++m) {
        kernel[static_cast<std::size_t>(m + half)] =
            normal_cdf((m + 0.5) * step / sigma) - normal_cdf((m - 0.5) * step / sigma);
    }
    const auto n = static_cast<long>(values.size());
    std::fill(out.begin(), out.end(), 0.0);
    for (long j = 0; j < n; ++j) {
        const long lo = std::max(-half, -j);
        const long hi = std::min(half, n - 1 - j);
        double mass = 0.0;
        for (long m = lo; m <= hi; ++m) mass += kernel[static_cast<std::size_t>(m + half)];
        const double v = values[static_cast<std::size_t>(j)] / mass;
        for (long m = lo; m <= hi; ++m) out[static_cast<std::size_t>(j + m)] += v * kernel[static_cast<std::size_t>(m + half)];
    }
    return out;
}

DecayCurve convolve_irf(const DecayCurve& curve, double irf_fwhm) {
    if (curve.t.size() != curve.intensity.size()) throw ValidationError("curve time and intensity sizes differ");
    if (!(irf_fwhm >= 0.0)) throw ValidationError("IRF FWHM must be non-negative");
    if (curve.t.size() < 2) return curve;
    const double step = curve.t[1] - curve.t[0];
    for (std::size_t i = 1; i < curve.t.size(); ++i) {
        if (std::abs((curve.t[i] - curve.t[i - 1]) - step) > 1e-9 * step)
            throw ValidationError("IRF convolution requires a uniform time grid");
    }
    DecayCurve out = curve;
    out.intensity = gaussian_blur(curve.intensity, step, irf_fwhm);
    return out;
}

BinnedDecayModel::BinnedDecayModel(RateEnsemble ens, double bin_width, std::size_t bins, double irf_fwhm)
    : ens_(ens), width_(bin_width), bins_(bins), irf_fwhm_(irf_fwhm) {
    ens_.validate();
    if (!(bin_width > 0.0) || bins == 0) throw ValidationError("binned model needs positive bin width and bins");
    if (!(irf_fwhm >= 0.0)) throw ValidationError("IRF FWHM must be non-negative");
    if (ens_.w_c > 0.0) {
        const quad::Rule rule = rate_rule(ens_, 4.0, 16.0);
        q_nodes_ = rule.nodes;
        q_weights_.resize(rule.nodes.size());
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) q_weights_[k] = rule.weights[k] * pi1(rule.nodes[k], ens_);
    }

    const double window = width_ * static_cast<double>(bins_);
    tau_ = width_ / 50.0;
    const double xa = std::log(tau_);
    const double xb = std::log(window + tau_);
    const auto interior = static_cast<std::size_t>(std::ceil((xb - xa) / 0.06));
    dx_ = (xb - xa) / static_cast<double>(interior);
    // Padding nodes keep the spline's end conditions away from the data range.
    constexpr std::size_t kPad = 6;
    x0_ = xa - dx_ * kPad;
    spline_nodes_ = interior + 1 + 2 * kPad;

    // Segments in x between spline nodes and bin edges; 4-point Gauss-Legendre on each.
    std::vector<double> cuts;
    for (std::size_t k = kPad; k + kPad < spline_nodes_; ++k) cuts.push_back(x0_ + dx_ * static_cast<double>(k));
    for (std::size_t i = 0; i <= bins_; ++i) cuts.push_back(std::log(width_ * static_cast<double>(i) + tau_));
    std::sort(cuts.begin(), cuts.end());
    constexpr double kNode[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    constexpr double kWeight[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    for (std::size_t s = 1; s < cuts.size(); ++s) {
        const double a = cuts[s - 1];
        const double b = cuts[s];
        if (!(b - a > 1e-14)) continue;
        const double mid_t = std::exp(0.5 * (a + b)) - tau_;
        const auto bin = std::min(bins_ - 1, static_cast<std::size_t>(std::floor(mid_t / width_)));
        for (int k = 0; k < 4; ++k) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * kNode[k];
            const double ex = std::exp(x);
            pt_t_.push_back(ex - tau_);
            pt_w_.push_back(0.5 * (b - a) * kWeight[k] * ex);
            pt_bin_.push_back(bin);
        }
    }
}

std::vector<double> BinnedDecayModel::unblurred(const PurcellPair& fp) const {
    fp.validate();
    std::vector<double> out(bins_, 0.0);
    auto accumulate = [&](auto&& intensity) {
        for (std::size_t p = 0; p < pt_t_.size(); ++p) out[pt_bin_[p]] += pt_w_[p] * intensity(pt_t_[p]);
    };

    if (fp.degenerate()) {
        const double norm = ens_.w_c == 0.0 ? 1.0 : ensemble_norm(ens_);
        const double mu = fp.f_perp * ens_.gamma_c;
        const double sd = fp.f_perp * ens_.w_c;
        accumulate([&](double t) { return gaussian_laplace(mu, sd, t, norm); });
    } else if (ens_.w_c == 0.0) {
        accumulate([&](double t) { return orientation_averaged_decay(ens_.gamma_c * t, fp); });
    } else {
        // log I is smooth in ln(t + tau); tabulate it on the uniform grid and spline.
        std::vector<double> log_values(spline_nodes_);
        for (std::size_t k = 0; k < spline_nodes_; ++k) {
            const double t = std::exp(x0_ + dx_ * static_cast<double>(k)) - tau_;
            double s = 0.0;
            for (std::size_t j = 0; j < q_nodes_.size(); ++j) s += q_weights_[j] * orientation_averaged_decay(q_nodes_[j] * t, fp);
            log_values[k] = std::log(std::max(s, 1e-300));
        }
        const boost::math::interpolators::cardinal_cubic_b_spline<double> spline(log_values.begin(), log_values.end(),
                                                                                x0_, dx_);
        for (std::size_t p = 0; p < pt_t_.size(); ++p)
            out[pt_bin_[p]] += pt_w_[p] * std::exp(spline(std::log(pt_t_[p] + tau_)));
    }
    return out;
}

std::vector<double> BinnedDecayModel::evaluate(const PurcellPair& fp) const {
    std::vector<double> m = unblurred(fp);
    if (irf_fwhm_ > 0.0) m = gaussian_blur(m, width_, irf_fwhm_);
    return m;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> poisson_counts(const std::vector<double>& expected, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> counts(expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (expected[i] <= 0.0) {
            counts[i] = 0.0;
            continue;
        }
        std::poisson_distribution<long long> pd(expected[i]);
        counts[i] = static_cast<double>(pd(rng));
    }
    return counts;
}

}  // namespace

McResult sample_decay_mc(const RateEnsemble& ens, const PurcellPair& fp, const McSpec& spec) {
    ens.validate();
    fp.validate();
    if (spec.samples == 0) throw ValidationError("sample count must be positive");
    constexpr std::size_t kBatch = 65536;
    McResult out;
    out.samples.reserve(spec.samples);
    for (std::size_t start = 0, batch = 0; start < spec.samples; start += kBatch, ++batch) {
        std::mt19937_64 rng(derive_seed(spec.seed, batch));
        std::normal_distribution<double> normal(ens.gamma_c, ens.w_c);
        const std::size_t end = std::min(spec.samples, start + kBatch);
        for (std::size_t i = start; i < end; ++i) {
            const double theta = std::acos(1.0 - uniform01(rng));
            double gq = ens.gamma_c;
            if (ens.w_c > 0.0) {
                do {
                    gq = normal(rng);
                } while (!(gq > 0.0));
            }
            out.samples.push_back({theta, gq, gamma_of_theta(gq, theta, fp)});
        }
    }
    if (spec.make_histogram) {
        DecayHistogram h = make_empty_histogram(spec.bin_width, spec.window);
        std::vector<double> expected(h.size(), 0.0);
        for (const auto& s : out.samples) {
            const double r = std::exp(-s.gamma * spec.bin_width);
            const double per_bin = (1.0 - r) / s.gamma;
            double e = 1.0;
            for (std::size_t i = 0; i < expected.size() && e > 1e-18; ++i) {
                expected[i] += e * per_bin;
                e *= r;
            }
        }
        double total = 0.0;
        for (double v : expected) total += v;
        for (double& v : expected) v *= spec.total_counts / total;
        h.counts = spec.poisson ? poisson_counts(expected, derive_seed(spec.seed, 1ULL << 40)) : expected;
        out.histogram = std::move(h);
    }
    return out;
}

DecayHistogram synthesize_histogram(const RateEnsemble& ens, const PurcellPair& fp, const SynthSpec& spec) {
    if (!(spec.total_counts > 0.0)) throw ValidationError("total_counts must be positive");
    if (!(spec.background_per_bin >= 0.0)) throw ValidationError("background must be non-negative");
    DecayHistogram h = make_empty_histogram(spec.bin_width, spec.window);
    const BinnedDecayModel model(ens, spec.bin_width, h.size(), spec.irf_fwhm);
    std::vector<double> m = model.evaluate(fp);
    double total = 0.0;
    for (double v : m) total += v;
    for (double& v : m) v = spec.total_counts * v / total + spec.background_per_bin;
    h.counts = spec.poisson ? poisson_counts(m, derive_seed(spec.seed, 0)) : m;
    return h;
}

}  // namespace patchant
