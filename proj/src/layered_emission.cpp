#include "patchant/layered_emission.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "patchant/errors.hpp"
#include "patchant/gap_plasmon.hpp"

namespace patchant {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

// Principal square root on the Im >= 0 sheet.
cplx sqrt_upper(cplx z) {
    cplx w = std::sqrt(z);
    if (w.imag() < 0.0 || (w.imag() == 0.0 && w.real() < 0.0)) w = -w;
    return w;
}

struct HalfOptics {
    std::vector<cplx> eps;  // layers then halfspace
    std::vector<double> thickness;
};

struct StackOptics {
    double k0;
    double n_gap;
    cplx eps_gap;
    HalfOptics lower;
    HalfOptics upper;
    double d_lower;
    double d_upper;
};

HalfOptics half_optics(const HalfStack& half, double wavelength) {
    HalfOptics h;
    for (const auto& layer : half.layers) {
        h.eps.push_back(permittivity_at(layer.material, wavelength));
        h.thickness.push_back(layer.thickness_nm);
    }
    h.eps.push_back(permittivity_at(half.halfspace, wavelength));
    return h;
}

double gap_index(const Material& gap, double wavelength) {
    const cplx eps = permittivity_at(gap, wavelength);
    if (eps.imag() != 0.0 || !(eps.real() > 0.0))
        throw ValidationError("emitter gap medium must be a lossless dielectric");
    return std::sqrt(eps.real());
}

StackOptics stack_optics(const PlanarStack& stack) {
    stack.validate();
    StackOptics s;
    s.k0 = 2.0 * std::numbers::pi / stack.wavelength_nm;
    s.n_gap = gap_index(stack.gap, stack.wavelength_nm);
    s.eps_gap = s.n_gap * s.n_gap;
    s.lower = half_optics(stack.lower, stack.wavelength_nm);
    s.upper = half_optics(stack.upper, stack.wavelength_nm);
    s.d_lower = stack.d_lower_nm;
    s.d_upper = stack.d_upper_nm;
    return s;
}

// Interface coefficient from medium i into medium j (electric-field convention for p).
cplx interface_r(Polarization pol, cplx eps_i, cplx kz_i, cplx eps_j, cplx kz_j) {
    if (eps_i == eps_j) return 0.0;
    if (pol == Polarization::S) return (kz_i - kz_j) / (kz_i + kz_j);
    return (eps_i * kz_j - eps_j * kz_i) / (eps_i * kz_j + eps_j * kz_i);
}

// Airy recursion from the outermost interface inward. q2 = (u n_gap)^2.
cplx reflection(const HalfOptics& h, cplx eps_gap, Polarization pol, cplx q2, double k0) {
    const std::size_t n = h.eps.size();
    std::vector<cplx> kz(n);
    for (std::size_t j = 0; j < n; ++j) kz[j] = k0 * sqrt_upper(h.eps[j] - q2);
    cplx r{0.0, 0.0};
    // r holds the reflection at the top of medium j+1 looking outward.
    for (std::size_t j = n - 1; j-- > 0;) {
        const cplx r_j = interface_r(pol, h.eps[j], kz[j], h.eps[j + 1], kz[j + 1]);
        if (j + 1 == n - 1) {
            r = r_j;
        } else {
            const cplx ph = std::exp(2.0 * kI * kz[j + 1] * h.thickness[j + 1]);
            r = (r_j + r * ph) / (1.0 + r_j * r * ph);
        }
    }
    const cplx kz_g = k0 * sqrt_upper(eps_gap - q2);
    const cplx r_g = interface_r(pol, eps_gap, kz_g, h.eps[0], kz[0]);
    if (n == 1) return r_g;
    const cplx ph = std::exp(2.0 * kI * kz[0] * h.thickness[0]);
    return (r_g + r * ph) / (1.0 + r_g * r * ph);
}

// Bracket K(u) with dF/du = Re[K(u) / lz], lz = sqrt(1 - u^2) on the Im >= 0 sheet.
cplx bracket(const StackOptics& s, Orientation o, double u) {
    // At u = 1 both reflections reach their grazing limit and K is 0/0; step off by one ulp.
    if (u == 1.0) u = std::nextafter(1.0, 0.0);
    const double q2 = (u * s.n_gap) * (u * s.n_gap);
    const cplx lz = sqrt_upper(cplx{1.0 - u * u, 0.0});
    const cplx kz = s.k0 * s.n_gap * lz;
    const cplx ph_l = std::exp(2.0 * kI * kz * s.d_lower);
    const cplx ph_u = std::exp(2.0 * kI * kz * s.d_upper);
    const cplx ap_l = reflection(s.lower, s.eps_gap, Polarization::P, q2, s.k0) * ph_l;
    const cplx ap_u = reflection(s.upper, s.eps_gap, Polarization::P, q2, s.k0) * ph_u;
    if (o == Orientation::Perpendicular) {
        return 1.5 * u * u * u * (1.0 - ap_l) * (1.0 - ap_u) / (1.0 - ap_l * ap_u);
    }
    const cplx as_l = reflection(s.lower, s.eps_gap, Polarization::S, q2, s.k0) * ph_l;
    const cplx as_u = reflection(s.upper, s.eps_gap, Polarization::S, q2, s.k0) * ph_u;
    const cplx p_part = lz * lz * (1.0 + ap_l) * (1.0 + ap_u) / (1.0 - ap_l * ap_u);
    const cplx s_part = (1.0 + as_l) * (1.0 + as_u) / (1.0 - as_l * as_u);
    return 0.75 * u * (p_part + s_part);
}

double density_at(const StackOptics& s, Orientation o, double u) {
    const cplx k = bracket(s, o, u);
    if (u < 1.0) return k.real() / std::sqrt(1.0 - u * u);
    return k.imag() / std::sqrt(u * u - 1.0);
}

// Integral of g over [ta, tb] after t = ta + (tb - ta)(3x^2 - 2x^3); this removes square-root
// endpoint behaviour at critical angles where breakpoints are placed.
template <class G>
quad::Result integrate_softened(G&& g, double ta, double tb, const quad::Options& opt) {
    const double span = tb - ta;
    auto f = [&](double x) { return g(ta + span * x * x * (3.0 - 2.0 * x)) * 6.0 * span * x * (1.0 - x); };
    return quad::integrate(f, 0.0, 1.0, opt);
}

// Integral of dF/du over [a, b] using u = sin(t) below 1 and u = cosh(t) above 1; the Jacobian
// cancels the 1/|lz| factor exactly.
quad::Result integrate_segment(const StackOptics& s, Orientation o, double a, double b,
                               const quad::Options& opt) {
    if (!(b > a)) return {};
    if (b <= 1.0) {
        auto g = [&](double t) { return bracket(s, o, std::sin(t)).real(); };
        return integrate_softened(g, std::asin(a), std::asin(std::min(b, 1.0)), opt);
    }
    if (a >= 1.0) {
        auto g = [&](double t) { return bracket(s, o, std::cosh(t)).imag(); };
        return integrate_softened(g, std::acosh(a), std::acosh(b), opt);
    }
    quad::Result lo = integrate_segment(s, o, a, 1.0, opt);
    quad::Result hi = integrate_segment(s, o, 1.0, b, opt);
    return {lo.value + hi.value, lo.error + hi.error, lo.l1 + hi.l1};
}

bool is_metal(cplx eps, cplx eps_gap) { return eps.real() < -eps_gap.real(); }

struct PoleEstimate {
    double center;
    double width;
};

// Guided-mode pole of the two-mirror cavity: zero of 1 - r_l r_u exp(2 i kz t) for p polarization
// in complex u, polished by Newton from a seed. Empty if the iteration does not settle.
std::optional<cplx> cavity_pole(const StackOptics& s, cplx seed) {
    const double t = s.d_lower + s.d_upper;
    auto denom = [&](cplx u) {
        const cplx q2 = u * u * s.eps_gap;
        const cplx kz = s.k0 * sqrt_upper(s.eps_gap - q2);
        return 1.0 - reflection(s.lower, s.eps_gap, Polarization::P, q2, s.k0) *
                         reflection(s.upper, s.eps_gap, Polarization::P, q2, s.k0) * std::exp(2.0 * kI * kz * t);
    };
    cplx u = seed;
    for (int it = 0; it < 60; ++it) {
        const cplx f = denom(u);
        if (std::abs(f) < 1e-12) break;
        const double h = 1e-7 * std::abs(u);
        const cplx df = (denom(u + h) - denom(u - h)) / (2.0 * h);
        cplx step = f / df;
        if (std::abs(step) > 0.2 * std::abs(u)) step *= 0.2 * std::abs(u) / std::abs(step);
        u -= step;
        if (!std::isfinite(u.real()) || !std::isfinite(u.imag())) return std::nullopt;
    }
    if (!(std::abs(denom(u)) < 1e-9) || !(u.real() > 1.0) || u.imag() < 0.0) return std::nullopt;
    return u;
}

std::vector<PoleEstimate> pole_estimates(const PlanarStack& stack, const StackOptics& s) {
    std::vector<PoleEstimate> poles;
    const Material& lower = stack.lower.adjacent();
    const cplx eps_l = s.lower.eps.front();
    const cplx eps_u = s.upper.eps.front();
    auto add = [&](cplx u) { poles.push_back({u.real(), std::max(u.imag(), 1e-4)}); };
    if (is_metal(eps_l, s.eps_gap) && is_metal(eps_u, s.eps_gap)) {
        // Coupled gap mode: the ideal metal-insulator-metal index seeds the stack's own pole, which
        // moves when the adjacent metals are thin films.
        try {
            const cplx mim = solve_gap_mode(stack.wavelength_nm, stack.gap_thickness(), lower, stack.gap).n_eff / s.n_gap;
            const auto refined = cavity_pole(s, mim);
            add(refined ? *refined : mim);
        } catch (const std::exception&) {
        }
    }
    for (const cplx eps : {eps_l, eps_u}) {
        if (is_metal(eps, s.eps_gap)) add(spp_single_interface(eps, s.eps_gap) / s.n_gap);
    }
    return poles;
}

double tail_cutoff(const StackOptics& s, const EmissionOptions& opt) {
    const double d_min = std::min(s.d_lower, s.d_upper);
    const double decay = std::log(1.0 / opt.tail_threshold) / (2.0 * s.k0 * s.n_gap * d_min);
    return std::sqrt(1.0 + decay * decay);
}

std::vector<double> breakpoints_for(const PlanarStack& stack, const StackOptics& s,
                                    const EmissionOptions& opt) {
    std::vector<double> bp{0.0, 1.0};
    for (const HalfOptics* h : {&s.lower, &s.upper}) {
        for (const cplx eps : h->eps) {
            if (eps.imag() == 0.0 && eps.real() > 0.0) bp.push_back(std::sqrt(eps.real()) / s.n_gap);
        }
    }
    double u_max = std::max(opt.min_u_max, tail_cutoff(s, opt));
    for (const auto& p : pole_estimates(stack, s)) {
        for (double k : {-opt.pole_window, -1.0, 0.0, 1.0, opt.pole_window}) {
            bp.push_back(p.center + k * p.width);
        }
        u_max = std::max(u_max, 2.0 * (p.center + opt.pole_window * p.width));
    }
    bp.push_back(u_max);
    std::erase_if(bp, [&](double x) { return x < 0.0 || x > u_max; });
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             bp.end());
    return bp;
}

quad::Result integrate_range(const StackOptics& s, Orientation o, std::span<const double> bp,
                             double a, double b, const quad::Options& opt) {
    quad::Result total;
    double lo = a;
    for (double x : bp) {
        if (x <= lo) continue;
        const double hi = std::min(x, b);
        const quad::Result r = integrate_segment(s, o, lo, hi, opt);
        total.value += r.value;
        total.error += r.error;
        total.l1 += r.l1;
        lo = hi;
        if (lo >= b) break;
    }
    return total;
}

}  // namespace

std::complex<double> half_stack_reflection(const HalfStack& half, const Material& gap, Polarization pol,
                                           double u, double wavelength_nm) {
    if (!(u >= 0.0)) throw ValidationError("in-plane wavevector u must be non-negative");
    const double n_gap = gap_index(gap, wavelength_nm);
    const double k0 = 2.0 * std::numbers::pi / wavelength_nm;
    const HalfOptics h = half_optics(half, wavelength_nm);
    return reflection(h, n_gap * n_gap, pol, (u * n_gap) * (u * n_gap), k0);
}

double dissipation_density(const PlanarStack& stack, Orientation orientation, double u) {
    if (!(u >= 0.0)) throw ValidationError("in-plane wavevector u must be non-negative");
    const StackOptics s = stack_optics(stack);
    constexpr double kBranchWindow = 1e-7;
    if (std::abs(u - 1.0) < kBranchWindow) {
        const quad::Result r =
            integrate_segment(s, orientation, 1.0 - kBranchWindow, 1.0 + kBranchWindow, {1e-10, 0.0, 12});
        return r.value / (2.0 * kBranchWindow);
    }
    return density_at(s, orientation, u);
}

DissipationSpectrum dissipation_spectrum(const PlanarStack& stack, Orientation orientation,
                                         std::span<const double> u_grid) {
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        if (!(u_grid[i] >= 0.0) || (i > 0 && !(u_grid[i] > u_grid[i - 1])))
            throw ValidationError("u grid must be non-negative and strictly increasing");
    }
    DissipationSpectrum spec;
    spec.orientation = orientation;
    spec.u_grid.assign(u_grid.begin(), u_grid.end());
    spec.density.reserve(u_grid.size());
    for (double u : u_grid) spec.density.push_back(dissipation_density(stack, orientation, u));
    return spec;
}

std::vector<double> integration_breakpoints(const PlanarStack& stack, const EmissionOptions& opt) {
    const StackOptics s = stack_optics(stack);
    return breakpoints_for(stack, s, opt);
}

PlanarPurcell purcell_planar(const PlanarStack& stack, Orientation orientation, const EmissionOptions& opt) {
    const StackOptics s = stack_optics(stack);
    const std::vector<double> bp = breakpoints_for(stack, s, opt);
    quad::Result total;
    for (std::size_t i = 1; i < bp.size(); ++i) {
        const quad::Result r = integrate_segment(s, orientation, bp[i - 1], bp[i], opt.quad);
        total.value += r.value;
        total.error += r.error;
        total.l1 += r.l1;
    }
    quad::check_accuracy(total, opt.quad, "purcell_planar");
    return {total.value, total.error, bp.back()};
}

ChannelPartition default_partition(const PlanarStack& stack) {
    const StackOptics s = stack_optics(stack);
    ChannelPartition p;
    const cplx eps_top = s.upper.eps.back();
    double photon = 1.0;
    if (eps_top.real() > 0.0) photon = std::min(1.0, std::sqrt(eps_top).real() / s.n_gap);
    p.u_photon_max = photon;
    const auto poles = pole_estimates(stack, s);
    if (!poles.empty()) {
        // The first estimate is the coupled gap mode when both sides are metallic.
        p.u_plasmon_max = poles.front().center + 0.5;
    } else {
        p.u_plasmon_max = photon + 0.5;
    }
    return p;
}

ChannelSplit decay_channels(const PlanarStack& stack, Orientation orientation,
                            const ChannelPartition& partition, const EmissionOptions& opt) {
    const StackOptics s = stack_optics(stack);
    ChannelPartition p = partition;
    if (!p.u_photon_max || !p.u_plasmon_max) {
        const ChannelPartition d = default_partition(stack);
        if (!p.u_photon_max) p.u_photon_max = d.u_photon_max;
        if (!p.u_plasmon_max) p.u_plasmon_max = d.u_plasmon_max;
    }
    std::vector<double> bp = breakpoints_for(stack, s, opt);
    const double u_ph = *p.u_photon_max;
    const double u_pl = *p.u_plasmon_max;
    const double u_max = bp.back();
    if (!(0.0 < u_ph && u_ph < u_pl && u_pl < u_max))
        throw ValidationError("channel partition must satisfy 0 < u_photon_max < u_plasmon_max < u_max");
    bp.push_back(u_ph);
    bp.push_back(u_pl);
    std::sort(bp.begin(), bp.end());

    const quad::Result ph = integrate_range(s, orientation, bp, 0.0, u_ph, opt.quad);
    const quad::Result pl = integrate_range(s, orientation, bp, u_ph, u_pl, opt.quad);
    const quad::Result qu = integrate_range(s, orientation, bp, u_pl, u_max, opt.quad);
    const quad::Result total{ph.value + pl.value + qu.value, ph.error + pl.error + qu.error,
                             ph.l1 + pl.l1 + qu.l1};
    quad::check_accuracy(total, opt.quad, "decay_channels");
    ChannelSplit split;
    split.total_purcell = total.value;
    split.photon_fraction = ph.value / total.value;
    split.plasmon_fraction = pl.value / total.value;
    split.quench_fraction = qu.value / total.value;
    split.u_photon_max = u_ph;
    split.u_plasmon_max = u_pl;
    return split;
}

}  // namespace patchant
