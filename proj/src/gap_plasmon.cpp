#include "patchant/gap_plasmon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "patchant/errors.hpp"
#include "patchant/layered_emission.hpp"

namespace patchant {

namespace {

using cplx = std::complex<double>;

struct Evaluation {
    cplx f;
    cplx df;
};

Evaluation dispersion_with_derivative(cplx n, double k0, double t, cplx eps_m, cplx eps_d) {
    const cplx kd = k0 * std::sqrt(n * n - eps_d);
    const cplx km = k0 * std::sqrt(n * n - eps_m);
    const cplx arg = 0.5 * kd * t;
    const cplx th = std::tanh(arg);
    const cplx ratio = eps_d / eps_m;
    const cplx f = th + ratio * km / kd;
    const cplx dkd = k0 * k0 * n / kd;
    const cplx dkm = k0 * k0 * n / km;
    const cplx sech2 = 1.0 - th * th;
    const cplx df = sech2 * 0.5 * t * dkd + ratio * (dkm * kd - km * dkd) / (kd * kd);
    return {f, df};
}

struct NewtonOutcome {
    cplx root;
    double residual;
    int iterations;
};

NewtonOutcome damped_newton(cplx seed, double k0, double t, cplx eps_m, cplx eps_d, const GapSolverOptions& opt) {
    cplx n = seed;
    Evaluation ev = dispersion_with_derivative(n, k0, t, eps_m, eps_d);
    double res = std::abs(ev.f);
    int it = 0;
    for (; it < opt.max_iterations && res > 0.01 * opt.residual_tol; ++it) {
        if (ev.df == cplx{0.0, 0.0} || !std::isfinite(std::abs(ev.df))) break;
        cplx step = ev.f / ev.df;
        const double cap = 0.5 * std::abs(n);
        if (std::abs(step) > cap) step *= cap / std::abs(step);
        double lambda = 1.0;
        bool improved = false;
        for (int k = 0; k < 40; ++k) {
            const cplx trial = n - lambda * step;
            const Evaluation tv = dispersion_with_derivative(trial, k0, t, eps_m, eps_d);
            const double tr = std::abs(tv.f);
            if (std::isfinite(tr) && tr < res) {
                n = trial;
                ev = tv;
                res = tr;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    return {n, res, it};
}

}  // namespace

std::complex<double> spp_single_interface(Permittivity eps_m, Permittivity eps_d) {
    if (!(eps_m.real() < -eps_d.real()))
        throw DomainError("no bound surface plasmon: Re(eps_metal) must be below -eps_dielectric");
    cplx n = std::sqrt(eps_m * eps_d / (eps_m + eps_d));
    if (n.real() < 0.0) n = -n;
    return n;
}

std::complex<double> spp_single_interface(double wavelength_nm, const Material& metal, const Material& dielectric) {
    return spp_single_interface(permittivity_at(metal, wavelength_nm), permittivity_at(dielectric, wavelength_nm));
}

std::complex<double> gap_dispersion(std::complex<double> n_eff, double k0, double gap_nm, Permittivity eps_m,
                                    Permittivity eps_d) {
    return dispersion_with_derivative(n_eff, k0, gap_nm, eps_m, eps_d).f;
}

GapPlasmonMode solve_gap_mode(double wavelength_nm, double gap_thickness_nm, const Material& metal,
                              const Material& dielectric, const GapSolverOptions& opt) {
    if (!(gap_thickness_nm > 0.0) || !std::isfinite(gap_thickness_nm))
        throw ValidationError("gap thickness must be finite and positive");
    const cplx eps_m = permittivity_at(metal, wavelength_nm);
    const cplx eps_d = permittivity_at(dielectric, wavelength_nm);
    const double k0 = 2.0 * std::numbers::pi / wavelength_nm;
    const double n_d = std::sqrt(eps_d.real());

    const cplx spp = spp_single_interface(eps_m, eps_d);
    std::vector<cplx> seeds{spp};
    // Thin gaps push the index well above the single-interface value.
    for (double re : {1.2, 1.5, 2.0, 3.0, 4.5, 7.0, 10.0}) {
        for (double im : {0.02, 0.1, 0.4}) seeds.emplace_back(re * spp.real(), im * re * spp.real());
    }

    auto acceptable = [&](const NewtonOutcome& o) {
        return o.residual < opt.residual_tol && o.root.real() > n_d && o.root.imag() >= 0.0;
    };
    NewtonOutcome best{spp, std::numeric_limits<double>::infinity(), 0};
    for (const cplx seed : seeds) {
        const NewtonOutcome o = damped_newton(seed, k0, gap_thickness_nm, eps_m, eps_d, opt);
        if (acceptable(o)) {
            GapPlasmonMode mode;
            mode.n_eff = o.root;
            mode.propagation_length_nm = o.root.imag() > 0.0 ? 1.0 / (2.0 * k0 * o.root.imag())
                                                             : std::numeric_limits<double>::infinity();
            mode.wavelength_nm = wavelength_nm;
            mode.gap_thickness_nm = gap_thickness_nm;
            mode.residual = o.residual;
            mode.iterations = o.iterations;
            return mode;
        }
        if (o.residual < best.residual) best = o;
    }
    throw RootFindingError("gap plasmon dispersion: Newton failed from every seed", best.root, best.residual);
}

double round_trip_factor(double diameter_nm, const GapPlasmonMode& mode, const FabryPerotParams& params) {
    const double k0 = 2.0 * std::numbers::pi / mode.wavelength_nm;
    const double rho = params.edge_reflectivity * std::exp(-diameter_nm / (2.0 * mode.propagation_length_nm));
    const double psi = k0 * mode.n_eff.real() * diameter_nm + params.edge_phase;
    const double denom = std::norm(cplx{1.0, 0.0} - rho * std::polar(1.0, psi));
    return (1.0 - rho * rho) / denom;
}

PurcellCurve purcell_vs_diameter(const AntennaGeometry& geom, std::span<const double> diameters_nm,
                                 const FabryPerotParams& params) {
    geom.validate();
    if (!(params.edge_reflectivity >= 0.0 && params.edge_reflectivity < 1.0))
        throw ValidationError("edge_reflectivity must lie in [0, 1)");
    if (!(params.parallel_value > 0.0)) throw ValidationError("parallel_value must be positive");
    for (std::size_t i = 0; i < diameters_nm.size(); ++i) {
        if (!(diameters_nm[i] > 0.0) || (i > 0 && !(diameters_nm[i] > diameters_nm[i - 1])))
            throw ValidationError("diameters must be positive and strictly increasing");
    }
    PurcellCurve curve;
    curve.mode = solve_gap_mode(geom.emission_wavelength_nm, geom.spacer_thickness_nm, materials::gold(),
                                materials::silica());
    curve.planar_baseline = params.planar_baseline
                                ? *params.planar_baseline
                                : purcell_planar(build_patch_stack(geom), Orientation::Perpendicular).value;
    if (!(curve.planar_baseline > 0.0)) throw ValidationError("planar baseline must be positive");
    curve.diameters_nm.assign(diameters_nm.begin(), diameters_nm.end());
    for (double d : diameters_nm) {
        curve.f_perp.push_back(curve.planar_baseline * round_trip_factor(d, curve.mode, params));
        curve.f_par.push_back(params.parallel_value);
    }
    return curve;
}

}  // namespace patchant
