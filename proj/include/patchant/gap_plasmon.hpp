#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "patchant/materials.hpp"

namespace patchant {

// Lowest symmetric metal-insulator-metal gap plasmon.
struct GapPlasmonMode {
    std::complex<double> n_eff;      // beta / k0
    double propagation_length_nm{};  // 1 / (2 k0 Im n_eff), intensity decay length
    double wavelength_nm{};
    double gap_thickness_nm{};
    double residual{};  // |dispersion relation| at the returned root
    int iterations{};
};

// n_eff = sqrt(eps_m eps_d / (eps_m + eps_d)); throws DomainError when Re eps_m >= -eps_d.
std::complex<double> spp_single_interface(Permittivity eps_metal, Permittivity eps_dielectric);
std::complex<double> spp_single_interface(double wavelength_nm, const Material& metal,
                                          const Material& dielectric);

// tanh(kd t / 2) + eps_d km / (eps_m kd), kappa_i = k0 sqrt(n^2 - eps_i), Re kappa >= 0.
std::complex<double> gap_dispersion(std::complex<double> n_eff, double k0, double gap_nm,
                                    Permittivity eps_metal, Permittivity eps_dielectric);

struct GapSolverOptions {
    double residual_tol = 1e-10;
    int max_iterations = 200;
};

// Damped complex Newton seeded from the single-interface index, with a multi-start fallback.
// Throws RootFindingError carrying the best residual when no seed converges.
GapPlasmonMode solve_gap_mode(double wavelength_nm, double gap_thickness_nm, const Material& metal,
                              const Material& dielectric, const GapSolverOptions& opt = {});

// Radial Fabry-Perot surrogate for the finite disk. Edge values are surrogate constants,
// not measured quantities.
struct FabryPerotParams {
    double edge_reflectivity = 0.9;
    double edge_phase = -std::numbers::pi / 2;
    std::optional<double> planar_baseline;  // F_inf; computed from the planar stack when empty
    double parallel_value = 4.5;
};

struct PurcellCurve {
    std::vector<double> diameters_nm;
    std::vector<double> f_perp;
    std::vector<double> f_par;
    double planar_baseline{};
    GapPlasmonMode mode;
};

// Airy-normalized round-trip factor (1 - rho^2) / |1 - rho e^{i psi}|^2, rho = r e^{-D/(2 L)},
// psi = k0 Re(n_eff) D + phi. Averages to 1 over one period.
double round_trip_factor(double diameter_nm, const GapPlasmonMode& mode, const FabryPerotParams& params);

PurcellCurve purcell_vs_diameter(const AntennaGeometry& geom, std::span<const double> diameters_nm,
                                 const FabryPerotParams& params = {});

}  // namespace patchant
