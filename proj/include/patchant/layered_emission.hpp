#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "patchant/materials.hpp"
#include "patchant/quadrature.hpp"

namespace patchant {

enum class Polarization { S, P };
enum class Orientation { Perpendicular, Parallel };

// Amplitude reflection seen from the gap medium toward a half-stack, in-plane wavevector
// u * k0 * n_gap. p-polarization uses the electric-field convention (r_p = r_s at normal incidence).
std::complex<double> half_stack_reflection(const HalfStack& half, const Material& gap,
                                           Polarization pol, double u, double wavelength_nm);

struct EmissionOptions {
    quad::Options quad{1e-10, 0.0, 22};
    double min_u_max = 50.0;
    double tail_threshold = 1e-12;  // cutoff on exp(-2 k sqrt(u^2-1) d_min)
    double pole_window = 5.0;       // half-width of refinement window around poles, in pole widths
};

struct DissipationSpectrum {
    std::vector<double> u_grid;
    std::vector<double> density;  // dF/du
    Orientation orientation{};
};

// Normalized power density dF/du at a single in-plane wavevector; finite everywhere (the
// 1/sqrt(1-u^2) branch point at u = 1 returns the local window average).
double dissipation_density(const PlanarStack& stack, Orientation orientation, double u);

DissipationSpectrum dissipation_spectrum(const PlanarStack& stack, Orientation orientation,
                                         std::span<const double> u_grid);

struct PlanarPurcell {
    double value{};
    double error_estimate{};
    double u_max{};
};

PlanarPurcell purcell_planar(const PlanarStack& stack, Orientation orientation,
                             const EmissionOptions& opt = {});

struct ChannelPartition {
    std::optional<double> u_photon_max;
    std::optional<double> u_plasmon_max;
};

struct ChannelSplit {
    double photon_fraction{};
    double plasmon_fraction{};
    double quench_fraction{};
    double total_purcell{};
    double u_photon_max{};
    double u_plasmon_max{};
};

// Photon boundary: light escaping the top half-space (n_top / n_gap, capped at 1).
// Plasmon boundary: Re(n_eff)/n_gap + 0.5 for the gap (or single-interface) plasmon.
ChannelPartition default_partition(const PlanarStack& stack);

ChannelSplit decay_channels(const PlanarStack& stack, Orientation orientation,
                            const ChannelPartition& partition = {}, const EmissionOptions& opt = {});

// Integration breakpoints in u (0, critical points, 1, pole windows, u_max), sorted.
std::vector<double> integration_breakpoints(const PlanarStack& stack, const EmissionOptions& opt = {});

}  // namespace patchant
