#pragma once

#include <functional>
#include <vector>

#include "patchant/gap_plasmon.hpp"
#include "patchant/materials.hpp"

namespace patchant {

enum class Normalization { UnitIntegral, UnitPeak };
enum class ElementFactor { Unity, Cosine };

struct PatternGrid {
    double theta_step_deg = 0.25;  // theta spans [0, 90] inclusive
    double phi_step_deg = 2.0;     // phi spans [0, 360); must divide 180

    void validate() const;
};

struct RadiationPattern {
    std::vector<double> theta_deg;
    std::vector<double> phi_deg;
    std::vector<double> intensity;  // row-major: theta index major, phi index minor
    Normalization normalization = Normalization::UnitIntegral;

    double at(std::size_t i_theta, std::size_t j_phi) const { return intensity[i_theta * phi_deg.size() + j_phi]; }
    double& at(std::size_t i_theta, std::size_t j_phi) { return intensity[i_theta * phi_deg.size() + j_phi]; }
};

// Tabulates f(theta_deg, phi_deg) on the grid, then normalizes.
RadiationPattern make_pattern(const PatternGrid& grid, const std::function<double(double, double)>& f,
                              Normalization norm = Normalization::UnitIntegral);

// Integral of I over the upper hemisphere (trapezoid in theta, uniform in phi).
double solid_angle_integral(const RadiationPattern& pattern);

void normalize(RadiationPattern& pattern, Normalization norm);

enum class RingEvaluation { Harmonic, Direct };

struct RimOptions {
    PatternGrid grid;
    ElementFactor element = ElementFactor::Unity;
    Normalization normalization = Normalization::UnitIntegral;
    int points_per_wavelength = 16;  // rim quadrature density per gap-plasmon wavelength
    RingEvaluation evaluation = RingEvaluation::Harmonic;
};

// Number of uniform rim quadrature points used for a disk of the given geometry and mode.
int rim_point_count(const AntennaGeometry& geom, const GapPlasmonMode& mode, const RimOptions& opt);

// Far field of a vertical dipole at in-plane offset s (along phi = 0, |s| < R) under the disk. The emitter
// launches the gap plasmon radially; each rim element re-radiates with the plasmon's accumulated
// phase and attenuation (including 1/sqrt(rho) cylindrical spreading).
RadiationPattern rim_far_field(const AntennaGeometry& geom, double emitter_offset_nm, const GapPlasmonMode& mode,
                               const RimOptions& opt = {});

struct ClusterSpec {
    double radius_nm = 0.0;
    double height_nm = 0.0;
    double center_offset_nm = 0.0;  // cluster axis displacement from the disk center, along phi = 0
    int radial_samples = 6;
    int azimuthal_samples = 12;
    int vertical_samples = 3;

    void validate(const AntennaGeometry& geom) const;
};

// Incoherent average over emitter positions on a deterministic equal-area lattice inside the
// cluster cylinder. Heights are weighted by |Ez|^2 of the gap mode across the spacer.
RadiationPattern cluster_pattern(const AntennaGeometry& geom, const ClusterSpec& cluster, const GapPlasmonMode& mode,
                                 const RimOptions& opt = {});

struct LobeMetrics {
    double peak_theta_deg{};
    double peak_phi_deg{};
    double null_to_null_width_deg{};
    double peak_to_sidelobe_ratio{};  // +inf when no secondary maximum exists
    bool no_lobe = false;             // no interior minimum on one side; width is the grid span
    bool no_sidelobe = false;
};

// Evaluated along the phi-cut through the global maximum (phi_peak and phi_peak + 180).
LobeMetrics lobe_metrics(const RadiationPattern& pattern);

}  // namespace patchant
