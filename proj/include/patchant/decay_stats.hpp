#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "patchant/histogram.hpp"

namespace patchant {

// Orientation-resolved Purcell factors: dipole perpendicular / parallel to the disk plane.
struct PurcellPair {
    double f_perp = 1.0;
    double f_par = 1.0;

    bool degenerate() const noexcept { return f_perp == f_par; }
    void validate() const;
};

// Gaussian ensemble of intrinsic rates in silica. w_c is the standard deviation.
struct RateEnsemble {
    double gamma_c = 0.055;  // ns^-1
    double w_c = 0.020;      // ns^-1
    bool truncate_at_zero = true;

    void validate() const;
    // Rate interval carrying the density (mean +- 8 sigma, clipped at zero when truncated).
    double support_lo() const;
    double support_hi() const;
};

struct DecayCurve {
    std::vector<double> t;  // ns
    std::vector<double> intensity;
    double i0 = 1.0;
};

struct OrientationSample {
    double theta;    // c-axis angle to the antenna normal, [0, pi/2]
    double gamma_q;  // intrinsic rate in silica
    double gamma;    // rate inside the antenna
};

// Gamma = Gamma_Q / 2 [F_perp sin^2 theta + F_par (1 + cos^2 theta)] for the degenerate double dipole.
double gamma_of_theta(double gamma_q, double theta, const PurcellPair& fp);

// Normalized Gaussian density of Gamma_Q (truncated and renormalized at zero when requested).
// Throws DegenerateError for w_c = 0.
double pi1(double gamma_q, const RateEnsemble& ens);

// Density of the antenna rate for a fixed intrinsic rate under isotropic c-axis orientation.
// Zero outside F_par < Gamma/Gamma_Q < (F_perp + F_par)/2. Throws DegenerateError if F_perp <= F_par.
double pi2(double gamma, double gamma_q, const PurcellPair& fp);

// Marginal density of Gamma: pi2 averaged over pi1. Uses pi2(.; gamma_c) when w_c = 0 and
// pi1(Gamma/F)/F for a degenerate pair.
double pi_gamma(double gamma, const RateEnsemble& ens, const PurcellPair& fp);

// exp(-F_par x) * <exp(-x (F_perp - F_par)(1 - c^2)/2)> over c = cos(theta) uniform on [0, 1],
// x = Gamma_Q t: the orientation-averaged decay of one emitter, closed form via the Dawson integral.
double orientation_averaged_decay(double gamma_q_t, const PurcellPair& fp);

// I(t) = I0 * int pi(Gamma) exp(-Gamma t) dGamma, evaluated as the Laplace transform of pi_gamma.
DecayCurve decay_curve(std::span<const double> t_grid, const RateEnsemble& ens, const PurcellPair& fp,
                       double i0 = 1.0);

// Same curve via int pi1(Gamma_Q) orientation_averaged_decay(Gamma_Q t) dGamma_Q; used by the fitter.
DecayCurve decay_curve_fast(std::span<const double> t_grid, const RateEnsemble& ens, const PurcellPair& fp,
                            double i0 = 1.0);

// Time at which I(t) first falls to I0/e.
double one_over_e_time(const RateEnsemble& ens, const PurcellPair& fp);

// Uniform-grid Gaussian blur with the given FWHM; each sample's mass is kept inside the grid.
// FWHM below one grid step is the identity.
std::vector<double> gaussian_blur(std::span<const double> values, double step, double fwhm);

// Throws ValidationError for a non-uniform grid.
DecayCurve convolve_irf(const DecayCurve& curve, double irf_fwhm);

// Per-bin integrals of I(t)/I0 over uniform bins [i*w, (i+1)*w), optionally blurred by the IRF.
// Uses closed forms for the degenerate pair and a spline in log-time otherwise. The quadrature layout is
// fixed at construction, so the result is a smooth function of the Purcell factors.
class BinnedDecayModel {
public:
    BinnedDecayModel(RateEnsemble ens, double bin_width, std::size_t bins, double irf_fwhm);

    std::vector<double> evaluate(const PurcellPair& fp) const;
    const RateEnsemble& ensemble() const noexcept { return ens_; }
    double bin_width() const noexcept { return width_; }
    std::size_t bins() const noexcept { return bins_; }
    double irf_fwhm() const noexcept { return irf_fwhm_; }

private:
    std::vector<double> unblurred(const PurcellPair& fp) const;

    RateEnsemble ens_;
    double width_;
    std::size_t bins_;
    double irf_fwhm_;
    std::vector<double> q_nodes_;
    std::vector<double> q_weights_;  // quadrature weight * pi1
    double tau_ = 0.0;               // log-time offset: x = ln(t + tau)
    double x0_ = 0.0;
    double dx_ = 0.0;
    std::size_t spline_nodes_ = 0;
    std::vector<double> pt_t_;       // Gauss points covering [0, window]
    std::vector<double> pt_w_;       // dt weights
    std::vector<std::size_t> pt_bin_;
};

struct McSpec {
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 0;
    bool make_histogram = false;
    double bin_width = 0.2;
    double window = 400.0;
    double total_counts = 1e6;
    bool poisson = true;
};

struct McResult {
    std::vector<OrientationSample> samples;
    DecayHistogram histogram;  // empty unless requested
};

// theta from the sin(theta) density by inverse CDF, Gamma_Q from the (truncated) Gaussian.
// Streams are split per batch of samples by seed derivation, so results depend only on the seed.
McResult sample_decay_mc(const RateEnsemble& ens, const PurcellPair& fp, const McSpec& spec);

struct SynthSpec {
    double bin_width = 0.2;
    double window = 400.0;
    double total_counts = 1e6;
    double background_per_bin = 0.0;
    double irf_fwhm = 0.5;
    bool poisson = true;
    std::uint64_t seed = 0;
};

// Expected TCSPC counts from the binned model (plus flat background), Poisson-sampled when requested.
DecayHistogram synthesize_histogram(const RateEnsemble& ens, const PurcellPair& fp, const SynthSpec& spec);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace patchant
