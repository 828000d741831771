#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patchant/decay_stats.hpp"
#include "patchant/histogram.hpp"
#include "patchant/simplex.hpp"

namespace patchant {

inline constexpr double kMinExpectedCount = 1e-12;

// sum_i [mu_i - c_i ln mu_i] with mu_i floored at kMinExpectedCount.
double poisson_nll(std::span<const double> mu, std::span<const double> counts);

// NLL of amplitude * model + background against the histogram. The model curve holds per-bin
// integrals sampled at the bin starts; throws ValidationError if the grids disagree.
double neg_log_likelihood(const DecayCurve& model, const DecayHistogram& hist, double amplitude, double background);

struct Nuisance {
    double amplitude = 0.0;
    double background = 0.0;
    double nll = 0.0;
};

// Maximizes the likelihood over amplitude >= 0 and background >= 0 for a fixed model shape
// (convex problem, projected Newton). With fit_background false the background stays at zero.
Nuisance profile_nuisance(std::span<const double> model, std::span<const double> counts, bool fit_background);

struct FitOptions {
    double irf_fwhm = 0.5;  // ns; zero disables the convolution
    bool fit_background = true;
    double f_min = 0.1;
    double f_max = 500.0;
    std::size_t grid = 5;   // multi-start grid per axis
    SimplexOptions simplex{0.5, 1e-3, 1e-9, 2000, 1};
    unsigned workers = 1;   // multi-starts run concurrently
};

struct FitParameter {
    std::string name;
    double value = 0.0;
    double sigma = 0.0;  // +-1 sigma from the Fisher information
};

struct FitResult {
    std::vector<FitParameter> parameters;
    double nll = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
    bool boundary_pinned = false;
    bool near_degenerate = false;   // antenna fits: |F_perp - F_par| below its 1 sigma width
    std::vector<double> start_nll;  // profiled NLL at each multi-start point

    const FitParameter& at(std::string_view name) const;
};

// Fits (gamma_c, w_c, amplitude, background) to a silica reference decay.
FitResult fit_reference(const DecayHistogram& hist, const FitOptions& opt = {});

// Fits (f_perp, f_par, amplitude, background) for a known rate ensemble.
FitResult fit_antenna(const DecayHistogram& hist, const RateEnsemble& ens, const FitOptions& opt = {});

}  // namespace patchant
