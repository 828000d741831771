#include <doctest.h>

#include <algorithm>
#include <vector>

#include "patchant/decay_stats.hpp"
#include "patchant/fitting.hpp"

using namespace patchant;

namespace {

const RateEnsemble kEns{0.055, 0.020, true};

DecayHistogram synth(const PurcellPair& fp, std::uint64_t seed, double counts) {
    SynthSpec s;
    s.seed = seed;
    s.total_counts = counts;
    return synthesize_histogram(kEns, fp, s);
}

}  // namespace

TEST_CASE("median fitted F_perp over 50 patch-1 replicates is within 5%") {
    std::vector<double> f;
    for (std::uint64_t seed = 0; seed < 50; ++seed) f.push_back(fit_antenna(synth({35.0, 5.0}, 500 + seed, 1e6), kEns).at("f_perp").value);
    std::nth_element(f.begin(), f.begin() + 25, f.end());
    const double hi = f[25];
    const double lo = *std::max_element(f.begin(), f.begin() + 25);
    CHECK(0.5 * (lo + hi) == doctest::Approx(35.0).epsilon(0.05));
}

TEST_CASE("fewer counts widen the reference confidence intervals") {
    int wider_gc = 0, wider_wc = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const FitResult full = fit_reference(synth({1.0, 1.0}, 2000 + seed, 1e6));
        const FitResult thin = fit_reference(synth({1.0, 1.0}, 2000 + seed, 1e4));
        if (thin.at("gamma_c").sigma > full.at("gamma_c").sigma) ++wider_gc;
        if (thin.at("w_c").sigma > full.at("w_c").sigma) ++wider_wc;
    }
    CHECK(wider_gc >= 95);
    CHECK(wider_wc >= 95);
}
