#include <doctest.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <vector>

#include "patchant/decay_stats.hpp"
#include "patchant/errors.hpp"
#include "patchant/fitting.hpp"

using namespace patchant;

namespace {

const RateEnsemble kEns{0.055, 0.020, true};

DecayHistogram synth(const PurcellPair& fp, std::uint64_t seed, double counts = 1e6, const RateEnsemble& ens = kEns) {
    SynthSpec s;
    s.seed = seed;
    s.total_counts = counts;
    return synthesize_histogram(ens, fp, s);
}

DecayCurve as_curve(const std::vector<double>& bins, const DecayHistogram& h) {
    DecayCurve c;
    c.t = h.bin_start;
    c.intensity = bins;
    return c;
}

}  // namespace

TEST_CASE("single-bin Poisson term") {
    const std::vector<double> mu{2.0}, c{3.0};
    CHECK(poisson_nll(mu, c) == doctest::Approx(2.0 - 3.0 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("expected counts are floored") {
    const std::vector<double> mu{0.0, -1.0}, c{0.0, 2.0};
    CHECK(poisson_nll(mu, c) == doctest::Approx(2 * kMinExpectedCount - 2.0 * std::log(kMinExpectedCount)));
}

TEST_CASE("likelihood is stationary at the matched amplitude") {
    DecayHistogram h = make_empty_histogram(0.2, 40.0);
    std::vector<double> model(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        model[i] = std::exp(-0.1 * h.bin_start[i]);
        h.counts[i] = std::round(5000.0 * model[i]);
    }
    // MLE amplitude for a pure scale is sum(c) / sum(m)
    double sc = 0.0, sm = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) sc += h.counts[i], sm += model[i];
    const double a = sc / sm, da = 1e-4 * a;
    const DecayCurve curve = as_curve(model, h);
    const double grad = (neg_log_likelihood(curve, h, a + da, 0.0) - neg_log_likelihood(curve, h, a - da, 0.0)) / (2 * da);
    CHECK(std::abs(grad) < 1e-6);
    const Nuisance n = profile_nuisance(model, h.counts, false);
    CHECK(n.amplitude == doctest::Approx(a).epsilon(1e-10));
    CHECK(n.background == 0.0);
    CHECK(n.nll == doctest::Approx(neg_log_likelihood(curve, h, a, 0.0)).epsilon(1e-12));
}

TEST_CASE("profiled nuisance beats a brute-force grid") {
    DecayHistogram h = make_empty_histogram(0.5, 50.0);
    std::vector<double> model(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        model[i] = std::exp(-0.2 * h.bin_start[i]);
        h.counts[i] = std::round(300.0 * model[i] + 4.0 + (i % 3));
    }
    const Nuisance n = profile_nuisance(model, h.counts, true);
    const DecayCurve curve = as_curve(model, h);
    double best = 1e300;
    for (double a = 250.0; a <= 350.0; a += 0.5)
        for (double b = 3.0; b <= 7.0; b += 0.02) best = std::min(best, neg_log_likelihood(curve, h, a, b));
    CHECK(n.nll <= best + 1e-9);
    CHECK(n.background > 0.0);
    CHECK(n.nll == doctest::Approx(neg_log_likelihood(curve, h, n.amplitude, n.background)).epsilon(1e-12));
}

TEST_CASE("misaligned model is rejected") {
    const DecayHistogram h = make_empty_histogram(0.2, 40.0);
    DecayCurve c;
    c.t = std::vector<double>(h.bin_start.begin(), h.bin_start.end() - 1);
    c.intensity.assign(c.t.size(), 1.0);
    CHECK_THROWS_AS(neg_log_likelihood(c, h, 1.0, 0.0), ValidationError);
    c.t = h.bin_start;
    c.t[3] += 0.01;
    c.intensity.assign(c.t.size(), 1.0);
    CHECK_THROWS_AS(neg_log_likelihood(c, h, 1.0, 0.0), ValidationError);
}

TEST_CASE("truth beats a 1.5x perturbed F_perp in at least 95 of 100 replicates") {
    const PurcellPair truth{35.0, 5.0}, off{52.5, 5.0};
    const BinnedDecayModel model(kEns, 0.2, 2000, 0.5);
    const auto m_truth = model.evaluate(truth), m_off = model.evaluate(off);
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const DecayHistogram h = synth(truth, 1000 + seed, 1e4);
        if (profile_nuisance(m_truth, h.counts, true).nll < profile_nuisance(m_off, h.counts, true).nll) ++wins;
    }
    CHECK(wins >= 95);
}

TEST_CASE("fits need enough populated bins") {
    DecayHistogram h = make_empty_histogram(0.2, 400.0);
    for (std::size_t i = 0; i < 30; ++i) h.counts[i] = 10.0;
    CHECK_THROWS_AS(fit_antenna(h, kEns), ValidationError);
    CHECK_THROWS_AS(fit_reference(h), ValidationError);
}

TEST_CASE("patch 1 round trip") {
    const DecayHistogram h = synth({35.0, 5.0}, 1);
    const FitResult r = fit_antenna(h, kEns);
    CHECK(r.converged);
    CHECK_FALSE(r.boundary_pinned);
    CHECK_FALSE(r.near_degenerate);
    CHECK(r.at("f_perp").value == doctest::Approx(35.0).epsilon(0.10));
    CHECK(r.at("f_par").value == doctest::Approx(5.0).epsilon(0.20));
    for (const auto& p : r.parameters) CHECK(p.sigma > 0.0);
    CHECK(r.at("f_perp").value >= r.at("f_par").value);
    REQUIRE(!r.start_nll.empty());
    for (double s : r.start_nll) CHECK(r.nll <= s);
}

TEST_CASE("upper-range round trip") {
    const FitResult r = fit_antenna(synth({80.0, 2.0}, 2), kEns);
    CHECK(r.converged);
    CHECK(r.at("f_perp").value == doctest::Approx(80.0).epsilon(0.10));
    CHECK(r.at("f_par").value == doctest::Approx(2.0).epsilon(0.20));
    for (double s : r.start_nll) CHECK(r.nll <= s);
}

TEST_CASE("equal Purcell factors are flagged as near-degenerate") {
    const FitResult r = fit_antenna(synth({20.0, 20.0}, 3), kEns);
    CHECK(r.near_degenerate);
    const double diff = r.at("f_perp").value - r.at("f_par").value;
    CHECK(std::abs(diff) < std::hypot(r.at("f_perp").sigma, r.at("f_par").sigma));
}

TEST_CASE("F_par uncertainty grows as F_par approaches F_perp") {
    double prev = 0.0;
    for (double fpar : {5.0, 15.0, 30.0}) {
        const FitResult r = fit_antenna(synth({35.0, fpar}, 4), kEns);
        const double sigma = r.at("f_par").sigma;
        CHECK_MESSAGE(sigma > prev, "F_par = " << fpar);
        prev = sigma;
    }
}

TEST_CASE("integer rescaling of the counts only moves the amplitude") {
    const DecayHistogram h = synth({35.0, 5.0}, 5, 1e5);
    DecayHistogram h3 = h;
    for (double& c : h3.counts) c *= 3.0;
    const FitResult a = fit_antenna(h, kEns), b = fit_antenna(h3, kEns);
    for (const char* name : {"f_perp", "f_par"}) {
        CHECK(std::abs(a.at(name).value - b.at(name).value) < a.at(name).sigma);
    }
    CHECK(b.at("amplitude").value == doctest::Approx(3.0 * a.at("amplitude").value).epsilon(0.01));
}

TEST_CASE("reference round trip") {
    const DecayHistogram h = synth({1.0, 1.0}, 6);
    const FitResult r = fit_reference(h);
    CHECK(r.converged);
    CHECK(r.at("gamma_c").value == doctest::Approx(0.055).epsilon(0.03));
    CHECK(r.at("w_c").value == doctest::Approx(0.020).epsilon(0.10));
    for (const auto& p : r.parameters) CHECK(p.sigma > 0.0);
    for (double s : r.start_nll) CHECK(r.nll <= s);
}

TEST_CASE("pure exponential reference gives a width consistent with zero") {
    const DecayHistogram h = synth({1.0, 1.0}, 7, 1e6, RateEnsemble{0.055, 0.0, true});
    const FitResult r = fit_reference(h);
    CHECK(r.converged);
    const FitParameter& w = r.at("w_c");
    CHECK(w.value >= 0.0);
    CHECK(r.at("gamma_c").value == doctest::Approx(0.055).epsilon(0.01));
    // 95% likelihood-ratio interval: profile gamma_c at w_c = 0
    auto nll0 = [&](double gc) {
        const auto m = BinnedDecayModel(RateEnsemble{gc, 0.0, true}, h.bin_width, h.size(), 0.5).evaluate({1.0, 1.0});
        return profile_nuisance(m, h.counts, true).nll;
    };
    const double best = boost::math::tools::brent_find_minima(nll0, 0.050, 0.060, 40).second;
    CHECK(2.0 * (best - r.nll) < 3.84);
}

TEST_CASE("unknown parameter names throw") {
    FitResult r;
    CHECK_THROWS(r.at("nope"));
}
