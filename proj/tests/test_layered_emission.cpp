#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "patchant/errors.hpp"
#include "patchant/gap_plasmon.hpp"
#include "patchant/layered_emission.hpp"

using namespace patchant;
using cplx = std::complex<double>;

namespace {

constexpr double kLambda = 630.0;

PlanarStack homogeneous() {
    return {{{}, materials::silica()}, {{}, materials::silica()}, materials::silica(), 15.0, 15.0, kLambda};
}

// Gold half-space below, open silica above.
PlanarStack single_mirror(double d) {
    return {{{}, materials::gold()}, {{}, materials::silica()}, materials::silica(), d, 100.0, kLambda};
}

PlanarStack pure_mim(double gap) {
    return {{{}, materials::gold()}, {{}, materials::gold()}, materials::silica(), gap / 2, gap / 2, kLambda};
}

PlanarStack patch_at(double height) {
    AntennaGeometry g;
    g.emitter_height_nm = height;
    return build_patch_stack(g);
}

double peak_u(const PlanarStack& s, double lo, double hi) {
    double best_u = lo, best = -1.0;
    for (int i = 0; i <= 6000; ++i) {
        const double u = lo + (hi - lo) * i / 6000.0;
        const double v = dissipation_density(s, Orientation::Perpendicular, u);
        if (v > best) best = v, best_u = u;
    }
    return best_u;
}

}  // namespace

TEST_CASE("zero-contrast half-stack does not reflect") {
    const HalfStack h{{}, materials::silica()};
    for (double u : {0.0, 0.3, 0.99, 1.0, 1.7, 12.0}) {
        for (auto pol : {Polarization::S, Polarization::P}) {
            CHECK(std::abs(half_stack_reflection(h, materials::silica(), pol, u, kLambda)) < 1e-14);
        }
    }
}

TEST_CASE("normal-incidence Fresnel coefficient of a silica/gold interface") {
    const HalfStack h{{}, materials::gold()};
    const cplx n1 = 1.5, n2 = std::sqrt(permittivity_at(materials::gold(), kLambda));
    const cplx expected = (n1 - n2) / (n1 + n2);
    for (auto pol : {Polarization::S, Polarization::P}) {
        const cplx r = half_stack_reflection(h, materials::silica(), pol, 0.0, kLambda);
        CHECK(std::abs(r - expected) < 1e-13);
    }
}

TEST_CASE("20 nm gold film on air matches the Airy film formula") {
    const HalfStack h{{{materials::gold(), 20.0}}, materials::air()};
    const cplx n1 = 1.5, n2 = std::sqrt(permittivity_at(materials::gold(), kLambda)), n3 = 1.0;
    const cplx r12 = (n1 - n2) / (n1 + n2), r23 = (n2 - n3) / (n2 + n3);
    const cplx phase = std::exp(cplx(0, 2) * (2 * std::numbers::pi / kLambda) * n2 * 20.0);
    const cplx airy = (r12 + r23 * phase) / (1.0 + r12 * r23 * phase);
    for (auto pol : {Polarization::S, Polarization::P}) {
        const cplx r = half_stack_reflection(h, materials::silica(), pol, 0.0, kLambda);
        CHECK(std::abs(r - airy) / std::abs(airy) < 1e-10);
    }
}

TEST_CASE("reflection of a passive stack never exceeds unity for propagating waves") {
    const PlanarStack s = patch_at(15.0);
    for (double u = 0.0; u < 1.0; u += 0.01) {
        for (auto pol : {Polarization::S, Polarization::P}) {
            CHECK(std::abs(half_stack_reflection(s.upper, s.gap, pol, u, kLambda)) <= 1.0 + 1e-12);
            CHECK(std::abs(half_stack_reflection(s.lower, s.gap, pol, u, kLambda)) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("homogeneous perpendicular spectrum equals the free-space form") {
    const PlanarStack s = homogeneous();
    std::vector<double> grid;
    for (double u = 0.0; u < 0.999; u += 0.037) grid.push_back(u);
    const auto spec = dissipation_spectrum(s, Orientation::Perpendicular, grid);
    REQUIRE(spec.density.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = grid[i];
        CHECK(spec.density[i] == doctest::Approx(1.5 * u * u * u / std::sqrt(1 - u * u)).epsilon(1e-12));
    }
}

TEST_CASE("homogeneous medium has unit Purcell factor in both orientations") {
    for (auto o : {Orientation::Perpendicular, Orientation::Parallel}) {
        CHECK(purcell_planar(homogeneous(), o).value == doctest::Approx(1.0).epsilon(1e-6));
        const ChannelSplit c = decay_channels(homogeneous(), o);
        CHECK(c.photon_fraction == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(c.plasmon_fraction) < 1e-6);
        CHECK(std::abs(c.quench_fraction) < 1e-6);
    }
}

TEST_CASE("spectrum is finite at the branch point and beyond") {
    const PlanarStack s = patch_at(15.0);
    const std::vector<double> grid{0.0, 0.5, 1.0, 1.0 + 1e-12, 2.0, 2.1376, 10.0, 49.0};
    for (auto o : {Orientation::Perpendicular, Orientation::Parallel}) {
        for (double v : dissipation_spectrum(s, o, grid).density) CHECK(std::isfinite(v));
    }
}

TEST_CASE("distant gold mirror leaves the rate unchanged") {
    const double F = purcell_planar(single_mirror(10 * kLambda), Orientation::Perpendicular).value;
    CHECK(F == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("default patch stack, perpendicular dipole, matches a brute-force trapezoid sum") {
    const PlanarStack s = patch_at(15.0);
    const double F = purcell_planar(s, Orientation::Perpendicular).value;
    // 10^6-point trapezoid over [0, 50], computed once from the density
    constexpr double kTrapezoid = 53.2253;
    CHECK(F == doctest::Approx(kTrapezoid).epsilon(1e-4));
    CHECK(F > 10.0);
}

TEST_CASE("trapezoid oracle on the density itself") {
    const PlanarStack s = patch_at(15.0);
    const int n = 1000000;
    const double h = 50.0 / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        sum += w * dissipation_density(s, Orientation::Perpendicular, i * h);
    }
    const double trap = sum * h;
    const double F = purcell_planar(s, Orientation::Perpendicular).value;
    CHECK(F == doctest::Approx(trap).epsilon(1e-3));
}

TEST_CASE("perpendicular peak sits at the gap-plasmon index") {
    SUBCASE("pure metal-insulator-metal stack") {
        const GapPlasmonMode m = solve_gap_mode(kLambda, 30.0, materials::gold(), materials::silica());
        const double expected = m.n_eff.real() / 1.5;
        CHECK(peak_u(pure_mim(30.0), 1.05, 4.0) == doctest::Approx(expected).epsilon(0.01));
    }
    SUBCASE("default patch stack") {
        const GapPlasmonMode m = solve_gap_mode(kLambda, 30.0, materials::gold(), materials::silica());
        const double expected = m.n_eff.real() / 1.5;
        CHECK(peak_u(patch_at(15.0), 1.05, 4.0) == doctest::Approx(expected).epsilon(0.15));
    }
}

TEST_CASE("flipping the stack is reciprocal") {
    for (double h : {15.0, 4.0}) {
        const PlanarStack s = patch_at(h);
        for (auto o : {Orientation::Perpendicular, Orientation::Parallel}) {
            const double a = purcell_planar(s, o).value;
            const double b = purcell_planar(s.flipped(), o).value;
            CHECK(std::abs(a - b) / a < 1e-8);
        }
    }
}

TEST_CASE("Purcell factor is positive and finite down to 1 nm") {
    for (double h : {1.0, 2.0, 15.0, 28.0, 29.0}) {
        for (auto o : {Orientation::Perpendicular, Orientation::Parallel}) {
            const double F = purcell_planar(patch_at(h), o).value;
            CHECK(std::isfinite(F));
            CHECK(F > 0.0);
        }
    }
}

TEST_CASE("near-field decay rate near a gold half-space scales as d^-3") {
    const double f1 = purcell_planar(single_mirror(1.0), Orientation::Perpendicular).value;
    const double f3 = purcell_planar(single_mirror(3.0), Orientation::Perpendicular).value;
    const double slope = std::log(f3 / f1) / std::log(3.0);
    CHECK(slope == doctest::Approx(-3.0).epsilon(0.15));
}

TEST_CASE("channel fractions partition the total") {
    const PlanarStack s = patch_at(15.0);
    for (auto o : {Orientation::Perpendicular, Orientation::Parallel}) {
        const ChannelSplit c = decay_channels(s, o);
        CHECK(c.photon_fraction + c.plasmon_fraction + c.quench_fraction == doctest::Approx(1.0).epsilon(1e-6));
        for (double f : {c.photon_fraction, c.plasmon_fraction, c.quench_fraction}) {
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
        }
        CHECK(c.u_photon_max == doctest::Approx(1.0 / 1.5));
        CHECK(c.u_photon_max < c.u_plasmon_max);
    }
}

TEST_CASE("quenching at 15 nm is small compared with 3 nm") {
    const double q15 = decay_channels(patch_at(15.0), Orientation::Perpendicular).quench_fraction;
    const double q3 = decay_channels(patch_at(3.0), Orientation::Perpendicular).quench_fraction;
    CHECK(q15 < q3 / 5);
}

TEST_CASE("quench fraction decreases with distance to the metal") {
    double prev = 2.0;
    for (int i = 0; i < 11; ++i) {
        const double h = 1.0 + 1.4 * i;
        const double q = decay_channels(patch_at(h), Orientation::Perpendicular).quench_fraction;
        CHECK_MESSAGE(q < prev, "height " << h);
        prev = q;
    }
}

TEST_CASE("partition must be ordered") {
    const PlanarStack s = patch_at(15.0);
    CHECK_THROWS_AS(decay_channels(s, Orientation::Perpendicular, {2.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(decay_channels(s, Orientation::Perpendicular, {0.0, 1.0}), ValidationError);
}

TEST_CASE("tightening the tolerance moves F by less than the reported error") {
    const PlanarStack s = patch_at(15.0);
    EmissionOptions loose;
    loose.quad.rel_tol = 1e-8;
    EmissionOptions tight = loose;
    tight.quad.rel_tol = 0.5e-8;
    for (auto o : {Orientation::Perpendicular, Orientation::Parallel}) {
        const PlanarPurcell a = purcell_planar(s, o, loose);
        const PlanarPurcell b = purcell_planar(s, o, tight);
        CHECK(std::abs(a.value - b.value) <= a.error_estimate);
    }
}

TEST_CASE("breakpoints are sorted and bracket the gap pole") {
    const auto bp = integration_breakpoints(patch_at(15.0));
    CHECK(std::is_sorted(bp.begin(), bp.end()));
    CHECK(bp.front() == 0.0);
    CHECK(std::find(bp.begin(), bp.end(), 1.0) != bp.end());
    CHECK(std::any_of(bp.begin(), bp.end(), [](double u) { return u > 2.0 && u < 2.14; }));
    CHECK(bp.back() >= 50.0);
}
