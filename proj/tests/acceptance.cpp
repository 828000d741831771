// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <json.hpp>

#include "patchant/decay_stats.hpp"
#include "patchant/fitting.hpp"
#include "patchant/gap_plasmon.hpp"
#include "patchant/layered_emission.hpp"
#include "patchant/radiation.hpp"

using namespace patchant;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const RateEnsemble kEns{0.055, 0.020, true};
constexpr double kLambda = 630.0;

struct Report {
    std::ostringstream detail;
    bool ok = true;

    void check(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int n, const char* title, double budget_s, const std::function<void(Report&)>& body) {
    Report r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.ok = false;
        r.detail << " [exception: " << e.what() << "]";
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0) r.check(dt < budget_s, "runtime budget");
    if (!r.ok) ++failures;
    std::printf("criterion %d: %s  %s; %s (%.1f s)\n", n, r.ok ? "PASS" : "FAIL", title, r.detail.str().c_str(), dt);
    std::fflush(stdout);
}

template <class F>
double gl(F f, double a, double b, int panels) {
    using G = boost::math::quadrature::gauss<double, 10>;
    double s = 0.0;
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i) s += G::integrate(f, a + i * h, a + (i + 1) * h);
    return s;
}

void round_trip(Report& r, const PurcellPair& truth, std::uint64_t seed) {
    SynthSpec s;
    s.seed = seed;
    s.total_counts = 1e6;
    s.irf_fwhm = 0.5;
    const FitResult f = fit_antenna(synthesize_histogram(kEns, truth, s), kEns);
    const double fp = f.at("f_perp").value, fq = f.at("f_par").value;
    r.detail << "F_perp " << fp << " +- " << f.at("f_perp").sigma << " (truth " << truth.f_perp << "), F_par " << fq
             << " +- " << f.at("f_par").sigma << " (truth " << truth.f_par << ")";
    r.check(f.converged, "converged");
    r.check(std::abs(fp / truth.f_perp - 1) <= 0.10, "F_perp within 10%");
    r.check(std::abs(fq / truth.f_par - 1) <= 0.20, "F_par within 20%");
}

PlanarStack stack(const HalfStack& lower, const HalfStack& upper, double dl, double du) {
    return {lower, upper, materials::silica(), dl, du, kLambda};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main() {
    criterion(1, "patch-1 round trip (35, 5)", 300, [](Report& r) { round_trip(r, {35.0, 5.0}, 1); });

    criterion(2, "upper-range round trip (80, 2)", 300, [](Report& r) { round_trip(r, {80.0, 2.0}, 2); });

    criterion(3, "acceleration band", 0, [](Report& r) {
        const double ratio = one_over_e_time(kEns, {1.0, 1.0}) / one_over_e_time(kEns, {35.0, 5.0});
        r.detail << "1/e time ratio " << ratio;
        r.check(ratio >= 5.0 && ratio <= 15.0, "ratio in [5, 15]");
    });

    criterion(4, "density exactness", 60, [](Report& r) {
        const PurcellPair fp{35.0, 5.0};
        const double gq = kEns.gamma_c;
        const double lo = fp.f_par * gq, hi = 0.5 * (fp.f_perp + fp.f_par) * gq;
        const auto anti = [&](double g) { return -std::sqrt((fp.f_perp + fp.f_par - 2 * g / gq) / (fp.f_perp - fp.f_par)); };
        const double i2 = gl([&](double s) { return 2 * s * pi2(hi - s * s, gq, fp); }, 0.0, std::sqrt(hi - lo), 40);
        const double i2_anti = anti(hi) - anti(lo);
        const double i1 = gl([](double g) { return pi1(g, kEns); }, 0.0, kEns.support_hi(), 200);
        const double ip = gl([&](double g) { return pi_gamma(g, kEns, fp); }, 0.0, 0.5 * (fp.f_perp + fp.f_par) * kEns.support_hi(), 400);
        r.detail << "int pi2 " << i2 << " (antiderivative " << i2_anti << "), int pi1 " << i1 << ", int pi " << ip;
        r.check(std::abs(i2 - 1) <= 1e-6 && std::abs(i2_anti - 1) <= 1e-12, "pi2 mass");
        r.check(std::abs(i1 - 1) <= 1e-8, "pi1 mass");
        r.check(std::abs(ip - 1) <= 1e-4, "pi mass");

        McSpec spec;
        spec.samples = 1'000'000;
        spec.seed = 12345;
        const McResult mc = sample_decay_mc(kEns, fp, spec);
        const int bins = 50;
        const double top = 2.0, w = top / bins;
        std::vector<double> obs(bins, 0.0);
        for (const auto& s : mc.samples)
            if (s.gamma < top) obs[static_cast<int>(s.gamma / w)] += 1.0;
        double worst = 0.0;
        for (int i = 0; i < bins; ++i) {
            const double e = spec.samples * gl([&](double g) { return pi_gamma(g, kEns, fp); }, i * w, (i + 1) * w, 2);
            worst = std::max(worst, std::abs(obs[i] - e) / std::sqrt(e));
        }
        r.detail << ", MC worst bin " << worst << " sigma over " << bins << " bins";
        r.check(worst < 3.0, "MC within 3 sigma per bin");
    });

    criterion(5, "planar physics", 120, [](Report& r) {
        const HalfStack silica{{}, materials::silica()}, gold{{}, materials::gold()};
        double worst = 0.0;
        for (auto o : {Orientation::Perpendicular, Orientation::Parallel})
            worst = std::max(worst, std::abs(purcell_planar(stack(silica, silica, 15, 15), o).value - 1));
        const double far = purcell_planar(stack(gold, silica, 10 * kLambda, 100), Orientation::Perpendicular).value;
        const double f1 = purcell_planar(stack(gold, silica, 1.0, 100), Orientation::Perpendicular).value;
        const double f3 = purcell_planar(stack(gold, silica, 3.0, 100), Orientation::Perpendicular).value;
        const double slope = std::log(f3 / f1) / std::log(3.0);
        AntennaGeometry g15, g3;
        g3.emitter_height_nm = 3.0;
        const double q15 = decay_channels(build_patch_stack(g15), Orientation::Perpendicular).quench_fraction;
        const double q3 = decay_channels(build_patch_stack(g3), Orientation::Perpendicular).quench_fraction;
        r.detail << "homogeneous |F-1| " << worst << ", far mirror F " << far << ", near-field slope " << slope
                 << ", quench(15 nm) " << q15 << " vs quench(3 nm)/5 " << q3 / 5;
        r.check(worst <= 1e-6, "homogeneous F = 1");
        r.check(std::abs(far - 1) <= 0.02, "far mirror");
        r.check(std::abs(slope + 3) <= 0.45, "near-field slope");
        r.check(q15 < q3 / 5, "quench ratio");
    });

    criterion(6, "gap-mode correctness", 0, [](Report& r) {
        double worst_res = 0.0;
        bool bound = true;
        for (double lam = 550.0; lam <= 700.0 + 1e-9; lam += 10.0) {
            for (double gap = 10.0; gap <= 60.0 + 1e-9; gap += 5.0) {
                const GapPlasmonMode m = solve_gap_mode(lam, gap, materials::gold(), materials::silica());
                worst_res = std::max(worst_res, m.residual);
                bound = bound && m.n_eff.real() > 1.5 && m.n_eff.imag() > 0;
            }
        }
        const auto wide = solve_gap_mode(kLambda, 2000.0, materials::gold(), materials::silica());
        const double dev = std::abs(wide.n_eff - spp_single_interface(kLambda, materials::gold(), materials::silica()));
        r.detail << "worst residual " << worst_res << ", 2 um gap vs SPP " << dev;
        r.check(worst_res < 1e-10, "residual");
        r.check(dev < 1e-3, "wide-gap limit");
        r.check(bound, "bound mode on the grid");
    });

    criterion(7, "oscillatory Purcell factor", 0, [](Report& r) {
        std::vector<double> d;
        for (double x = 500.0; x <= 2500.0 + 1e-9; x += 1.0) d.push_back(x);
        const PurcellCurve c = purcell_vs_diameter(AntennaGeometry{}, d);
        const double expected = kLambda / c.mode.n_eff.real();
        std::vector<double> peaks;
        for (std::size_t i = 1; i + 1 < d.size(); ++i)
            if (c.f_perp[i] > c.f_perp[i - 1] && c.f_perp[i] >= c.f_perp[i + 1]) peaks.push_back(d[i]);
        double worst = 0.0;
        for (std::size_t i = 1; i < peaks.size(); ++i) worst = std::max(worst, std::abs((peaks[i] - peaks[i - 1]) / expected - 1));
        const auto [mn, mx] = std::minmax_element(c.f_par.begin(), c.f_par.end());
        r.detail << peaks.size() << " peaks, spacing deviation " << worst << " of " << expected << " nm, F_par in [" << *mn
                 << ", " << *mx << "]";
        r.check(peaks.size() >= 3, "oscillation present");
        r.check(worst <= 0.10, "spacing");
        r.check(*mn >= 4.0 && *mx <= 5.0, "F_par in [4, 5]");
    });

    criterion(8, "radiation pattern", 120, [](Report& r) {
        const GapPlasmonMode mode = solve_gap_mode(kLambda, 30.0, materials::gold(), materials::silica());
        AntennaGeometry g;
        const LobeMetrics point = lobe_metrics(rim_far_field(g, 0.0, mode));
        std::vector<double> widths;
        for (double D : {1000.0, 1400.0, 1800.0, 2200.0}) {
            AntennaGeometry gd;
            gd.disk_diameter_nm = D;
            widths.push_back(lobe_metrics(rim_far_field(gd, 0.0, mode)).null_to_null_width_deg);
        }
        const LobeMetrics tilted = lobe_metrics(rim_far_field(g, 50.0, mode));
        ClusterSpec c;
        c.radius_nm = 50.0;
        c.height_nm = 10.0;
        c.center_offset_nm = 15.0;
        const LobeMetrics cluster = lobe_metrics(cluster_pattern(g, c, mode));
        r.detail << "width " << point.null_to_null_width_deg << " deg, widths {" << widths[0] << ", " << widths[1] << ", "
                 << widths[2] << ", " << widths[3] << "}, tilt " << tilted.peak_theta_deg
                 << " deg, sidelobe ratio cluster " << cluster.peak_to_sidelobe_ratio << " vs point "
                 << point.peak_to_sidelobe_ratio;
        r.check(std::abs(point.null_to_null_width_deg - 35.0) <= 2.0, "width 35 +- 2");
        r.check(std::is_sorted(widths.rbegin(), widths.rend()) &&
                    std::adjacent_find(widths.begin(), widths.end()) == widths.end(),
                "width strictly decreasing");
        r.check(tilted.peak_theta_deg > 0.0, "offset tilt");
        r.check(cluster.peak_to_sidelobe_ratio > point.peak_to_sidelobe_ratio, "cluster raises sidelobe ratio");
    });

    criterion(9, "determinism", 0, [](Report& r) {
        const fs::path root = fs::temp_directory_path() / "patchant_acceptance";
        fs::remove_all(root);
        fs::create_directories(root);
        const std::string cli = PATCHANT_CLI;
        const fs::path hist = root / "synth_a" / "histogram.csv";
        const fs::path ref_hist = root / "ref_input" / "histogram.csv";
        std::vector<std::pair<std::string, json>> cases = {
            {"purcell_planar", {{"command", "purcell-planar"}}},
            {"quench_sweep", {{"command", "quench-sweep"}}},
            {"gap_mode", {{"command", "gap-mode"}}},
            {"purcell_vs_diameter", {{"command", "purcell-vs-diameter"}}},
            {"pattern", {{"command", "pattern"}}},
            {"synth", {{"command", "synth-decay"}, {"seed", 21}, {"fp", {{"f_perp", 35.0}, {"f_par", 5.0}}}}},
            {"fit_antenna", {{"command", "fit-decay"}, {"fit_decay", {{"mode", "antenna"}, {"input", hist.string()}}}}},
            {"fit_reference", {{"command", "fit-decay"}, {"fit_decay", {{"mode", "reference"}, {"input", ref_hist.string()}}}}},
            {"sweep", {{"command", "sweep"}, {"sweep", {{"values", {1400.0, 1500.0, 1600.0, 1700.0, 1800.0, 1900.0, 2000.0, 2100.0}}}}}},
        };
        auto exec = [&](const json& doc, const fs::path& out, int workers) {
            const fs::path cfg = out.string() + ".json";
            fs::create_directories(out.parent_path());
            std::ofstream(cfg) << doc.dump(2);
            const std::string cmd = cli + " " + doc["command"].get<std::string>() + " --config " + cfg.string() + " --out " +
                                    out.string() + " --workers " + std::to_string(workers) + " > /dev/null 2>&1";
            return WEXITSTATUS(std::system(cmd.c_str()));
        };
        // inputs for the fits
        exec(cases[5].second, root / "synth_a", 1);
        exec({{"command", "synth-decay"}, {"seed", 22}, {"fp", {{"f_perp", 1.0}, {"f_par", 1.0}}}}, root / "ref_input", 1);

        int identical = 0;
        for (const auto& [name, doc] : cases) {
            const int workers = name == "sweep" ? 8 : 1;
            const fs::path a = root / (name + "_1"), b = root / (name + "_2");
            const int ca = exec(doc, a, 1), cb = exec(doc, b, workers);
            bool same = ca == 0 && cb == 0;
            json ma = json::parse(slurp(a / "manifest.json")), mb = json::parse(slurp(b / "manifest.json"));
            for (const auto& art : ma["artifacts"]) {
                const std::string p = art["path"];
                same = same && slurp(a / p) == slurp(b / p);
            }
            ma.erase("wall_time_s");
            mb.erase("wall_time_s");
            same = same && ma == mb;
            if (same) ++identical;
            else r.detail << " " << name << " differs (exit " << ca << "/" << cb << ")";
        }
        r.detail << identical << "/" << cases.size() << " commands byte-identical (sweep: 1 vs 8 workers)";
        r.check(identical == static_cast<int>(cases.size()), "all commands reproducible");
    });

    std::printf("%d criteria failed\n", failures);
    return failures;
}
