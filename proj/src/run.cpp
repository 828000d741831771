#include "patchant/run.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <set>
#include <thread>

#include "patchant/decay_stats.hpp"
#include "patchant/errors.hpp"
#include "patchant/fitting.hpp"
#include "patchant/gap_plasmon.hpp"
#include "patchant/io.hpp"
#include "patchant/layered_emission.hpp"
#include "patchant/materials.hpp"
#include "patchant/radiation.hpp"

namespace patchant {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Typed access to one JSON object; unknown keys are rejected by finish().
class Section {
public:
    Section(const json* obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (obj_ && !obj_->is_object()) throw ValidationError(path_ + " must be an object");
    }

    bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

    double number(const std::string& key, double fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_number()) throw ValidationError(name(key) + " must be a number");
        return v->get<double>();
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key, 0.0);
    }

    double required_number(const std::string& key) {
        if (!has(key)) throw ValidationError(name(key) + " is required");
        return number(key, 0.0);
    }

    long long integer(const std::string& key, long long fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) throw ValidationError(name(key) + " must be an integer");
        return v->get<long long>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ValidationError(name(key) + " must be true or false");
        return v->get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ValidationError(name(key) + " must be a string");
        return v->get<std::string>();
    }

    std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
        std::string s = text(key, fallback);
        for (const auto& a : allowed) {
            if (s == a) return s;
        }
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ValidationError(name(key) + " must be one of: " + list);
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_array() || v->empty()) throw ValidationError(name(key) + " must be a non-empty array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) throw ValidationError(name(key) + " must contain only numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Section child(const std::string& key) {
        const json* v = get(key);
        return Section(v, name(key));
    }

    void finish() const {
        if (!obj_) return;
        for (const auto& [k, v] : obj_->items()) {
            if (!used_.count(k)) throw ValidationError("unknown field " + name(k));
        }
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json* get(const std::string& key) {
        used_.insert(key);
        if (!obj_) return nullptr;
        auto it = obj_->find(key);
        return it == obj_->end() ? nullptr : &*it;
    }

    const json* obj_;
    std::string path_;
    std::set<std::string> used_;
};

const std::vector<std::string> kTopLevel = {"command",     "seed",        "output_dir",  "workers",
                                            "geometry",    "ensemble",    "fp",          "tolerances",
                                            "purcell_planar", "quench_sweep", "gap_mode", "purcell_vs_diameter",
                                            "pattern",     "synth_decay", "fit_decay",   "sweep"};

struct Tolerances {
    double quad_rel = 1e-10;
    double gap_residual = 1e-10;
    double fit_x_tol = 1e-3;
    long long fit_max_evaluations = 2000;
};

AntennaGeometry read_geometry(const json& doc) {
    Section s(doc.contains("geometry") ? &doc["geometry"] : nullptr, "geometry");
    AntennaGeometry g;
    g.disk_diameter_nm = s.number("disk_diameter_nm", g.disk_diameter_nm);
    g.disk_thickness_nm = s.number("disk_thickness_nm", g.disk_thickness_nm);
    g.spacer_thickness_nm = s.number("spacer_thickness_nm", g.spacer_thickness_nm);
    g.bottom_gold_thickness_nm = s.number("bottom_gold_thickness_nm", g.bottom_gold_thickness_nm);
    g.emitter_height_nm = s.number("emitter_height_nm", g.emitter_height_nm);
    g.emission_wavelength_nm = s.number("emission_wavelength_nm", g.emission_wavelength_nm);
    s.finish();
    g.validate();
    return g;
}

double& geometry_field(AntennaGeometry& g, const std::string& key) {
    if (key == "disk_diameter_nm") return g.disk_diameter_nm;
    if (key == "disk_thickness_nm") return g.disk_thickness_nm;
    if (key == "spacer_thickness_nm") return g.spacer_thickness_nm;
    if (key == "bottom_gold_thickness_nm") return g.bottom_gold_thickness_nm;
    if (key == "emitter_height_nm") return g.emitter_height_nm;
    if (key == "emission_wavelength_nm") return g.emission_wavelength_nm;
    throw ValidationError("sweep.parameter: unknown geometry field " + key);
}

RateEnsemble read_ensemble(const json& doc) {
    Section s(doc.contains("ensemble") ? &doc["ensemble"] : nullptr, "ensemble");
    RateEnsemble e;
    e.gamma_c = s.number("gamma_c", e.gamma_c);
    e.w_c = s.number("w_c", e.w_c);
    e.truncate_at_zero = s.boolean("truncate_at_zero", e.truncate_at_zero);
    s.finish();
    e.validate();
    return e;
}

PurcellPair read_fp(const json& doc) {
    Section s(doc.contains("fp") ? &doc["fp"] : nullptr, "fp");
    PurcellPair fp{35.0, 5.0};
    fp.f_perp = s.number("f_perp", fp.f_perp);
    fp.f_par = s.number("f_par", fp.f_par);
    s.finish();
    fp.validate();
    if (fp.f_par > fp.f_perp) throw ValidationError("fp.f_par must not exceed fp.f_perp");
    return fp;
}

Tolerances read_tolerances(const json& doc) {
    Section s(doc.contains("tolerances") ? &doc["tolerances"] : nullptr, "tolerances");
    Tolerances t;
    t.quad_rel = s.number("quad_rel_tol", t.quad_rel);
    t.gap_residual = s.number("gap_residual_tol", t.gap_residual);
    t.fit_x_tol = s.number("fit_x_tol", t.fit_x_tol);
    t.fit_max_evaluations = s.integer("fit_max_evaluations", t.fit_max_evaluations);
    s.finish();
    if (!(t.quad_rel > 0.0) || !(t.gap_residual > 0.0) || !(t.fit_x_tol > 0.0) || t.fit_max_evaluations < 10)
        throw ValidationError("tolerances must be positive (fit_max_evaluations >= 10)");
    return t;
}

Section section(const json& doc, const std::string& key) {
    return Section(doc.contains(key) ? &doc[key] : nullptr, key);
}

Orientation read_orientation(Section& s) {
    return s.choice("orientation", "perpendicular", {"perpendicular", "parallel"}) == "perpendicular"
               ? Orientation::Perpendicular
               : Orientation::Parallel;
}

std::vector<double> linspace(double a, double b, long long n, const std::string& what) {
    if (n < 2 || !(b > a)) throw ValidationError(what + ": need points >= 2 and an increasing range");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

// Runs f(i) for i in [0, n) on up to `workers` threads; the lowest-index failure is rethrown.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (w == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < w; ++k) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

json mode_json(const GapPlasmonMode& m) {
    return {{"n_eff_re", m.n_eff.real()},           {"n_eff_im", m.n_eff.imag()},
            {"propagation_length_nm", m.propagation_length_nm}, {"wavelength_nm", m.wavelength_nm},
            {"gap_thickness_nm", m.gap_thickness_nm}, {"residual", m.residual},
            {"iterations", m.iterations}};
}

json lobe_json(const LobeMetrics& m) {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"peak_theta_deg", m.peak_theta_deg},
            {"peak_phi_deg", m.peak_phi_deg},
            {"null_to_null_width_deg", m.null_to_null_width_deg},
            {"peak_to_sidelobe_ratio", finite_or_null(m.peak_to_sidelobe_ratio)},
            {"no_lobe", m.no_lobe},
            {"no_sidelobe", m.no_sidelobe}};
}

GapPlasmonMode geometry_mode(const AntennaGeometry& g, const Tolerances& tol) {
    return solve_gap_mode(g.emission_wavelength_nm, g.spacer_thickness_nm, materials::gold(), materials::silica(),
                          {tol.gap_residual, 200});
}

struct Context {
    const RunConfig& cfg;
    fs::path out;
    std::vector<fs::path> artifacts;
    bool not_converged = false;
    std::string note;

    void csv(const std::string& file, const std::vector<CsvColumn>& cols) {
        write_csv(out / file, cols);
        artifacts.emplace_back(file);
    }
    void js(const std::string& file, const json& j) {
        write_text(out / file, j.dump(2) + "\n");
        artifacts.emplace_back(file);
    }
};

void cmd_purcell_planar(Context& ctx) {
    const json& doc = ctx.cfg.document;
    const AntennaGeometry g = read_geometry(doc);
    const Tolerances tol = read_tolerances(doc);
    Section s = section(doc, "purcell_planar");
    const Orientation o = read_orientation(s);
    const auto grid = linspace(s.number("u_min", 0.0), s.number("u_max", 5.0), s.integer("points", 501),
                               "purcell_planar");
    s.finish();
    const PlanarStack stack = build_patch_stack(g);
    const DissipationSpectrum sp = dissipation_spectrum(stack, o, grid);
    ctx.csv("dissipation.csv", {{"u", sp.u_grid}, {"dFdu", sp.density}});
    EmissionOptions opt;
    opt.quad.rel_tol = tol.quad_rel;
    json j;
    for (auto [key, orient] : {std::pair{"f_perp", Orientation::Perpendicular}, std::pair{"f_par", Orientation::Parallel}}) {
        const PlanarPurcell f = purcell_planar(stack, orient, opt);
        j[key] = {{"value", f.value}, {"error_estimate", f.error_estimate}, {"u_max", f.u_max}};
    }
    j["orientation"] = o == Orientation::Perpendicular ? "perpendicular" : "parallel";
    ctx.js("purcell.json", j);
}

void cmd_quench_sweep(Context& ctx) {
    const json& doc = ctx.cfg.document;
    const AntennaGeometry g = read_geometry(doc);
    const Tolerances tol = read_tolerances(doc);
    Section s = section(doc, "quench_sweep");
    const Orientation o = read_orientation(s);
    std::vector<double> def;
    for (int d = 1; d <= 15; ++d) def.push_back(d);
    const std::vector<double> dist = s.numbers("distances_nm", def);
    s.finish();
    for (std::size_t i = 1; i < dist.size(); ++i) {
        if (!(dist[i] > dist[i - 1])) throw ValidationError("quench_sweep.distances_nm must increase");
    }
    EmissionOptions opt;
    opt.quad.rel_tol = tol.quad_rel;
    std::vector<double> total(dist.size()), photon(dist.size()), plasmon(dist.size()), quench(dist.size());
    parallel_for(dist.size(), ctx.cfg.workers, [&](std::size_t i) {
        AntennaGeometry gi = g;
        gi.emitter_height_nm = dist[i];
        gi.validate();
        const ChannelSplit c = decay_channels(build_patch_stack(gi), o, {}, opt);
        total[i] = c.total_purcell;
        photon[i] = c.photon_fraction;
        plasmon[i] = c.plasmon_fraction;
        quench[i] = c.quench_fraction;
    });
    ctx.csv("quench.csv", {{"distance_nm", dist}, {"F", total}, {"photon", photon}, {"plasmon", plasmon}, {"quench", quench}});
}

void cmd_gap_mode(Context& ctx) {
    const json& doc = ctx.cfg.document;
    const AntennaGeometry g = read_geometry(doc);
    const Tolerances tol = read_tolerances(doc);
    Section s = section(doc, "gap_mode");
    const double lambda = s.number("wavelength_nm", g.emission_wavelength_nm);
    const double gap = s.number("gap_nm", g.spacer_thickness_nm);
    s.finish();
    const GapPlasmonMode m =
        solve_gap_mode(lambda, gap, materials::gold(), materials::silica(), {tol.gap_residual, 200});
    json j = mode_json(m);
    const auto spp = spp_single_interface(lambda, materials::gold(), materials::silica());
    j["spp_n_eff_re"] = spp.real();
    j["spp_n_eff_im"] = spp.imag();
    ctx.js("gap_mode.json", j);
}

FabryPerotParams read_fabry_perot(Section& s) {
    FabryPerotParams p;
    p.edge_reflectivity = s.number("edge_reflectivity", p.edge_reflectivity);
    p.edge_phase = s.number("edge_phase_rad", p.edge_phase);
    p.parallel_value = s.number("parallel_value", p.parallel_value);
    p.planar_baseline = s.optional_number("planar_baseline");
    return p;
}

void cmd_purcell_vs_diameter(Context& ctx) {
    const json& doc = ctx.cfg.document;
    const AntennaGeometry g = read_geometry(doc);
    Section s = section(doc, "purcell_vs_diameter");
    const auto d = linspace(s.number("d_min_nm", 500.0), s.number("d_max_nm", 2500.0), s.integer("points", 801),
                            "purcell_vs_diameter");
    Section fps = s.child("fabry_perot");
    const FabryPerotParams p = read_fabry_perot(fps);
    fps.finish();
    s.finish();
    const PurcellCurve c = purcell_vs_diameter(g, d, p);
    ctx.csv("purcell_vs_diameter.csv", {{"D_nm", c.diameters_nm}, {"F_perp", c.f_perp}, {"F_par", c.f_par}});
    json j = {{"planar_baseline", c.planar_baseline}, {"mode", mode_json(c.mode)}};
    ctx.js("purcell_vs_diameter.json", j);
}

RimOptions read_rim_options(Section& s) {
    RimOptions o;
    o.grid.theta_step_deg = s.number("theta_step_deg", o.grid.theta_step_deg);
    o.grid.phi_step_deg = s.number("phi_step_deg", o.grid.phi_step_deg);
    o.element = s.choice("element", "unity", {"unity", "cosine"}) == "unity" ? ElementFactor::Unity : ElementFactor::Cosine;
    o.normalization = s.choice("normalization", "unit-integral", {"unit-integral", "unit-peak"}) == "unit-integral"
                          ? Normalization::UnitIntegral
                          : Normalization::UnitPeak;
    o.points_per_wavelength = static_cast<int>(s.integer("points_per_wavelength", o.points_per_wavelength));
    o.grid.validate();
    return o;
}

void cmd_pattern(Context& ctx) {
    const json& doc = ctx.cfg.document;
    const AntennaGeometry g = read_geometry(doc);
    const Tolerances tol = read_tolerances(doc);
    Section s = section(doc, "pattern");
    const RimOptions opt = read_rim_options(s);
    const double offset = s.number("emitter_offset_nm", 0.0);
    std::optional<ClusterSpec> cluster;
    if (s.has("cluster")) {
        Section c = s.child("cluster");
        ClusterSpec cs;
        // No default radius: the cluster size must be stated explicitly.
        cs.radius_nm = c.required_number("radius_nm");
        cs.height_nm = c.required_number("height_nm");
        cs.center_offset_nm = c.number("center_offset_nm", 0.0);
        cs.radial_samples = static_cast<int>(c.integer("radial_samples", cs.radial_samples));
        cs.azimuthal_samples = static_cast<int>(c.integer("azimuthal_samples", cs.azimuthal_samples));
        cs.vertical_samples = static_cast<int>(c.integer("vertical_samples", cs.vertical_samples));
        c.finish();
        cluster = cs;
    } else {
        s.child("cluster");
    }
    s.finish();
    const GapPlasmonMode mode = geometry_mode(g, tol);
    const RadiationPattern p = cluster ? cluster_pattern(g, *cluster, mode, opt) : rim_far_field(g, offset, mode, opt);
    std::vector<double> th, ph;
    th.reserve(p.intensity.size());
    ph.reserve(p.intensity.size());
    for (double t : p.theta_deg) {
        for (double f : p.phi_deg) {
            th.push_back(t);
            ph.push_back(f);
        }
    }
    ctx.csv("pattern.csv", {{"theta_deg", th}, {"phi_deg", ph}, {"intensity", p.intensity}});
    json j = lobe_json(lobe_metrics(p));
    j["mode"] = mode_json(mode);
    j["rim_points"] = rim_point_count(g, mode, opt);
    ctx.js("pattern_metrics.json", j);
}

void cmd_synth_decay(Context& ctx) {
    const json& doc = ctx.cfg.document;
    const RateEnsemble ens = read_ensemble(doc);
    const PurcellPair fp = read_fp(doc);
    Section s = section(doc, "synth_decay");
    SynthSpec sp;
    sp.bin_width = s.number("bin_width_ns", sp.bin_width);
    sp.window = s.number("window_ns", sp.window);
    sp.total_counts = s.number("total_counts", sp.total_counts);
    sp.background_per_bin = s.number("background_per_bin", sp.background_per_bin);
    sp.irf_fwhm = s.number("irf_fwhm_ns", sp.irf_fwhm);
    sp.poisson = s.boolean("poisson", sp.poisson);
    s.finish();
    sp.seed = ctx.cfg.seed;
    const DecayHistogram h = synthesize_histogram(ens, fp, sp);
    write_histogram(ctx.out / "histogram.csv", h);
    ctx.artifacts.emplace_back("histogram.csv");
    json j = {{"ensemble", {{"gamma_c", ens.gamma_c}, {"w_c", ens.w_c}, {"truncate_at_zero", ens.truncate_at_zero}}},
              {"fp", {{"f_perp", fp.f_perp}, {"f_par", fp.f_par}}},
              {"bin_width_ns", sp.bin_width},
              {"window_ns", sp.window},
              {"bins", h.size()},
              {"total_counts", sp.total_counts},
              {"background_per_bin", sp.background_per_bin},
              {"irf_fwhm_ns", sp.irf_fwhm},
              {"poisson", sp.poisson},
              {"seed", ctx.cfg.seed}};
    ctx.js("synth.json", j);
}

void cmd_fit_decay(Context& ctx) {
    const json& doc = ctx.cfg.document;
    const Tolerances tol = read_tolerances(doc);
    Section s = section(doc, "fit_decay");
    const std::string mode = s.choice("mode", "antenna", {"antenna", "reference"});
    const std::string input = s.text("input", "");
    FitOptions opt;
    opt.irf_fwhm = s.number("irf_fwhm_ns", opt.irf_fwhm);
    opt.fit_background = s.boolean("fit_background", opt.fit_background);
    opt.grid = static_cast<std::size_t>(std::max<long long>(1, s.integer("grid", static_cast<long long>(opt.grid))));
    opt.f_min = s.number("f_min", opt.f_min);
    opt.f_max = s.number("f_max", opt.f_max);
    s.finish();
    if (input.empty()) throw ValidationError("fit_decay.input is required (or pass --input)");
    opt.simplex.x_tol = tol.fit_x_tol;
    opt.simplex.max_evaluations = static_cast<std::size_t>(tol.fit_max_evaluations);
    opt.workers = ctx.cfg.workers;
    fs::path path(input);
    if (path.is_relative()) path = ctx.cfg.base_dir / path;
    const DecayHistogram h = load_histogram(path);
    FitResult r;
    json j;
    if (mode == "reference") {
        r = fit_reference(h, opt);
    } else {
        const RateEnsemble ens = read_ensemble(doc);
        r = fit_antenna(h, ens, opt);
        j["ensemble"] = {{"gamma_c", ens.gamma_c}, {"w_c", ens.w_c}, {"truncate_at_zero", ens.truncate_at_zero}};
    }
    j["mode"] = mode;
    j["input_sha256"] = sha256_file(path);
    j["parameters"] = json::array();
    for (const auto& p : r.parameters) j["parameters"].push_back({{"name", p.name}, {"value", p.value}, {"sigma", p.sigma}});
    j["nll"] = r.nll;
    j["converged"] = r.converged;
    j["evaluations"] = r.evaluations;
    j["boundary_pinned"] = r.boundary_pinned;
    j["near_degenerate"] = r.near_degenerate;
    j["start_nll"] = r.start_nll;
    j["irf_fwhm_ns"] = opt.irf_fwhm;
    j["fit_background"] = opt.fit_background;
    j["seed"] = ctx.cfg.seed;
    ctx.js("fit.json", j);
    if (!r.converged) {
        ctx.not_converged = true;
        ctx.note = "fit did not converge; best point written";
    }
}

void cmd_sweep(Context& ctx) {
    const json& doc = ctx.cfg.document;
    const AntennaGeometry g = read_geometry(doc);
    const Tolerances tol = read_tolerances(doc);
    Section s = section(doc, "sweep");
    const std::string param = s.text("parameter", "disk_diameter_nm");
    if (!s.has("values")) throw ValidationError("sweep.values is required");
    const std::vector<double> values = s.numbers("values", {});
    Section fps = s.child("fabry_perot");
    const FabryPerotParams fpp = read_fabry_perot(fps);
    fps.finish();
    Section ps = s.child("pattern");
    const RimOptions ropt = read_rim_options(ps);
    ps.finish();
    s.finish();
    {
        AntennaGeometry probe = g;
        geometry_field(probe, param);
    }
    const std::size_t n = values.size();
    std::vector<double> nre(n), nim(n), fperp(n), fpar(n), theta(n), width(n), ratio(n);
    parallel_for(n, ctx.cfg.workers, [&](std::size_t i) {
        AntennaGeometry gi = g;
        geometry_field(gi, param) = values[i];
        gi.validate();
        const GapPlasmonMode mode = geometry_mode(gi, tol);
        const double d[1] = {gi.disk_diameter_nm};
        const PurcellCurve c = purcell_vs_diameter(gi, d, fpp);
        const LobeMetrics lm = lobe_metrics(rim_far_field(gi, 0.0, mode, ropt));
        nre[i] = mode.n_eff.real();
        nim[i] = mode.n_eff.imag();
        fperp[i] = c.f_perp[0];
        fpar[i] = c.f_par[0];
        theta[i] = lm.peak_theta_deg;
        width[i] = lm.null_to_null_width_deg;
        ratio[i] = lm.peak_to_sidelobe_ratio;
    });
    ctx.csv("sweep.csv", {{param, values},
                          {"n_eff_re", nre},
                          {"n_eff_im", nim},
                          {"F_perp", fperp},
                          {"F_par", fpar},
                          {"peak_theta_deg", theta},
                          {"width_deg", width},
                          {"sidelobe_ratio", ratio}});
}

json config_echo(const RunConfig& cfg) {
    json echo = cfg.document;
    echo.erase("workers");
    echo.erase("output_dir");
    echo["seed"] = cfg.seed;
    if (cfg.command == "fit-decay") echo["fit_decay"]["input"] = cfg.document.value("fit_decay", json::object()).value("input", "");
    return echo;
}

}  // namespace

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> k = {"purcell-planar", "quench-sweep", "gap-mode",  "purcell-vs-diameter",
                                               "pattern",        "synth-decay",  "fit-decay", "sweep"};
    return k;
}

std::string usage_text() {
    std::string s =
        "usage: patchant <command> --config <path> [--seed <int>] [--out <dir>] [--workers <int>]\n"
        "       patchant fit-decay --reference|--antenna --input <histogram.csv> [--config <path>] ...\n"
        "commands:\n";
    for (const auto& c : known_commands()) s += "  " + c + "\n";
    return s;
}

RunConfig parse_config(const nlohmann::json& doc, const RunOverrides& ov, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& [k, v] : doc.items()) {
        if (std::find(kTopLevel.begin(), kTopLevel.end(), k) == kTopLevel.end())
            throw ValidationError("unknown field " + k);
    }
    RunConfig cfg;
    cfg.document = doc;
    cfg.base_dir = base_dir;
    Section top(&cfg.document, "");
    cfg.command = top.text("command", "");
    if (std::find(known_commands().begin(), known_commands().end(), cfg.command) == known_commands().end())
        throw ValidationError(cfg.command.empty() ? "command is required" : "unknown command " + cfg.command);
    const long long seed = top.integer("seed", 0);
    if (seed < 0) throw ValidationError("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.output_dir = top.text("output_dir", "out");
    const long long workers = top.integer("workers", 1);
    if (workers < 1 || workers > 1024) throw ValidationError("workers must be in [1, 1024]");
    cfg.workers = static_cast<unsigned>(workers);

    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.output_dir) cfg.output_dir = *ov.output_dir;
    if (ov.workers) {
        if (*ov.workers < 1) throw ValidationError("workers must be at least 1");
        cfg.workers = *ov.workers;
    }
    if (ov.fit_mode || ov.input) {
        if (cfg.command != "fit-decay") throw ValidationError("--reference/--antenna/--input apply to fit-decay only");
        json& fd = cfg.document["fit_decay"];
        if (fd.is_null()) fd = json::object();
        if (ov.fit_mode) fd["mode"] = *ov.fit_mode;
        if (ov.input) fd["input"] = fs::absolute(*ov.input).lexically_normal().string();
    }
    cfg.document["seed"] = cfg.seed;
    if (cfg.output_dir.is_relative() && !ov.output_dir) cfg.output_dir = base_dir / cfg.output_dir;
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const RunOverrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc, overrides, fs::absolute(path).parent_path());
}

RunOutcome run(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    RunOutcome out;
    Context ctx{config, config.output_dir, {}, false, {}};
    try {
        fs::create_directories(ctx.out);
        const std::string& c = config.command;
        if (c == "purcell-planar") cmd_purcell_planar(ctx);
        else if (c == "quench-sweep") cmd_quench_sweep(ctx);
        else if (c == "gap-mode") cmd_gap_mode(ctx);
        else if (c == "purcell-vs-diameter") cmd_purcell_vs_diameter(ctx);
        else if (c == "pattern") cmd_pattern(ctx);
        else if (c == "synth-decay") cmd_synth_decay(ctx);
        else if (c == "fit-decay") cmd_fit_decay(ctx);
        else if (c == "sweep") cmd_sweep(ctx);
        else throw ValidationError("unknown command " + c);
    } catch (const AccuracyError& e) {
        return {ExitCode::NotConverged, {}, e.what()};
    } catch (const RootFindingError& e) {
        return {ExitCode::NotConverged, {}, e.what()};
    } catch (const ValidationError& e) {
        return {ExitCode::Invalid, {}, e.what()};
    } catch (const ParseError& e) {
        return {ExitCode::Invalid, {}, e.what()};
    } catch (const RangeError& e) {
        return {ExitCode::Invalid, {}, e.what()};
    } catch (const std::domain_error& e) {
        return {ExitCode::Invalid, {}, e.what()};
    } catch (const json::exception& e) {
        return {ExitCode::Invalid, {}, e.what()};
    } catch (const fs::filesystem_error& e) {
        return {ExitCode::Invalid, {}, e.what()};
    }

    json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = config.command;
    manifest["config"] = config_echo(config);
    manifest["artifacts"] = json::array();
    for (const auto& a : ctx.artifacts) {
        manifest["artifacts"].push_back({{"path", a.generic_string()},
                                         {"sha256", sha256_file(ctx.out / a)},
                                         {"bytes", fs::file_size(ctx.out / a)}});
    }
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(ctx.out / "manifest.json", manifest.dump(2) + "\n");
    out.artifacts = ctx.artifacts;
    out.artifacts.emplace_back("manifest.json");
    out.code = ctx.not_converged ? ExitCode::NotConverged : ExitCode::Success;
    out.message = ctx.note;
    return out;
}

}  // namespace patchant
