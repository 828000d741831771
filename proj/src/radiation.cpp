#include "patchant/radiation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "patchant/errors.hpp"

namespace patchant {

namespace {

using cplx = std::complex<double>;
constexpr double kDeg = std::numbers::pi / 180.0;

std::size_t step_count(double span, double step) {
    const double n = span / step;
    const double r = std::round(n);
    if (std::abs(n - r) > 1e-9 * std::max(1.0, r)) return 0;
    return static_cast<std::size_t>(r);
}

RadiationPattern empty_pattern(const PatternGrid& grid) {
    grid.validate();
    RadiationPattern p;
    const std::size_t nt = step_count(90.0, grid.theta_step_deg);
    const std::size_t np = step_count(360.0, grid.phi_step_deg);
    for (std::size_t i = 0; i <= nt; ++i) p.theta_deg.push_back(grid.theta_step_deg * static_cast<double>(i));
    for (std::size_t j = 0; j < np; ++j) p.phi_deg.push_back(grid.phi_step_deg * static_cast<double>(j));
    p.intensity.assign(p.theta_deg.size() * p.phi_deg.size(), 0.0);
    return p;
}

struct Emitter {
    double x;
    double y;
};

// Rim source amplitudes including the uniform quadrature weight 2 pi / N.
std::vector<cplx> ring_source(const AntennaGeometry& geom, const GapPlasmonMode& mode, Emitter e, int n_points) {
    const double radius = geom.disk_radius();
    const double k0 = 2.0 * std::numbers::pi / geom.emission_wavelength_nm;
    const double beta = k0 * mode.n_eff.real();
    const double inv_two_l = 1.0 / (2.0 * mode.propagation_length_nm);
    const double w = 2.0 * std::numbers::pi / n_points;
    std::vector<cplx> a(static_cast<std::size_t>(n_points));
    for (int l = 0; l < n_points; ++l) {
        const double phi = w * l;
        const double dx = radius * std::cos(phi) - e.x;
        const double dy = radius * std::sin(phi) - e.y;
        const double rho = std::hypot(dx, dy);
        a[static_cast<std::size_t>(l)] = w * std::exp(-rho * inv_two_l) / std::sqrt(rho) * std::polar(1.0, beta * rho);
    }
    return a;
}

// Field evaluation shared by all emitters of one pattern.
class FarFieldEvaluator {
public:
    FarFieldEvaluator(const AntennaGeometry& geom, const RadiationPattern& layout, int n_points)
        : n_points_(n_points), layout_(layout) {
        const double k0 = 2.0 * std::numbers::pi / geom.emission_wavelength_nm;
        kr_ = k0 * geom.disk_radius();
        order_ = static_cast<int>(std::ceil(kr_)) + 25;
        const std::size_t nt = layout.theta_deg.size();
        bessel_.resize(nt * static_cast<std::size_t>(order_ + 1));
        for (std::size_t i = 0; i < nt; ++i) {
            const double x = kr_ * std::sin(layout.theta_deg[i] * kDeg);
            for (int m = 0; m <= order_; ++m) {
                bessel_[i * static_cast<std::size_t>(order_ + 1) + static_cast<std::size_t>(m)] =
                    std::cyl_bessel_j(static_cast<double>(m), x);
            }
        }
        const std::size_t np = layout.phi_deg.size();
        phase_.resize(np * static_cast<std::size_t>(order_ + 1));
        for (std::size_t j = 0; j < np; ++j) {
            for (int m = 0; m <= order_; ++m) {
                phase_[j * static_cast<std::size_t>(order_ + 1) + static_cast<std::size_t>(m)] =
                    std::polar(1.0, -m * layout.phi_deg[j] * kDeg);
            }
        }
    }

    // |E|^2 on the layout grid via the Jacobi-Anger expansion of the ring sum.
    std::vector<double> harmonic(const std::vector<cplx>& source) const {
        const int mm = order_;
        const std::size_t stride = static_cast<std::size_t>(mm + 1);
        std::vector<cplx> pos(stride), neg(stride);
        const double w = 2.0 * std::numbers::pi / n_points_;
        for (int m = 0; m <= mm; ++m) {
            cplx sp{0.0, 0.0}, sn{0.0, 0.0};
            for (int l = 0; l < n_points_; ++l) {
                const cplx e = std::polar(1.0, w * static_cast<double>((static_cast<long>(m) * l) % n_points_));
                sp += source[static_cast<std::size_t>(l)] * e;
                sn += source[static_cast<std::size_t>(l)] * std::conj(e);
            }
            pos[static_cast<std::size_t>(m)] = sp;
            neg[static_cast<std::size_t>(m)] = sn;
        }
        static const cplx i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const std::size_t nt = layout_.theta_deg.size();
        const std::size_t np = layout_.phi_deg.size();
        std::vector<double> out(nt * np);
        std::vector<cplx> coef_p(stride), coef_n(stride);
        for (std::size_t i = 0; i < nt; ++i) {
            for (int m = 0; m <= mm; ++m) {
                const cplx c = i_pow[m % 4] * bessel_[i * stride + static_cast<std::size_t>(m)];
                coef_p[static_cast<std::size_t>(m)] = c * pos[static_cast<std::size_t>(m)];
                coef_n[static_cast<std::size_t>(m)] = m == 0 ? cplx{0.0, 0.0} : c * neg[static_cast<std::size_t>(m)];
            }
            for (std::size_t j = 0; j < np; ++j) {
                const cplx* ph = &phase_[j * stride];
                cplx e{0.0, 0.0};
                for (std::size_t m = 0; m < stride; ++m) e += coef_p[m] * ph[m] + coef_n[m] * std::conj(ph[m]);
                out[i * np + j] = std::norm(e);
            }
        }
        return out;
    }

    // |E|^2 by direct summation over rim points.
    std::vector<double> direct(const std::vector<cplx>& source) const {
        const std::size_t nt = layout_.theta_deg.size();
        const std::size_t np = layout_.phi_deg.size();
        const double w = 2.0 * std::numbers::pi / n_points_;
        std::vector<double> out(nt * np);
        for (std::size_t i = 0; i < nt; ++i) {
            const double x = kr_ * std::sin(layout_.theta_deg[i] * kDeg);
            for (std::size_t j = 0; j < np; ++j) {
                const double phi = layout_.phi_deg[j] * kDeg;
                cplx e{0.0, 0.0};
                for (int l = 0; l < n_points_; ++l) e += source[static_cast<std::size_t>(l)] * std::polar(1.0, x * std::cos(w * l - phi));
                out[i * np + j] = std::norm(e);
            }
        }
        return out;
    }

private:
    int n_points_;
    const RadiationPattern& layout_;
    double kr_{};
    int order_{};
    std::vector<double> bessel_;
    std::vector<cplx> phase_;
};

void apply_element(RadiationPattern& p, ElementFactor element) {
    if (element == ElementFactor::Unity) return;
    const std::size_t np = p.phi_deg.size();
    for (std::size_t i = 0; i < p.theta_deg.size(); ++i) {
        const double c = std::cos(p.theta_deg[i] * kDeg);
        for (std::size_t j = 0; j < np; ++j) p.at(i, j) *= c;
    }
}

std::vector<double> emitter_intensity(const FarFieldEvaluator& ev, const AntennaGeometry& geom,
                                      const GapPlasmonMode& mode, Emitter e, int n_points, RingEvaluation how) {
    const auto source = ring_source(geom, mode, e, n_points);
    return how == RingEvaluation::Harmonic ? ev.harmonic(source) : ev.direct(source);
}

}  // namespace

void PatternGrid::validate() const {
    if (!(theta_step_deg > 0.0) || step_count(90.0, theta_step_deg) == 0)
        throw ValidationError("theta step must divide 90 degrees");
    if (!(phi_step_deg > 0.0) || step_count(180.0, phi_step_deg) == 0)
        throw ValidationError("phi step must divide 180 degrees");
}

double solid_angle_integral(const RadiationPattern& p) {
    const std::size_t nt = p.theta_deg.size();
    const std::size_t np = p.phi_deg.size();
    if (nt < 2 || np == 0) return 0.0;
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(np);
    double total = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        const double dtheta = (i == 0 ? p.theta_deg[1] - p.theta_deg[0]
                                      : (i == nt - 1 ? p.theta_deg[i] - p.theta_deg[i - 1]
                                                     : p.theta_deg[i + 1] - p.theta_deg[i - 1])) *
                              0.5 * kDeg;
        double row = 0.0;
        for (std::size_t j = 0; j < np; ++j) row += p.at(i, j);
        total += row * dphi * std::sin(p.theta_deg[i] * kDeg) * dtheta;
    }
    return total;
}

void normalize(RadiationPattern& p, Normalization norm) {
    p.normalization = norm;
    double scale = 0.0;
    if (norm == Normalization::UnitPeak) {
        scale = *std::max_element(p.intensity.begin(), p.intensity.end());
    } else {
        scale = solid_angle_integral(p);
    }
    if (!(scale > 0.0)) throw ValidationError("pattern has no radiated power to normalize");
    for (double& v : p.intensity) v /= scale;
}

RadiationPattern make_pattern(const PatternGrid& grid, const std::function<double(double, double)>& f,
                              Normalization norm) {
    RadiationPattern p = empty_pattern(grid);
    for (std::size_t i = 0; i < p.theta_deg.size(); ++i) {
        for (std::size_t j = 0; j < p.phi_deg.size(); ++j) p.at(i, j) = f(p.theta_deg[i], p.phi_deg[j]);
    }
    normalize(p, norm);
    return p;
}

int rim_point_count(const AntennaGeometry& geom, const GapPlasmonMode& mode, const RimOptions& opt) {
    const double rim_wavelength = geom.emission_wavelength_nm / mode.n_eff.real();
    const double circumference = 2.0 * std::numbers::pi * geom.disk_radius();
    int n = static_cast<int>(std::ceil(opt.points_per_wavelength * circumference / rim_wavelength));
    n = std::max(n, 64);
    return (n + 3) / 4 * 4;
}

RadiationPattern rim_far_field(const AntennaGeometry& geom, double emitter_offset_nm, const GapPlasmonMode& mode,
                               const RimOptions& opt) {
    geom.validate();
    // Negative offsets sit on the phi = 180 side.
    if (!(std::abs(emitter_offset_nm) < geom.disk_radius()))
        throw ValidationError("emitter offset must satisfy |s| < disk radius");
    RadiationPattern p = empty_pattern(opt.grid);
    const int n_points = rim_point_count(geom, mode, opt);
    const FarFieldEvaluator ev(geom, p, n_points);
    p.intensity = emitter_intensity(ev, geom, mode, {emitter_offset_nm, 0.0}, n_points, opt.evaluation);
    apply_element(p, opt.element);
    normalize(p, opt.normalization);
    return p;
}

void ClusterSpec::validate(const AntennaGeometry& geom) const {
    if (!(radius_nm >= 0.0) || !(height_nm >= 0.0) || !(center_offset_nm >= 0.0))
        throw ValidationError("cluster radius, height and offset must be non-negative");
    if (!(center_offset_nm + radius_nm < geom.disk_radius()))
        throw ValidationError("cluster must fit under the disk (offset + radius < disk radius)");
    if (radial_samples < 1 || azimuthal_samples < 1 || vertical_samples < 1)
        throw ValidationError("cluster sample counts must be positive");
    const double lo = geom.emitter_height_nm - 0.5 * height_nm;
    const double hi = geom.emitter_height_nm + 0.5 * height_nm;
    if (!(lo > 0.0 && hi < geom.spacer_thickness_nm))
        throw ValidationError("cluster height must stay inside the spacer around the emitter height");
}

RadiationPattern cluster_pattern(const AntennaGeometry& geom, const ClusterSpec& cluster, const GapPlasmonMode& mode,
                                 const RimOptions& opt) {
    geom.validate();
    cluster.validate(geom);
    RadiationPattern p = empty_pattern(opt.grid);
    const int n_points = rim_point_count(geom, mode, opt);
    const FarFieldEvaluator ev(geom, p, n_points);

    // Gap-mode |Ez|^2 launch weight across the spacer; it is common to every lateral position.
    const double k0 = 2.0 * std::numbers::pi / geom.emission_wavelength_nm;
    const cplx eps_d = permittivity_at(materials::silica(), geom.emission_wavelength_nm);
    const cplx kappa = k0 * std::sqrt(mode.n_eff * mode.n_eff - eps_d);
    double vertical_weight = 0.0;
    for (int k = 0; k < cluster.vertical_samples; ++k) {
        const double z = geom.emitter_height_nm +
                         cluster.height_nm * ((k + 0.5) / cluster.vertical_samples - 0.5);
        vertical_weight += std::norm(std::cosh(kappa * (z - 0.5 * geom.spacer_thickness_nm)));
    }

    std::fill(p.intensity.begin(), p.intensity.end(), 0.0);
    const int nr = cluster.radial_samples;
    const int na = cluster.azimuthal_samples;
    for (int i = 0; i < nr; ++i) {
        const double r = cluster.radius_nm * std::sqrt((i + 0.5) / nr);
        for (int j = 0; j < na; ++j) {
            const double a = 2.0 * std::numbers::pi * (j + 0.5) / na;
            const Emitter e{cluster.center_offset_nm + r * std::cos(a), r * std::sin(a)};
            const auto inten = emitter_intensity(ev, geom, mode, e, n_points, opt.evaluation);
            for (std::size_t q = 0; q < inten.size(); ++q) p.intensity[q] += vertical_weight * inten[q];
        }
    }
    const double count = static_cast<double>(nr) * na * vertical_weight;
    for (double& v : p.intensity) v /= count;
    apply_element(p, opt.element);
    normalize(p, opt.normalization);
    return p;
}

LobeMetrics lobe_metrics(const RadiationPattern& pattern) {
    const std::size_t nt = pattern.theta_deg.size();
    const std::size_t np = pattern.phi_deg.size();
    if (nt < 3 || np < 2 || np % 2 != 0) throw ValidationError("pattern grid too coarse for lobe metrics");
    if (pattern.theta_deg[1] - pattern.theta_deg[0] > 1.0 + 1e-12)
        throw ValidationError("lobe metrics need theta resolution <= 1 degree");

    std::size_t best = 0;
    for (std::size_t q = 1; q < pattern.intensity.size(); ++q) {
        if (pattern.intensity[q] > pattern.intensity[best]) best = q;
    }
    const std::size_t ip = best / np;
    const std::size_t jp = best % np;
    const std::size_t jo = (jp + np / 2) % np;

    // Signed cut: negative angles run along phi_peak + 180.
    std::vector<double> angle;
    std::vector<double> value;
    for (std::size_t i = nt - 1; i >= 1; --i) {
        angle.push_back(-pattern.theta_deg[i]);
        value.push_back(pattern.at(i, jo));
    }
    for (std::size_t i = 0; i < nt; ++i) {
        angle.push_back(pattern.theta_deg[i]);
        value.push_back(pattern.at(i, jp));
    }
    const std::size_t n = value.size();
    const std::size_t peak = (nt - 1) + ip;

    LobeMetrics m;
    m.peak_theta_deg = pattern.theta_deg[ip];
    m.peak_phi_deg = pattern.phi_deg[jp];

    auto refine = [&](std::size_t k) {
        const double y0 = value[k - 1], y1 = value[k], y2 = value[k + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        double shift = denom > 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
        shift = std::clamp(shift, -0.5, 0.5);
        return angle[k] + shift * (angle[k + 1] - angle[k]);
    };
    auto is_min = [&](std::size_t k) { return value[k] <= value[k - 1] && value[k] < value[k + 1]; };

    std::size_t right = n;
    for (std::size_t k = peak + 1; k + 1 < n; ++k) {
        if (is_min(k)) {
            right = k;
            break;
        }
    }
    std::size_t left = n;
    for (std::size_t k = peak; k-- > 1;) {
        if (value[k] <= value[k + 1] && value[k] < value[k - 1]) {
            left = k;
            break;
        }
    }
    if (right == n || left == n) {
        m.no_lobe = true;
        m.null_to_null_width_deg = angle.back() - angle.front();
    } else {
        m.null_to_null_width_deg = refine(right) - refine(left);
    }

    double side = 0.0;
    bool found = false;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const bool inside = (left != n && right != n) ? (k > left && k < right) : (k == peak);
        if (inside) continue;
        if (value[k] >= value[k - 1] && value[k] > value[k + 1]) {
            side = std::max(side, value[k]);
            found = true;
        }
    }
    const double peak_value = pattern.intensity[best];
    if (!found || !(side > 0.0)) {
        m.no_sidelobe = true;
        m.peak_to_sidelobe_ratio = std::numeric_limits<double>::infinity();
    } else {
        m.peak_to_sidelobe_ratio = peak_value / side;
    }
    return m;
}

}  // namespace patchant
