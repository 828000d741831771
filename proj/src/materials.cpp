#include "patchant/materials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "material_tables.hpp"
#include "patchant/errors.hpp"

namespace patchant {

namespace {

constexpr double kSpeedOfLight = 299792458.0;  // m/s

double angular_frequency(double wavelength_nm) {
    return 2.0 * std::numbers::pi * kSpeedOfLight / (wavelength_nm * 1e-9);
}

std::string interval_text(double lo, double hi) {
    std::ostringstream os;
    os << "[" << lo << ", " << hi << "] nm";
    return os.str();
}

}  // namespace

Material Material::constant_index(std::string name, double n) {
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("refractive index must be positive");
    Material m;
    m.kind_ = Kind::ConstantIndex;
    m.name_ = std::move(name);
    m.n_ = n;
    return m;
}

Material Material::tabulated(std::string name, std::vector<TablePoint> table) {
    if (table.size() < 2) throw ValidationError("material table '" + name + "' needs at least two rows");
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (!(table[i].wavelength_nm > table[i - 1].wavelength_nm))
            throw ValidationError("material table '" + name + "' wavelengths must be strictly increasing");
    }
    Material m;
    m.kind_ = Kind::TabulatedMetal;
    m.name_ = std::move(name);
    m.table_ = std::move(table);
    return m;
}

Material Material::drude(std::string name, double eps_inf, double plasma_wavelength_nm,
                         double damping_rate_per_s) {
    if (!(plasma_wavelength_nm > 0.0) || damping_rate_per_s < 0.0)
        throw ValidationError("Drude parameters must satisfy plasma wavelength > 0, damping >= 0");
    Material m;
    m.kind_ = Kind::DrudeMetal;
    m.name_ = std::move(name);
    m.eps_inf_ = eps_inf;
    m.plasma_wavelength_nm_ = plasma_wavelength_nm;
    m.damping_rate_ = damping_rate_per_s;
    return m;
}

double Material::min_wavelength() const noexcept {
    return kind_ == Kind::TabulatedMetal ? table_.front().wavelength_nm : 0.0;
}

double Material::max_wavelength() const noexcept {
    return kind_ == Kind::TabulatedMetal ? table_.back().wavelength_nm
                                         : std::numeric_limits<double>::infinity();
}

bool Material::operator==(const Material& o) const {
    if (kind_ != o.kind_ || name_ != o.name_) return false;
    switch (kind_) {
        case Kind::ConstantIndex: return n_ == o.n_;
        case Kind::DrudeMetal:
            return eps_inf_ == o.eps_inf_ && plasma_wavelength_nm_ == o.plasma_wavelength_nm_ &&
                   damping_rate_ == o.damping_rate_;
        case Kind::TabulatedMetal:
            return std::equal(table_.begin(), table_.end(), o.table_.begin(), o.table_.end(),
                              [](const TablePoint& a, const TablePoint& b) {
                                  return a.wavelength_nm == b.wavelength_nm && a.eps == b.eps;
                              });
    }
    return false;
}

Permittivity permittivity_at(const Material& material, double wavelength_nm) {
    if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm))
        throw ValidationError("wavelength must be positive and finite");
    switch (material.kind()) {
        case Material::Kind::ConstantIndex: {
            const double n = material.index();
            return {n * n, 0.0};
        }
        case Material::Kind::DrudeMetal: {
            const double w = angular_frequency(wavelength_nm);
            const double wp = angular_frequency(material.plasma_wavelength_nm());
            const std::complex<double> denom{w * w, w * material.damping_rate()};
            return material.eps_inf() - wp * wp / denom;
        }
        case Material::Kind::TabulatedMetal: {
            const auto& t = material.table();
            const double lo = t.front().wavelength_nm;
            const double hi = t.back().wavelength_nm;
            if (wavelength_nm < lo || wavelength_nm > hi) {
                throw RangeError("wavelength " + std::to_string(wavelength_nm) + " nm outside table '" +
                                     material.name() + "' range " + interval_text(lo, hi),
                                 lo, hi);
            }
            auto it = std::lower_bound(t.begin(), t.end(), wavelength_nm,
                                       [](const TablePoint& p, double x) { return p.wavelength_nm < x; });
            if (it == t.begin()) return it->eps;
            const auto& b = *it;
            const auto& a = *(it - 1);
            const double f = (wavelength_nm - a.wavelength_nm) / (b.wavelength_nm - a.wavelength_nm);
            return {a.eps.real() + f * (b.eps.real() - a.eps.real()),
                    a.eps.imag() + f * (b.eps.imag() - a.eps.imag())};
        }
    }
    return {1.0, 0.0};
}

namespace materials {

Material gold() {
    return Material::tabulated("gold",
                               {detail::kGoldJohnsonChristy.begin(), detail::kGoldJohnsonChristy.end()});
}

Material gold_drude() {
    // eps_inf 9.84, hbar*wp = 9.0 eV, hbar*gamma = 0.067 eV
    return Material::drude("gold-drude", 9.84, 1239.84193 / 9.0, 1.018e14);
}

Material silica() { return Material::constant_index("silica", 1.5); }

Material air() { return Material::constant_index("air", 1.0); }

Material silicon() {
    return Material::tabulated("silicon", {detail::kSiliconTable.begin(), detail::kSiliconTable.end()});
}

Material by_name(const std::string& name) {
    if (name == "gold") return gold();
    if (name == "gold-drude") return gold_drude();
    if (name == "silica") return silica();
    if (name == "air") return air();
    if (name == "silicon") return silicon();
    throw ValidationError("unknown material '" + name + "'");
}

}  // namespace materials

Material load_material_table(const std::filesystem::path& path, std::string name) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open material table " + path.string());
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty material table " + path.string(), 1);
    ++line_no;
    if (line.find("wavelength_nm") == std::string::npos)
        throw ParseError("material table header must be 'wavelength_nm,eps_re,eps_im'", line_no);
    std::vector<TablePoint> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
            throw ParseError("malformed material row at line " + std::to_string(line_no), line_no);
        }
        try {
            rows.push_back({std::stod(a), {std::stod(b), std::stod(c)}});
        } catch (const std::exception&) {
            throw ParseError("non-numeric material row at line " + std::to_string(line_no), line_no);
        }
    }
    return Material::tabulated(std::move(name), std::move(rows));
}

PlanarStack PlanarStack::flipped() const {
    return PlanarStack{upper, lower, gap, d_upper_nm, d_lower_nm, wavelength_nm};
}

void PlanarStack::validate() const {
    if (!(d_lower_nm > 0.0) || !(d_upper_nm > 0.0) || !std::isfinite(d_lower_nm) ||
        !std::isfinite(d_upper_nm))
        throw ValidationError("emitter must sit strictly inside the gap (d_lower, d_upper > 0)");
    if (!(wavelength_nm > 0.0)) throw ValidationError("wavelength must be positive");
    for (const auto* half : {&lower, &upper}) {
        for (const auto& layer : half->layers) {
            if (!(layer.thickness_nm > 0.0) || !std::isfinite(layer.thickness_nm))
                throw ValidationError("layer thickness must be finite and positive");
        }
    }
}

void AntennaGeometry::validate() const {
    auto positive = [](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ValidationError(std::string(field) + " must be finite and positive");
    };
    positive(disk_diameter_nm, "disk_diameter_nm");
    positive(disk_thickness_nm, "disk_thickness_nm");
    positive(spacer_thickness_nm, "spacer_thickness_nm");
    positive(bottom_gold_thickness_nm, "bottom_gold_thickness_nm");
    positive(emission_wavelength_nm, "emission_wavelength_nm");
    if (!(emitter_height_nm > 0.0 && emitter_height_nm < spacer_thickness_nm))
        throw ValidationError("emitter_height_nm must satisfy 0 < emitter_height < spacer_thickness");
}

PlanarStack build_patch_stack(const AntennaGeometry& geom) {
    geom.validate();
    const Material gold = materials::gold();
    PlanarStack stack{
        HalfStack{{Layer{gold, geom.bottom_gold_thickness_nm}}, materials::silicon()},
        HalfStack{{Layer{gold, geom.disk_thickness_nm}}, materials::air()},
        materials::silica(),
        geom.emitter_height_nm,
        geom.spacer_thickness_nm - geom.emitter_height_nm,
        geom.emission_wavelength_nm,
    };
    return stack;
}

}  // namespace patchant
