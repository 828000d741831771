#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

namespace patchant {

// Relative permittivity under the exp(-i*omega*t) convention: passive media have imag >= 0.
using Permittivity = std::complex<double>;

struct TablePoint {
    double wavelength_nm;
    Permittivity eps;
};

class Material {
public:
    enum class Kind { ConstantIndex, TabulatedMetal, DrudeMetal };

    static Material constant_index(std::string name, double n);
    // Rows must be strictly increasing in wavelength.
    static Material tabulated(std::string name, std::vector<TablePoint> table);
    // eps(w) = eps_inf - wp^2 / (w (w + i gamma)), wp = 2 pi c / plasma_wavelength.
    static Material drude(std::string name, double eps_inf, double plasma_wavelength_nm,
                          double damping_rate_per_s);

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

    double index() const noexcept { return n_; }
    const std::vector<TablePoint>& table() const noexcept { return table_; }
    double eps_inf() const noexcept { return eps_inf_; }
    double plasma_wavelength_nm() const noexcept { return plasma_wavelength_nm_; }
    double damping_rate() const noexcept { return damping_rate_; }

    // Valid wavelength interval; unbounded for analytic models.
    double min_wavelength() const noexcept;
    double max_wavelength() const noexcept;

    bool operator==(const Material& other) const;

private:
    Material() = default;

    Kind kind_ = Kind::ConstantIndex;
    std::string name_;
    double n_ = 1.0;
    std::vector<TablePoint> table_;
    double eps_inf_ = 1.0;
    double plasma_wavelength_nm_ = 0.0;
    double damping_rate_ = 0.0;
};

// Throws RangeError naming the valid interval when a tabulated material is queried outside it.
Permittivity permittivity_at(const Material& material, double wavelength_nm);

// Bundled materials.
namespace materials {
Material gold();        // Johnson & Christy ellipsometry table
Material gold_drude();  // Drude fallback
Material silica();      // n = 1.5
Material air();
Material silicon();     // crystalline Si, visible/NIR table
Material by_name(const std::string& name);
}  // namespace materials

// CSV with header `wavelength_nm,eps_re,eps_im`.
Material load_material_table(const std::filesystem::path& path, std::string name);

struct Layer {
    Material material;
    double thickness_nm;
};

// Layers ordered outward from the emitter gap, terminated by a semi-infinite medium.
struct HalfStack {
    std::vector<Layer> layers;
    Material halfspace;

    // First medium seen from the gap.
    const Material& adjacent() const { return layers.empty() ? halfspace : layers.front().material; }
};

struct PlanarStack {
    HalfStack lower;
    HalfStack upper;
    Material gap;
    double d_lower_nm;  // emitter to lower interface
    double d_upper_nm;  // emitter to upper interface
    double wavelength_nm;

    // Upside-down copy with the emitter at the mirrored position.
    PlanarStack flipped() const;
    double gap_thickness() const { return d_lower_nm + d_upper_nm; }
    void validate() const;
};

struct AntennaGeometry {
    double disk_diameter_nm = 1600.0;
    double disk_thickness_nm = 20.0;
    double spacer_thickness_nm = 30.0;
    double bottom_gold_thickness_nm = 200.0;
    double emitter_height_nm = 15.0;  // above the bottom gold
    double emission_wavelength_nm = 630.0;

    double disk_radius() const { return 0.5 * disk_diameter_nm; }
    void validate() const;
};

// Infinite-disk limit: Si / bottom gold / silica gap (emitter inside) / gold disk film / air.
PlanarStack build_patch_stack(const AntennaGeometry& geom);

}  // namespace patchant
