#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "patchant/errors.hpp"
#include "patchant/materials.hpp"

using namespace patchant;

namespace {

// Rows of the shipped CSV, parsed independently of the library loader.
std::vector<std::array<double, 3>> read_rows(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<std::array<double, 3>> rows;
    while (std::getline(in, line)) {
        std::array<double, 3> r{};
        char c1, c2;
        std::istringstream ss(line);
        ss >> r[0] >> c1 >> r[1] >> c2 >> r[2];
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST_CASE("constant index returns n squared") {
    const auto eps = permittivity_at(Material::constant_index("glass", 1.5), 630.0);
    CHECK(eps.real() == doctest::Approx(2.25).epsilon(1e-15));
    CHECK(eps.imag() == 0.0);
}

TEST_CASE("lossless Drude metal at the plasma wavelength gives eps_inf - 1") {
    const Material m = Material::drude("toy", 3.7, 150.0, 0.0);
    const auto eps = permittivity_at(m, 150.0);
    CHECK(eps.real() == doctest::Approx(2.7).epsilon(1e-12));
    CHECK(std::abs(eps.imag()) < 1e-15);
}

TEST_CASE("Drude metal is passive and metallic in the visible") {
    const auto eps = permittivity_at(materials::gold_drude(), 630.0);
    CHECK(eps.real() < -5.0);
    CHECK(eps.imag() > 0.0);
}

TEST_CASE("bundled gold at 630 nm matches interpolation of the shipped table") {
    const auto rows = read_rows(std::string(PATCHANT_DATA_DIR) + "/gold_johnson_christy.csv");
    std::size_t i = 0;
    while (rows[i + 1][0] < 630.0) ++i;
    const double f = (630.0 - rows[i][0]) / (rows[i + 1][0] - rows[i][0]);
    const double re = rows[i][1] + f * (rows[i + 1][1] - rows[i][1]);
    const double im = rows[i][2] + f * (rows[i + 1][2] - rows[i][2]);
    const auto eps = permittivity_at(materials::gold(), 630.0);
    CHECK(eps.real() == doctest::Approx(re).epsilon(1e-12));
    CHECK(eps.imag() == doctest::Approx(im).epsilon(1e-12));
    // frozen regression values
    CHECK(eps.real() == doctest::Approx(-11.58350).epsilon(1e-5));
    CHECK(eps.imag() == doctest::Approx(1.269597).epsilon(1e-5));
}

TEST_CASE("compiled gold and silicon tables equal the CSV files") {
    for (const auto& [file, mat] : {std::pair{"gold_johnson_christy.csv", materials::gold()},
                                    std::pair{"silicon.csv", materials::silicon()}}) {
        const Material loaded = load_material_table(std::string(PATCHANT_DATA_DIR) + "/" + file, mat.name());
        REQUIRE(loaded.table().size() == mat.table().size());
        for (std::size_t k = 0; k < mat.table().size(); ++k) {
            CHECK(loaded.table()[k].wavelength_nm == mat.table()[k].wavelength_nm);
            CHECK(loaded.table()[k].eps == mat.table()[k].eps);
        }
    }
}

TEST_CASE("out-of-range query names the valid interval") {
    const Material g = materials::gold();
    try {
        permittivity_at(g, 5000.0);
        FAIL("expected RangeError");
    } catch (const RangeError& e) {
        CHECK(e.lower() == g.min_wavelength());
        CHECK(e.upper() == g.max_wavelength());
        CHECK(std::string(e.what()).find("nm") != std::string::npos);
    }
}

TEST_CASE("tables must be strictly increasing") {
    CHECK_THROWS_AS(Material::tabulated("bad", {{500.0, {1.0, 0.0}}, {500.0, {2.0, 0.0}}}), ValidationError);
}

TEST_CASE("bundled materials are passive at every tabulated wavelength") {
    for (const Material& m : {materials::gold(), materials::silicon()}) {
        for (const auto& p : m.table()) CHECK(p.eps.imag() >= 0.0);
    }
}

TEST_CASE("interpolation is continuous across the table") {
    const Material g = materials::gold();
    double worst = 0.0;
    const double lo = g.min_wavelength(), hi = g.max_wavelength();
    for (int k = 0; k < 20000; ++k) {
        const double a = lo + (hi - lo) * k / 20000.0;
        const double b = std::min(hi, a + 1e-6);
        worst = std::max(worst, std::abs(permittivity_at(g, b) - permittivity_at(g, a)));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("default patch stack places the emitter 15 nm from both metals") {
    const AntennaGeometry geom;
    const PlanarStack s = build_patch_stack(geom);
    CHECK(s.d_lower_nm == 15.0);
    CHECK(s.d_upper_nm == 15.0);
    CHECK(s.d_lower_nm + s.d_upper_nm == geom.spacer_thickness_nm);
    CHECK(s.lower.layers.at(0).thickness_nm == 200.0);
    CHECK(s.upper.layers.at(0).thickness_nm == 20.0);
    CHECK(s.lower.halfspace.name() == "silicon");
    CHECK(s.upper.halfspace.name() == "air");
}

TEST_CASE("emitter height must lie strictly inside the spacer") {
    AntennaGeometry g;
    g.emitter_height_nm = 30.0;
    CHECK_THROWS_AS(build_patch_stack(g), ValidationError);
    g.emitter_height_nm = 0.0;
    CHECK_THROWS_AS(build_patch_stack(g), ValidationError);
    g.emitter_height_nm = 10.0;
    const PlanarStack s = build_patch_stack(g);
    CHECK(s.d_lower_nm == 10.0);
    CHECK(s.d_upper_nm == 20.0);
}

TEST_CASE("flipping a stack swaps the half-stacks and distances") {
    AntennaGeometry g;
    g.emitter_height_nm = 7.0;
    const PlanarStack s = build_patch_stack(g);
    const PlanarStack f = s.flipped();
    CHECK(f.d_lower_nm == s.d_upper_nm);
    CHECK(f.d_upper_nm == s.d_lower_nm);
    CHECK(f.lower.halfspace == s.upper.halfspace);
    CHECK(f.upper.halfspace == s.lower.halfspace);
}

TEST_CASE("materials by name") {
    CHECK(materials::by_name("silica") == materials::silica());
    CHECK_THROWS_AS(materials::by_name("unobtainium"), ValidationError);
}
