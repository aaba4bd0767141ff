#include <doctest.h>

#include <sstream>

#include "qspec/immersion.hpp"
#include "qspec/spectrum.hpp"

using namespace qspec;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Willmore energy of the flat torus with radii cos t, sin t in S^3: principal curvatures tan t and -cot t,
// W = area * (H^2 + 1) = pi^2 / (sin t cos t)
double flat_torus_willmore(double t) { return kPi * kPi / (std::sin(t) * std::cos(t)); }

ImmersionGrid branch_point_grid() {
    GridSpec gs{square_lattice(2 * kPi), 32, 32};
    QField v(gs.size());
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) v[gs.at(i, j)] = {std::cos(2 * kPi * i / 32), std::sin(2 * kPi * j / 32), 0, 0};
    return make_grid(gs.lat, 32, 32, v, Mat2H::identity());
}

}  // namespace

TEST_CASE("Clifford torus lies on the unit sphere") {
    ImmersionGrid g = homogeneous_torus(kPi / 4, 32, 32);
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        auto v = g.standard_value(k);
        REQUIRE(v);
        CHECK(std::abs(v->norm() - 1) < 1e-12);
    }
}

TEST_CASE("homogeneous torus lattice matches the circle speeds") {
    ImmersionGrid g = homogeneous_torus(kPi / 3, 32, 32);
    CHECK((g.lat.gamma2 / g.lat.gamma1).imag() == doctest::Approx(std::tan(kPi / 3)).epsilon(1e-14));
    CHECK_THROWS(homogeneous_torus(0, 32, 32));
    CHECK_THROWS(homogeneous_torus(kPi / 4, 8, 8));
}

TEST_CASE("conformality residual is second order") {
    double r64 = tangent_data(homogeneous_torus(kPi / 4, 64, 64)).conformality_residual;
    double r128 = tangent_data(homogeneous_torus(kPi / 4, 128, 128)).conformality_residual;
    CHECK(r64 < 1e-3);
    CHECK(r64 / r128 > 3.5);
    CHECK(r64 / r128 < 4.5);
}

TEST_CASE("N and R are unit imaginary and invariant under real scaling") {
    ImmersionGrid g = homogeneous_torus(kPi / 4, 32, 32);
    TangentData t = tangent_data(g, Deriv::Spectral);
    CHECK(t.unit_residual < 1e-10);
    ImmersionGrid s = g;
    for (Quat& v : s.values) v = v * 2.5;
    TangentData ts = tangent_data(s, Deriv::Spectral);
    double d = 0;
    for (std::size_t k = 0; k < t.N.size(); ++k) d = std::max(d, (t.N[k] - ts.N[k]).norm() + (t.R[k] - ts.R[k]).norm());
    CHECK(d < 1e-12);
}

TEST_CASE("branch points are reported with their cell") {
    CHECK_THROWS_AS(tangent_data(branch_point_grid()), NotImmersedError);
    CHECK_THROWS_WITH(tangent_data(branch_point_grid()), doctest::Contains("branch point on grid at (0,"));
}

TEST_CASE("Clifford extraction gives constant q and the bundle Willmore energy") {
    ImmersionGrid g = homogeneous_torus(kPi / 4, 128, 128);
    ExtractedHolo eh = extract_holo(g);
    CHECK(eh.q_rel_std < 1e-3);
    const double w = classical_willmore(g);
    CHECK(std::abs(w - 2 * kPi * kPi) / (2 * kPi * kPi) < 0.01);
    CHECK(std::abs(w - willmore_energy(eh.hd)) / w < 0.02);
}

TEST_CASE("theta = pi/3: constant q and the trivial representation in the spectrum") {
    ImmersionGrid g = homogeneous_torus(kPi / 3, 64, 64);
    ExtractedHolo eh = extract_holo(g);
    CHECK(eh.q_rel_std < 1e-3);
    CHECK(classical_willmore(g) == doctest::Approx(flat_torus_willmore(kPi / 3)).epsilon(1e-3));
    CHECK(willmore_energy(eh.hd) == doctest::Approx(flat_torus_willmore(kPi / 3)).epsilon(1e-3));
    SpectrumEngine eng(eh.hd);
    CHECK(eng.sigma_min({0, 0}) < 1e-8);
}

TEST_CASE("embeddedness") {
    EmbeddednessReport c = embeddedness_check(homogeneous_torus(kPi / 4, 64, 64));
    CHECK(c.embedded);
    EmbeddednessReport e = embeddedness_check(figure_eight_fixture(48, 48));
    CHECK_FALSE(e.embedded);
    CHECK(std::abs(e.i1 - e.i2) > 2);
}

TEST_CASE("grid JSON round trip and OBJ layout") {
    ImmersionGrid g = homogeneous_torus(kPi / 4, 16, 20);
    ImmersionGrid back = grid_from_json(grid_to_json(g));
    REQUIRE(back.values.size() == g.values.size());
    for (std::size_t k = 0; k < g.values.size(); ++k) CHECK(back.values[k] == g.values[k]);
    CHECK(back.lat.gamma2 == g.lat.gamma2);
    std::istringstream obj(grid_to_obj(g, 3));
    std::string line;
    int v = 0, f = 0;
    while (std::getline(obj, line)) {
        if (line.rfind("v ", 0) == 0) ++v;
        if (line.rfind("f ", 0) == 0) ++f;
    }
    CHECK(v == 16 * 20);
    CHECK(f == 2 * 16 * 20);
    CHECK_THROWS(grid_to_obj(g, 4));
}
