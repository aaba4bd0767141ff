#include <doctest.h>

#include "qspec/oracle.hpp"

using namespace qspec;

namespace {

constexpr double kPi = 3.14159265358979323846;
const Lattice kSquare = square_lattice(2 * kPi);

double nearest(cplx z, const std::vector<cplx>& set) {
    double d = 1e300;
    for (cplx w : set) d = std::min(d, std::abs(z - w));
    return d;
}

MonodromySection fixture(int order, int i0, int j0, bool with_zero = true) {
    GridSpec gs{kSquare, 64, 64};
    const cplx z0 = gs.z(i0, j0);
    const HarmonicForm eta = dual_basis(kSquare).at(1, 0);
    MonodromySection s;
    s.grid = gs;
    s.u.resize(gs.size());
    s.v.assign(gs.size(), 0);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            cplx z = gs.z(i, j);
            cplx chi = std::exp(eta.a * z + eta.b * std::conj(z));
            s.u[gs.at(i, j)] = with_zero ? chi * std::pow(z - z0, order) : chi;
        }
    return s;
}

}  // namespace

TEST_CASE("Pluecker bound on the tabled cases") {
    CHECK(pluecker_bound(2, 1, 0, 2) == 8 * kPi);
    CHECK(pluecker_bound(1, 1, 0, 0) == 0.0);
    CHECK(pluecker_bound(1, 1, 0, 2) == 8 * kPi);
    // genus 0, degree 1 line bundle, n = 2: 4π(2(1 - 1) + 0) = 0
    CHECK(pluecker_bound(2, 0, 1, 0) == 0.0);
}

TEST_CASE("vanishing order of constructed zeros") {
    CHECK(vanishing_order(fixture(1, 20, 30), 20, 30) == 1);
    CHECK(vanishing_order(fixture(2, 41, 12), 41, 12) == 2);
    CHECK_THROWS_WITH(vanishing_order(fixture(1, 20, 30, false), 20, 30), doctest::Contains("no zero"));
}

TEST_CASE("vacuum oracle fiber") {
    HomogeneousModel m{kSquare, 0, 0, std::nullopt};
    OracleFiber f = vacuum_fiber(m, 0.3, 1.0, 4);
    CHECK(f.roots.size() == 13);
    for (cplx b : {cplx(0), cplx(0.5, 0), cplx(-0.5, 0), cplx(0, 0.5), cplx(0, -0.5), cplx(0.5, 0.5), cplx(-0.5, 0.5)})
        CHECK(nearest(b, f.roots) < 1e-15);
    CHECK_FALSE(f.a_sheet);
    CHECK(vacuum_fiber(m, cplx(0, 0.5), 1.0, 4).a_sheet);
}

TEST_CASE("homogeneous oracle fiber") {
    HomogeneousModel m{kSquare, 0.3, 0, std::nullopt};
    OracleFiber f = homogeneous_fiber(m, 0.3, 1.5, 6);
    CHECK(nearest(-0.3, f.roots) < 1e-15);
    // c -> 0 recovers the vacuum
    HomogeneousModel small{kSquare, 1e-7, 0, std::nullopt}, vac{kSquare, 0, 0, std::nullopt};
    const cplx a(0.27, -0.11);
    OracleFiber fs = homogeneous_fiber(small, a, 1.0, 4), fv = vacuum_fiber(vac, a, 1.0, 4);
    REQUIRE(fs.roots.size() == fv.roots.size());
    for (cplx b : fv.roots) CHECK(nearest(b, fs.roots) < 1e-12);
}

TEST_CASE("engine agrees with the spin-shifted oracle") {
    HomogeneousModel m{{cplx(2 * kPi, 0), 2 * kPi * cplx(0.25, 1.05)}, cplx(0.2, -0.15), 0, ModeIndex{1, 1}};
    HoloData hd = m.holo(8);
    const cplx a(0.35, -0.4);
    FiberSolveResult f = fiber_roots(hd, a, 1.5);
    OracleFiber o = homogeneous_fiber(m, a, 1.5, 10);
    int compared = 0;
    for (const FiberRoot& r : f.roots) {
        if (r.edge || std::abs(r.b) > 1.2) continue;
        CHECK(nearest(r.b, o.roots) < 1e-8);
        ++compared;
    }
    CHECK(compared > 4);
}

TEST_CASE("homogeneous kernel is the 2x2 null vector and matches the engine") {
    HomogeneousModel vac{kSquare, 0, 0, std::nullopt};
    auto [u0, v0] = homogeneous_kernel(vac, {0.3, 0}, {0, 0});
    CHECK(std::abs(std::abs(u0) - 1) + std::abs(v0) < 1e-14);

    HomogeneousModel m{kSquare, 0.3, 0, std::nullopt};
    const HarmonicForm w{cplx(0.3, 0), cplx(-0.3, 0)};
    auto [u, v] = homogeneous_kernel(m, w, {0, 0});
    // block [[b, -conj c], [c, a]]
    CHECK(std::abs(w.b * u - std::conj(m.c) * v) < 1e-14);
    CHECK(std::abs(m.c * u + w.a * v) < 1e-14);
    CHECK(std::abs(std::norm(u) + std::norm(v) - 1) < 1e-14);

    HoloData hd = m.holo(4);
    SpectrumSample s = kernel_at(hd, w);
    REQUIRE(s.kernel_dim == 1);
    const int M = hd.window().count(), k = hd.window().index(0, 0);
    cplx overlap = std::conj(u) * s.kernel[0](k) + std::conj(v) * s.kernel[0](M + k);
    CHECK(std::abs(std::abs(overlap) - 1) < 1e-8);
    CHECK_THROWS(homogeneous_kernel(m, {0.3, 0.3}, {0, 0}));
}
