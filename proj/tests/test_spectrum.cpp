#include <doctest.h>

#include <algorithm>

#include "qspec/spectrum.hpp"

using namespace qspec;

namespace {

constexpr double kPi = 3.14159265358979323846;
const Lattice kSquare = square_lattice(2 * kPi);

double nearest(cplx z, const std::vector<cplx>& set) {
    double d = 1e300;
    for (cplx w : set) d = std::min(d, std::abs(z - w));
    return d;
}

// square lattice 2π: the character e^{i(mx+ny)} has eta'' = (im - n)/2, so the vacuum b-roots are (n - im)/2
std::vector<cplx> vacuum_b_roots(int N, double cutoff) {
    std::vector<cplx> out;
    for (int m = -N; m <= N; ++m)
        for (int n = -N; n <= N; ++n) {
            cplx b(0.5 * n, -0.5 * m);
            if (std::abs(b) <= cutoff) out.push_back(b);
        }
    return out;
}

}  // namespace

TEST_CASE("vacuum fiber at a = 0.3 is the set of -eta''") {
    HoloData hd = constant_q(kSquare, 0, 6);
    FiberSolveResult f = fiber_roots(hd, 0.3, 1.0);
    std::vector<cplx> expected = vacuum_b_roots(6, 1.0);
    REQUIRE(f.roots.size() == expected.size());
    for (const FiberRoot& r : f.roots) CHECK(nearest(r.b, expected) < 1e-12);
    CHECK(nearest(0, f.values()) < 1e-14);
    CHECK(nearest(cplx(0.5, 0.5), f.values()) < 1e-14);
    CHECK_FALSE(f.a_sheet);
}

TEST_CASE("vacuum a-sheet is reported at a = -eta'") {
    HoloData hd = constant_q(kSquare, 0, 4);
    FiberSolveResult f = fiber_roots(hd, cplx(0.5, 0), 1.0);
    CHECK(f.a_sheet);
}

TEST_CASE("constant q = 0.3 at a = 0.3 has the root b = -0.3") {
    HoloData hd = constant_q(kSquare, 0.3, 6);
    FiberSolveResult f = fiber_roots(hd, 0.3, 1.5);
    CHECK(nearest(-0.3, f.values()) < 1e-12);
    SpectrumEngine eng(hd);
    CHECK(eng.sigma_min({0.3, -0.3}) < 1e-10);
}

TEST_CASE("vacuum sigma_min off the spectrum equals the smallest diagonal entry") {
    HoloData hd = constant_q(kSquare, 0, 4);
    HarmonicForm w{0.3, cplx(0.3, 0.4)};
    OperatorMatrix op = assemble(hd, w);
    double dmin = op.mat.diagonal().cwiseAbs().minCoeff();
    CHECK(SpectrumEngine(hd).sigma_min(w) == doctest::Approx(dmin).epsilon(1e-12));
    CHECK(sigma_min(op) == doctest::Approx(dmin).epsilon(1e-12));
}

TEST_CASE("kernel dimensions: generic vacuum point 1, real representation 2") {
    HoloData hd = constant_q(kSquare, 0, 4);
    SpectrumEngine eng(hd);
    const HarmonicForm eta = dual_basis(kSquare).at(1, 0);
    SpectrumSample s = eng.kernel_at({0.3, -eta.b});
    CHECK(s.kernel_dim == 1);
    // a single Fourier mode: the u-coefficient of eta
    const int M = hd.window().count();
    const int k = hd.window().index(1, 0);
    CHECK(std::abs(s.kernel[0](k)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.kernel[0].segment(M, M).norm() < 1e-12);
    CHECK(eng.kernel_at({0, 0}).kernel_dim == 2);
    CHECK_THROWS_WITH(eng.kernel_at({0.3, 0.2}), doctest::Contains("not a spectrum point"));
}

TEST_CASE("spectrum is periodic under the dual lattice deep inside the window") {
    HoloData hd = constant_q(kSquare, 0.3, 8);
    hd.qcoeffs[{1, 0}] = 0.05;
    SpectrumEngine eng(hd);
    HarmonicForm w{cplx(0.2, 0.1), cplx(-0.4, 0.3)};
    HarmonicForm eta = dual_basis(kSquare).at(1, -1);
    CHECK(std::abs(eng.sigma_min(w + eta) - eng.sigma_min(w)) < 1e-6);
}

TEST_CASE("alpha translates the spectrum by (alpha, conj alpha)") {
    const cplx alpha(0.13, -0.07);
    HoloData h0 = constant_q(kSquare, 0.3, 6), ha = constant_q(kSquare, 0.3, 6, alpha);
    const cplx a(0.25, 0.15);
    std::vector<cplx> r0 = fiber_roots(h0, a, 1.2).values();
    std::vector<cplx> ra = fiber_roots(ha, a + alpha, 1.5).values();
    int compared = 0;
    for (cplx b : r0) {
        if (std::abs(b) > 1.0) continue;
        CHECK(nearest(b + std::conj(alpha), ra) < 1e-10);
        ++compared;
    }
    CHECK(compared > 0);
}

TEST_CASE("handle at the trivial representation") {
    Rect win{-0.25, 0.25, -0.25, 0.25};
    BranchSet vac = scan(constant_q(kSquare, 0, 8), win, 11, 1.5);
    BranchSet hq = scan(constant_q(kSquare, 0.3, 8), win, 11, 1.5);
    auto at_origin = [](const BranchSet& bs, CollisionKind k) {
        for (const CollisionMarker& c : bs.collisions)
            if (c.kind == k && std::abs(c.a) < 1e-9 && std::abs(c.b) < 1e-9) return &c;
        return static_cast<const CollisionMarker*>(nullptr);
    };
    CHECK(at_origin(vac, CollisionKind::DoublePoint) != nullptr);
    const CollisionMarker* h = at_origin(hq, CollisionKind::Handle);
    REQUIRE(h != nullptr);
    CHECK(h->local_branches == 2);
    // closed form: two branches b = -|c|^2 / a meet no common zero; gap 2|c|
    CHECK(h->gap == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(at_origin(hq, CollisionKind::DoublePoint) == nullptr);
}

TEST_CASE("scan samples are closed under rho") {
    SpectrumEngine eng(constant_q(kSquare, 0.3, 6));
    BranchSet bs = eng.scan({-0.6, 0.6, -0.6, 0.6}, 5, 1.5);
    RhoClosureReport r = rho_closure(eng, bs.samples, 1.5);
    CHECK(r.checked > 0);
    CHECK(r.max_defect < 1e-8);
    for (const BranchPoint& p : bs.samples) {
        CHECK(p.branch >= 0);
        CHECK(p.sigma < 1e-7 * eng.operator_scale(p.a) + 1e-7);
    }
}

TEST_CASE("scan output is deterministic across thread counts") {
    HoloData hd = constant_q(kSquare, 0.3, 6);
    SpectrumOptions one, four;
    four.threads = 4;
    BranchSet a = scan(hd, {-0.5, 0.5, -0.5, 0.5}, 6, 1.5, one), b = scan(hd, {-0.5, 0.5, -0.5, 0.5}, 6, 1.5, four);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].b == b.samples[i].b);
        CHECK(a.samples[i].branch == b.samples[i].branch);
    }
    CHECK(a.collisions.size() == b.collisions.size());
}

TEST_CASE("distance to the vacuum decays away from the origin") {
    std::vector<double> radii = {0.5, 1.0, 3.0, 4.0};
    auto self = vacuum_compare(constant_q(kSquare, 0, 6), radii, 6, 1.5);
    for (const auto& row : self) CHECK(row.distance == 0.0);
    auto rows = vacuum_compare(constant_q(kSquare, 0.3, 6), radii, 6, 1.5);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].distance < rows[0].distance);
    HoloData pert = constant_q(kSquare, 0.3, 6);
    pert.qcoeffs[{1, 0}] = 0.03;
    auto prow = vacuum_compare(pert, radii, 6, 1.5);
    for (std::size_t k = 0; k < rows.size(); ++k) CHECK(prow[k].distance <= 2 * rows[k].distance + 1e-12);
}

TEST_CASE("fiber roots converge under truncation refinement") {
    HoloData hd = constant_q(kSquare, 0.3, 8);
    hd.qcoeffs[{1, 0}] = 0.05;
    TruncationReport r = truncation_convergence(hd, {{0.3, 0.1}, {-0.4, 0.2}}, 1.5);
    CHECK(r.compared > 0);
    CHECK(r.max_defect < 1e-8);
}
