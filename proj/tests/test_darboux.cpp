#include <doctest.h>

#include <algorithm>

#include "qspec/darboux.hpp"

using namespace qspec;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Clifford {
    ImmersionGrid g;
    ExtractedHolo eh;
    SpectrumEngine eng;

    explicit Clifford(int n) : g(homogeneous_torus(kPi / 4, n, n)), eh(extract_holo(g)), eng(eh.hd) {}

    SpectrumSample sample(cplx a) const {
        FiberSolveResult f = eng.fiber_roots(a, 1.5);
        auto it = std::min_element(f.roots.begin(), f.roots.end(),
                                   [](const FiberRoot& x, const FiberRoot& y) { return std::abs(x.b) < std::abs(y.b); });
        return eng.kernel_at({a, it->b});
    }
    ProlongedSection prolonged(const SpectrumSample& s, int idx = 0) const {
        return prolong(g, eh, section_from_kernel(eh, s, idx));
    }
};

const Clifford& clifford64() {
    static const Clifford c(64);
    return c;
}

}  // namespace

TEST_CASE("trivial representation gives constant transforms") {
    const Clifford& c = clifford64();
    SpectrumSample s = c.eng.kernel_at({0, 0});
    REQUIRE(s.kernel_dim == 4);
    for (int k = 0; k < s.kernel_dim; ++k) {
        ProlongedSection ps = c.prolonged(s, k);
        DarbouxResult r = darboux_transform(c.g, ps);
        CHECK(r.cls == DarbouxClass::Constant);
        CHECK_FALSE(r.fsharp.has_value());
        // the prolongation of pi(v) is v itself
        double spread = 0;
        for (std::size_t p = 0; p < ps.X.size(); ++p)
            spread = std::max(spread, hp1_distance(HPoint(ps.X[p], ps.Y[p]), HPoint(ps.X[0], ps.Y[0])));
        CHECK(spread < 1e-6);
    }
}

TEST_CASE("regular transform of the Clifford torus") {
    const Clifford& c = clifford64();
    ProlongedSection ps = c.prolonged(c.sample({0.3, 0.1}));
    CHECK(ps.residual < 1e-4);
    DarbouxResult r = darboux_transform(c.g, ps);
    REQUIRE(r.cls == DarbouxClass::Regular);
    CHECK(r.min_distance > 0.05);
    CHECK(r.conformality_residual < 1e-3);
    const double wf = classical_willmore(c.g), ws = classical_willmore(*r.fsharp);
    CHECK(std::abs(ws - wf) / wf < 0.02);
    CHECK(embeddedness_check(*r.fsharp).embedded);

    EnvelopeReport e = verify_envelope(c.g, c.eh, r);
    CHECK(e.s2 < 1e-10);
    CHECK(e.invariance < 1e-2);
    CHECK(e.touch_f < 1e-2);
    CHECK(e.right_f < 1e-2);
    CHECK(e.left_sharp < 1e-2);
    CHECK(e.right_sharp > 1e2 * e.left_sharp);
}

TEST_CASE("kernel scaling does not change the transform") {
    const Clifford& c = clifford64();
    SpectrumSample s = c.sample({-0.2, 0.4});
    const CVec scaled = s.kernel[0] * cplx(-1.7, 2.3);
    ProlongedSection p1 = c.prolonged(s);
    ProlongedSection p2 = prolong(c.g, c.eh, section_from_kernel(c.eh, s.omega, scaled));
    CHECK(max_line_distance(c.g.chart, p1.X, p1.Y, p2.X, p2.Y) < 1e-9);
}

TEST_CASE("transform convergence under grid doubling") {
    const Clifford& c = clifford64();
    Clifford fine(128);
    ProlongedSection p0 = c.prolonged(c.sample({0.3, 0.1})), p1 = fine.prolonged(fine.sample({0.3, 0.1}));
    double q = p0.residual / p1.residual;
    CHECK(q > 3);
    CHECK(q < 5);
    DarbouxResult r0 = darboux_transform(c.g, p0), r1 = darboux_transform(fine.g, p1);
    double qc = r0.conformality_residual / r1.conformality_residual;
    CHECK(qc > 3);
    CHECK(qc < 5);
}

TEST_CASE("rho-paired samples give the same transform") {
    const Clifford& c = clifford64();
    SpectrumSample s = c.sample({0.3, 0.1});
    SpectrumSample r = c.eng.kernel_at(rho_conjugate(s.omega));
    FamilyReport fam = family_map(c.g, c.eh, {s, r});
    REQUIRE(fam.rho_pairs.size() == 1);
    CHECK(std::get<2>(fam.rho_pairs[0]) < 1e-6);
    for (const FamilyMember& m : fam.members) {
        CHECK(m.ok);
        CHECK(std::abs(m.willmore - 2 * kPi * kPi) / (2 * kPi * kPi) < 0.02);
    }
}

TEST_CASE("Bianchi composition and its preconditions") {
    const Clifford& c = clifford64();
    ProlongedSection p1 = c.prolonged(c.sample({0.3, 0.1})), p2 = c.prolonged(c.sample({-0.2, 0.4}));
    BianchiReport b = bianchi_compose(c.g, p1, p2);
    CHECK(b.fhat.cls == DarbouxClass::Regular);
    CHECK(b.gamma_chi < 1e-8);
    CHECK(b.residual_sharp < 1e-2);
    CHECK(b.residual_flat < 1e-2);
    CHECK_THROWS_WITH(bianchi_compose(c.g, p1, p1), doctest::Contains("coincide"));
}

TEST_CASE("isospectrality of a transform") {
    const Clifford& c = clifford64();
    DarbouxResult r = darboux_transform(c.g, c.prolonged(c.sample({0.3, 0.1})));
    IsospectralReport iso = isospectral_check(c.eh, r, {{0.3, 0.1}, {-0.7, -0.6}}, 1.5);
    CHECK(iso.compared > 0);
    CHECK(iso.max_distance < 1e-3);
}
