#include <doctest.h>

#include <random>

#include "qspec/grid.hpp"
#include "qspec/holo.hpp"

using namespace qspec;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Applies (dbar + b - conj alpha) u - conj(q) v and (d + a - alpha) v + q u on a grid and reads off Fourier modes.
CVec grid_apply(const HoloData& hd, const HarmonicForm& omega, const CVec& x, int n) {
    GridSpec g{hd.lat, n, n};
    ModeWindow win = hd.window();
    const int M = win.count();
    CField u = fourier_synthesize(g, win, x.head(M)), v = fourier_synthesize(g, win, x.tail(M));
    CDeriv du = spectral_deriv(g, u), dv = spectral_deriv(g, v);
    const cplx I(0, 1);
    CField ru(g.size()), rv(g.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::size_t k = g.at(i, j);
            cplx q = hd.q_at(double(i) / n, double(j) / n);
            ru[k] = 0.5 * (du.dx[k] + I * du.dy[k]) + (omega.b - std::conj(hd.alpha)) * u[k] - std::conj(q) * v[k];
            rv[k] = 0.5 * (dv.dx[k] - I * dv.dy[k]) + (omega.a - hd.alpha) * v[k] + q * u[k];
        }
    auto cu = fourier_coeffs(g, ru, hd.N), cv = fourier_coeffs(g, rv, hd.N);
    CVec out(2 * M);
    for (int k = 0; k < M; ++k) {
        out[k] = cu[win.mode(k)];
        out[M + k] = cv[win.mode(k)];
    }
    return out;
}

}  // namespace

TEST_CASE("assembled operator matches the grid operator on every window mode") {
    HoloData hd;
    hd.lat = {cplx(2 * kPi, 0), 2 * kPi * cplx(0.2, 1.1)};
    hd.N = 3;
    hd.alpha = cplx(0.1, -0.05);
    hd.qcoeffs[{0, 0}] = cplx(0.3, 0.1);
    hd.qcoeffs[{1, -1}] = cplx(-0.07, 0.02);
    hd.qcoeffs[{0, 2}] = cplx(0.01, 0.04);
    HarmonicForm omega{cplx(0.25, -0.4), cplx(-0.1, 0.3)};
    OperatorMatrix op = assemble(hd, omega);
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd;
    CVec x(2 * op.M());
    for (int k = 0; k < x.size(); ++k) x[k] = cplx(nd(gen), nd(gen));
    CVec expected = grid_apply(hd, omega, x, 32);
    CHECK((op.mat * x - expected).norm() / expected.norm() < 1e-12);
}

TEST_CASE("vacuum operator is diagonal with entries eta'' + b and eta' + a") {
    HoloData hd = constant_q(square_lattice(2 * kPi), 0, 2);
    HarmonicForm omega{cplx(0.3, 0.2), cplx(-0.1, 0.05)};
    OperatorMatrix op = assemble(hd, omega);
    DualBasis db = dual_basis(hd.lat);
    const int M = op.M();
    for (int k = 0; k < M; ++k) {
        auto [m, n] = op.win.mode(k);
        HarmonicForm eta = db.at(m, n);
        CHECK(std::abs(op.mat(k, k) - (eta.b + omega.b)) < 1e-14);
        CHECK(std::abs(op.mat(M + k, M + k) - (eta.a + omega.a)) < 1e-14);
    }
    CHECK((op.mat - CMat(op.mat.diagonal().asDiagonal())).norm() == 0.0);
}

TEST_CASE("constant q couples u_eta with v_eta only") {
    HoloData hd = constant_q(square_lattice(2 * kPi), 0.3, 2);
    BlockStructure bs = block_structure(hd);
    CHECK(bs.u_modes.size() == std::size_t(hd.window().count()));
    for (std::size_t b = 0; b < bs.u_modes.size(); ++b) {
        REQUIRE(bs.u_modes[b].size() == 1);
        REQUIRE(bs.v_modes[b].size() == 1);
        CHECK(bs.u_modes[b][0] == bs.v_modes[b][0]);
    }
    // 2x2 block determinant (eta'' + b)(eta' + a) + |c|^2 vanishes on the closed-form curve
    cplx a(0.2, 0.1);
    cplx b = -0.09 / a;
    OperatorMatrix op = assemble(hd, {a, b});
    CHECK(sigma_min(op) < 1e-12);
}

TEST_CASE("bundle Willmore energy is 4 area sum |q_k|^2") {
    HoloData hd = constant_q(square_lattice(2 * kPi), cplx(0.3, 0.4), 4);
    CHECK(willmore_energy(hd) == doctest::Approx(4 * 4 * kPi * kPi * 0.25));
    hd.qcoeffs[{1, 2}] = 0.1;
    CHECK(willmore_energy(hd) == doctest::Approx(16 * kPi * kPi * 0.26));
    CHECK(willmore_energy(constant_q(square_lattice(2 * kPi), 0, 4)) == 0.0);
}

TEST_CASE("q_at sums the Fourier series") {
    HoloData hd = constant_q(square_lattice(2 * kPi), 0.5, 3);
    hd.qcoeffs[{1, 0}] = cplx(0, 0.25);
    double s = 0.125, t = 0.4;
    cplx expected = 0.5 + cplx(0, 0.25) * std::exp(cplx(0, 2 * kPi * s));
    CHECK(std::abs(hd.q_at(s, t) - expected) < 1e-14);
}

TEST_CASE("invalid holomorphic data is rejected") {
    HoloData hd = constant_q(square_lattice(2 * kPi), 0.3, 0);
    CHECK_THROWS(hd.validate());
    HoloData far = constant_q(square_lattice(2 * kPi), 0.3, 2);
    far.qcoeffs[{5, 0}] = 0.1;
    CHECK_THROWS(far.validate());
}
