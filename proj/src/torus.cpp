#include "qspec/torus.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace qspec {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
const cplx kTwoPiI{0, kTwoPi};
}  // namespace

void Lattice::validate() const {
    if (gamma1 == cplx(0) || !std::isfinite(std::abs(gamma1)) || !std::isfinite(std::abs(gamma2)))
        throw std::invalid_argument("degenerate lattice");
    double im = (gamma2 / gamma1).imag();
    if (!(im > 1e-12 * std::abs(gamma2 / gamma1))) throw std::invalid_argument("degenerate lattice: Im(gamma2/gamma1) <= 0");
}

Lattice square_lattice(double side) { return {cplx(side, 0), cplx(0, side)}; }

DualBasis dual_basis(const Lattice& lat) {
    lat.validate();
    const cplx g1 = lat.gamma1, g2 = lat.gamma2;
    // a gk + b conj(gk) = 2πi δjk
    const cplx det = g1 * std::conj(g2) - std::conj(g1) * g2;
    auto solve = [&](cplx r1, cplx r2) {
        cplx a = (r1 * std::conj(g2) - std::conj(g1) * r2) / det;
        cplx b = (g1 * r2 - g2 * r1) / det;
        return HarmonicForm{a, b};
    };
    return {solve(kTwoPiI, 0), solve(0, kTwoPiI)};
}

MonodromyRep monodromy_of(const Lattice& lat, const HarmonicForm& omega) {
    return {std::exp(omega.period(lat.gamma1)), std::exp(omega.period(lat.gamma2))};
}

std::pair<double, double> dual_coordinates(const Lattice& lat, const HarmonicForm& omega) {
    // omega = x eta1 + y eta2 + (part with real periods); periods of eta_k are 2πi δ
    return {(omega.period(lat.gamma1) / kTwoPiI).real(), (omega.period(lat.gamma2) / kTwoPiI).real()};
}

HarmonicForm reduce_mod_dual(const Lattice& lat, const HarmonicForm& omega) {
    DualBasis db = dual_basis(lat);
    auto [x, y] = dual_coordinates(lat, omega);
    const int m0 = int(std::floor(x)), n0 = int(std::floor(y));
    HarmonicForm best{};
    bool have = false;
    double bestn = 0;
    auto key = [](const HarmonicForm& h) {
        return std::make_tuple(h.a.real(), h.a.imag(), h.b.real(), h.b.imag());
    };
    for (int m = m0 - 2; m <= m0 + 3; ++m)
        for (int n = n0 - 2; n <= n0 + 3; ++n) {
            HarmonicForm r = omega - db.at(m, n);
            double nr = std::norm(r.a) + std::norm(r.b);
            if (!have || nr < bestn * (1 - 1e-12)) {
                best = r; bestn = nr; have = true;
            } else if (nr <= bestn * (1 + 1e-12) && key(r) > key(best)) {
                // ties broken toward the lexicographically largest (Re a first)
                best = r; bestn = std::min(bestn, nr);
            }
        }
    return best;
}

HarmonicForm rho_conjugate(const HarmonicForm& omega) { return {std::conj(omega.b), std::conj(omega.a)}; }

}  // namespace qspec
