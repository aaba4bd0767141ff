#pragma once

#include <complex>
#include <utility>

namespace qspec {

using cplx = std::complex<double>;

struct Lattice {
    cplx gamma1{2 * 3.14159265358979323846, 0};
    cplx gamma2{0, 2 * 3.14159265358979323846};

    double area() const { return std::abs((std::conj(gamma1) * gamma2).imag()); }
    // z = s gamma1 + t gamma2
    cplx point(double s, double t) const { return s * gamma1 + t * gamma2; }
    void validate() const;
};

Lattice square_lattice(double side);

// omega = a dz + b dzbar
struct HarmonicForm {
    cplx a{}, b{};

    cplx period(cplx gamma) const { return a * gamma + b * std::conj(gamma); }
    // omega evaluated on the coordinate fields d/dx and d/dy
    cplx on_x() const { return a + b; }
    cplx on_y() const { return cplx(0, 1) * (a - b); }
    HarmonicForm operator+(const HarmonicForm& o) const { return {a + o.a, b + o.b}; }
    HarmonicForm operator-(const HarmonicForm& o) const { return {a - o.a, b - o.b}; }
    HarmonicForm operator*(double s) const { return {a * s, b * s}; }
    HarmonicForm operator-() const { return {-a, -b}; }
};

struct MonodromyRep {
    cplx h1{1, 0}, h2{1, 0};
};

struct DualLatticePoint {
    HarmonicForm eta;
    int m = 0, n = 0;
};

struct DualBasis {
    HarmonicForm eta1, eta2;

    HarmonicForm at(int m, int n) const { return eta1 * double(m) + eta2 * double(n); }
    DualLatticePoint point(int m, int n) const { return {at(m, n), m, n}; }
};

DualBasis dual_basis(const Lattice& lat);
MonodromyRep monodromy_of(const Lattice& lat, const HarmonicForm& omega);
HarmonicForm reduce_mod_dual(const Lattice& lat, const HarmonicForm& omega);
HarmonicForm rho_conjugate(const HarmonicForm& omega);

// integer coordinates of omega in the dual basis (real parts of the periods / 2πi)
std::pair<double, double> dual_coordinates(const Lattice& lat, const HarmonicForm& omega);

}  // namespace qspec
