#pragma once

#include <map>
#include <utility>
#include <vector>

#include "qspec/holo.hpp"
#include "qspec/quaternion.hpp"

namespace qspec {

// Periodic n0 x n1 sampling of the fundamental domain, index i*n1 + j at z = (i/n0) gamma1 + (j/n1) gamma2.
struct GridSpec {
    Lattice lat;
    int n0 = 0, n1 = 0;

    std::size_t size() const { return std::size_t(n0) * n1; }
    std::size_t at(int i, int j) const { return std::size_t(((i % n0) + n0) % n0) * n1 + ((j % n1) + n1) % n1; }
    cplx z(int i, int j) const { return lat.point(double(i) / n0, double(j) / n1); }
    // physical mesh width along each generator
    double h() const { return std::max(std::abs(lat.gamma1) / n0, std::abs(lat.gamma2) / n1); }
};

using QField = std::vector<Quat>;
using CField = std::vector<cplx>;

struct QDeriv { QField dx, dy; };
struct CDeriv { CField dx, dy; };

// Fourier spectral d/dx, d/dy (Nyquist modes dropped).
QDeriv spectral_deriv(const GridSpec& g, const QField& f);
CDeriv spectral_deriv(const GridSpec& g, const CField& f);
// second-order central differences chained to d/dx, d/dy
QDeriv central_deriv(const GridSpec& g, const QField& f);

// Cell-centre values (mean of the four corners) and derivatives (averaged edge differences).
QField cell_average(const GridSpec& g, const QField& f);
QDeriv cell_deriv(const GridSpec& g, const QField& f);

// Coefficients c_{m,n} of f = sum c exp(2πi(m s + n t)) for |m|,|n| <= N, entries below tol dropped.
std::map<ModeIndex, cplx> fourier_coeffs(const GridSpec& g, const CField& f, int N, double tol = 0);
CField fourier_synthesize(const GridSpec& g, const ModeWindow& win, const CVec& coeffs);
// zero all modes with |m| > K or |n| > K
QField lowpass(const GridSpec& g, const QField& f, int K);

QField qmul(const QField& a, const QField& b);
// a^-1 b
QField qdivl(const QField& a, const QField& b);
double max_norm(const QField& a);

}  // namespace qspec
