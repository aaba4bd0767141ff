#include "qspec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qspec {

namespace {

constexpr double kPi = 3.14159265358979323846;

HarmonicForm half_shift(const HomogeneousModel& m) {
    if (!m.spin_shift) return {};
    return dual_basis(m.lat).at(m.spin_shift->first, m.spin_shift->second) * 0.5;
}

void sort_roots(std::vector<cplx>& r) {
    std::sort(r.begin(), r.end(), [](cplx x, cplx y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); });
}

}  // namespace

HoloData HomogeneousModel::holo(int N) const {
    HoloData hd;
    hd.lat = lat;
    hd.N = N;
    HarmonicForm s = half_shift(*this);
    hd.alpha = alpha + s.a;
    ModeIndex k = spin_shift.value_or(ModeIndex{0, 0});
    if (c != cplx(0)) hd.qcoeffs[k] = c;
    return hd;
}

OracleFiber vacuum_fiber(const HomogeneousModel& m, cplx a, double cutoff, int index_window) {
    HomogeneousModel v = m;
    v.c = 0;
    return homogeneous_fiber(v, a, cutoff, index_window);
}

OracleFiber homogeneous_fiber(const HomogeneousModel& m, cplx a, double cutoff, int index_window) {
    const DualBasis db = dual_basis(m.lat);
    const HarmonicForm s = half_shift(m);
    // (a, b) in the shifted spectrum iff (a - s', b - s'') solves (a + eta' - alpha)(b + eta'' - conj alpha) + |c|^2 = 0
    const cplx a0 = a - s.a;
    const double c2 = std::norm(m.c);
    const double scale = std::max(1.0, std::abs(a0));
    OracleFiber out;
    for (int i = -index_window; i <= index_window; ++i)
        for (int j = -index_window; j <= index_window; ++j) {
            HarmonicForm eta = db.at(i, j);
            cplx p = a0 + eta.a - m.alpha;
            cplx b;
            if (c2 == 0) {
                if (std::abs(p) <= 1e-12 * scale) out.a_sheet = true;
                b = std::conj(m.alpha) - eta.b;
            } else {
                if (std::abs(p) <= 1e-14 * scale) continue;
                b = std::conj(m.alpha) - eta.b - c2 / p;
            }
            b += s.b;
            if (std::abs(b) <= cutoff) out.roots.push_back(b);
        }
    sort_roots(out.roots);
    return out;
}

std::pair<cplx, cplx> homogeneous_kernel(const HomogeneousModel& m, const HarmonicForm& omega, ModeIndex eta_idx,
                                         double tol) {
    const HarmonicForm s = half_shift(m);
    const HarmonicForm eta = dual_basis(m.lat).at(eta_idx.first, eta_idx.second);
    const cplx pb = eta.b + omega.b - s.b - std::conj(m.alpha);
    const cplx pa = eta.a + omega.a - s.a - m.alpha;
    const double scale = std::max({1.0, std::abs(pa) * std::abs(pb), std::norm(m.c)});
    if (std::abs(pa * pb + std::norm(m.c)) > tol * scale) throw std::invalid_argument("omega not on the eta branch");
    // block [[pb, -conj c], [c, pa]] has null vectors (conj c, pb) and (pa, -c)
    cplx u1 = std::conj(m.c), v1 = pb, u2 = pa, v2 = -m.c;
    cplx u, v;
    if (std::norm(u1) + std::norm(v1) >= std::norm(u2) + std::norm(v2)) u = u1, v = v1;
    else u = u2, v = v2;
    if (std::norm(u) + std::norm(v) == 0) u = 1, v = 0;
    double n = std::sqrt(std::norm(u) + std::norm(v));
    cplx lead = std::abs(u) > 1e-14 * n ? u : v;
    cplx ph = std::abs(lead) / lead / n;
    return {u * ph, v * ph};
}

double pluecker_bound(int n, int g, int degL, int ordH) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (ordH < 0) throw std::invalid_argument("ord H must be >= 0");
    long long k = (long long)n * ((long long)(n - 1) * (1 - g) - degL) + ordH;
    return 4.0 * kPi * double(k);
}

int vanishing_order(const MonodromySection& s, int i0, int j0, double zero_tol) {
    const GridSpec& g = s.grid;
    const std::size_t n = g.size();
    std::vector<double> nrm(n);
    double mx = 0;
    for (std::size_t k = 0; k < n; ++k) {
        nrm[k] = std::hypot(std::abs(s.u[k]), std::abs(s.v[k]));
        mx = std::max(mx, nrm[k]);
    }
    // locate the minimum in a small neighbourhood of (i0, j0)
    int bi = i0, bj = j0;
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
            if (nrm[g.at(i0 + di, j0 + dj)] < nrm[g.at(bi, bj)]) bi = i0 + di, bj = j0 + dj;
    if (!(nrm[g.at(bi, bj)] < zero_tol * mx)) throw std::invalid_argument("no zero near the given point");
    const cplx z0 = g.z(bi, bj);
    const double h = std::min(std::abs(g.lat.gamma1) / g.n0, std::abs(g.lat.gamma2) / g.n1);
    const int R = 6;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int di = -R; di <= R; ++di)
        for (int dj = -R; dj <= R; ++dj) {
            double d = std::abs(g.z(bi + di, bj + dj) - z0);
            if (d < 1.5 * h || d > R * h) continue;
            double val = nrm[g.at(bi + di, bj + dj)];
            if (!(val > zero_tol * mx)) throw std::invalid_argument("zero not isolated");
            double x = std::log(d), y = std::log(val);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
            ++cnt;
        }
    if (cnt < 3) throw std::invalid_argument("zero not isolated");
    double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return std::max(0, int(std::lround(slope)));
}

}  // namespace qspec
