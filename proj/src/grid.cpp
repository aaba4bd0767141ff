#include "qspec/grid.hpp"

#include <fftw3.h>

#include <array>
#include <mutex>
#include <stdexcept>

#include "qspec/kernels.hpp"

namespace qspec {

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// In-place 2D DFT on a buffer of n0*n1 complex values; sign = FFTW_FORWARD or FFTW_BACKWARD.
void dft2(int n0, int n1, cplx* data, int sign) {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lk(plan_mutex());
        plan = fftw_plan_dft_2d(n0, n1, p, p, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fftw planning failed");
    fftw_execute(plan);
    std::lock_guard<std::mutex> lk(plan_mutex());
    fftw_destroy_plan(plan);
}

int freq(int i, int n) { return i <= (n - 1) / 2 ? i : i - n; }
bool nyquist(int i, int n) { return n % 2 == 0 && i == n / 2; }

struct Multipliers {
    CField kx, ky;
};

Multipliers multipliers(const GridSpec& g) {
    DualBasis db = dual_basis(g.lat);
    Multipliers mu{CField(g.size()), CField(g.size())};
    for (int i = 0; i < g.n0; ++i)
        for (int j = 0; j < g.n1; ++j) {
            std::size_t k = std::size_t(i) * g.n1 + j;
            if (nyquist(i, g.n0) || nyquist(j, g.n1)) continue;
            HarmonicForm eta = db.at(freq(i, g.n0), freq(j, g.n1));
            mu.kx[k] = eta.on_x();
            mu.ky[k] = eta.on_y();
        }
    return mu;
}

void check(const GridSpec& g, std::size_t n) {
    if (g.n0 < 2 || g.n1 < 2 || n != g.size()) throw std::invalid_argument("grid size mismatch");
}

std::array<double, 4> inverse_generators(const Lattice& lat) {
    double a = lat.gamma1.real(), b = lat.gamma1.imag(), c = lat.gamma2.real(), d = lat.gamma2.imag();
    double det = a * d - b * c;
    return {d / det, -b / det, -c / det, a / det};
}

}  // namespace

CDeriv spectral_deriv(const GridSpec& g, const CField& f) {
    check(g, f.size());
    Multipliers mu = multipliers(g);
    CField hat = f;
    dft2(g.n0, g.n1, hat.data(), FFTW_FORWARD);
    const double inv = 1.0 / double(g.size());
    CDeriv d{CField(g.size()), CField(g.size())};
    for (std::size_t k = 0; k < g.size(); ++k) {
        d.dx[k] = hat[k] * mu.kx[k] * inv;
        d.dy[k] = hat[k] * mu.ky[k] * inv;
    }
    dft2(g.n0, g.n1, d.dx.data(), FFTW_BACKWARD);
    dft2(g.n0, g.n1, d.dy.data(), FFTW_BACKWARD);
    return d;
}

QDeriv spectral_deriv(const GridSpec& g, const QField& f) {
    check(g, f.size());
    // derivative multipliers are odd and imaginary, so two real components share one complex transform
    CField p(g.size()), q(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        p[k] = {f[k].w, f[k].x};
        q[k] = {f[k].y, f[k].z};
    }
    CDeriv dp = spectral_deriv(g, p), dq = spectral_deriv(g, q);
    QDeriv d{QField(g.size()), QField(g.size())};
    for (std::size_t k = 0; k < g.size(); ++k) {
        d.dx[k] = {dp.dx[k].real(), dp.dx[k].imag(), dq.dx[k].real(), dq.dx[k].imag()};
        d.dy[k] = {dp.dy[k].real(), dp.dy[k].imag(), dq.dy[k].real(), dq.dy[k].imag()};
    }
    return d;
}

QDeriv central_deriv(const GridSpec& g, const QField& f) {
    check(g, f.size());
    const int n0 = g.n0, n1 = g.n1;
    QField fs(g.size()), ft(g.size());
    const double ss = 0.5 * n0, st = 0.5 * n1;
    for (int i = 0; i < n0; ++i) {
        const Quat* up = &f[g.at(i + 1, 0)];
        const Quat* dn = &f[g.at(i - 1, 0)];
        kernels::diff_scale(&up->w, &dn->w, ss, &fs[g.at(i, 0)].w, 4 * std::size_t(n1));
        const Quat* row = &f[g.at(i, 0)];
        Quat* out = &ft[g.at(i, 0)];
        if (n1 > 2) kernels::diff_scale(&row[2].w, &row[0].w, st, &out[1].w, 4 * std::size_t(n1 - 2));
        out[0] = (row[1] - row[n1 - 1]) * st;
        out[n1 - 1] = (row[0] - row[n1 - 2]) * st;
    }
    auto ai = inverse_generators(g.lat);
    QDeriv d{QField(g.size()), QField(g.size())};
    for (std::size_t k = 0; k < g.size(); ++k) {
        d.dx[k] = fs[k] * ai[0] + ft[k] * ai[1];
        d.dy[k] = fs[k] * ai[2] + ft[k] * ai[3];
    }
    return d;
}

QField cell_average(const GridSpec& g, const QField& f) {
    check(g, f.size());
    QField out(g.size());
    for (int i = 0; i < g.n0; ++i)
        for (int j = 0; j < g.n1; ++j)
            out[g.at(i, j)] = (f[g.at(i, j)] + f[g.at(i + 1, j)] + f[g.at(i, j + 1)] + f[g.at(i + 1, j + 1)]) * 0.25;
    return out;
}

QDeriv cell_deriv(const GridSpec& g, const QField& f) {
    check(g, f.size());
    auto ai = inverse_generators(g.lat);
    QDeriv d{QField(g.size()), QField(g.size())};
    for (int i = 0; i < g.n0; ++i)
        for (int j = 0; j < g.n1; ++j) {
            const Quat &a = f[g.at(i, j)], &b = f[g.at(i + 1, j)], &c = f[g.at(i, j + 1)], &e = f[g.at(i + 1, j + 1)];
            Quat fs = ((b - a) + (e - c)) * (0.5 * g.n0);
            Quat ft = ((c - a) + (e - b)) * (0.5 * g.n1);
            d.dx[g.at(i, j)] = fs * ai[0] + ft * ai[1];
            d.dy[g.at(i, j)] = fs * ai[2] + ft * ai[3];
        }
    return d;
}

std::map<ModeIndex, cplx> fourier_coeffs(const GridSpec& g, const CField& f, int N, double tol) {
    check(g, f.size());
    if (2 * N + 1 > std::min(g.n0, g.n1)) throw std::invalid_argument("mode window exceeds grid resolution");
    CField hat = f;
    dft2(g.n0, g.n1, hat.data(), FFTW_FORWARD);
    const double inv = 1.0 / double(g.size());
    std::map<ModeIndex, cplx> out;
    for (int m = -N; m <= N; ++m)
        for (int n = -N; n <= N; ++n) {
            cplx c = hat[g.at(m, n)] * inv;
            if (std::abs(c) > tol) out[{m, n}] = c;
        }
    return out;
}

CField fourier_synthesize(const GridSpec& g, const ModeWindow& win, const CVec& coeffs) {
    if (coeffs.size() != win.count()) throw std::invalid_argument("coefficient count mismatch");
    if (win.side() > std::min(g.n0, g.n1)) throw std::invalid_argument("mode window exceeds grid resolution");
    CField buf(g.size());
    for (int k = 0; k < win.count(); ++k) {
        auto [m, n] = win.mode(k);
        buf[g.at(m, n)] += coeffs(k);
    }
    dft2(g.n0, g.n1, buf.data(), FFTW_BACKWARD);
    return buf;
}

QField lowpass(const GridSpec& g, const QField& f, int K) {
    check(g, f.size());
    CField p(g.size()), q(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        p[k] = {f[k].w, f[k].x};
        q[k] = {f[k].y, f[k].z};
    }
    dft2(g.n0, g.n1, p.data(), FFTW_FORWARD);
    dft2(g.n0, g.n1, q.data(), FFTW_FORWARD);
    const double inv = 1.0 / double(g.size());
    for (int i = 0; i < g.n0; ++i)
        for (int j = 0; j < g.n1; ++j) {
            std::size_t k = g.at(i, j);
            // keep the mask symmetric so real fields stay real
            bool keep = std::abs(freq(i, g.n0)) <= K && std::abs(freq(j, g.n1)) <= K && !nyquist(i, g.n0) &&
                        !nyquist(j, g.n1);
            p[k] = keep ? p[k] * inv : 0.0;
            q[k] = keep ? q[k] * inv : 0.0;
        }
    dft2(g.n0, g.n1, p.data(), FFTW_BACKWARD);
    dft2(g.n0, g.n1, q.data(), FFTW_BACKWARD);
    QField out(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) out[k] = {p[k].real(), p[k].imag(), q[k].real(), q[k].imag()};
    return out;
}

QField qmul(const QField& a, const QField& b) {
    if (a.size() != b.size()) throw std::invalid_argument("field size mismatch");
    QField out(a.size());
    kernels::qmul(a.data(), b.data(), out.data(), a.size());
    return out;
}

QField qdivl(const QField& a, const QField& b) {
    if (a.size() != b.size()) throw std::invalid_argument("field size mismatch");
    QField out(a.size());
    kernels::qdivl(a.data(), b.data(), out.data(), a.size());
    return out;
}

double max_norm(const QField& a) { return kernels::max_norm(a.data(), a.size()); }

}  // namespace qspec
