#include "qspec/holo.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qspec {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

cplx HoloData::q_at(double s, double t) const {
    cplx r = 0;
    for (const auto& [mn, c] : qcoeffs) r += c * std::exp(cplx(0, kTwoPi * (mn.first * s + mn.second * t)));
    return r;
}

void HoloData::validate() const {
    lat.validate();
    if (N < 1) throw std::invalid_argument("truncation N must be >= 1");
    for (const auto& [mn, c] : qcoeffs)
        if (!window().contains(mn.first, mn.second)) throw std::invalid_argument("potential under-resolved");
}

HoloData constant_q(const Lattice& lat, cplx c, int N, cplx alpha) {
    HoloData hd;
    hd.lat = lat;
    hd.alpha = alpha;
    hd.N = N;
    if (c != cplx(0)) hd.qcoeffs[{0, 0}] = c;
    return hd;
}

OperatorMatrix assemble(const HoloData& hd, const HarmonicForm& omega) {
    hd.validate();
    const DualBasis db = dual_basis(hd.lat);
    OperatorMatrix op;
    op.win = hd.window();
    const int M = op.M();
    op.mat = CMat::Zero(2 * M, 2 * M);
    for (int k = 0; k < M; ++k) {
        auto [m, n] = op.win.mode(k);
        HarmonicForm eta = db.at(m, n);
        op.mat(k, k) = eta.b + omega.b - std::conj(hd.alpha);
        op.mat(M + k, M + k) = eta.a + omega.a - hd.alpha;
    }
    for (const auto& [kappa, c] : hd.qcoeffs) {
        for (int k = 0; k < M; ++k) {
            auto [m, n] = op.win.mode(k);
            // u-row eta couples to v_{eta+kappa} with -conj(c)
            if (op.win.contains(m + kappa.first, n + kappa.second))
                op.mat(k, M + op.win.index(m + kappa.first, n + kappa.second)) -= std::conj(c);
            // v-row eta couples to u_{eta-kappa} with c
            if (op.win.contains(m - kappa.first, n - kappa.second))
                op.mat(M + k, op.win.index(m - kappa.first, n - kappa.second)) += c;
        }
    }
    return op;
}

double sigma_min(const OperatorMatrix& m) {
    RVec s = linalg::singular_values(m.mat);
    return s.size() ? s(0) : 0.0;
}

double willmore_energy(const HoloData& hd) {
    double s = 0;
    for (const auto& [mn, c] : hd.qcoeffs) s += std::norm(c);
    return 4.0 * hd.lat.area() * s;
}

BlockStructure block_structure(const HoloData& hd) {
    const ModeWindow win = hd.window();
    const int M = win.count();
    std::vector<int> parent(2 * M);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](int a, int b) {
        a = find(a); b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };
    for (const auto& [kappa, c] : hd.qcoeffs) {
        if (c == cplx(0)) continue;
        for (int k = 0; k < M; ++k) {
            auto [m, n] = win.mode(k);
            if (win.contains(m + kappa.first, n + kappa.second))
                unite(k, M + win.index(m + kappa.first, n + kappa.second));
        }
    }
    BlockStructure bs;
    bs.block_of_u.assign(M, -1);
    bs.block_of_v.assign(M, -1);
    std::vector<int> id(2 * M, -1);
    for (int x = 0; x < 2 * M; ++x) {
        int r = find(x);
        if (id[r] < 0) {
            id[r] = int(bs.u_modes.size());
            bs.u_modes.emplace_back();
            bs.v_modes.emplace_back();
        }
        int b = id[r];
        if (x < M) { bs.u_modes[b].push_back(x); bs.block_of_u[x] = b; }
        else { bs.v_modes[b].push_back(x - M); bs.block_of_v[x - M] = b; }
    }
    return bs;
}

}  // namespace qspec
