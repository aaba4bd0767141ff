#pragma once

#include <map>
#include <utility>
#include <vector>

#include "qspec/linalg.hpp"
#include "qspec/torus.hpp"

namespace qspec {

using ModeIndex = std::pair<int, int>;

// Fourier window |m|, |n| <= N in row-major order over (m, n).
struct ModeWindow {
    int N = 1;

    int side() const { return 2 * N + 1; }
    int count() const { return side() * side(); }
    int index(int m, int n) const { return (m + N) * side() + (n + N); }
    bool contains(int m, int n) const { return std::abs(m) <= N && std::abs(n) <= N; }
    ModeIndex mode(int k) const { return {k / side() - N, k % side() - N}; }
    int ring(int k) const {
        auto [m, n] = mode(k);
        return std::max(std::abs(m), std::abs(n));
    }
};

struct HoloData {
    Lattice lat;
    cplx alpha{};
    std::map<ModeIndex, cplx> qcoeffs;
    int N = 4;

    bool vacuum() const { return qcoeffs.empty(); }
    ModeWindow window() const { return {N}; }
    // value of q at z = s gamma1 + t gamma2
    cplx q_at(double s, double t) const;
    void validate() const;
};

HoloData constant_q(const Lattice& lat, cplx c, int N, cplx alpha = 0);

// Row/column layout: u-mode k at k, v-mode k at M + k.
struct OperatorMatrix {
    ModeWindow win;
    CMat mat;

    int M() const { return win.count(); }
};

OperatorMatrix assemble(const HoloData& hd, const HarmonicForm& omega);
double sigma_min(const OperatorMatrix& m);
double willmore_energy(const HoloData& hd);

// Connected components of the coupling graph of D_omega; independent of omega.
struct BlockStructure {
    std::vector<std::vector<int>> u_modes;  // per block
    std::vector<std::vector<int>> v_modes;
    std::vector<int> block_of_u, block_of_v;
};
BlockStructure block_structure(const HoloData& hd);

}  // namespace qspec
