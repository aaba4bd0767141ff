#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qspec/holo.hpp"

namespace qspec {

struct SpectrumOptions {
    double fiber_tol = 1e-7;       // relative to ||M(a)||
    double kernel_tol = 1e-6;      // relative to ||M(a)||
    double collision_factor = 10;  // collision_tol = factor * scan step
    double infinite_beta_tol = 1e-12;
    double pivot_tol = 1e-9;       // v-diagonal below this (relative) switches the block to QZ
    double sheet_fraction = 0.9;
    int sheet_probes = 10;
    double edge_tol = 1e-6;        // kernel mass fraction on the outermost ring
    double handle_tol = 1e-8;
    double ls_radius = 0;          // 0: automatic
    int svd_block_limit = 256;
    int threads = 1;
};

struct FiberRoot {
    cplx b;
    double sigma = 0;     // block sigma_min (or residual bound for large blocks)
    double residual = 0;  // ||D x|| / ||x||
    bool edge = false;
    int block = -1;
    CVec kernel;          // full 2M vector, only when requested
};

struct FiberSolveResult {
    cplx a;
    std::vector<FiberRoot> roots;  // sorted by (Re b, Im b)
    bool a_sheet = false;
    std::vector<ModeIndex> sheet_modes;
    int rejected = 0;
    double norm = 0;

    std::vector<cplx> values() const;
};

struct SpectrumSample {
    HarmonicForm omega;
    double sigma = 0;
    std::vector<CVec> kernel;  // orthonormal basis
    int kernel_dim = 0;
    RVec smallest;             // ascending singular values (up to 8)
};

struct Rect {
    double re_min = -1, re_max = 1, im_min = -1, im_max = 1;
};

struct BranchPoint {
    cplx a, b;
    double sigma = 0;
    bool edge = false;
    int branch = -1;
    std::string flag = "ok";
};

struct Branch {
    int id = 0;
    std::vector<BranchPoint> pts;
};

struct SheetMarker {
    cplx a;
    std::vector<ModeIndex> modes;
};

enum class CollisionKind { DoublePoint, Handle, Unresolved };
const char* to_string(CollisionKind k);

struct CollisionMarker {
    cplx a, b;
    CollisionKind kind = CollisionKind::Unresolved;
    double gap = 0;
    int local_branches = 0;
    double constant_term = 0;
    double quad_scale = 0;
    double fit_residual = 0;
    std::string origin;
};

struct BranchSet {
    std::vector<BranchPoint> samples;  // scan order
    std::vector<Branch> branches;
    std::vector<SheetMarker> sheets;
    std::vector<CollisionMarker> collisions;
    double step = 0;
    double cutoff = 0;
};

class SpectrumEngine {
public:
    SpectrumEngine(HoloData hd, SpectrumOptions opt = {});

    const HoloData& holo() const { return hd_; }
    const SpectrumOptions& options() const { return opt_; }

    FiberSolveResult fiber_roots(cplx a, double cutoff, bool want_kernels = false) const;
    SpectrumSample kernel_at(const HarmonicForm& omega) const;
    // smallest singular values of D_omega over all blocks (ascending, at most k)
    RVec smallest_singular_values(const HarmonicForm& omega, int k) const;
    double sigma_min(const HarmonicForm& omega) const;
    // infinity norm of D at (a, 0); tolerances are relative to it
    double operator_scale(cplx a) const;
    BranchSet scan(const Rect& window, int samples, double cutoff) const;
    CollisionMarker classify_site(cplx a0, cplx b0, std::optional<std::pair<ModeIndex, ModeIndex>> vu_modes,
                                  const std::string& origin) const;

private:
    CMat block_matrix(int blk, const HarmonicForm& omega) const;
    void solve_block(int blk, cplx a, double scale, double cutoff, bool want_kernels, FiberSolveResult& out) const;

    HoloData hd_;
    SpectrumOptions opt_;
    DualBasis db_;
    ModeWindow win_;
    BlockStructure bs_;
    std::vector<int> local_u_, local_v_;
};

FiberSolveResult fiber_roots(const HoloData& hd, cplx a, double cutoff, const SpectrumOptions& opt = {});
BranchSet scan(const HoloData& hd, const Rect& window, int samples, double cutoff, const SpectrumOptions& opt = {});
SpectrumSample kernel_at(const HoloData& hd, const HarmonicForm& omega, const SpectrumOptions& opt = {});

struct RhoClosureReport {
    int checked = 0;
    int via_sheet = 0;
    double max_defect = 0;
};
// For each non-edge sample (a,b) with |b|, |a| inside the cutoff margin, fibre at conj(b) must contain conj(a).
RhoClosureReport rho_closure(const SpectrumEngine& eng, const std::vector<BranchPoint>& samples, double cutoff);

struct VacuumCompareRow {
    double r_lo = 0, r_hi = 0;
    double distance = 0;
    int compared = 0;
};
std::vector<VacuumCompareRow> vacuum_compare(const HoloData& hd, const std::vector<double>& radii, int angles,
                                             double cutoff, const SpectrumOptions& opt = {});

struct TruncationReport {
    int compared = 0;
    double max_defect = 0;
};
// roots at N and N+2 whose kernels live on rings <= N-2 must agree
TruncationReport truncation_convergence(const HoloData& hd, const std::vector<cplx>& probes, double cutoff,
                                        const SpectrumOptions& opt = {});

}  // namespace qspec
