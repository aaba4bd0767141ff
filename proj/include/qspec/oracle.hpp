#pragma once

#include <optional>
#include <vector>

#include "qspec/darboux.hpp"
#include "qspec/holo.hpp"

namespace qspec {

// Constant potential c in the normal form; spin_shift kappa translates the spectrum by half of eta_kappa.
struct HomogeneousModel {
    Lattice lat;
    cplx c{};
    cplx alpha{};
    std::optional<ModeIndex> spin_shift;

    // The equivalent trivialized data: q = c chi_kappa and alpha + eta_kappa'/2.
    HoloData holo(int N) const;
};

struct OracleFiber {
    std::vector<cplx> roots;  // sorted by (Re, Im)
    bool a_sheet = false;
};

// Γ* enumerated over |m|,|n| <= index_window.
OracleFiber vacuum_fiber(const HomogeneousModel& m, cplx a, double cutoff, int index_window);
OracleFiber homogeneous_fiber(const HomogeneousModel& m, cplx a, double cutoff, int index_window);
// unit kernel (u, v) of the eta block; phase fixed so the first nonzero entry is positive real
std::pair<cplx, cplx> homogeneous_kernel(const HomogeneousModel& m, const HarmonicForm& omega, ModeIndex eta,
                                         double tol = 1e-8);

double pluecker_bound(int n, int g, int degL, int ordH);
int vanishing_order(const MonodromySection& s, int i, int j, double zero_tol = 1e-6);

}  // namespace qspec
