#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qspec/immersion.hpp"
#include "qspec/spectrum.hpp"

namespace qspec {

// Section of V/L with monodromy: phi = frame (u + j v), the true section being phi e^{∫omega}.
struct MonodromySection {
    GridSpec grid;
    CField u, v;
    QField phi;
    HarmonicForm omega;
    double residual = 0;  // grid operator applied to the synthesized kernel
};

// psi_hat = (X, Y) in the working chart's homogeneous coordinates; pi psi_hat = X - f Y = phi.
struct ProlongedSection {
    GridSpec grid;
    QField X, Y, phi, lambda;
    HarmonicForm omega;
    double residual = 0;  // max |pi d(psi_hat e^{∫omega})| by central differences, relative
};

enum class DarbouxClass { Regular, Singular, Constant };
const char* to_string(DarbouxClass c);

struct DarbouxResult {
    DarbouxClass cls = DarbouxClass::Regular;
    std::optional<ImmersionGrid> fsharp;  // regular only
    HPoint constant_point;                // constant only, working coordinates
    std::vector<std::pair<int, int>> zero_locus;
    ProlongedSection source;
    double min_distance = 0;  // min_p hp1 distance between f and f#, standard coordinates
    double max_distance = 0;
    double conformality_residual = 0;  // *delta# = J~ delta#, central differences, relative
};

struct DarbouxOptions {
    double cross_tol = 1e-6;
    double zero_tol = 1e-6;
    double constant_tol = 1e-7;
    double chart_keep = 0.25;  // keep the working chart when its infinity stays this far from f and f#
    ExtractOptions extract;
};

struct EnvelopeReport {
    double s2 = 0;          // max |S^2 + 1| at the nodes
    double invariance = 0;  // SL = L and SL# = L# at cell centres
    double touch_f = 0;     // *delta = S delta
    double right_f = 0;     // *delta = delta S
    double left_sharp = 0;  // *delta# = S delta#
    double right_sharp = 0; // *delta# = delta# S, expected to fail
};

struct BianchiReport {
    DarbouxResult fhat;
    double residual_sharp = 0;  // fhat as transform of f#
    double residual_flat = 0;   // fhat as transform of f_flat
    double gamma_chi = 0;       // chi(z + gamma) against h#^-1 chi(z) h_flat
    double y_consistency = 0;   // chi from the y-direction differentials
};

struct IsospectralReport {
    std::vector<double> distances;
    double max_distance = 0;
    int compared = 0;
};

struct FamilyMember {
    HarmonicForm omega;
    bool ok = false;
    std::string error;
    DarbouxClass cls = DarbouxClass::Regular;
    double willmore = 0;
    double distance_to_f = 0;  // max_p hp1 distance
    double prolongation_residual = 0;
    double conformality_residual = 0;
    std::optional<ImmersionGrid> mesh;
};

struct FamilyReport {
    std::vector<FamilyMember> members;
    std::vector<std::tuple<int, int, double>> rho_pairs;  // indices and max hp1 distance between members
    double decreasing_fraction = 0;                       // consecutive distance decreases, in member order
};

MonodromySection section_from_kernel(const ExtractedHolo& eh, const SpectrumSample& s, int kernel_index = 0,
                                     const DarbouxOptions& opt = {});
MonodromySection section_from_kernel(const ExtractedHolo& eh, const HarmonicForm& omega, const CVec& kernel,
                                     const DarbouxOptions& opt = {});
ProlongedSection prolong(const ImmersionGrid& g, const ExtractedHolo& eh, const MonodromySection& ms);
DarbouxResult darboux_transform(const ImmersionGrid& g, const ProlongedSection& ps, const DarbouxOptions& opt = {});
EnvelopeReport verify_envelope(const ImmersionGrid& f, const ExtractedHolo& eh, const DarbouxResult& res);
BianchiReport bianchi_compose(const ImmersionGrid& f, const ProlongedSection& psharp, const ProlongedSection& pflat,
                              const DarbouxOptions& opt = {});
IsospectralReport isospectral_check(const ExtractedHolo& eh_f, const DarbouxResult& res, const std::vector<cplx>& probe_as,
                                    double cutoff, const DarbouxOptions& opt = {}, const SpectrumOptions& sopt = {});
FamilyReport family_map(const ImmersionGrid& f, const ExtractedHolo& eh, const std::vector<SpectrumSample>& samples,
                        const DarbouxOptions& opt = {}, int threads = 1);

// max_p hp1 distance between the point fields (X0,Y0) and (X1,Y1), working coordinates mapped through chart
double max_line_distance(const Mat2H& chart, const QField& X0, const QField& Y0, const QField& X1, const QField& Y1);

}  // namespace qspec
