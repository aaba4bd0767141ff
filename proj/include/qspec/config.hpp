#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qspec/darboux.hpp"
#include "qspec/holo.hpp"
#include "qspec/immersion.hpp"
#include "qspec/spectrum.hpp"
#include "qspec/verify.hpp"

namespace qspec {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Where the holomorphic data comes from.
//   constant_q: {"lattice", "c", "alpha", "spin_shift"}
//   holo:       {"path"} to a HoloData JSON
//   immersion:  {"name": clifford | homogeneous | figure_eight, "theta", "grid", "infinity_value"}
//   grid:       {"path"} to an ImmersionGrid JSON
struct SourceConfig {
    enum class Kind { ConstantQ, Holo, Immersion, Grid };
    Kind kind = Kind::ConstantQ;
    Lattice lat;
    cplx c{}, alpha{};
    std::optional<ModeIndex> spin_shift;
    std::string path;
    std::string name = "clifford";
    double theta = 0.78539816339744830962;
    int nx = 64, ny = 64;
    double infinity_value = 32.0;

    bool has_immersion() const { return kind == Kind::Immersion || kind == Kind::Grid; }
};

struct SpectrumRun {
    SourceConfig source;
    int N = 8;
    Rect window{-1, 1, -1, 1};
    int samples = 21;
    double cutoff = 1.5;
    SpectrumOptions spectrum;
    ExtractOptions extract;
    int threads = 1;
};

// b given explicitly, or the root-th fiber root at a ordered by |b|
struct DarbouxSampleSpec {
    cplx a{};
    std::optional<cplx> b;
    int root = 0;
};

struct DarbouxRun {
    SourceConfig source;
    int N = 8;
    double cutoff = 1.5;
    std::vector<DarbouxSampleSpec> samples;
    SpectrumOptions spectrum;
    DarbouxOptions darboux;
    double pair_tol = 1e-6;  // rho-paired members closer than this are reported identical
    int drop_axis = 3;
    bool meshes = true;
    int threads = 1;
};

struct MeshRun {
    SourceConfig source;
    int drop_axis = 3;
    bool standard_chart = true;
    std::string name = "surface";
};

// Each parser rejects unknown keys and malformed values with ConfigError.
SpectrumRun parse_spectrum_config(const std::string& text);
DarbouxRun parse_darboux_config(const std::string& text);
VerifyConfig parse_verify_config(const std::string& text);
MeshRun parse_mesh_config(const std::string& text);

std::string holo_to_json(const HoloData& hd);
HoloData holo_from_json(const std::string& text);

ImmersionGrid load_immersion(const SourceConfig& s);
HoloData load_holo(const SourceConfig& s, int N, const ExtractOptions& extract = {});

}  // namespace qspec
