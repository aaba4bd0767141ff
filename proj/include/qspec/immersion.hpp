#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qspec/grid.hpp"

namespace qspec {

// df vanishes somewhere on the grid; what() names the cell
struct NotImmersedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Grid-sampled map into HP^1. Grid value v stands for the point chart·(v, 1) of the standard ℍ^2.
struct ImmersionGrid {
    Lattice lat;
    int nx = 0, ny = 0;
    QField values;
    Mat2H chart;           // working chart -> standard homogeneous coordinates
    HPoint infinity_point; // standard coordinates of the working chart's point at infinity

    GridSpec spec() const { return {lat, nx, ny}; }
    HPoint point(std::size_t k) const { return chart.apply({values[k], kOne}); }
    // values in the standard chart (nullopt at infinity)
    std::optional<Quat> standard_value(std::size_t k) const { return hp1_chart(point(k)); }
    void validate() const;
};

enum class Deriv { Spectral, Central };

struct TangentData {
    QField dfx, dfy, N, R;
    double conformality_residual = 0;  // max |f_x + N f_y| / |f_x|
    double unit_residual = 0;          // max of |N^2 + 1|, |R^2 + 1|
};

struct ExtractOptions {
    int N = 8;             // truncation of the returned HoloData
    int q_modes = 4;       // Fourier window kept for q
    double q_tol = 1e-10;  // coefficients below this are dropped
    double frame_tol = 1e-3;
};

struct ExtractedHolo {
    GridSpec grid;
    HoloData hd;
    QField frame;  // N frame = frame i
    TangentData tangent;
    CField q;      // pointwise potential in the frame
    double q_rel_std = 0;
    double frame_min = 0;
    double reconstruction_residual = 0;
};

struct EmbeddednessReport {
    bool embedded = true;
    double min_ratio = 0;  // smallest distance / local mesh size over non-adjacent pairs
    int i1 = -1, j1 = -1, i2 = -1, j2 = -1;
};

// The working chart puts infinity at the real standard-chart point infinity_value (> 1, off the unit sphere).
ImmersionGrid homogeneous_torus(double theta, int nx, int ny, double infinity_value = 32.0);
// Torus fixture whose image crosses itself along a circle.
ImmersionGrid figure_eight_fixture(int nx, int ny);
ImmersionGrid make_grid(const Lattice& lat, int nx, int ny, const QField& standard_values, const Mat2H& chart);

TangentData tangent_data(const ImmersionGrid& g, Deriv d = Deriv::Central);
ExtractedHolo extract_holo(const ImmersionGrid& g, const ExtractOptions& opt = {});
double classical_willmore(const ImmersionGrid& g);
EmbeddednessReport embeddedness_check(const ImmersionGrid& g, double fraction = 0.75);

// values of g re-expressed in the chart of `target` (target.chart^-1 · g.chart)
QField values_in_chart(const ImmersionGrid& g, const Mat2H& target_chart);

std::string grid_to_json(const ImmersionGrid& g);
ImmersionGrid grid_from_json(const std::string& text);
// drop_axis in 0..3 removes that real coordinate; the remaining three map to (x, z, y) so the last one is up.
std::string grid_to_obj(const ImmersionGrid& g, int drop_axis = 0, bool standard_chart = true);

}  // namespace qspec
