#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "wadalab/chart.hpp"

namespace wl {

// square pixel grid over [-extent, extent]^2, row 0 at the top
struct Raster {
    int res = 512;
    double extent = 3.05;
    std::array<double, 2> to_px(const std::array<double, 2>& xy) const;
    std::array<double, 2> to_xy(double col, double row) const;
    double px_per_unit() const { return res / (2.0 * extent); }
};

struct AttractOptions {
    int res = 1024;
    // radial contraction of the soft smash; 0 would be the literal smash
    double r = 0.3;
    // interior level curves per boundary component added to the boundary curves
    int mesh = 1;
    // adaptive refinement target for consecutive image points, in pixels
    double max_gap_px = 1.5;
    int workers = 0;
    // above this many traced points, later levels push the previous level's pixel cells
    // forward instead (sub x sub samples per cell)
    long max_points = 2'000'000;
    int sub = 4;
};

struct TracedCurve {
    int c = 0;
    double s = 0.0;
    std::vector<double> u;               // parameters on the starting curve
    std::vector<ChartPoint> img;         // their current images
    std::vector<std::array<double, 2>> xy;
};

struct AttractorApprox {
    int depth = 0;
    double r = 0.0;
    Raster frame;
    std::vector<TracedCurve> curves;
    // d_H(A_n, A_{n-1}) in pixels, n = 1..depth
    std::vector<double> dh_history;
    bool mesh_too_coarse = false;
    double worst_gap_px = 0.0;
    bool raster_mode = false;        // curves dropped, mask carried forward directly
    std::vector<std::uint8_t> mask;  // rasterised curves, undilated
};

// n-fold image under the contracted unwrap, the picture-space stand-in for psi^n
ChartPoint theta_n(const DiskMap& dm, ChartPoint p, int n, double r);

AttractorApprox attractor_approx(const DiskMap& dm, int depth, const AttractOptions& opt = {});
// smallest N with d_H(A_N, A_{N+1}) < 2 px (capped at max_depth); returns A_N
AttractorApprox attractor_auto(const DiskMap& dm, const AttractOptions& opt = {}, int max_depth = 16);
// one more level of an existing approximation
void advance(const DiskMap& dm, AttractorApprox& a, const AttractOptions& opt);

// image of a pixel set under theta, sampled sub x sub per cell
std::vector<std::uint8_t> push_mask(const DiskMap& dm, const std::vector<std::uint8_t>& mask, const Raster& frame,
                                    double r, int sub, int workers);

std::vector<std::uint8_t> rasterize(const std::vector<std::vector<std::array<double, 2>>>& polylines,
                                    const Raster& frame, bool closed);
std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& m, int res, int radius = 1);
// exact Euclidean distance (pixels) to the nearest set pixel, separable two-pass transform
std::vector<double> distance_transform(const std::vector<std::uint8_t>& m, int res);
double hausdorff_px(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b, int res);

enum Label : std::uint8_t { kBand = 0, kOut = 1, kL0 = 2, kL1 = 3, kUnknown = 4, kOutside = 5 };

struct BasinGrid {
    int res = 0;
    std::vector<std::uint8_t> label;
    std::vector<Label> regions;                 // one per seed
    std::vector<std::array<int, 2>> seeds;      // (col, row)
    std::vector<long> counts;                   // pixels per region
};

struct SeedSwallowed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// inside-the-disk mask for a chart kind
std::vector<std::uint8_t> domain_mask(const DiskMap& dm, const Raster& frame);
BasinGrid basin_label(const DiskMap& dm, const AttractorApprox& a);
// flood fill from arbitrary seeds on a prepared label grid (band / outside / unknown)
BasinGrid flood(std::vector<std::uint8_t> label, int res, const std::vector<std::array<int, 2>>& seeds,
                const std::vector<Label>& names);

// per region: fraction of its frontier lying within k pixels of the frontiers of all others
std::vector<double> wada_score(const BasinGrid& bg, int k);
// constructed controls: two regions sharing a whole circle, and a disk sharing half its boundary
BasinGrid control_common_circle(int res);
BasinGrid control_half_shared(int res);

// graph point y reached from boundary component `side` by the radial arc over it, i.e. no
// other strand of the graph image lies between the image of y and that boundary
bool radial_access(const DiskMap& dm, double y, int side);

struct AccessibleArc {
    int side = 0;
    std::vector<double> backward;          // y*, y_-1, ..., y_-depth (lift coordinates)
    double point = 0.0;                    // y*
    std::vector<ChartPoint> arc;           // terminal arc, picture coordinates
    std::vector<std::array<double, 2>> xy;
    double forward_rotation = 0.0;
    double backward_rotation = 0.0;
    double envelope_rotation = 0.0;
    bool exposed = false;                  // every point of the chain lies in the marked intervals
};

// lift for the dynamics seen from a side: quotient lift for the pants, the circle lift otherwise
Lift side_lift(const DiskMap& dm);
AccessibleArc accessible_arc(const DiskMap& dm, int side, int depth, double r, const Raster& frame,
                             double start = -1.0);

// arc length in pixels from the first band pixel the arc meets to its end (0 if it never meets it)
double band_overlap_px(const std::vector<std::array<double, 2>>& arc, const std::vector<std::uint8_t>& band,
                       const Raster& frame);

// position in [0, 2k) along the counterclockwise walk around the outside of the drawn chain
// (bottom halves left to right, then top halves right to left)
double exterior_position(const ChainMap& cm, ChainPoint p);
// per step of the cycle, how many places (mod its length) the image moved in exterior order
std::vector<int> exterior_shifts(const ChainMap& cm, const std::vector<ChainPoint>& cycle);

struct TranslationLine {
    std::vector<std::vector<std::array<double, 2>>> pieces;  // lambda, Phi(lambda), ...
    std::vector<ChartPoint> chain;                            // z_-1, z_0, z_1, ...
    std::vector<double> band_distance_px;                     // per piece, to the band of A_N
    // piece n misses the band of the boundary images at depth n + 2
    bool disjoint = true;
    int clear_pieces = 0;  // leading pieces that miss it
};

TranslationLine translation_line(const DiskMap& dm, int segments, const AttractOptions& opt, int depth);

void write_pgm(const std::string& path, const std::vector<std::uint8_t>& gray, int res);
// returns false when PNG support is not compiled in
bool write_png(const std::string& path, const std::vector<std::uint8_t>& rgb, int res);
std::vector<std::uint8_t> basin_gray(const BasinGrid& bg);
std::vector<std::uint8_t> basin_rgb(const BasinGrid& bg);

nlohmann::json report_json(const AttractorApprox& a, const std::vector<double>& scores);

}  // namespace wl
