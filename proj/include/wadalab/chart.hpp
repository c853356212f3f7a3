#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wadalab/families.hpp"
#include "wadalab/lift.hpp"

namespace wl {

enum class ChartKind { Pants, Annulus };

// c = boundary component, u = boundary parameter, s = radial level (0 boundary, 1 graph)
struct ChartPoint {
    int c = 0;
    double u = 0.0;
    double s = 0.0;
};

std::string format_chart_point(const ChartPoint& p);
// "c:u:s", c may be a number or C0/C1/C2
ChartPoint parse_chart_point(const std::string& text);

double smash_level(double eps, double s);
ChartPoint smash(double eps, const ChartPoint& p);

struct NoAnchorOnSide : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// open interval (a, b) of the graph circle, in lift coordinates, whose radial arcs on one
// side are folded into a pocket of the image curve; its ends map to the vertical at ustar
struct Pocket {
    double a = 0.0, b = 0.0, ustar = 0.0;
};

class PocketChart;

class DiskMap {
public:
    // pair of pants D2 around the chain S0 v S1, unwrapping phi_eps; eps < 1/3
    static DiskMap pants(double eps);
    // annulus D1 around the spine circle; height(x) places the graph image of x
    // above (positive) or below (negative) the spine
    static DiskMap annulus(const Lift& f, std::function<double(double)> height, std::string family,
                           double param, char variant, double eps);
    static DiskMap annulus_arnold(double t, double eps = 0.25);
    // variant 'A': fixed arc exposed to the inner boundary; 'B': displacement heights
    static DiskMap five_piece(char variant, double eps = 0.25);

    ChartKind kind() const { return kind_; }
    const std::string& family() const { return family_; }
    double eps() const { return eps_; }
    double param() const { return param_; }
    char variant() const { return variant_; }
    int components() const { return kind_ == ChartKind::Pants ? 3 : 2; }
    const ChainMap* chain() const { return chain_.get(); }
    const Lift* lift() const { return lift_.get(); }

    ChainPoint anchor(int c, double u) const;
    ChainPoint family_map(ChainPoint y) const;
    // graph point as a chart point of the given component, if it has an anchor there
    std::optional<ChartPoint> chart_of(ChainPoint q, int side) const;

    // unwrapping on the graph (image inside the collar, Upsilon of it = family map)
    ChartPoint graph_image(ChainPoint y) const;
    ChartPoint unwrap(const ChartPoint& p) const;
    // collar conjugate of unwrap: acts on s in [1-eps, 1], radial below
    ChartPoint unwrap_extended(const ChartPoint& p) const;
    ChartPoint psi(const ChartPoint& p) const;
    // unwrap followed by the radial contraction s -> 1 - r(1-s); conjugate on the collar to
    // the soft smash approximant, used for attractor pictures
    ChartPoint theta(const ChartPoint& p, double r) const;

    std::optional<ChainPoint> on_graph(const ChartPoint& p, double tol = 1e-12) const;
    bool same_point(const ChartPoint& a, const ChartPoint& b, double tol = 1e-9) const;

    // radial arc ending at q, from the given component, s sampled uniformly
    std::vector<ChartPoint> radial_arc(ChainPoint q, int side, int samples = 65) const;
    // graph intervals (in the anchor parameter of `side`) whose radial arcs map into radial arcs
    std::vector<std::array<double, 2>> radial_intervals(int side) const;

    std::array<double, 2> xy(const ChartPoint& p) const;
    // inverse of xy on the rendered disk; nullopt outside it
    std::optional<ChartPoint> chart_at(const std::array<double, 2>& q) const;
    double extent() const { return 3.0; }

    // annulus only
    double height(double x) const;
    const std::vector<Pocket>& pockets(int side) const;

private:
    DiskMap() = default;
    ChartPoint unwrap_pants(const ChartPoint& p) const;
    ChartPoint unwrap_annulus(const ChartPoint& p) const;
    double boundary_u(int c, double u) const;

    ChartKind kind_ = ChartKind::Pants;
    std::string family_;
    double eps_ = 0.0;
    double param_ = 0.0;
    char variant_ = 0;
    std::shared_ptr<const ChainMap> chain_;
    std::shared_ptr<const Lift> lift_;
    // annulus data
    std::function<double(double)> height_;
    double kappa_ = 1.0;
    std::vector<Pocket> pockets_[2];
    std::vector<std::shared_ptr<const PocketChart>> charts_[2];
    std::vector<std::array<double, 2>> exposed_[2];
};

}  // namespace wl
