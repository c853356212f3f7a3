#pragma once

#include <array>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "wadalab/lift.hpp"

namespace wl {

inline const double kEps0 = 1.0 - std::numbers::sqrt2 / 2.0;

struct ChainPoint {
    int i = 0;
    double t = 0.0;
};

// uniform scaling of [ta, tb] on a circle onto target circle parameters sa -> sb (taken mod 1)
struct ChainRule {
    double ta, tb;
    int target;
    double sa, sb;
};

// point (i, t) of one circle identified with (j, s) of another
struct Junction {
    int i;
    double t;
    int j;
    double s;
};

class ChainMap {
public:
    ChainMap(int k, std::vector<std::vector<ChainRule>> rules, std::vector<Junction> junctions);

    int circles() const { return k_; }
    const std::vector<ChainRule>& rules(int i) const { return rules_.at(static_cast<size_t>(i)); }
    const std::vector<Junction>& junctions() const { return junctions_; }

    ChainPoint eval(ChainPoint p) const;
    ChainPoint canonical(ChainPoint p) const;
    bool same_point(ChainPoint a, ChainPoint b, double tol = 1e-12) const;
    double distance(ChainPoint a, ChainPoint b) const;
    // every point mapped to p, one per rule whose image covers p
    std::vector<ChainPoint> preimages(ChainPoint p) const;
    // largest mismatch of rule images at shared rule ends and at junctions
    double continuity_defect() const;

    std::string family;
    double param = 0.0;
    std::map<std::string, ChainPoint> marks;
    // marked arcs per circle, e.g. J_eps
    std::vector<std::pair<int, std::array<double, 2>>> marked_arcs;

private:
    int k_;
    std::vector<std::vector<ChainRule>> rules_;
    std::vector<Junction> junctions_;
    std::vector<std::vector<double>> jdist_;
    struct Node {
        int circle;
        double t;
        int id;
    };
    std::vector<Node> nodes_;
};

double wrap01(double t);

ChainMap make_phi_eps(double eps);
// rotation of G3 by pi about the centre of S1
ChainPoint g3_rotate(ChainPoint p);
ChainMap make_xi();
ChainMap make_g3();

Lift quotient_lift(const ChainMap& cm);
Lift make_arnold(double t);
Lift make_five_piece();

double entropy_closed_form(double eps);
long long lap_count(const Lift& f);
double lap_entropy(const Lift& f, int n);
double lap_entropy(const ChainMap& cm, int n);

// planar position of a chain point for drawing
std::array<double, 2> chain_xy(const ChainMap& cm, ChainPoint p);

nlohmann::json families_registry();

}  // namespace wl
