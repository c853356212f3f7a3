#include "wadalab/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double arc(double a, double b) {
    double d = std::abs(wrap01(a) - wrap01(b));
    return std::min(d, 1.0 - d);
}

double rule_param(const ChainRule& r, double t) {
    double w = (t - r.ta) / (r.tb - r.ta);
    return r.sa + w * (r.sb - r.sa);
}

}  // namespace

double wrap01(double t) {
    double r = t - std::floor(t);
    return r >= 1.0 ? 0.0 : r;
}

ChainMap::ChainMap(int k, std::vector<std::vector<ChainRule>> rules, std::vector<Junction> junctions)
    : k_(k), rules_(std::move(rules)), junctions_(std::move(junctions)) {
    if (static_cast<int>(rules_.size()) != k_) throw std::invalid_argument("one rule list per circle");
    for (auto& rs : rules_) {
        if (rs.empty() || rs.front().ta != 0.0 || rs.back().tb != 1.0)
            throw std::invalid_argument("rules must cover [0,1]");
        for (size_t i = 1; i < rs.size(); ++i)
            if (rs[i].ta != rs[i - 1].tb) throw std::invalid_argument("rules must be contiguous");
    }
    int id = 0;
    for (auto& j : junctions_) {
        nodes_.push_back({j.i, wrap01(j.t), id});
        nodes_.push_back({j.j, wrap01(j.s), id});
        ++id;
    }
    size_t n = junctions_.size();
    const double inf = std::numeric_limits<double>::infinity();
    jdist_.assign(n, std::vector<double>(n, inf));
    for (size_t a = 0; a < n; ++a) jdist_[a][a] = 0.0;
    for (auto& u : nodes_)
        for (auto& v : nodes_)
            if (u.circle == v.circle) {
                double d = arc(u.t, v.t);
                auto& cell = jdist_[static_cast<size_t>(u.id)][static_cast<size_t>(v.id)];
                cell = std::min(cell, d);
            }
    for (size_t m = 0; m < n; ++m)
        for (size_t a = 0; a < n; ++a)
            for (size_t b = 0; b < n; ++b)
                jdist_[a][b] = std::min(jdist_[a][b], jdist_[a][m] + jdist_[m][b]);
}

ChainPoint ChainMap::canonical(ChainPoint p) const {
    p.t = wrap01(p.t);
    if (std::abs(p.t - 1.0) < 1e-15) p.t = 0.0;
    for (auto& j : junctions_) {
        bool hit_a = p.i == j.i && arc(p.t, j.t) < 1e-14;
        bool hit_b = p.i == j.j && arc(p.t, j.s) < 1e-14;
        if (hit_a || hit_b) {
            if (j.i <= j.j) return {j.i, wrap01(j.t)};
            return {j.j, wrap01(j.s)};
        }
    }
    return p;
}

ChainPoint ChainMap::eval(ChainPoint p) const {
    p.t = wrap01(p.t);
    const auto& rs = rules_.at(static_cast<size_t>(p.i));
    auto it = std::upper_bound(rs.begin(), rs.end(), p.t,
                               [](double t, const ChainRule& r) { return t < r.tb; });
    if (it == rs.end()) it = rs.end() - 1;
    return canonical({it->target, wrap01(rule_param(*it, p.t))});
}

double ChainMap::distance(ChainPoint a, ChainPoint b) const {
    double best = std::numeric_limits<double>::infinity();
    if (a.i == b.i) best = arc(a.t, b.t);
    for (auto& u : nodes_) {
        if (u.circle != a.i) continue;
        for (auto& v : nodes_) {
            if (v.circle != b.i) continue;
            double d = arc(a.t, u.t) + jdist_[static_cast<size_t>(u.id)][static_cast<size_t>(v.id)] +
                       arc(v.t, b.t);
            best = std::min(best, d);
        }
    }
    return best;
}

bool ChainMap::same_point(ChainPoint a, ChainPoint b, double tol) const {
    return distance(a, b) <= tol;
}

std::vector<ChainPoint> ChainMap::preimages(ChainPoint p) const {
    std::vector<ChainPoint> reps{canonical(p)};
    for (auto& j : junctions_) {
        if (same_point(p, {j.i, j.t}, 1e-14)) {
            reps = {{j.i, wrap01(j.t)}, {j.j, wrap01(j.s)}};
            break;
        }
    }
    std::vector<ChainPoint> out;
    for (int i = 0; i < k_; ++i) {
        for (auto& r : rules_[static_cast<size_t>(i)]) {
            double lo = std::min(r.sa, r.sb), hi = std::max(r.sa, r.sb);
            for (auto& q : reps) {
                if (q.i != r.target) continue;
                for (double s = q.t + std::ceil(lo - q.t - 1e-15); s <= hi + 1e-15; s += 1.0) {
                    double t = r.ta + (s - r.sa) / (r.sb - r.sa) * (r.tb - r.ta);
                    ChainPoint c = canonical({i, t});
                    bool dup = false;
                    for (auto& o : out) dup = dup || same_point(o, c, 1e-13);
                    if (!dup) out.push_back(c);
                }
            }
        }
    }
    return out;
}

double ChainMap::continuity_defect() const {
    double worst = 0.0;
    auto img = [&](int i, size_t r, double t) {
        const auto& rule = rules_[static_cast<size_t>(i)][r];
        return ChainPoint{rule.target, wrap01(rule_param(rule, t))};
    };
    for (int i = 0; i < k_; ++i) {
        const auto& rs = rules_[static_cast<size_t>(i)];
        for (size_t r = 0; r < rs.size(); ++r) {
            size_t nx = (r + 1) % rs.size();
            worst = std::max(worst, distance(img(i, r, rs[r].tb), img(i, nx, rs[nx].ta)));
        }
    }
    for (auto& j : junctions_) worst = std::max(worst, distance(eval({j.i, j.t}), eval({j.j, j.s})));
    return worst;
}

ChainMap make_phi_eps(double eps) {
    if (!(eps > 0.0) || eps > kEps0 + 1e-15) throw std::invalid_argument("eps must lie in (0, eps0]");
    double x = eps / (1.0 - 2.0 * eps);
    std::vector<std::vector<ChainRule>> rules(2);
    for (int i = 0; i < 2; ++i) {
        rules[static_cast<size_t>(i)] = {
            {0.0, 1.0 - 2.0 * eps, i, 0.0, 1.0},
            {1.0 - 2.0 * eps, 1.0 - eps, 1 - i, 0.0, x},
            {1.0 - eps, 1.0, 1 - i, x, 0.0},
        };
    }
    ChainMap cm(2, std::move(rules), {{0, 0.0, 1, 0.0}});
    cm.family = "phi";
    cm.param = eps;
    cm.marks["x0"] = {0, 0.0};
    if (std::abs(eps - kEps0) < 1e-12) {
        cm.marks["q0"] = {0, 1.0 - eps};
        cm.marks["q1"] = {1, 1.0 - eps};
    }
    cm.marked_arcs = {{0, {eps, 1.0 - eps}}, {1, {eps, 1.0 - eps}}};
    return cm;
}

ChainPoint g3_rotate(ChainPoint p) {
    if (p.i == 1) return {1, wrap01(p.t + 0.5)};
    return {2 - p.i, p.t};
}

ChainMap make_xi() {
    std::vector<std::vector<ChainRule>> rules = {
        {{0.0, 0.5, 0, 1.0, 0.0}, {0.5, 0.75, 1, 1.0, 0.75}, {0.75, 1.0, 1, 0.75, 1.0}},
        {{0.0, 0.25, 0, 1.0, 0.75},
         {0.25, 0.375, 0, 0.75, 1.0},
         {0.375, 0.5, 1, 0.0, 0.5},
         {0.5, 0.75, 2, 1.0, 0.75},
         {0.75, 0.875, 2, 0.75, 1.0},
         {0.875, 1.0, 1, 0.5, 1.0}},
        {{0.0, 0.5, 2, 1.0, 0.0}, {0.5, 0.75, 1, 1.5, 1.25}, {0.75, 1.0, 1, 1.25, 1.5}},
    };
    ChainMap cm(3, std::move(rules), {{0, 0.0, 1, 0.0}, {1, 0.5, 2, 0.0}});
    cm.family = "xi";
    return cm;
}

ChainMap make_g3() {
    ChainMap xi = make_xi();
    std::vector<std::vector<ChainRule>> rules(3);
    for (int i = 0; i < 3; ++i) {
        for (auto r : xi.rules(i)) {
            if (r.target == 1) {
                r.sa += 0.5;
                r.sb += 0.5;
            } else {
                r.target = 2 - r.target;
            }
            rules[static_cast<size_t>(i)].push_back(r);
        }
    }
    ChainMap g(3, std::move(rules), xi.junctions());
    g.family = "g3";
    g.marks = {{"a1", {0, 0.0}}, {"a3", {1, 0.5}}, {"q1", {1, 0.25}}, {"q2", {2, 0.75}},
               {"q3", {1, 0.75}}, {"q4", {0, 0.75}}, {"q5", {0, 0.5}}, {"q6", {1, 0.375}}};
    ChainPoint p = g.marks["q1"];
    for (int s = 0; s < 4; ++s) p = g.eval(p);
    if (g.distance(p, g.marks["q1"]) > 1e-12) throw std::logic_error("g3 4-cycle does not close");
    return g;
}

Lift quotient_lift(const ChainMap& cm) {
    if (cm.circles() != 2) throw std::invalid_argument("quotient lift needs a chain of two circles");
    std::vector<double> xs, vs;
    for (int i = 0; i < 2; ++i) {
        for (auto& r : cm.rules(i)) {
            double ua = 0.5 * i + 0.5 * r.ta;
            double va = 0.5 * r.target + 0.5 * r.sa;
            double vb = 0.5 * r.target + 0.5 * r.sb;
            if (xs.empty()) {
                xs.push_back(ua);
                vs.push_back(va);
            } else {
                // integer shift keeping the lift continuous
                double k = std::round(vs.back() - va);
                va += k;
                vb += k;
            }
            xs.push_back(0.5 * i + 0.5 * r.tb);
            vs.push_back(vb);
        }
    }
    Lift f = Lift::piecewise(std::move(xs), std::move(vs));
    if (cm.family == "phi") {
        double eps = cm.param;
        f = f.with_turns({(1.0 - eps) / 2.0, 0.5}).with_symmetry(2);
    }
    return f;
}

Lift make_arnold(double t) { return Lift::arnold(t); }

Lift make_five_piece() {
    return Lift::piecewise({0.0, 0.125, 0.25, 0.375, 0.5, 1.0}, {0.0, -0.875, 1.25, -0.625, 0.5, 1.0});
}

double entropy_closed_form(double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in (0, 1/2)");
    return std::log(1.0 / (1.0 - 2.0 * eps));
}

long long lap_count(const Lift& f) {
    if (!f.is_piecewise()) throw std::invalid_argument("lap count needs a piecewise lift");
    const auto& xs = f.breakpoints();
    const auto& vs = f.values();
    std::vector<int> sg;
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
        double d = vs[i + 1] - vs[i];
        if (d > 0.0) sg.push_back(1);
        else if (d < 0.0) sg.push_back(-1);
    }
    if (sg.empty()) return 1;
    long long changes = 0;
    for (size_t i = 0; i < sg.size(); ++i)
        if (sg[i] != sg[(i + 1) % sg.size()]) ++changes;
    return changes == 0 ? 1 : changes;
}

double lap_entropy(const Lift& f, int n) {
    if (n < 4) throw std::invalid_argument("lap entropy needs n >= 4");
    if (!f.is_piecewise()) throw std::invalid_argument("lap entropy needs a piecewise lift");
    Lift p = Lift::piecewise({f.x0(), f.x0() + 1.0}, {f.x0(), f.x0() + 1.0});
    for (int i = 0; i < n; ++i) {
        p = compose(f, p);
        if (p.breakpoints().size() > 10000000) throw std::runtime_error("lap count above 1e7");
    }
    return std::log(static_cast<double>(lap_count(p))) / n;
}

double lap_entropy(const ChainMap& cm, int n) { return lap_entropy(quotient_lift(cm), n); }

std::array<double, 2> chain_xy(const ChainMap& cm, ChainPoint p) {
    double a = kTwoPi * p.t;
    if (cm.circles() == 2) {
        if (p.i == 0) return {-1.0 + std::cos(a), -std::sin(a)};
        return {1.0 - std::cos(a), std::sin(a)};
    }
    if (p.i == 0) return {-2.0 + std::cos(a), -std::sin(a)};
    double cx = p.i == 1 ? 0.0 : 2.0;
    return {cx + std::cos(std::numbers::pi - a), std::sin(std::numbers::pi - a)};
}

nlohmann::json families_registry() {
    return nlohmann::json::array({
        {{"name", "phi-quotient"}, {"kind", "lift"}, {"param", "eps"}, {"range", {0.0, kEps0}},
         {"open_low", true}},
        {{"name", "phi-chain"}, {"kind", "chain"}, {"param", "eps"}, {"range", {0.0, kEps0}},
         {"open_low", true}},
        {{"name", "arnold"}, {"kind", "lift"}, {"param", "t"}, {"range", {0.0, nullptr}},
         {"open_low", false}},
        {{"name", "five-piece"}, {"kind", "lift"}, {"param", nullptr}, {"range", nullptr},
         {"open_low", false}},
        {{"name", "g3"}, {"kind", "chain"}, {"param", nullptr}, {"range", nullptr},
         {"open_low", false}},
    });
}

}  // namespace wl
