#include "wadalab/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "wadalab/rotation.hpp"

namespace wl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Vec = std::array<double, 2>;

Vec lerp(const Vec& a, const Vec& b, double t) { return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])}; }

double cross(const Vec& o, const Vec& a, const Vec& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double clamp01(double s) { return std::clamp(s, 0.0, 1.0); }

}  // namespace

// Triangulated pocket: the polygon bounded by the image curve over [a, b] and the vertical
// segment V joining its ends, mapped onto a convex polygon Q on the unit circle so that
// leaves can be drawn as chords in Q and carried back piecewise-linearly.
class PocketChart {
public:
    using Curve = std::function<Vec(double)>;

    PocketChart(const Curve& gamma, double a, double b, std::vector<double> breaks, int n_gamma = 400,
                int n_v = 64)
        : a_(a), b_(b), gamma_(gamma), nv_(n_v) {
        for (int k = 0; k <= n_gamma; ++k) xs_.push_back(a + (b - a) * k / n_gamma);
        for (double x : breaks)
            if (x > a && x < b) xs_.push_back(x);
        std::sort(xs_.begin(), xs_.end());
        std::vector<double> cleaned;
        for (double x : xs_)
            if (cleaned.empty() || x - cleaned.back() > 1e-12) cleaned.push_back(x);
        cleaned.back() = b;
        xs_ = cleaned;
        ng_ = static_cast<int>(xs_.size());

        for (double x : xs_) P_.push_back(gamma(x));
        Vec ga = P_.front(), gb = P_.back();
        for (int j = 1; j < nv_; ++j) P_.push_back(lerp(gb, ga, static_cast<double>(j) / nv_));

        std::vector<double> len(static_cast<size_t>(ng_), 0.0);
        for (int k = 1; k < ng_; ++k)
            len[k] = len[k - 1] + std::hypot(P_[k][0] - P_[k - 1][0], P_[k][1] - P_[k - 1][1]);
        for (int k = 0; k < ng_; ++k) {
            double th = 1.5 * std::numbers::pi * len[k] / len.back();
            Q_.push_back({std::cos(th), std::sin(th)});
        }
        for (int j = 1; j < nv_; ++j) {
            double th = 1.5 * std::numbers::pi + 0.5 * std::numbers::pi * j / nv_;
            Q_.push_back({std::cos(th), std::sin(th)});
        }
        triangulate();
        build_grid();
    }

    bool degenerate() const { return degenerate_; }

    // point on the leaf from the curve point over x (tau = 0) to V(nu(x)) (tau = 1)
    Vec leaf(double x, double tau) const {
        double nu = std::clamp((b_ - x) / (b_ - a_), 0.0, 1.0);
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        int k = std::clamp(static_cast<int>(it - xs_.begin()) - 1, 0, ng_ - 2);
        double f = (x - xs_[k]) / (xs_[k + 1] - xs_[k]);
        Vec qg = lerp(Q_[k], Q_[k + 1], f);
        Vec pg = lerp(P_[k], P_[k + 1], f);
        double jf = nu * nv_;
        int j = std::clamp(static_cast<int>(std::floor(jf)), 0, nv_ - 1);
        Vec qv = lerp(Q_[vidx(j)], Q_[vidx(j + 1)], jf - j);
        Vec exact = gamma_(x);
        if (tau <= 0.0) return exact;
        Vec p = to_p(lerp(qg, qv, tau));
        p[0] += (exact[0] - pg[0]) * (1.0 - tau);
        p[1] += (exact[1] - pg[1]) * (1.0 - tau);
        return p;
    }

private:
    double a_, b_;
    Curve gamma_;
    std::vector<double> xs_;
    std::vector<Vec> P_, Q_;
    int ng_ = 0, nv_;
    std::vector<std::array<int, 3>> tris_;
    static constexpr int kGrid = 64;
    std::vector<std::vector<int>> cells_;
    bool degenerate_ = false;

    int vidx(int j) const {
        if (j <= 0) return ng_ - 1;
        if (j >= nv_) return 0;
        return ng_ - 1 + j;
    }

    void triangulate() {
        int n = static_cast<int>(P_.size());
        std::vector<int> idx(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) idx[i] = i;
        double area = 0.0;
        for (int i = 0; i < n; ++i) {
            const Vec& p = P_[i];
            const Vec& q = P_[(i + 1) % n];
            area += p[0] * q[1] - q[0] * p[1];
        }
        double orient = area > 0 ? 1.0 : -1.0;
        auto inside = [&](const Vec& p, const Vec& a, const Vec& b, const Vec& c) {
            double d1 = cross(a, b, p) * orient, d2 = cross(b, c, p) * orient, d3 = cross(c, a, p) * orient;
            return d1 >= 0 && d2 >= 0 && d3 >= 0;
        };
        size_t pos = 0;
        size_t misses = 0;
        while (idx.size() > 3) {
            size_t m = idx.size();
            size_t i0 = (pos + m - 1) % m, i1 = pos % m, i2 = (pos + 1) % m;
            const Vec &a = P_[idx[i0]], &b = P_[idx[i1]], &c = P_[idx[i2]];
            bool ear = cross(a, b, c) * orient > 0;
            if (ear) {
                double lo0 = std::min({a[0], b[0], c[0]}), hi0 = std::max({a[0], b[0], c[0]});
                double lo1 = std::min({a[1], b[1], c[1]}), hi1 = std::max({a[1], b[1], c[1]});
                for (size_t k = 0; k < m && ear; ++k) {
                    if (k == i0 || k == i1 || k == i2) continue;
                    const Vec& p = P_[idx[k]];
                    if (p[0] < lo0 || p[0] > hi0 || p[1] < lo1 || p[1] > hi1) continue;
                    if (p == a || p == b || p == c) continue;
                    if (inside(p, a, b, c)) ear = false;
                }
            }
            if (!ear && misses < m) {
                ++misses;
                pos = (pos + 1) % m;
                continue;
            }
            if (!ear) degenerate_ = true;
            tris_.push_back({idx[i0], idx[i1], idx[i2]});
            idx.erase(idx.begin() + static_cast<long>(i1));
            misses = 0;
            pos = i1 == 0 ? 0 : i1 - 1;
        }
        tris_.push_back({idx[0], idx[1], idx[2]});
    }

    int cell(double v) const { return std::clamp(static_cast<int>((v + 1.0) * 0.5 * kGrid), 0, kGrid - 1); }

    void build_grid() {
        cells_.assign(static_cast<size_t>(kGrid * kGrid), {});
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            const auto& tr = tris_[t];
            double lo0 = 1e9, hi0 = -1e9, lo1 = 1e9, hi1 = -1e9;
            for (int v : tr) {
                lo0 = std::min(lo0, Q_[v][0]);
                hi0 = std::max(hi0, Q_[v][0]);
                lo1 = std::min(lo1, Q_[v][1]);
                hi1 = std::max(hi1, Q_[v][1]);
            }
            for (int i = cell(lo0); i <= cell(hi0); ++i)
                for (int j = cell(lo1); j <= cell(hi1); ++j) cells_[i * kGrid + j].push_back(t);
        }
    }

    std::array<double, 3> bary(int t, const Vec& q) const {
        const Vec &a = Q_[tris_[t][0]], &b = Q_[tris_[t][1]], &c = Q_[tris_[t][2]];
        double det = cross(a, b, c);
        double l1 = cross(q, b, c) / det, l2 = cross(a, q, c) / det;
        return {l1, l2, 1.0 - l1 - l2};
    }

    Vec to_p(const Vec& q) const {
        int best = -1;
        double score = -1e300;
        std::array<double, 3> bw{};
        auto consider = [&](int t) {
            auto l = bary(t, q);
            double m = std::min({l[0], l[1], l[2]});
            if (m > score) {
                score = m;
                best = t;
                bw = l;
            }
        };
        for (int t : cells_[cell(q[0]) * kGrid + cell(q[1])]) consider(t);
        if (score < -1e-9)
            for (int t = 0; t < static_cast<int>(tris_.size()); ++t) consider(t);
        const auto& tr = tris_[best];
        Vec p{0.0, 0.0};
        for (int v = 0; v < 3; ++v) {
            p[0] += bw[v] * P_[tr[v]][0];
            p[1] += bw[v] * P_[tr[v]][1];
        }
        return p;
    }
};

std::string format_chart_point(const ChartPoint& p) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d:%.17g:%.17g", p.c, p.u, p.s);
    return buf;
}

ChartPoint parse_chart_point(const std::string& text) {
    std::stringstream ss(text);
    std::string c, u, s;
    if (!std::getline(ss, c, ':') || !std::getline(ss, u, ':') || !std::getline(ss, s))
        throw std::invalid_argument("chart point must look like c:u:s");
    if (!c.empty() && (c[0] == 'C' || c[0] == 'c')) c = c.substr(1);
    ChartPoint p;
    try {
        size_t used = 0;
        p.c = std::stoi(c, &used);
        if (used != c.size()) throw std::invalid_argument(c);
        p.u = std::stod(u, &used);
        if (used != u.size()) throw std::invalid_argument(u);
        p.s = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("bad chart point '" + text + "'");
    }
    if (p.c < 0 || p.c > 2 || !(p.s >= 0.0 && p.s <= 1.0))
        throw std::invalid_argument("chart point out of range: " + text);
    p.u = wrap01(p.u);
    return p;
}

double smash_level(double eps, double s) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("smash needs 0 < eps < 1");
    if (s >= 1.0 - eps) return 1.0;
    return s / (1.0 - eps);
}

ChartPoint smash(double eps, const ChartPoint& p) { return {p.c, p.u, smash_level(eps, p.s)}; }

// ---------------------------------------------------------------- construction

DiskMap DiskMap::pants(double eps) {
    DiskMap dm;
    dm.kind_ = ChartKind::Pants;
    dm.family_ = "phi";
    dm.eps_ = eps;
    dm.param_ = eps;
    dm.chain_ = std::make_shared<const ChainMap>(make_phi_eps(eps));
    return dm;
}

namespace {

// maximal intervals where f differs from its envelope, refined by bisection
std::vector<Pocket> find_pockets(const Lift& f, Side side) {
    if (f.monotone()) return {};
    if (!f.is_piecewise() && f.turns()) {
        auto ci = climbing_intervals(f);
        double z0 = f.turns()->z0, y0 = f.turns()->y0;
        if (side == Side::Upper) return {{z0, ci.w0, f.eval(z0)}};
        double a = ci.w0_prime - 1.0, b = y0;
        while (a < f.x0()) {
            a += 1.0;
            b += 1.0;
        }
        return {{a, b, f.eval(y0)}};
    }
    Lift e = envelope(f, side);
    auto gap = [&](double x) { return std::abs(e.eval(x) - f.eval(x)) > 1e-11; };
    const int n = 8192;
    double x0 = f.x0();
    auto pos = [&](long j) { return x0 + (static_cast<double>(j) + 0.5) / n; };
    std::vector<char> in(n);
    for (int k = 0; k < n; ++k) in[k] = gap(pos(k));
    // refine an end between a point inside (gap) and one outside
    auto refine = [&](double inside, double outside, double ustar) {
        for (int it = 0; it < 80; ++it) {
            double m = 0.5 * (inside + outside);
            (gap(m) ? inside : outside) = m;
        }
        double lo = std::min(inside, outside) - 2.0 / n, hi = std::max(inside, outside) + 2.0 / n;
        double slo = f.eval(lo) - ustar, shi = f.eval(hi) - ustar;
        if (slo * shi < 0.0) {
            for (int it = 0; it < 100; ++it) {
                double m = 0.5 * (lo + hi);
                if ((f.eval(m) - ustar) * slo > 0)
                    lo = m;
                else
                    hi = m;
            }
            return 0.5 * (lo + hi);
        }
        return outside;
    };
    std::vector<Pocket> out;
    for (int k = 0; k < n; ++k) {
        if (!in[k] || in[(k + n - 1) % n]) continue;
        long len = 0;
        while (len < n && in[(k + len) % n]) ++len;
        if (len == n) break;
        double ustar = e.eval(pos(k + len / 2));
        double a = refine(pos(k), pos(k - 1), ustar);
        double b = refine(pos(k + len - 1), pos(k + len), ustar);
        while (a >= x0 + 1.0) {
            a -= 1.0;
            b -= 1.0;
        }
        while (a < x0) {
            a += 1.0;
            b += 1.0;
        }
        out.push_back({a, b, ustar + std::floor(f.eval(a) - ustar + 0.5)});
    }
    std::sort(out.begin(), out.end(), [](const Pocket& p, const Pocket& q) { return p.a < q.a; });
    return out;
}

std::vector<double> lift_breaks(const Lift& f, double a, double b) {
    std::vector<double> out;
    if (!f.is_piecewise()) {
        if (f.turns()) {
            for (double c : {f.turns()->z0, f.turns()->y0})
                for (int k = -1; k <= 2; ++k) out.push_back(c + k);
        }
        return out;
    }
    for (double x : f.breakpoints())
        for (int k = -1; k <= 2; ++k)
            if (x + k > a && x + k < b) out.push_back(x + k);
    return out;
}

}  // namespace

DiskMap DiskMap::annulus(const Lift& f, std::function<double(double)> height, std::string family,
                         double param, char variant, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("annulus chart needs 0 < eps < 1");
    DiskMap dm;
    dm.kind_ = ChartKind::Annulus;
    dm.family_ = std::move(family);
    dm.eps_ = eps;
    dm.param_ = param;
    dm.variant_ = variant;
    dm.lift_ = std::make_shared<const Lift>(f);
    dm.height_ = std::move(height);
    double mx = 0.0;
    for (int k = 0; k < 4096; ++k) mx = std::max(mx, std::abs(dm.height_(k / 4096.0)));
    dm.kappa_ = 0.8 * eps / std::max(mx, 1.0);
    dm.pockets_[1] = find_pockets(f, Side::Upper);
    dm.pockets_[0] = find_pockets(f, Side::Lower);
    for (int side = 0; side < 2; ++side) {
        auto& ps = dm.pockets_[side];
        dm.charts_[side].clear();
        for (const auto& p : ps) {
            auto lf = dm.lift_;
            auto h = dm.height_;
            double kap = dm.kappa_;
            auto gamma = [lf, h, kap](double x) { return Vec{lf->eval(x), kap * h(x)}; };
            dm.charts_[side].push_back(
                std::make_shared<const PocketChart>(gamma, p.a, p.b, lift_breaks(f, p.a, p.b)));
        }
        // exposed set: complement of the pockets mod 1
        auto& ex = dm.exposed_[side];
        ex.clear();
        if (ps.empty()) {
            ex.push_back({0.0, 1.0});
            continue;
        }
        for (size_t i = 0; i < ps.size(); ++i) {
            double lo = ps[i].b, hi = (i + 1 < ps.size()) ? ps[i + 1].a : ps[0].a + 1.0;
            if (hi - lo > 1e-12) ex.push_back({lo, hi});
        }
    }
    return dm;
}

DiskMap DiskMap::annulus_arnold(double t, double eps) {
    Lift f = make_arnold(t);
    auto h = [t](double x) { return t / kTwoPi * std::sin(kTwoPi * x); };
    return annulus(f, h, "arnold", t, 0, eps);
}

DiskMap DiskMap::five_piece(char variant, double eps) {
    Lift f = make_five_piece();
    if (variant == 'B' || variant == 'b') {
        auto h = [f](double x) {
            double y = wrap01(x);
            return f.eval(y) - y - 0.5;
        };
        return annulus(f, h, "five-piece", 0.0, 'B', eps);
    }
    if (variant != 'A' && variant != 'a') throw std::invalid_argument("five-piece variant must be A or B");
    const double a = 0.5;
    auto h = [f, a](double x) {
        double y = wrap01(x);
        double u = f.eval(y);
        if (y <= 0.125) return -1.0 - (13.0 * a / 7.0) * (u + 0.875);
        if (y <= 0.375) return u - y;
        return -1.0 - a * (u + 0.625);
    };
    DiskMap dm = annulus(f, h, "five-piece", 0.0, 'A', eps);
    // inner side: the fixed arc is bottom-most, so only (0, x*) is folded away from C0,
    // x* on the last increasing piece with f(x*) = 0
    double xs = 0.375 + 5.0 / 72.0;
    dm.pockets_[0] = {{1.0, 1.0 + xs, 1.0}};
    auto lf = dm.lift_;
    double kap = dm.kappa_;
    auto gamma = [lf, h, kap](double x) { return Vec{lf->eval(x), kap * h(x)}; };
    dm.charts_[0] = {std::make_shared<const PocketChart>(gamma, 1.0, 1.0 + xs, lift_breaks(f, 1.0, 1.0 + xs))};
    dm.exposed_[0] = {{xs, 1.0}};
    return dm;
}

// ---------------------------------------------------------------- pants geometry

namespace {

struct PantsGeom {
    double eps, X;
    explicit PantsGeom(double e) : eps(e), X(e / (2.0 * (1.0 - 2.0 * e))) {}
    // depth of the main strand at quotient offset w in [0, 1/2]
    double main(double w) const {
        if (w <= X) return eps * w / (8.0 * X);
        return eps / 8.0 + (w - X) / (0.5 - X) * eps / 8.0;
    }
    double fold_out(double w) const { return eps * (0.25 + w / (2.0 * X)); }
    double fold_back(double w) const { return 0.75 * eps * (w / X); }
    // graph image of circle 0 at t, as (U, depth)
    Vec image0(double t) const {
        if (t <= 1.0 - 2.0 * eps) {
            double u = t / (2.0 * (1.0 - 2.0 * eps));
            return {u, main(u)};
        }
        if (t <= 1.0 - eps) {
            double w = X * (t - (1.0 - 2.0 * eps)) / eps;
            return {0.5 + w, fold_out(w)};
        }
        double w = X * (1.0 - t) / eps;
        return {0.5 + w, fold_back(w)};
    }
};

}  // namespace

ChainPoint DiskMap::anchor(int c, double u) const {
    u = wrap01(u);
    if (kind_ == ChartKind::Annulus) {
        if (c != 0 && c != 1) throw std::invalid_argument("annulus has components 0 and 1");
        return {0, u};
    }
    switch (c) {
    case 0: return {0, wrap01(1.0 - u)};
    case 1: return {1, wrap01(1.0 - u)};
    case 2: return u < 0.5 ? ChainPoint{0, 2.0 * u} : ChainPoint{1, 2.0 * u - 1.0};
    default: throw std::invalid_argument("pants has components 0, 1, 2");
    }
}

ChainPoint DiskMap::family_map(ChainPoint y) const {
    if (kind_ == ChartKind::Pants) return chain_->eval(y);
    return {0, wrap01(lift_->eval(y.t))};
}

std::optional<ChartPoint> DiskMap::chart_of(ChainPoint q, int side) const {
    if (kind_ == ChartKind::Annulus) {
        if (side != 0 && side != 1) return std::nullopt;
        return ChartPoint{side, wrap01(q.t), 1.0};
    }
    q = chain_->canonical(q);
    double t = wrap01(q.t);
    bool junction = t < 1e-15 || t > 1.0 - 1e-15;
    if (side == 2) return ChartPoint{2, wrap01(0.5 * q.i + 0.5 * t), 1.0};
    if (side == 0 || side == 1) {
        if (q.i != side && !junction) return std::nullopt;
        return ChartPoint{side, wrap01(1.0 - t), 1.0};
    }
    return std::nullopt;
}

ChartPoint DiskMap::graph_image(ChainPoint y) const {
    if (kind_ == ChartKind::Annulus) {
        double x = wrap01(y.t);
        double h = kappa_ * height_(x);
        double u = wrap01(lift_->eval(x));
        if (h >= 0.0) return {1, u, 1.0 - h};
        return {0, u, 1.0 + h};
    }
    PantsGeom g(eps_);
    y = chain_->canonical(y);
    Vec v = g.image0(wrap01(y.t));
    double u = v[0] + 0.5 * y.i;
    return {2, wrap01(u), 1.0 - v[1]};
}

ChartPoint DiskMap::unwrap(const ChartPoint& p) const {
    return kind_ == ChartKind::Pants ? unwrap_pants(p) : unwrap_annulus(p);
}

ChartPoint DiskMap::unwrap_pants(const ChartPoint& in) const {
    PantsGeom g(eps_);
    const double eps = eps_, X = g.X;
    double s = clamp01(in.s);
    double u = wrap01(in.u);
    if (in.c == 2) {
        int h = u >= 0.5 ? 1 : 0;
        double t = 2.0 * (u - 0.5 * h);
        if (t >= eps && t <= 1.0 - eps) {
            Vec v = g.image0(t);
            return {2, wrap01(v[0] + 0.5 * h), s * (1.0 - v[1])};
        }
        // fibres around a cusp: the one at U = 1/2 (k = 0) or at U = 0 (k = 1)
        int k = (u > 0.5 - 0.5 * eps && u < 0.5 + 0.5 * eps) ? 0 : 1;
        double v = k == 0 ? u : wrap01(u + 0.5);
        double lam = (0.5 + 0.5 * eps - v) / eps;
        double sig = 1.0 - std::min(lam, 1.0 - lam);
        double w, dep;
        if (s <= sig) {
            double dr = g.main(X) + lam * (g.fold_back(X) - g.main(X));
            w = X;
            dep = 1.0 - (s / sig) * (1.0 - dr);
        } else {
            double tau = (s - sig) / (1.0 - sig);
            double wg = v < 0.5 ? X * (1.0 - 2.0 * v) / eps : X * (2.0 * v - 1.0) / eps;
            // the pocket is a triangle in (w, depth); straight leaves stay continuous at the cusp
            double dg = v < 0.5 ? g.fold_back(wg) : g.main(wg);
            double dr = g.main(X) + lam * (g.fold_back(X) - g.main(X));
            w = (1.0 - tau) * X + tau * wg;
            dep = (1.0 - tau) * dr + tau * dg;
        }
        return {2, wrap01(0.5 + w + 0.5 * k), 1.0 - dep};
    }
    if (in.c != 0 && in.c != 1) throw std::invalid_argument("pants has components 0, 1, 2");
    if (s <= 0.5) return {in.c, u, 2.0 * s};
    double lam = 2.0 * s - 1.0;
    double t = 1.0 - u;
    Vec pt;
    if (t <= 1.0 - 2.0 * eps) {
        pt = lerp({t / 2.0, 0.0}, {t / (2.0 * (1.0 - 2.0 * eps)), 1.0}, lam);
    } else if (t <= 1.0 - eps) {
        pt = lerp({t / 2.0, 0.0}, {0.5 + X * (t - (1.0 - 2.0 * eps)) / eps, 1.0}, lam);
    } else {
        double mu = (1.0 - t) / eps;
        Vec A{0.5 - 0.5 * eps * mu, 0.0}, B{0.5 + mu * X, mu}, C{0.5 + mu * X, 0.0};
        double l1 = std::hypot(B[0] - A[0], B[1] - A[1]);
        double l2 = mu * (1.0 - mu);
        double tot = l1 + l2;
        if (tot <= 0.0) {
            pt = A;
        } else {
            double d = lam * tot;
            pt = d <= l1 ? lerp(A, B, l1 > 0 ? d / l1 : 0.0) : lerp(B, C, (d - l1) / l2);
        }
    }
    double U = pt[0], eta = pt[1], dep;
    if (U <= 0.5) {
        dep = eta * g.main(U);
    } else {
        double w = U - 0.5;
        dep = g.fold_back(w) + eta * (g.fold_out(w) - g.fold_back(w));
    }
    return {2, wrap01(U + 0.5 * in.c), 1.0 - dep};
}

ChartPoint DiskMap::unwrap_annulus(const ChartPoint& in) const {
    if (in.c != 0 && in.c != 1) throw std::invalid_argument("annulus has components 0 and 1");
    double s = clamp01(in.s), z = 1.0 - s;
    double x = wrap01(in.u);
    double sg = in.c == 1 ? 1.0 : -1.0;
    const auto& ps = pockets_[in.c];
    double U = 0.0, h = 0.0;
    bool done = false;
    for (size_t i = 0; i < ps.size() && !done; ++i) {
        const Pocket& pk = ps[i];
        for (int k = -1; k <= 2; ++k) {
            double xl = x + k;
            if (!(xl > pk.a && xl < pk.b)) continue;
            double nu = (pk.b - xl) / (pk.b - pk.a);
            double zx = std::min(nu, 1.0 - nu);
            if (z < zx) {
                Vec p = charts_[in.c][i]->leaf(xl, z / zx);
                U = p[0];
                h = p[1];
            } else {
                double hv = (1.0 - nu) * kappa_ * height_(pk.b) + nu * kappa_ * height_(pk.a);
                U = pk.ustar;
                h = hv + (z - zx) / (1.0 - zx) * (sg - hv);
            }
            done = true;
            break;
        }
    }
    if (!done) {
        U = lift_->eval(x);
        double hx = kappa_ * height_(x);
        h = hx + z * (sg - hx);
    }
    if (h >= 0.0) return {1, wrap01(U), 1.0 - h};
    return {0, wrap01(U), 1.0 + h};
}

double DiskMap::boundary_u(int c, double u) const {
    if (kind_ == ChartKind::Annulus) return unwrap_annulus({c, u, 0.0}).u;
    if (c != 2) return wrap01(u);
    return unwrap_pants({2, u, 0.0}).u;
}

ChartPoint DiskMap::unwrap_extended(const ChartPoint& p) const {
    double s = clamp01(p.s);
    double lo = 1.0 - eps_;
    if (s < lo) {
        // radial below the collar, following the boundary motion of the unwrapping
        ChartPoint b = unwrap({p.c, p.u, 0.0});
        return {b.c, b.u, s};
    }
    ChartPoint q = unwrap({p.c, p.u, (s - lo) / eps_});
    return {q.c, q.u, lo + eps_ * q.s};
}

ChartPoint DiskMap::psi(const ChartPoint& p) const { return smash(eps_, unwrap_extended(p)); }

ChartPoint DiskMap::theta(const ChartPoint& p, double r) const {
    ChartPoint q = unwrap(p);
    q.s = 1.0 - r * (1.0 - q.s);
    return q;
}

std::optional<ChainPoint> DiskMap::on_graph(const ChartPoint& p, double tol) const {
    if (p.s < 1.0 - tol) return std::nullopt;
    return anchor(p.c, p.u);
}

bool DiskMap::same_point(const ChartPoint& a, const ChartPoint& b, double tol) const {
    auto ga = on_graph(a, tol), gb = on_graph(b, tol);
    if (ga && gb) {
        if (kind_ == ChartKind::Pants) return chain_->same_point(*ga, *gb, tol);
        double d = std::abs(ga->t - gb->t);
        return std::min(d, 1.0 - d) <= tol;
    }
    if (ga || gb) return false;
    if (a.c != b.c) return false;
    double d = std::abs(wrap01(a.u) - wrap01(b.u));
    if (a.s <= tol && b.s <= tol && d <= tol) return true;
    return std::min(d, 1.0 - d) <= tol && std::abs(a.s - b.s) <= tol;
}

std::vector<ChartPoint> DiskMap::radial_arc(ChainPoint q, int side, int samples) const {
    auto cp = chart_of(q, side);
    if (!cp) throw NoAnchorOnSide("point has no radial arc from component " + std::to_string(side));
    samples = std::max(samples, 2);
    std::vector<ChartPoint> arc;
    for (int k = 0; k < samples; ++k)
        arc.push_back({cp->c, cp->u, static_cast<double>(k) / (samples - 1)});
    return arc;
}

std::vector<std::array<double, 2>> DiskMap::radial_intervals(int side) const {
    if (kind_ == ChartKind::Pants) {
        if (side != 2) return {};
        double e = eps_;
        return {{0.5 * e, 0.5 - 0.5 * e}, {0.5 + 0.5 * e, 1.0 - 0.5 * e}};
    }
    if (side != 0 && side != 1) return {};
    return exposed_[side];
}

std::array<double, 2> DiskMap::xy(const ChartPoint& p) const {
    double s = clamp01(p.s);
    if (kind_ == ChartKind::Annulus) {
        double r = p.c == 0 ? 1.0 + s : 3.0 - s;
        double a = kTwoPi * p.u;
        return {r * std::cos(a), r * std::sin(a)};
    }
    if (p.c == 2) {
        double u = wrap01(p.u);
        Vec gp = chain_xy(*chain_, anchor(2, u));
        double th;
        if (std::hypot(gp[0], gp[1]) < 1e-12)
            th = (u < 0.25 || u > 0.75) ? 1.5 * std::numbers::pi : 0.5 * std::numbers::pi;
        else
            th = std::atan2(gp[1], gp[0]);
        Vec bp{3.0 * std::cos(th), 3.0 * std::sin(th)};
        return lerp(bp, gp, s);
    }
    double a = kTwoPi * (1.0 - p.u), r = 0.5 + 0.5 * s;
    if (p.c == 0) return {-1.0 + r * std::cos(a), -r * std::sin(a)};
    return {1.0 - r * std::cos(a), r * std::sin(a)};
}

std::optional<ChartPoint> DiskMap::chart_at(const std::array<double, 2>& q) const {
    double x = q[0], y = q[1];
    double rho = std::hypot(x, y);
    if (rho > 3.0) return std::nullopt;
    if (kind_ == ChartKind::Annulus) {
        if (rho < 1.0) return std::nullopt;
        double u = wrap01(std::atan2(y, x) / kTwoPi);
        if (rho <= 2.0) return ChartPoint{0, u, rho - 1.0};
        return ChartPoint{1, u, 3.0 - rho};
    }
    double d0 = std::hypot(x + 1.0, y), d1 = std::hypot(x - 1.0, y);
    if (d0 < 1.0 || d1 < 1.0) {
        int c = d0 < 1.0 ? 0 : 1;
        double r = c == 0 ? d0 : d1;
        if (r < 0.5) return std::nullopt;
        double a = c == 0 ? std::atan2(-y, x + 1.0) : std::atan2(y, 1.0 - x);
        return ChartPoint{c, wrap01(1.0 - a / kTwoPi), 2.0 * r - 1.0};
    }
    // outer part: rays from the origin through the figure eight
    if (rho < 1e-15) return ChartPoint{2, 0.25, 1.0};
    double ct = x / rho, st = y / rho;
    double g = 2.0 * std::abs(ct);
    double s = (3.0 - rho) / (3.0 - g);
    double u;
    if (g < 1e-15) {
        u = st < 0.0 ? 0.0 : 0.5;
    } else if (ct < 0.0) {
        double gx = g * ct, gy = g * st;
        u = 0.5 * wrap01(std::atan2(-gy, gx + 1.0) / kTwoPi);
    } else {
        double gx = g * ct, gy = g * st;
        u = 0.5 + 0.5 * wrap01(std::atan2(gy, 1.0 - gx) / kTwoPi);
    }
    return ChartPoint{2, u, std::clamp(s, 0.0, 1.0)};
}

double DiskMap::height(double x) const {
    if (kind_ != ChartKind::Annulus) throw std::logic_error("height is defined on the annulus");
    return kappa_ * height_(x);
}

const std::vector<Pocket>& DiskMap::pockets(int side) const {
    if (kind_ != ChartKind::Annulus || side < 0 || side > 1) throw std::logic_error("no pockets here");
    return pockets_[side];
}

}  // namespace wl
