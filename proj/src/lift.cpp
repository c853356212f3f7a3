#include "wadalab/lift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double bisect(const Lift& f, double lo, double hi, double target) {
    double flo = f.eval(lo) - target;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f.eval(mid) - target;
        if ((fm <= 0.0) == (flo <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Lift Lift::piecewise(std::vector<double> xs, std::vector<double> vs, std::optional<Turns> turns) {
    if (xs.size() < 2 || xs.size() != vs.size())
        throw std::invalid_argument("lift needs matching breakpoints and values");
    for (size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("breakpoints must increase");
    if (std::abs(xs.back() - xs.front() - 1.0) > 1e-12)
        throw std::invalid_argument("breakpoints must span one period");
    if (std::abs(vs.back() - vs.front() - 1.0) > 1e-9)
        throw std::invalid_argument("lift is not degree one");
    xs.back() = xs.front() + 1.0;
    vs.back() = vs.front() + 1.0;
    Lift f;
    f.kind_ = LiftKind::Piecewise;
    f.xs_ = std::move(xs);
    f.vs_ = std::move(vs);
    f.turns_ = turns;
    return f;
}

Lift Lift::arnold(double t) {
    if (t < 0.0) throw std::invalid_argument("arnold parameter must be >= 0");
    Lift f;
    f.kind_ = LiftKind::Arnold;
    f.t_ = t;
    if (t > 1.0) {
        double a = std::acos(-1.0 / t) / kTwoPi;
        f.turns_ = Turns{a, 1.0 - a};
    }
    return f;
}

Lift Lift::identity() { return piecewise({0.0, 1.0}, {0.0, 1.0}); }

Lift Lift::rotation(double a) { return piecewise({0.0, 1.0}, {a, a + 1.0}); }

Lift Lift::with_plateau(Plateau p) const {
    Lift f = *this;
    f.plateau_ = p;
    f.turns_.reset();
    return f;
}

Lift Lift::with_turns(Turns t) const {
    Lift f = *this;
    f.turns_ = t;
    return f;
}

Lift Lift::with_symmetry(int d) const {
    if (d < 1) throw std::invalid_argument("symmetry order must be positive");
    if (d > 1 && kind_ != LiftKind::Piecewise)
        throw std::invalid_argument("symmetry order only for piecewise lifts");
    double s = 1.0 / d;
    for (double x : xs_)
        if (std::abs(eval(x + s) - eval(x) - s) > 1e-9)
            throw std::invalid_argument("lift does not commute with the 1/d shift");
    Lift f = *this;
    f.symmetry_ = d;
    return f;
}

double Lift::eval_closed(double x) const {
    if (plateau_) {
        double k = std::floor(x - plateau_->a);
        double r = x - k;
        if (r <= plateau_->b) return plateau_->c + k;
    }
    return x + t_ / kTwoPi * std::sin(kTwoPi * x);
}

double Lift::eval(double x) const {
    if (kind_ == LiftKind::Arnold) return eval_closed(x);
    double k = std::floor(x - xs_.front());
    double r = x - k;
    if (r >= xs_.back()) {
        r -= 1.0;
        k += 1.0;
    }
    auto it = std::upper_bound(xs_.begin(), xs_.end(), r);
    size_t i = static_cast<size_t>(it - xs_.begin());
    if (i == 0) i = 1;
    if (i >= xs_.size()) i = xs_.size() - 1;
    double xa = xs_[i - 1], xb = xs_[i];
    double w = (r - xa) / (xb - xa);
    return vs_[i - 1] + w * (vs_[i] - vs_[i - 1]) + k;
}

double Lift::slope(double x) const {
    if (kind_ == LiftKind::Arnold) {
        if (plateau_) {
            double k = std::floor(x - plateau_->a);
            if (x - k < plateau_->b) return 0.0;
        }
        return 1.0 + t_ * std::cos(kTwoPi * x);
    }
    double k = std::floor(x - xs_.front());
    double r = x - k;
    auto it = std::upper_bound(xs_.begin(), xs_.end(), r);
    size_t i = std::clamp<size_t>(static_cast<size_t>(it - xs_.begin()), 1, xs_.size() - 1);
    return (vs_[i] - vs_[i - 1]) / (xs_[i] - xs_[i - 1]);
}

bool Lift::monotone() const {
    if (kind_ == LiftKind::Arnold) return t_ <= 1.0 || plateau_.has_value();
    for (size_t i = 1; i < vs_.size(); ++i)
        if (vs_[i] < vs_[i - 1]) return false;
    return true;
}

std::vector<double> Lift::monotone_cuts() const {
    if (kind_ == LiftKind::Piecewise) return xs_;
    std::vector<double> c{0.0, 1.0};
    auto add = [&](double v) {
        double r = v - std::floor(v);
        if (r > 0.0 && r < 1.0) c.push_back(r);
    };
    if (plateau_) {
        add(plateau_->a);
        add(plateau_->b);
    } else if (t_ > 1.0) {
        add(turns_->z0);
        add(turns_->y0);
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
}

nlohmann::json Lift::to_json() const {
    nlohmann::json j;
    if (kind_ == LiftKind::Arnold) {
        j["family"] = "arnold";
        j["t"] = t_;
    } else {
        j["breakpoints"] = xs_;
        j["values"] = vs_;
    }
    if (turns_) j["turns"] = {{"z0", turns_->z0}, {"y0", turns_->y0}};
    if (plateau_) j["plateau"] = {plateau_->a, plateau_->b, plateau_->c};
    if (symmetry_ > 1) j["symmetry"] = symmetry_;
    return j;
}

Lift Lift::from_json(const nlohmann::json& j) {
    Lift f;
    if (j.contains("family") && j["family"] == "arnold") {
        f = arnold(j.at("t").get<double>());
    } else {
        f = piecewise(j.at("breakpoints").get<std::vector<double>>(),
                      j.at("values").get<std::vector<double>>());
    }
    if (j.contains("plateau")) {
        auto p = j["plateau"].get<std::vector<double>>();
        f = f.with_plateau({p.at(0), p.at(1), p.at(2)});
    }
    if (j.contains("turns") && !j["turns"].is_null())
        f.turns_ = Turns{j["turns"].at("z0").get<double>(), j["turns"].at("y0").get<double>()};
    if (j.contains("symmetry")) f = f.with_symmetry(j["symmetry"].get<int>());
    return f;
}

double eval(const Lift& f, double x) { return f.eval(x); }

OrbitPoint step_split(const Lift& f, OrbitPoint p) {
    double v = f.eval(p.frac);
    double k = std::floor(v);
    return {v - k, p.whole + static_cast<long long>(k)};
}

OrbitPoint iterate_split(const Lift& f, OrbitPoint p, long long n) {
    for (long long i = 0; i < n; ++i) p = step_split(f, p);
    return p;
}

double iterate(const Lift& f, double x, long long n) {
    double k = std::floor(x);
    OrbitPoint p = iterate_split(f, {x - k, static_cast<long long>(k)}, n);
    return p.value();
}

std::vector<double> preimages(const Lift& f, double y) {
    std::vector<double> out;
    auto cuts = f.monotone_cuts();
    double shift = f.x0() - cuts.front();
    for (auto& c : cuts) c += shift;
    const std::vector<double>* vals = f.is_piecewise() ? &f.values() : nullptr;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        double fa = vals ? (*vals)[i] : f.eval(a);
        double fb = vals ? (*vals)[i + 1] : f.eval(b);
        double lo = std::min(fa, fb), hi = std::max(fa, fb);
        for (double k = std::ceil(lo - y); y + k <= hi; k += 1.0) {
            double target = y + k;
            double x;
            if (fa == fb) {
                out.push_back(a - k);
                if (b < f.x0() + 1.0) out.push_back(b - k);
                continue;
            }
            if (vals) {
                x = a + (target - fa) / (fb - fa) * (b - a);
            } else {
                x = bisect(f, a, b, target);
            }
            if (x >= f.x0() + 1.0) continue;
            out.push_back(x - k);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double p, double q) { return std::abs(p - q) < 1e-13; }),
              out.end());
    return out;
}

Lift reduce_symmetry(const Lift& f) {
    int d = f.symmetry();
    if (d == 1) return f;
    const auto& xs = f.breakpoints();
    double x0 = xs.front(), end = x0 + 1.0 / d;
    std::vector<double> hx, hv;
    for (double x : xs) {
        if (x > end - 1e-15) break;
        hx.push_back(d * x);
        hv.push_back(d * f.eval(x));
    }
    hx.push_back(d * x0 + 1.0);
    hv.push_back(hv.front() + 1.0);
    std::optional<Turns> t;
    if (f.turns()) t = Turns{d * f.turns()->z0, d * f.turns()->y0};
    return Lift::piecewise(std::move(hx), std::move(hv), t);
}

Lift expand_symmetry(const Lift& h, int d) {
    if (d == 1) return h;
    const auto& hx = h.breakpoints();
    const auto& hv = h.values();
    std::vector<double> xs, vs;
    for (int k = 0; k < d; ++k)
        for (size_t i = 0; i + 1 < hx.size(); ++i) {
            xs.push_back((hx[i] + k) / d);
            vs.push_back((hv[i] + k) / d);
        }
    xs.push_back(xs.front() + 1.0);
    vs.push_back(vs.front() + 1.0);
    std::optional<Turns> t;
    if (h.turns()) t = Turns{h.turns()->z0 / d, h.turns()->y0 / d};
    return Lift::piecewise(std::move(xs), std::move(vs), t).with_symmetry(d);
}

Lift compose(const Lift& f, const Lift& g) {
    if (!f.is_piecewise() || !g.is_piecewise())
        throw std::invalid_argument("exact composition needs piecewise lifts");
    const auto& gx = g.breakpoints();
    const auto& gv = g.values();
    const auto& fx = f.breakpoints();
    const auto& fv = f.values();
    const size_t m = fx.size() - 1;
    std::vector<double> xs, vs;
    xs.reserve(gx.size() * 2);
    vs.reserve(gx.size() * 2);
    xs.push_back(gx.front());
    vs.push_back(f.eval(gv.front()));
    for (size_t i = 0; i + 1 < gx.size(); ++i) {
        double a = gx[i], b = gx[i + 1], va = gv[i], vb = gv[i + 1];
        if (va != vb) {
            double lo = std::min(va, vb), hi = std::max(va, vb);
            // f breakpoints inside (lo, hi), listed in the direction of travel
            double base = std::floor(lo - fx.front());
            std::vector<std::pair<double, double>> hits;
            for (double k = base;; k += 1.0) {
                bool past = false;
                for (size_t j = 0; j < m; ++j) {
                    double p = fx[j] + k;
                    if (p >= hi) {
                        past = true;
                        break;
                    }
                    if (p > lo) hits.emplace_back(p, fv[j] + k);
                }
                if (past) break;
            }
            if (vb < va) std::reverse(hits.begin(), hits.end());
            for (auto& [p, fp] : hits) {
                double x = a + (p - va) / (vb - va) * (b - a);
                if (x <= xs.back() || x >= b) continue;
                xs.push_back(x);
                vs.push_back(fp);
            }
        }
        xs.push_back(b);
        vs.push_back(i + 2 == gx.size() ? vs.front() + 1.0 : f.eval(vb));
    }
    return Lift::piecewise(std::move(xs), std::move(vs));
}

Lift power(const Lift& f, int n) {
    Lift r = Lift::piecewise({f.x0(), f.x0() + 1.0}, {f.x0(), f.x0() + 1.0});
    for (int i = 0; i < n; ++i) r = compose(f, r);
    return r;
}

}  // namespace wl
