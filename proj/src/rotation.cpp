#include "wadalab/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wl {

namespace {

constexpr long long kMaxIter = 100000000LL;

// solve f(x) = target on [a, b] where f is nondecreasing there
double solve_increasing(const Lift& f, double a, double b, double target) {
    double lo = a, hi = b;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f.eval(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    // bisection keeps f(hi) >= target; prefer hi when it is the exact hit
    return std::abs(f.eval(lo) - target) < std::abs(f.eval(hi) - target) ? lo : hi;
}

// smallest x in [a, b] with f(x) >= target, f nondecreasing there
double solve_leftmost(const Lift& f, double a, double b, double target) {
    double lo = a, hi = b;
    if (f.eval(lo) >= target) return lo;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f.eval(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

// largest x in [a, b] with f(x) <= target, f nondecreasing there
double solve_increasing_sup(const Lift& f, double a, double b, double target) {
    double lo = a, hi = b;
    if (f.eval(hi) <= target) return hi;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f.eval(mid) <= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

Lift overlay(const Lift& f, double a, double b, double c) {
    // piecewise lift equal to c on [a,b] (mod 1) and f elsewhere, starting at a
    std::vector<double> xs{a, b}, vs{c, c};
    double k = std::floor(b - f.x0());
    const auto& fx = f.breakpoints();
    const auto& fv = f.values();
    size_t m = fx.size() - 1;
    for (double kk = k - 1.0; kk <= k + 1.0; kk += 1.0) {
        for (size_t j = 0; j < m; ++j) {
            double p = fx[j] + kk;
            if (p > b && p < a + 1.0) {
                xs.push_back(p);
                vs.push_back(fv[j] + kk);
            }
        }
    }
    std::vector<size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin() + 2, idx.end(), [&](size_t i, size_t j) { return xs[i] < xs[j]; });
    std::vector<double> sx, sv;
    for (size_t i : idx) {
        if (!sx.empty() && xs[i] <= sx.back()) continue;
        sx.push_back(xs[i]);
        sv.push_back(vs[i]);
    }
    sx.push_back(a + 1.0);
    sv.push_back(c + 1.0);
    return Lift::piecewise(std::move(sx), std::move(sv));
}

Lift upper_piecewise(const Lift& f) {
    const auto& fx = f.breakpoints();
    const auto& fv = f.values();
    size_t m = fx.size() - 1;
    size_t im = 0;
    for (size_t i = 1; i < m; ++i)
        if (fv[i] > fv[im]) im = i;
    std::vector<double> xs{fx[im]}, vs{fv[im]};
    double cur = fv[im];
    for (size_t s = 0; s < m; ++s) {
        size_t i = (im + s) % m;
        double k = (im + s >= m) ? 1.0 : 0.0;
        double xa = fx[i] + k, va = fv[i] + k, xb = fx[i + 1] + k, vb = fv[i + 1] + k;
        if (vb > cur && va < cur) {
            double xc = xa + (cur - va) / (vb - va) * (xb - xa);
            if (xc > xs.back() && xc < xb) {
                xs.push_back(xc);
                vs.push_back(cur);
            }
        }
        cur = std::max(cur, vb);
        xs.push_back(xb);
        vs.push_back(cur);
    }
    return Lift::piecewise(std::move(xs), std::move(vs));
}

Lift lower_piecewise(const Lift& f) {
    const auto& fx = f.breakpoints();
    const auto& fv = f.values();
    size_t m = fx.size() - 1;
    size_t im = 0;
    for (size_t i = 1; i < m; ++i)
        if (fv[i] < fv[im]) im = i;
    // walk backwards from x_im + 1 down to x_im
    std::vector<double> xs{fx[im] + 1.0}, vs{fv[im] + 1.0};
    double cur = fv[im] + 1.0;
    for (size_t s = 0; s < m; ++s) {
        // piece ending at index (im - s) shifted by one period, going left
        long long e = static_cast<long long>(im) - static_cast<long long>(s);
        double k = 1.0;
        while (e <= 0) {
            e += static_cast<long long>(m);
            k -= 1.0;
        }
        size_t ib = static_cast<size_t>(e), ia = ib - 1;
        double xa = fx[ia] + k, va = fv[ia] + k, xb = fx[ib] + k, vb = fv[ib] + k;
        if (va < cur && vb > cur) {
            double xc = xb + (cur - vb) / (va - vb) * (xa - xb);
            if (xc < xs.back() && xc > xa) {
                xs.push_back(xc);
                vs.push_back(cur);
            }
        }
        cur = std::min(cur, va);
        xs.push_back(xa);
        vs.push_back(cur);
    }
    std::reverse(xs.begin(), xs.end());
    std::reverse(vs.begin(), vs.end());
    return Lift::piecewise(std::move(xs), std::move(vs));
}

std::optional<Rational> reduce_check(double lo, double hi, long long q, double slack) {
    double p = std::ceil(lo - slack);
    if (p > hi + slack) return std::nullopt;
    long long pi = static_cast<long long>(p);
    if (std::gcd(pi < 0 ? -pi : pi, q) != 1 && !(pi == 0 && q == 1)) return std::nullopt;
    return Rational{pi, q};
}

}  // namespace

bool in_translate(double x, double a, double b, double tol, double period) {
    double k = period * std::floor((x - a + tol) / period);
    double r = x - k;
    return r >= a - tol && r <= b + tol;
}

void check_two_turn(const Lift& f) {
    if (f.symmetry() > 1) return check_two_turn(reduce_symmetry(f));
    if (!f.turns()) throw PreconditionError("lift has no two-turn markers");
    double z0 = f.turns()->z0, y0 = f.turns()->y0;
    if (!(y0 > z0 && y0 < z0 + 1.0)) throw PreconditionError("turn markers out of order");
    const int n = 512;
    double prev = f.eval(z0);
    for (int i = 1; i <= n; ++i) {
        double x = z0 + (y0 - z0) * i / n;
        double v = f.eval(x);
        if (v > prev + 1e-12) throw PreconditionError("piece [z0,y0] is not nonincreasing");
        prev = v;
    }
    for (int i = 1; i <= n; ++i) {
        double x = y0 + (z0 + 1.0 - y0) * i / n;
        double v = f.eval(x);
        if (v < prev - 1e-12) throw PreconditionError("piece [y0,z0+1] is not nondecreasing");
        prev = v;
    }
}

std::optional<Rational> certify_rational(const Lift& m, int max_q) {
    if (m.is_piecewise()) {
        Lift p = m;
        for (int q = 1; q <= max_q; ++q) {
            if (q > 1) p = compose(m, p);
            const auto& xs = p.breakpoints();
            const auto& vs = p.values();
            double lo = vs[0] - xs[0], hi = lo;
            for (size_t i = 1; i < xs.size(); ++i) {
                double d = vs[i] - xs[i];
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            if (auto r = reduce_check(lo, hi, q, 1e-11)) return r;
            if (xs.size() > 2000000) break;
        }
        return std::nullopt;
    }
    const int grid = 4096;
    std::vector<double> x0(grid), y(grid);
    for (int i = 0; i < grid; ++i) x0[i] = y[i] = static_cast<double>(i) / grid;
    for (double c : m.monotone_cuts()) {
        if (c > 0.0 && c < 1.0) {
            x0.push_back(c);
            y.push_back(c);
        }
    }
    for (int q = 1; q <= max_q; ++q) {
        double lo = 1e300, hi = -1e300;
        for (size_t i = 0; i < y.size(); ++i) {
            y[i] = m.eval(y[i]);
            lo = std::min(lo, y[i] - x0[i]);
            hi = std::max(hi, y[i] - x0[i]);
        }
        if (auto r = reduce_check(lo, hi, q, 1e-11)) return r;
    }
    return std::nullopt;
}

RotationEstimate rot_monotone(const Lift& m, double tol, int max_q) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (!m.monotone()) throw PreconditionError("rot_monotone needs a monotone lift");
    long long n = static_cast<long long>(std::ceil(1.0 / tol));
    n = std::clamp(n, 1LL, kMaxIter);
    const double margin = 1e-14;
    double x = m.x0();
    double fl = std::floor(x);
    auto run = [&](double push) {
        OrbitPoint p{x - fl, static_cast<long long>(fl)};
        for (long long i = 0; i < n; ++i) {
            double v = m.eval(p.frac) + push;
            double k = std::floor(v);
            p = {v - k, p.whole + static_cast<long long>(k)};
        }
        return ((static_cast<double>(p.whole) - fl) + (p.frac - (x - fl))) / static_cast<double>(n);
    };
    double hi = run(margin), lo = run(-margin);
    RotationEstimate r;
    r.iterations = n;
    r.bracket_lo = lo - 1.0 / static_cast<double>(n);
    r.bracket_hi = hi + 1.0 / static_cast<double>(n);
    r.value = 0.5 * (r.bracket_lo + r.bracket_hi);
    r.numeric = 0.5 * (lo + hi);
    r.error_bound = 0.5 * (r.bracket_hi - r.bracket_lo);
    if (max_q > 0) {
        if (auto q = certify_rational(m, max_q)) {
            double v = q->value();
            if (v >= r.bracket_lo - 1e-12 && v <= r.bracket_hi + 1e-12) {
                r.exact = q;
                r.value = v;
                r.numeric = std::abs(hi - v) <= std::abs(lo - v) ? hi : lo;
                r.error_bound = 1.0 / static_cast<double>(n);
            }
        }
    }
    return r;
}

Lift pouring(const Lift& f, Side side) {
    if (f.symmetry() > 1) return expand_symmetry(pouring(reduce_symmetry(f), side), f.symmetry());
    check_two_turn(f);
    auto ci = climbing_intervals(f);
    double z0 = f.turns()->z0, y0 = f.turns()->y0;
    double a, b, c;
    if (side == Side::Upper) {
        a = z0;
        b = ci.w0;
        c = f.eval(z0);
    } else {
        a = ci.w0_prime - 1.0;
        b = y0;
        c = f.eval(y0);
    }
    if (f.is_piecewise()) return overlay(f, a, b, c);
    return f.with_plateau({a, b, c});
}

Lift envelope(const Lift& f, Side side) {
    if (f.monotone()) return f;
    if (f.is_piecewise()) return side == Side::Upper ? upper_piecewise(f) : lower_piecewise(f);
    return pouring(f, side);
}

RotationInterval rotation_interval(const Lift& f, double tol, int max_q) {
    RotationInterval ri;
    ri.lo = rot_monotone(envelope(f, Side::Lower), tol, max_q);
    ri.hi = rot_monotone(envelope(f, Side::Upper), tol, max_q);
    return ri;
}

RotationEstimate pointwise_rotation(const Lift& f, double x, long long n) {
    if (n < 1000) throw std::invalid_argument("pointwise_rotation needs n >= 1000");
    const int per_decade = 20;
    std::vector<long long> checks;
    double decades = std::log10(static_cast<double>(n));
    int total = static_cast<int>(std::ceil(decades * per_decade));
    for (int i = 0; i <= total; ++i) {
        long long k = static_cast<long long>(std::llround(std::pow(10.0, decades * i / total)));
        k = std::clamp(k, 1LL, n);
        if (checks.empty() || k > checks.back()) checks.push_back(k);
    }
    double fl = std::floor(x);
    OrbitPoint p{x - fl, static_cast<long long>(fl)};
    long long done = 0;
    double best = -1e300, worst = 1e300;
    for (long long k : checks) {
        p = iterate_split(f, p, k - done);
        done = k;
        if (k * 10 < n) continue;
        double avg = ((static_cast<double>(p.whole) - fl) + (p.frac - (x - fl))) / static_cast<double>(k);
        best = std::max(best, avg);
        worst = std::min(worst, avg);
    }
    RotationEstimate r;
    r.value = best;
    r.numeric = best;
    r.iterations = n;
    r.error_bound = std::max(best - worst, 1.0 / static_cast<double>(n));
    return r;
}

ClimbingIntervals climbing_intervals(const Lift& f) {
    if (f.symmetry() > 1) {
        double d = f.symmetry();
        auto c = climbing_intervals(reduce_symmetry(f));
        return {c.w0 / d, c.z0_next / d, c.y0 / d, c.w0_prime / d};
    }
    check_two_turn(f);
    double z0 = f.turns()->z0, y0 = f.turns()->y0;
    ClimbingIntervals ci{};
    ci.z0_next = z0 + 1.0;
    ci.y0 = y0;
    ci.w0 = solve_increasing_sup(f, y0, z0 + 1.0, f.eval(z0));
    double target = f.eval(y0) + 1.0;
    if (f.eval(z0 + 1.0) < target - 1e-12)
        throw LowerClimbingAbsent("f does not reach f(y0)+1 on the increasing branch");
    ci.w0_prime = solve_increasing(f, y0, z0 + 1.0, target);
    return ci;
}

BackwardOrbit backward_orbit_in_climbing(const Lift& f, int depth, double tol) {
    if (depth < 1) throw std::invalid_argument("depth must be positive");
    if (f.symmetry() > 1) {
        double d = f.symmetry();
        auto b = backward_orbit_in_climbing(reduce_symmetry(f), depth, tol * d);
        b.point /= d;
        for (auto& y : b.orbit) y /= d;
        b.forward_rotation /= d;
        b.backward_rotation /= d;
        b.target /= d;
        return b;
    }
    BackwardOrbit out{};
    double a, b, base;
    if (!f.turns()) {
        if (!f.monotone()) throw PreconditionError("backward orbit needs two-turn markers");
        a = f.x0();
        b = f.x0() + 1.0;
        base = f.eval(a);
    } else {
        auto ci = climbing_intervals(f);
        a = ci.w0;
        b = ci.z0_next;
        base = f.eval(f.turns()->z0);
    }
    RotationEstimate up = rot_monotone(envelope(f, Side::Upper), tol);
    out.target = up.value;
    // preimage of y in the translates of J; flat pieces give a whole interval of
    // choices, and values at the ends of f(J) are reached from two translates
    auto pull = [&](double y, double cur) {
        double m = std::floor(y - base);
        double t = y - m;
        double want = cur - out.target;
        double best = 0.0, gap = std::numeric_limits<double>::infinity();
        auto consider = [&](double tt, double mm) {
            double lo = solve_leftmost(f, a, b, tt) + mm;
            double hi = solve_increasing_sup(f, a, b, tt) + mm;
            if (hi < lo) hi = lo;
            double x = std::clamp(want, lo, hi);
            if (std::abs(x - want) < gap) {
                gap = std::abs(x - want);
                best = x;
            }
        };
        consider(t, m);
        if (t - base < 1e-12) consider(t + 1.0, m - 1.0);
        if (base + 1.0 - t < 1e-12) consider(t - 1.0, m + 1.0);
        return best;
    };
    int burn = std::max(2 * depth, 2000);
    std::vector<double> chain{f.eval(a)};
    for (int i = 0; i < burn; ++i) chain.push_back(pull(chain.back(), chain.back()));
    double ystar = chain.back();
    out.point = ystar;
    out.forward_rotation = (chain[chain.size() - 1 - static_cast<size_t>(depth)] - ystar) / depth;
    out.orbit.push_back(ystar);
    for (int i = 0; i < depth; ++i) out.orbit.push_back(pull(out.orbit.back(), out.orbit.back()));
    out.backward_rotation = (ystar - out.orbit.back()) / depth;
    return out;
}

}  // namespace wl
