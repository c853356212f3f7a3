#include "wadalab/attract.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#ifdef WADALAB_HAVE_PNG
#include <png.h>
#endif

#include "wadalab/rotation.hpp"

namespace wl {

namespace {

using XY = std::array<double, 2>;

int worker_count(int requested) {
    if (requested > 0) return requested;
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

// runs body(chunk_begin, chunk_end, chunk_index) over [0, n) split into contiguous chunks
template <class F>
void parallel_chunks(size_t n, int workers, F body) {
    int w = std::max(1, std::min<int>(workers, static_cast<int>(n / 64) + 1));
    if (w == 1) {
        body(size_t{0}, n, 0);
        return;
    }
    std::vector<std::thread> ts;
    for (int k = 0; k < w; ++k) {
        size_t b = n * k / w, e = n * (k + 1) / w;
        ts.emplace_back([=, &body] { body(b, e, k); });
    }
    for (auto& t : ts) t.join();
}

double dist(const XY& a, const XY& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace

std::array<double, 2> Raster::to_px(const std::array<double, 2>& xy) const {
    double k = px_per_unit();
    return {(xy[0] + extent) * k, (extent - xy[1]) * k};
}

std::array<double, 2> Raster::to_xy(double col, double row) const {
    double k = px_per_unit();
    return {col / k - extent, extent - row / k};
}

ChartPoint theta_n(const DiskMap& dm, ChartPoint p, int n, double r) {
    for (int k = 0; k < n; ++k) p = dm.theta(p, r);
    return p;
}

// ---------------------------------------------------------------- rasters

std::vector<std::uint8_t> rasterize(const std::vector<std::vector<XY>>& polylines, const Raster& frame,
                                    bool closed) {
    int res = frame.res;
    std::vector<std::uint8_t> m(static_cast<size_t>(res) * res, 0);
    auto plot = [&](double c, double r) {
        int ci = static_cast<int>(std::floor(c)), ri = static_cast<int>(std::floor(r));
        if (ci >= 0 && ci < res && ri >= 0 && ri < res) m[static_cast<size_t>(ri) * res + ci] = 1;
    };
    for (const auto& pl : polylines) {
        if (pl.empty()) continue;
        size_t n = pl.size();
        size_t segs = closed ? n : n - 1;
        if (n == 1) {
            auto p = frame.to_px(pl[0]);
            plot(p[0], p[1]);
        }
        for (size_t i = 0; i < segs; ++i) {
            auto a = frame.to_px(pl[i]), b = frame.to_px(pl[(i + 1) % n]);
            // grid traversal: every cell the segment passes through
            double dx = b[0] - a[0], dy = b[1] - a[1];
            long ci = static_cast<long>(std::floor(a[0])), ri = static_cast<long>(std::floor(a[1]));
            long ce = static_cast<long>(std::floor(b[0])), re = static_cast<long>(std::floor(b[1]));
            int sc = dx > 0 ? 1 : -1, sr = dy > 0 ? 1 : -1;
            double tdc = dx != 0 ? std::abs(1.0 / dx) : INFINITY, tdr = dy != 0 ? std::abs(1.0 / dy) : INFINITY;
            double tc = dx > 0 ? (ci + 1 - a[0]) * tdc : dx < 0 ? (a[0] - ci) * tdc : INFINITY;
            double tr = dy > 0 ? (ri + 1 - a[1]) * tdr : dy < 0 ? (a[1] - ri) * tdr : INFINITY;
            long guard = std::abs(ce - ci) + std::abs(re - ri) + 2;
            plot(ci + 0.5, ri + 0.5);
            while ((ci != ce || ri != re) && guard-- > 0) {
                if (tc < tr) {
                    ci += sc;
                    tc += tdc;
                } else {
                    ri += sr;
                    tr += tdr;
                }
                plot(ci + 0.5, ri + 0.5);
            }
        }
    }
    return m;
}

std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& m, int res, int radius) {
    std::vector<std::uint8_t> out(m.size(), 0);
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c) {
            if (!m[static_cast<size_t>(r) * res + c]) continue;
            for (int dr = -radius; dr <= radius; ++dr)
                for (int dc = -radius; dc <= radius; ++dc) {
                    int rr = r + dr, cc = c + dc;
                    if (rr >= 0 && rr < res && cc >= 0 && cc < res) out[static_cast<size_t>(rr) * res + cc] = 1;
                }
        }
    return out;
}

namespace {

// 1d squared distance transform of sampled function f (lower envelope of parabolas)
void edt1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        if (std::isinf(f[q])) continue;
        if (std::isinf(f[v[k]])) {
            v[k] = q;
            continue;
        }
        double s;
        while (true) {
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
            if (s <= z[k] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - v[k];
        d[q] = std::isinf(f[v[k]]) ? std::numeric_limits<double>::infinity() : dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> distance_transform(const std::vector<std::uint8_t>& m, int res) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> g(m.size());
    for (size_t i = 0; i < m.size(); ++i) g[i] = m[i] ? 0.0 : inf;
    std::vector<double> f(res), d(res), zz(res + 1);
    std::vector<int> v(res);
    for (int c = 0; c < res; ++c) {
        for (int r = 0; r < res; ++r) f[r] = g[static_cast<size_t>(r) * res + c];
        edt1d(f.data(), d.data(), res, v, zz);
        for (int r = 0; r < res; ++r) g[static_cast<size_t>(r) * res + c] = d[r];
    }
    for (int r = 0; r < res; ++r) {
        double* row = g.data() + static_cast<size_t>(r) * res;
        std::copy(row, row + res, f.begin());
        edt1d(f.data(), d.data(), res, v, zz);
        for (int c = 0; c < res; ++c) row[c] = std::sqrt(d[c]);
    }
    return g;
}

double hausdorff_px(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b, int res) {
    auto da = distance_transform(a, res), db = distance_transform(b, res);
    double h = 0.0;
    bool any_a = false, any_b = false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i]) {
            any_a = true;
            h = std::max(h, db[i]);
        }
        if (b[i]) {
            any_b = true;
            h = std::max(h, da[i]);
        }
    }
    if (!any_a || !any_b) return std::numeric_limits<double>::infinity();
    return h;
}

// ---------------------------------------------------------------- nested images

namespace {

std::vector<std::vector<XY>> polylines_of(const AttractorApprox& a) {
    std::vector<std::vector<XY>> out;
    for (const auto& c : a.curves) out.push_back(c.xy);
    return out;
}

void refine_curve(const DiskMap& dm, TracedCurve& cv, int depth, double r, const AttractOptions& opt,
                  double px_per_unit, double& worst_gap) {
    size_t n = cv.u.size();
    double gap = opt.max_gap_px / px_per_unit;
    int workers = worker_count(opt.workers);
    int w = std::max(1, std::min<int>(workers, static_cast<int>(n / 64) + 1));
    std::vector<std::vector<double>> us(w);
    std::vector<std::vector<ChartPoint>> ims(w);
    std::vector<std::vector<XY>> xys(w);
    std::vector<double> worst(w, 0.0);
    parallel_chunks(n, workers, [&](size_t b, size_t e, int k) {
        auto& U = us[k];
        auto& I = ims[k];
        auto& X = xys[k];
        for (size_t i = b; i < e; ++i) {
            size_t j = (i + 1) % n;
            double u0 = cv.u[i], u1 = j == 0 ? cv.u[0] + 1.0 : cv.u[j];
            U.push_back(u0);
            I.push_back(cv.img[i]);
            X.push_back(cv.xy[i]);
            // depth-first subdivision of the segment (u0, u1)
            struct Seg {
                double ua, ub;
                ChartPoint pa, pb;
                XY xa, xb;
            };
            std::vector<Seg> stack{{u0, u1, cv.img[i], cv.img[j], cv.xy[i], cv.xy[j]}};
            while (!stack.empty()) {
                Seg s = stack.back();
                stack.pop_back();
                double d = dist(s.xa, s.xb);
                if (d <= gap) continue;
                if (s.ub - s.ua < 1e-13) {
                    worst[k] = std::max(worst[k], d * px_per_unit);
                    continue;
                }
                double um = 0.5 * (s.ua + s.ub);
                ChartPoint pm = theta_n(dm, {cv.c, wrap01(um), cv.s}, depth, r);
                XY xm = dm.xy(pm);
                // right half first so the left half is emitted first
                stack.push_back({um, s.ub, pm, s.pb, xm, s.xb});
                stack.push_back({s.ua, um, s.pa, pm, s.xa, xm});
                U.push_back(um);
                I.push_back(pm);
                X.push_back(xm);
            }
        }
    });
    // the stack emits midpoints in pre-order; sort each chunk by parameter to restore curve order
    std::vector<double> nu;
    std::vector<ChartPoint> nimg;
    std::vector<XY> nxy;
    for (int k = 0; k < w; ++k) {
        std::vector<size_t> order(us[k].size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return us[k][a] < us[k][b]; });
        for (size_t i : order) {
            double u = us[k][i];
            if (u >= 1.0) u -= 1.0;
            nu.push_back(u);
            nimg.push_back(ims[k][i]);
            nxy.push_back(xys[k][i]);
        }
        worst_gap = std::max(worst_gap, worst[k]);
    }
    // the wrap segment can emit parameters above 1; rotate so the list stays sorted
    size_t start = 0;
    for (size_t i = 1; i < nu.size(); ++i)
        if (nu[i] < nu[i - 1]) {
            start = i;
            break;
        }
    std::rotate(nu.begin(), nu.begin() + static_cast<long>(start), nu.end());
    std::rotate(nimg.begin(), nimg.begin() + static_cast<long>(start), nimg.end());
    std::rotate(nxy.begin(), nxy.begin() + static_cast<long>(start), nxy.end());
    // drop points crowded by their neighbours
    double crowd = 0.25 * gap;
    TracedCurve out{cv.c, cv.s, {}, {}, {}};
    for (size_t i = 0; i < nu.size(); ++i) {
        if (!out.xy.empty() && i + 1 < nu.size() && dist(out.xy.back(), nxy[i]) < crowd &&
            dist(out.xy.back(), nxy[i + 1]) < gap)
            continue;
        out.u.push_back(nu[i]);
        out.img.push_back(nimg[i]);
        out.xy.push_back(nxy[i]);
    }
    cv = std::move(out);
}

AttractorApprox start_approx(const DiskMap& dm, const AttractOptions& opt) {
    AttractorApprox a;
    a.r = opt.r;
    a.frame.res = opt.res;
    a.frame.extent = dm.extent() + 0.05;
    const int n0 = 2048;
    for (int c = 0; c < dm.components(); ++c) {
        for (int m = 0; m <= opt.mesh; ++m) {
            TracedCurve cv;
            cv.c = c;
            cv.s = static_cast<double>(m) / (opt.mesh + 1);
            for (int k = 0; k < n0; ++k) {
                double u = static_cast<double>(k) / n0;
                ChartPoint p{c, u, cv.s};
                cv.u.push_back(u);
                cv.img.push_back(p);
                cv.xy.push_back(dm.xy(p));
            }
            a.curves.push_back(std::move(cv));
        }
    }
    for (auto& cv : a.curves) refine_curve(dm, cv, 0, opt.r, opt, a.frame.px_per_unit(), a.worst_gap_px);
    a.mask = rasterize(polylines_of(a), a.frame, true);
    return a;
}

}  // namespace

std::vector<std::uint8_t> push_mask(const DiskMap& dm, const std::vector<std::uint8_t>& mask, const Raster& frame,
                                    double r, int sub, int workers) {
    int res = frame.res;
    std::vector<size_t> on;
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) on.push_back(i);
    workers = worker_count(workers);
    int w = std::max(1, std::min<int>(workers, static_cast<int>(on.size() / 64) + 1));
    std::vector<std::vector<size_t>> hits(w);
    parallel_chunks(on.size(), workers, [&](size_t b, size_t e, int k) {
        auto& H = hits[k];
        for (size_t n = b; n < e; ++n) {
            int row = static_cast<int>(on[n] / res), col = static_cast<int>(on[n] % res);
            for (int i = 0; i < sub; ++i)
                for (int j = 0; j < sub; ++j) {
                    auto q = dm.chart_at(frame.to_xy(col + (i + 0.5) / sub, row + (j + 0.5) / sub));
                    if (!q) continue;
                    auto px = frame.to_px(dm.xy(dm.theta(*q, r)));
                    int ci = static_cast<int>(std::floor(px[0])), ri = static_cast<int>(std::floor(px[1]));
                    if (ci >= 0 && ci < res && ri >= 0 && ri < res) H.push_back(static_cast<size_t>(ri) * res + ci);
                }
        }
    });
    std::vector<std::uint8_t> out(mask.size(), 0);
    for (const auto& H : hits)
        for (size_t i : H) out[i] = 1;
    return out;
}

void advance(const DiskMap& dm, AttractorApprox& a, const AttractOptions& opt) {
    int depth = a.depth + 1;
    int workers = worker_count(opt.workers);
    a.worst_gap_px = 0.0;
    size_t pts = 0;
    for (const auto& cv : a.curves) pts += cv.u.size();
    if (!a.raster_mode && static_cast<long>(pts) > opt.max_points / 2) {
        a.raster_mode = true;
        a.curves.clear();
    }
    if (a.raster_mode) {
        auto mask = push_mask(dm, a.mask, a.frame, a.r, opt.sub, opt.workers);
        a.depth = depth;
        a.dh_history.push_back(hausdorff_px(mask, a.mask, a.frame.res));
        a.mask = std::move(mask);
        return;
    }
    for (auto& cv : a.curves) {
        parallel_chunks(cv.u.size(), workers, [&](size_t b, size_t e, int) {
            for (size_t i = b; i < e; ++i) {
                cv.img[i] = dm.theta(cv.img[i], a.r);
                cv.xy[i] = dm.xy(cv.img[i]);
            }
        });
        refine_curve(dm, cv, depth, a.r, opt, a.frame.px_per_unit(), a.worst_gap_px);
    }
    a.depth = depth;
    auto mask = rasterize(polylines_of(a), a.frame, true);
    a.dh_history.push_back(hausdorff_px(mask, a.mask, a.frame.res));
    a.mask = std::move(mask);
    a.mesh_too_coarse = a.worst_gap_px > 5.0;
}

AttractorApprox attractor_approx(const DiskMap& dm, int depth, const AttractOptions& opt) {
    if (depth < 0) throw std::invalid_argument("depth must be >= 0");
    AttractorApprox a = start_approx(dm, opt);
    for (int n = 0; n < depth; ++n) advance(dm, a, opt);
    return a;
}

AttractorApprox attractor_auto(const DiskMap& dm, const AttractOptions& opt, int max_depth) {
    AttractorApprox a = start_approx(dm, opt);
    while (a.depth < max_depth) {
        AttractorApprox next = a;
        advance(dm, next, opt);
        if (next.dh_history.back() < 2.0) return a;
        a = std::move(next);
    }
    return a;
}

// ---------------------------------------------------------------- basins

std::vector<std::uint8_t> domain_mask(const DiskMap& dm, const Raster& frame) {
    int res = frame.res;
    std::vector<std::uint8_t> m(static_cast<size_t>(res) * res, 0);
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c) {
            XY p = frame.to_xy(c + 0.5, r + 0.5);
            double rad = std::hypot(p[0], p[1]);
            bool in;
            if (dm.kind() == ChartKind::Annulus) {
                in = rad >= 1.0 && rad <= 3.0;
            } else {
                in = rad <= 3.0 && std::hypot(p[0] + 1.0, p[1]) >= 0.5 && std::hypot(p[0] - 1.0, p[1]) >= 0.5;
            }
            m[static_cast<size_t>(r) * res + c] = in;
        }
    return m;
}

BasinGrid flood(std::vector<std::uint8_t> label, int res, const std::vector<std::array<int, 2>>& seeds,
                const std::vector<Label>& names) {
    BasinGrid bg;
    bg.res = res;
    for (size_t k = 0; k < seeds.size(); ++k) {
        auto [c, r] = seeds[k];
        if (c < 0 || c >= res || r < 0 || r >= res) throw SeedSwallowed("seed outside the grid");
        size_t at = static_cast<size_t>(r) * res + c;
        if (label[at] != kUnknown) throw SeedSwallowed("seed pixel is not free (resolution too low?)");
        std::deque<size_t> q{at};
        label[at] = names[k];
        long count = 0;
        while (!q.empty()) {
            size_t i = q.front();
            q.pop_front();
            ++count;
            int rr = static_cast<int>(i / res), cc = static_cast<int>(i % res);
            const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
            for (int d = 0; d < 4; ++d) {
                int r2 = rr + dr[d], c2 = cc + dc[d];
                if (r2 < 0 || r2 >= res || c2 < 0 || c2 >= res) continue;
                size_t j = static_cast<size_t>(r2) * res + c2;
                if (label[j] != kUnknown) continue;
                label[j] = names[k];
                q.push_back(j);
            }
        }
        bg.regions.push_back(names[k]);
        bg.seeds.push_back(seeds[k]);
        bg.counts.push_back(count);
    }
    bg.label = std::move(label);
    return bg;
}

BasinGrid basin_label(const DiskMap& dm, const AttractorApprox& a) {
    int res = a.frame.res;
    auto dom = domain_mask(dm, a.frame);
    auto band = dilate(a.mask, res, 1);
    std::vector<std::uint8_t> label(dom.size());
    for (size_t i = 0; i < dom.size(); ++i) label[i] = !dom[i] ? kOutside : band[i] ? kBand : kUnknown;
    std::vector<std::array<int, 2>> seeds;
    std::vector<Label> names;
    auto seed_at = [&](ChartPoint p, Label name) {
        auto px = a.frame.to_px(dm.xy(p));
        seeds.push_back({static_cast<int>(px[0]), static_cast<int>(px[1])});
        names.push_back(name);
    };
    // the image of theta lies in s >= 1 - r, so shallow seeds stay in their basins
    double s0 = 0.08;
    if (dm.kind() == ChartKind::Pants) {
        seed_at({2, 0.25, s0}, kOut);
        seed_at({0, 0.5, s0}, kL0);
        seed_at({1, 0.5, s0}, kL1);
    } else {
        seed_at({1, 0.25, s0}, kOut);
        seed_at({0, 0.25, s0}, kL0);
    }
    return flood(std::move(label), res, seeds, names);
}

std::vector<double> wada_score(const BasinGrid& bg, int k) {
    int res = bg.res;
    size_t n = bg.regions.size();
    std::vector<std::vector<std::uint8_t>> front(n, std::vector<std::uint8_t>(bg.label.size(), 0));
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c) {
            size_t i = static_cast<size_t>(r) * res + c;
            std::uint8_t L = bg.label[i];
            if (L == kOutside) continue;
            const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
            for (int d = 0; d < 4; ++d) {
                int r2 = r + dr[d], c2 = c + dc[d];
                if (r2 < 0 || r2 >= res || c2 < 0 || c2 >= res) continue;
                std::uint8_t M = bg.label[static_cast<size_t>(r2) * res + c2];
                if (M == L) continue;
                for (size_t q = 0; q < n; ++q)
                    if (bg.regions[q] == M) front[q][i] = 1;
            }
        }
    std::vector<std::vector<double>> dt;
    for (size_t q = 0; q < n; ++q) dt.push_back(distance_transform(front[q], res));
    std::vector<double> out;
    for (size_t q = 0; q < n; ++q) {
        long tot = 0, good = 0;
        for (size_t i = 0; i < bg.label.size(); ++i) {
            if (!front[q][i]) continue;
            ++tot;
            bool ok = true;
            for (size_t o = 0; o < n && ok; ++o)
                if (o != q && dt[o][i] > k) ok = false;
            if (ok) ++good;
        }
        out.push_back(tot == 0 ? 0.0 : static_cast<double>(good) / tot);
    }
    return out;
}

BasinGrid control_common_circle(int res) {
    std::vector<std::uint8_t> label(static_cast<size_t>(res) * res);
    double cx = res / 2.0, R = 0.25 * res, outer = 0.45 * res;
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c) {
            double d = std::hypot(c + 0.5 - cx, r + 0.5 - cx);
            label[static_cast<size_t>(r) * res + c] = d > outer ? kOutside : std::abs(d - R) <= 1.0 ? kBand : kUnknown;
        }
    int mid = res / 2;
    return flood(std::move(label), res, {{mid, mid}, {mid, mid - static_cast<int>(0.35 * res)}}, {kL0, kOut});
}

BasinGrid control_half_shared(int res) {
    std::vector<std::uint8_t> label(static_cast<size_t>(res) * res);
    double cx = res / 2.0, R = 0.2 * res, outer = 0.4 * res;
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c) {
            double x = c + 0.5 - cx, y = cx - (r + 0.5);
            double d = std::hypot(x, y);
            bool disk = d < R - 1.0;
            bool half = d > R + 1.0 && d < outer && y > 0.0;
            label[static_cast<size_t>(r) * res + c] = disk || half ? kUnknown : kBand;
        }
    int mid = res / 2;
    return flood(std::move(label), res, {{mid, mid}, {mid, mid - static_cast<int>(0.3 * res)}}, {kL0, kL1});
}

// ---------------------------------------------------------------- accessibility

Lift side_lift(const DiskMap& dm) {
    if (dm.kind() == ChartKind::Pants) return quotient_lift(*dm.chain());
    return *dm.lift();
}

bool radial_access(const DiskMap& dm, double y, int side) {
    Lift f = side_lift(dm);
    int chart = dm.kind() == ChartKind::Pants ? 2 : side;
    if (dm.kind() == ChartKind::Pants && side != 2)
        throw std::invalid_argument("pants accessibility is checked from C2");
    auto level = [&](double x) {
        ChartPoint p = dm.unwrap({chart, wrap01(x), 1.0});
        if (dm.kind() == ChartKind::Pants) return p.s;
        // distance from the requested boundary along the strip
        double h = p.c == 1 ? 1.0 - p.s : -(1.0 - p.s);
        return side == 1 ? 1.0 - h : h + 1.0;
    };
    double own = level(y);
    double u = f.eval(y);
    for (double x : preimages(f, u)) {
        double d = std::abs(wrap01(x) - wrap01(y));
        if (std::min(d, 1.0 - d) < 1e-9) continue;
        if (level(x) < own - 1e-12) return false;
    }
    return true;
}

namespace {

bool in_intervals(double x, const std::vector<std::array<double, 2>>& ivs, double tol) {
    for (auto iv : ivs)
        if (in_translate(x, iv[0], iv[1], tol)) return true;
    return false;
}

// preimage of y under f inside the exposed intervals; at shared ends the one whose
// displacement is closest to ref. y is also nudged by 1e-9 both ways: a chain sitting on
// a turn value would otherwise fall off it through root-solving error
double pull_exposed(const Lift& f, double y, const std::vector<std::array<double, 2>>& ivs, double ref) {
    for (double tol : {1e-10, 1e-7}) {
        double best = 0.0, gap = std::numeric_limits<double>::infinity();
        for (double dy : {0.0, -1e-9, 1e-9})
            for (double x : preimages(f, y + dy)) {
                if (!in_intervals(x, ivs, tol)) continue;
                double g = std::abs((y - x) - ref);
                if (g < gap - 1e-6) {
                    gap = g;
                    best = x;
                }
            }
        if (gap < std::numeric_limits<double>::infinity()) return best;
    }
    throw std::runtime_error("no preimage in the exposed intervals");
}

// exact period p/q (q <= 64) if the forward orbit closes up, else a long pointwise average
double forward_rotation_of(const Lift& f, double y) {
    double z = y;
    for (int q = 1; q <= 64; ++q) {
        z = f.eval(z);
        double p = std::round(z - y);
        if (std::abs(z - y - p) < 1e-7) return p / q;
    }
    return pointwise_rotation(f, y, 100000).value;
}

}  // namespace

AccessibleArc accessible_arc(const DiskMap& dm, int side, int depth, double r, const Raster& frame,
                             double start) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    Lift f = side_lift(dm);
    bool upper = dm.kind() == ChartKind::Pants ? side == 2 : side == 1;
    if (dm.kind() == ChartKind::Pants && side != 2) throw std::invalid_argument("pants arcs come from C2");
    auto ivs = dm.radial_intervals(side);
    AccessibleArc out;
    out.side = side;
    out.envelope_rotation = rot_monotone(envelope(f, upper ? Side::Upper : Side::Lower), 1e-6).value;
    double y;
    double ref = out.envelope_rotation;
    if (start >= 0.0) {
        y = start;
    } else {
        auto best = ivs.front();
        for (auto iv : ivs)
            if (iv[1] - iv[0] > best[1] - best[0]) best = iv;
        y = 0.5 * (best[0] + best[1]);
        // settle onto the orbit the pull-back attracts to
        double y0 = y;
        const int burn = 2000;
        for (int k = 0; k < burn; ++k) {
            double x = pull_exposed(f, y, ivs, ref);
            ref = (y0 - x) / (k + 1);
            y = x;
        }
        y -= std::floor(y);
    }
    out.point = y;
    out.backward.push_back(y);
    int long_depth = std::max(depth, 2000);
    std::vector<double> chain{y};
    for (int k = 0; k < long_depth; ++k) chain.push_back(pull_exposed(f, chain.back(), ivs, ref));
    out.backward.assign(chain.begin(), chain.begin() + depth + 1);
    out.exposed = true;
    for (double x : out.backward)
        if (!in_intervals(x, ivs, 1e-9)) out.exposed = false;
    out.backward_rotation = (y - chain.back()) / long_depth;
    out.forward_rotation = forward_rotation_of(f, y);
    int chart = dm.kind() == ChartKind::Pants ? 2 : side;
    const int samples = 257;
    double ub = wrap01(out.backward.back());
    for (int k = 0; k < samples; ++k) {
        ChartPoint p{chart, ub, static_cast<double>(k) / (samples - 1)};
        // the chain is expanding forward, so root error would blow up; snap radial images onto it
        for (int j = depth - 1; j >= 0; --j) {
            p = dm.theta(p, r);
            double uj = wrap01(out.backward[static_cast<size_t>(j)]);
            double du = p.u - uj;
            du -= std::round(du);
            if (p.c == chart && std::abs(du) < 1e-6) p.u = uj;
        }
        out.arc.push_back(p);
        out.xy.push_back(dm.xy(p));
    }
    (void)frame;
    return out;
}

double band_overlap_px(const std::vector<XY>& arc, const std::vector<std::uint8_t>& band, const Raster& frame) {
    // length of the arc from its first band pixel to its end
    double len = 0.0;
    bool hit = false;
    for (size_t i = 0; i < arc.size(); ++i) {
        auto p = frame.to_px(arc[i]);
        int c = static_cast<int>(p[0]), r = static_cast<int>(p[1]);
        bool in = c >= 0 && c < frame.res && r >= 0 && r < frame.res && band[static_cast<size_t>(r) * frame.res + c];
        if (i > 0 && hit) len += dist(frame.to_px(arc[i - 1]), p);
        if (in && !hit) hit = true;
    }
    return hit ? len : 0.0;
}

double exterior_position(const ChainMap& cm, ChainPoint p) {
    int k = cm.circles();
    p = cm.canonical(p);
    auto xy = chain_xy(cm, p);
    double cx = chain_xy(cm, {p.i, 0.25})[0];
    double th = std::atan2(xy[1], xy[0] - cx);
    if (std::abs(xy[1]) < 1e-12) th = xy[0] < cx ? -std::numbers::pi : 0.0;
    if (th <= 0.0) return p.i + (th + std::numbers::pi) / std::numbers::pi;
    return 2.0 * k - 1.0 - p.i + th / std::numbers::pi;
}

std::vector<int> exterior_shifts(const ChainMap& cm, const std::vector<ChainPoint>& cycle) {
    int n = static_cast<int>(cycle.size());
    std::vector<double> pos;
    for (const auto& q : cycle) pos.push_back(exterior_position(cm, q));
    std::vector<int> order(n), rank(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return pos[a] < pos[b]; });
    for (int i = 0; i < n; ++i) rank[order[i]] = i;
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        ChainPoint img = cm.eval(cycle[i]);
        int j = -1;
        for (int m = 0; m < n; ++m)
            if (cm.same_point(img, cycle[m], 1e-9)) j = m;
        if (j < 0) throw std::invalid_argument("points do not form a cycle");
        out.push_back(((rank[j] - rank[i]) % n + n) % n);
    }
    return out;
}

// ---------------------------------------------------------------- translation line

namespace {

bool hits_band(const std::vector<XY>& pl, const std::vector<std::uint8_t>& band, const Raster& frame) {
    auto m = rasterize({pl}, frame, false);
    for (size_t i = 0; i < m.size(); ++i)
        if (m[i] && band[i]) return true;
    return false;
}

}  // namespace

TranslationLine translation_line(const DiskMap& dm, int segments, const AttractOptions& opt, int depth) {
    if (dm.kind() != ChartKind::Pants) throw std::invalid_argument("translation line needs the pants chart");
    if (segments < 1) throw std::invalid_argument("segments must be >= 1");
    TranslationLine tl;
    Raster frame;
    frame.res = opt.res;
    frame.extent = dm.extent() + 0.05;
    // z_-1 in the exterior collar over the middle of J on S0
    ChartPoint z{2, 0.25, 0.4};
    ChartPoint z0 = dm.theta(z, opt.r);
    const int samples = 400;
    std::vector<ChartPoint> lambda;
    for (int k = 0; k <= samples; ++k) {
        double t = static_cast<double>(k) / samples;
        double du = z0.u - z.u;
        lambda.push_back({2, wrap01(z.u + t * du), z.s + t * (z0.s - z.s)});
    }
    tl.chain = {z, z0};
    // lambda lies in D minus psi^2(D), so piece n must miss the boundary images at depth n+2
    AttractOptions bopt = opt;
    bopt.mesh = 0;
    AttractorApprox bd = attractor_approx(dm, 2, bopt);
    AttractorApprox full = attractor_approx(dm, depth, opt);
    auto dt = distance_transform(dilate(full.mask, frame.res, 1), frame.res);
    std::vector<ChartPoint> piece = lambda;
    for (int n = 0; n < segments; ++n) {
        if (n > 0) {
            for (auto& p : piece) p = dm.theta(p, opt.r);
            tl.chain.push_back(dm.theta(tl.chain.back(), opt.r));
        }
        std::vector<XY> xy;
        for (const auto& p : piece) xy.push_back(dm.xy(p));
        auto band = dilate(bd.mask, frame.res, 1);
        if (band_overlap_px(xy, band, frame) > 0.0 || hits_band(xy, band, frame)) tl.disjoint = false;
        if (tl.disjoint) tl.clear_pieces = n + 1;
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& q : xy) {
            auto px = frame.to_px(q);
            int c = std::clamp(static_cast<int>(px[0]), 0, frame.res - 1);
            int r = std::clamp(static_cast<int>(px[1]), 0, frame.res - 1);
            dmin = std::min(dmin, dt[static_cast<size_t>(r) * frame.res + c]);
        }
        tl.band_distance_px.push_back(dmin);
        tl.pieces.push_back(std::move(xy));
        advance(dm, bd, bopt);
    }
    return tl;
}

// ---------------------------------------------------------------- output

std::vector<std::uint8_t> basin_gray(const BasinGrid& bg) {
    std::vector<std::uint8_t> g(bg.label.size());
    for (size_t i = 0; i < g.size(); ++i) {
        switch (bg.label[i]) {
        case kBand: g[i] = 0; break;
        case kOut: g[i] = 255; break;
        case kL0: g[i] = 96; break;
        case kL1: g[i] = 176; break;
        case kUnknown: g[i] = 40; break;
        default: g[i] = 230; break;
        }
    }
    return g;
}

std::vector<std::uint8_t> basin_rgb(const BasinGrid& bg) {
    std::vector<std::uint8_t> g(bg.label.size() * 3);
    for (size_t i = 0; i < bg.label.size(); ++i) {
        std::array<std::uint8_t, 3> c;
        switch (bg.label[i]) {
        case kBand: c = {0, 0, 0}; break;
        case kOut: c = {255, 255, 255}; break;
        case kL0: c = {200, 40, 40}; break;
        case kL1: c = {40, 60, 200}; break;
        case kUnknown: c = {60, 60, 60}; break;
        default: c = {230, 230, 230}; break;
        }
        std::copy(c.begin(), c.end(), g.begin() + static_cast<long>(3 * i));
    }
    return g;
}

void write_pgm(const std::string& path, const std::vector<std::uint8_t>& gray, int res) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "P5\n" << res << " " << res << "\n255\n";
    os.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
}

bool write_png(const std::string& path, const std::vector<std::uint8_t>& rgb, int res) {
#ifdef WADALAB_HAVE_PNG
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("png write failed: " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, res, res, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    // fixed timestamp-free header keeps the bytes reproducible
    png_write_info(png, info);
    for (int r = 0; r < res; ++r)
        png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<size_t>(r) * res * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    return true;
#else
    (void)path;
    (void)rgb;
    (void)res;
    return false;
#endif
}

nlohmann::json report_json(const AttractorApprox& a, const std::vector<double>& scores) {
    nlohmann::json j;
    j["N"] = a.depth;
    j["r"] = a.r;
    j["res"] = a.frame.res;
    j["d_H_history"] = a.dh_history;
    j["wada_scores"] = scores;
    j["mesh_too_coarse"] = a.mesh_too_coarse;
    j["worst_gap_px"] = a.worst_gap_px;
    return j;
}

}  // namespace wl
