#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "wadalab/attract.hpp"
#include "wadalab/families.hpp"
#include "wadalab/rotation.hpp"

using namespace wl;

namespace {

std::vector<std::uint8_t> random_mask(int res, double density, std::mt19937_64& rng) {
    std::bernoulli_distribution B(density);
    std::vector<std::uint8_t> m(static_cast<size_t>(res) * res);
    for (auto& v : m) v = B(rng);
    return m;
}

double brute_distance(const std::vector<std::uint8_t>& m, int res, int r, int c) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j)
            if (m[static_cast<size_t>(i) * res + j]) best = std::min(best, std::hypot(i - r, j - c));
    return best;
}

// every labelled region pixel has only same-region or non-free neighbours
bool flood_complete(const BasinGrid& bg) {
    int res = bg.res;
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c) {
            auto L = bg.label[static_cast<size_t>(r) * res + c];
            if (L == kBand || L == kOutside || L == kUnknown) continue;
            const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
            for (int d = 0; d < 4; ++d) {
                int r2 = r + dr[d], c2 = c + dc[d];
                if (r2 < 0 || r2 >= res || c2 < 0 || c2 >= res) continue;
                auto M = bg.label[static_cast<size_t>(r2) * res + c2];
                if (M == kUnknown || (M != L && M != kBand && M != kOutside)) return false;
            }
        }
    return true;
}

}  // namespace

TEST_CASE("distance transform matches brute force") {
    std::mt19937_64 rng(3);
    for (double dens : {0.002, 0.02, 0.2}) {
        int res = 40;
        auto m = random_mask(res, dens, rng);
        m[0] = 1;
        auto d = distance_transform(m, res);
        double worst = 0.0;
        for (int r = 0; r < res; ++r)
            for (int c = 0; c < res; ++c)
                worst = std::max(worst, std::abs(d[static_cast<size_t>(r) * res + c] - brute_distance(m, res, r, c)));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("hausdorff distance matches brute force") {
    std::mt19937_64 rng(5);
    int res = 32;
    for (int rep = 0; rep < 4; ++rep) {
        auto a = random_mask(res, 0.01, rng), b = random_mask(res, 0.01, rng);
        a[5] = 1;
        b[700] = 1;
        double h = 0.0;
        for (int r = 0; r < res; ++r)
            for (int c = 0; c < res; ++c) {
                size_t i = static_cast<size_t>(r) * res + c;
                if (a[i]) h = std::max(h, brute_distance(b, res, r, c));
                if (b[i]) h = std::max(h, brute_distance(a, res, r, c));
            }
        CHECK(hausdorff_px(a, b, res) == doctest::Approx(h).epsilon(1e-12));
    }
    std::vector<std::uint8_t> e(static_cast<size_t>(res) * res, 0), one = e;
    one[3] = 1;
    CHECK(std::isinf(hausdorff_px(e, one, res)));
    CHECK(hausdorff_px(one, one, res) == 0.0);
}

TEST_CASE("rasterized polylines have no gaps") {
    Raster fr;
    fr.res = 256;
    std::vector<std::array<double, 2>> pl{{-2.0, -1.0}, {2.5, 1.7}, {-1.0, 2.9}};
    auto m = rasterize({pl}, fr, true);
    // walk each segment finely: every sample pixel is set
    int missing = 0;
    for (size_t i = 0; i < pl.size(); ++i) {
        auto a = pl[i], b = pl[(i + 1) % pl.size()];
        for (int k = 0; k <= 1000; ++k) {
            double t = k / 1000.0;
            auto px = fr.to_px({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
            int c = static_cast<int>(px[0]), r = static_cast<int>(px[1]);
            if (!m[static_cast<size_t>(r) * fr.res + c]) ++missing;
        }
    }
    CHECK(missing == 0);
    auto px = fr.to_px(fr.to_xy(10.25, 20.75));
    CHECK(px[0] == doctest::Approx(10.25));
    CHECK(px[1] == doctest::Approx(20.75));
}

TEST_CASE("wada score controls") {
    auto cc = control_common_circle(256);
    auto s = wada_score(cc, 3);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == 1.0);
    CHECK(s[1] == 1.0);
    auto hs = control_half_shared(256);
    auto h = wada_score(hs, 3);
    REQUIRE(h.size() == 2);
    CHECK(h[0] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(h[1] > 0.0);
    CHECK(h[1] < 0.75);
}

TEST_CASE("depth 0 basins are the original domains") {
    AttractOptions o;
    o.res = 512;
    auto dm = DiskMap::pants(kEps0);
    auto a = attractor_approx(dm, 0, o);
    CHECK(a.depth == 0);
    auto bg = basin_label(dm, a);
    REQUIRE(bg.regions.size() == 3);
    CHECK(bg.regions[0] == kOut);
    CHECK(bg.regions[1] == kL0);
    CHECK(bg.regions[2] == kL1);
    for (long c : bg.counts) CHECK(c > 1000);
    CHECK(flood_complete(bg));
    // at depth 0 the band is the boundary, so only the mesh separates leftovers
    auto fp = DiskMap::five_piece('A');
    auto b = basin_label(fp, attractor_approx(fp, 0, o));
    CHECK(b.regions.size() == 2);
    CHECK(flood_complete(b));
}

TEST_CASE("small depth keeps three separate basins") {
    AttractOptions o;
    o.res = 512;
    auto dm = DiskMap::pants(kEps0);
    auto a = attractor_approx(dm, 2, o);
    auto bg = basin_label(dm, a);
    REQUIRE(bg.regions.size() == 3);
    for (long c : bg.counts) CHECK(c > 1000);
    CHECK(flood_complete(bg));
    for (auto L : bg.label) CHECK_FALSE(L > kOutside);
}

TEST_CASE("five-piece annulus has two complementary regions") {
    AttractOptions o;
    o.res = 512;
    for (char v : {'A', 'B'}) {
        auto dm = DiskMap::five_piece(v);
        auto a = attractor_approx(dm, 3, o);
        auto bg = basin_label(dm, a);
        REQUIRE(bg.regions.size() == 2);
        CHECK(bg.regions[0] != bg.regions[1]);
        for (long c : bg.counts) CHECK(c > 1000);
    }
}

TEST_CASE("seed swallowed at tiny resolution") {
    AttractOptions o;
    o.res = 12;
    auto dm = DiskMap::pants(kEps0);
    auto a = attractor_approx(dm, 3, o);
    CHECK_THROWS_AS(basin_label(dm, a), SeedSwallowed);
}

TEST_CASE("nested images: pushing A_N forward gives A_N+1") {
    AttractOptions o;
    o.res = 512;
    auto dm = DiskMap::pants(kEps0);
    auto a = attractor_approx(dm, 1, o);
    for (int n = 1; n <= 3; ++n) {
        auto pushed = push_mask(dm, a.mask, a.frame, a.r, 4, 1);
        advance(dm, a, o);
        CHECK(hausdorff_px(pushed, a.mask, o.res) <= 3.0);
    }
}

TEST_CASE("raster continuation covers the traced curves") {
    AttractOptions o;
    o.res = 512;
    auto dm = DiskMap::pants(kEps0);
    auto a = attractor_approx(dm, 2, o);
    auto b = a;
    b.raster_mode = true;
    b.curves.clear();
    for (int n = 0; n < 3; ++n) {
        advance(dm, a, o);
        advance(dm, b, o);
    }
    auto d = distance_transform(b.mask, o.res);
    double worst = 0.0;
    for (size_t i = 0; i < a.mask.size(); ++i)
        if (a.mask[i]) worst = std::max(worst, d[i]);
    CHECK(worst <= 1.5);
    CHECK(hausdorff_px(a.mask, b.mask, o.res) <= 3.0);
}

TEST_CASE("traced images stay continuous at eps0") {
    AttractOptions o;
    auto dm = DiskMap::pants(kEps0);
    auto a = attractor_approx(dm, 5, o);
    CHECK_FALSE(a.mesh_too_coarse);
    CHECK(a.worst_gap_px <= 5.0);
}

TEST_CASE("successive d_H strictly decreasing for N = 1..12 at eps0") {
    AttractOptions o;
    auto dm = DiskMap::pants(kEps0);
    auto a = attractor_approx(dm, 13, o);
    REQUIRE(a.dh_history.size() == 13);
    // dh_history[n-1] = d_H(A_n, A_{n-1}); the property concerns d_H(A_N, A_{N+1})
    for (int n = 1; n < 12; ++n) {
        INFO("N = " << n << ": " << a.dh_history[n] << " then " << a.dh_history[n + 1]);
        CHECK(a.dh_history[n + 1] < a.dh_history[n]);
    }
}

TEST_CASE("N selection stops at the first step below 2 px") {
    AttractOptions o;
    o.res = 512;
    auto dm = DiskMap::pants(kEps0);
    auto a = attractor_auto(dm, o, 14);
    auto b = a;
    advance(dm, b, o);
    CHECK(b.dh_history.back() < 2.0);
    for (size_t i = 0; i < a.dh_history.size(); ++i) CHECK(a.dh_history[i] >= 2.0);
}

TEST_CASE("accessible arc at eps0 reaches the 2-periodic point") {
    AttractOptions o;
    auto dm = DiskMap::pants(kEps0);
    auto a = attractor_auto(dm, o);
    auto arc = accessible_arc(dm, 2, a.depth, o.r, a.frame);
    CHECK(arc.forward_rotation == 0.5);
    CHECK(arc.backward_rotation == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(arc.envelope_rotation == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(arc.exposed);
    Lift f = side_lift(dm);
    CHECK(std::abs(f.eval(f.eval(arc.point)) - arc.point - 1.0) < 1e-12);
    CHECK(band_overlap_px(arc.xy, dilate(a.mask, a.frame.res, 1), a.frame) < 3.0);
    CHECK(radial_access(dm, arc.point, 2));
}

TEST_CASE("five-piece accessibility") {
    AttractOptions o;
    Raster fr;
    fr.res = o.res;
    SUBCASE("variant A") {
        auto dm = DiskMap::five_piece('A');
        auto in = accessible_arc(dm, 0, 8, o.r, fr);
        CHECK(in.forward_rotation == 0.0);
        CHECK(in.backward_rotation == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(in.point >= 0.5);
        CHECK(std::abs(make_five_piece().eval(in.point) - in.point) < 1e-12);
        auto out = accessible_arc(dm, 1, 8, o.r, fr);
        CHECK(out.forward_rotation == 1.0);
        CHECK(out.backward_rotation == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("variant B hides the fixed arc") {
        auto dm = DiskMap::five_piece('B');
        int seen = 0;
        for (int k = 0; k < 1000; ++k) {
            double y = 0.5 + 0.5 * (k + 0.5) / 1000.0;
            for (int side : {0, 1})
                if (radial_access(dm, y, side)) ++seen;
        }
        CHECK(seen == 0);
        auto in = accessible_arc(dm, 0, 8, o.r, fr);
        CHECK(in.forward_rotation == -1.0);
        CHECK(in.point < 0.5);
    }
}

TEST_CASE("accessible terminal arcs meet the band only at their end") {
    AttractOptions o;
    for (char v : {'A', 'B'}) {
        auto dm = DiskMap::five_piece(v);
        auto a = attractor_auto(dm, o);
        auto band = dilate(a.mask, a.frame.res, 1);
        for (int side : {0, 1}) {
            auto arc = accessible_arc(dm, side, a.depth, o.r, a.frame);
            INFO("variant " << v << " side " << side);
            CHECK(band_overlap_px(arc.xy, band, a.frame) < 3.0);
        }
    }
}

TEST_CASE("band overlap measures the tail inside the band") {
    Raster fr;
    fr.res = 100;
    std::vector<std::uint8_t> band(100 * 100, 0);
    for (int r = 0; r < 100; ++r)
        for (int c = 60; c < 100; ++c) band[static_cast<size_t>(r) * 100 + c] = 1;
    std::vector<std::array<double, 2>> arc;
    for (int k = 0; k <= 80; ++k) arc.push_back(fr.to_xy(10.5 + k, 50.5));
    CHECK(band_overlap_px(arc, band, fr) == doctest::Approx(30.0));
    arc.resize(40);
    CHECK(band_overlap_px(arc, band, fr) == 0.0);
}

TEST_CASE("g3 marked orbit advances three places in exterior order") {
    auto g = make_g3();
    std::vector<ChainPoint> cyc{g.marks["q1"], g.marks["q2"], g.marks["q3"], g.marks["q4"]};
    auto sh = exterior_shifts(g, cyc);
    REQUIRE(sh.size() == 4);
    for (int s : sh) CHECK(s == 3);
    // the walk visits each circle once around: positions increase along the bottom of S0
    auto phi = make_phi_eps(0.2);
    CHECK(exterior_position(phi, {0, 0.5}) == doctest::Approx(0.0));
    CHECK(exterior_position(phi, {0, 0.25}) == doctest::Approx(0.5));
    CHECK(exterior_position(phi, {1, 0.5}) == doctest::Approx(2.0));
    CHECK(exterior_position(phi, {1, 0.25}) == doctest::Approx(2.5));
    CHECK(exterior_position(phi, {0, 0.75}) == doctest::Approx(3.5));
    CHECK_THROWS(exterior_shifts(g, {g.marks["q1"], g.marks["q3"]}));
}

TEST_CASE("translation line") {
    AttractOptions o;
    auto dm = DiskMap::pants(kEps0);
    auto one = translation_line(dm, 1, o, 4);
    REQUIRE(one.pieces.size() == 1);
    REQUIRE(one.chain.size() == 2);
    auto z0 = dm.theta(one.chain[0], o.r);
    CHECK(dm.same_point(z0, one.chain[1]));
    CHECK(one.disjoint);
    CHECK(one.clear_pieces == 1);
    auto many = translation_line(dm, 5, o, 4);
    REQUIRE(many.band_distance_px.size() == 5);
    for (size_t i = 1; i < 5; ++i) CHECK(many.band_distance_px[i] <= many.band_distance_px[i - 1]);
    CHECK(many.band_distance_px.back() < many.band_distance_px.front());
    CHECK_THROWS(translation_line(DiskMap::five_piece('A'), 1, o, 2));
}

TEST_CASE("image and report output") {
    auto cc = control_common_circle(64);
    std::string path = "test_attract_out.pgm";
    write_pgm(path, basin_gray(cc), 64);
    std::ifstream is(path, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, mx = 0;
    is >> magic >> w >> h >> mx;
    CHECK(magic == "P5");
    CHECK(w == 64);
    CHECK(h == 64);
    CHECK(mx == 255);
    is.close();
    std::remove(path.c_str());
    CHECK(basin_rgb(cc).size() == 64u * 64u * 3u);
    AttractorApprox a;
    a.depth = 3;
    a.dh_history = {5.0, 2.0, 1.0};
    auto j = report_json(a, {0.5, 0.25});
    CHECK(j["N"] == 3);
    CHECK(j["d_H_history"].size() == 3);
    CHECK(j["wada_scores"][1] == 0.25);
}
