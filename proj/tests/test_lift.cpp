#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "wadalab/families.hpp"
#include "wadalab/lift.hpp"

using namespace wl;

namespace {

std::vector<Lift> sample_lifts() {
    return {Lift::identity(),
            Lift::rotation(1.0 / 3.0),
            make_five_piece(),
            quotient_lift(make_phi_eps(0.1)),
            quotient_lift(make_phi_eps(kEps0)),
            make_arnold(0.7),
            make_arnold(5.0),
            Lift::piecewise({0.0, 0.3, 0.6, 1.0}, {0.1, 1.2, 0.4, 1.1})};
}

}  // namespace

TEST_CASE("eval basics") {
    CHECK(Lift::identity().eval(0.3) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(make_arnold(0.0).eval(1.7) == doctest::Approx(1.7).epsilon(1e-15));
    // five-piece at 1/8: slope -7 from (0,0)
    CHECK(make_five_piece().eval(0.125) == doctest::Approx(-0.875).epsilon(1e-15));
}

TEST_CASE("eval agrees with a linear scan") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (const auto& f : sample_lifts()) {
        if (!f.is_piecewise()) continue;
        for (int i = 0; i < 2000; ++i) {
            double x = u(rng);
            CHECK(f.eval(x) == doctest::Approx(oracle::eval(f.breakpoints(), f.values(), x)).epsilon(1e-13));
        }
    }
}

TEST_CASE("degree one under integer shifts") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_int_distribution<int> k(-4, 4);
    for (const auto& f : sample_lifts()) {
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            double x = u(rng);
            int s = k(rng);
            worst = std::max(worst, std::abs(f.eval(x + s) - f.eval(x) - s));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("iterate") {
    CHECK(iterate(Lift::rotation(1.0 / 3.0), 0.0, 3) == doctest::Approx(1.0).epsilon(1e-15));
    auto q = quotient_lift(make_phi_eps(kEps0));
    double umax = (1.0 - kEps0) / 2.0;
    CHECK(std::abs(iterate(q, umax, 2) - (umax + 1.0)) < 1e-9);
    CHECK(iterate(make_five_piece(), 0.25, 5) == doctest::Approx(5.25).epsilon(1e-15));
}

TEST_CASE("iterate composes") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& f : sample_lifts()) {
        for (int i = 0; i < 50; ++i) {
            double x = u(rng);
            int n = 3, m = 4;
            double a = iterate(f, x, n + m), b = iterate(f, iterate(f, x, n), m);
            CHECK(std::abs(a - b) < 1e-9 * (n + m));
        }
    }
}

TEST_CASE("preimages") {
    auto p = preimages(Lift::identity(), 0.4);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == doctest::Approx(0.4));

    // tent with peak 1.2: solve 1.1 on each slope by hand
    auto tent = Lift::piecewise({0.0, 0.5, 1.0}, {0.0, 1.2, 1.0});
    auto t = preimages(tent, 1.1);
    int hits = 0;
    for (double x : t) {
        double r = x - std::floor(x);
        if (std::abs(r - 1.1 / 2.4) < 1e-12) ++hits;
        if (std::abs(r - (0.5 + 0.1 / 0.2 * 0.5)) < 1e-12) ++hits;
    }
    CHECK(hits == 2);
    for (double x : t) CHECK(tent.eval(x) == doctest::Approx(1.1).epsilon(1e-12));

    auto five = make_five_piece();
    auto q = preimages(five, 0.75);
    int on_arc = 0;
    for (double x : q) {
        CHECK(five.eval(x) == doctest::Approx(0.75).epsilon(1e-12));
        double r = x - std::floor(x);
        if (r >= 0.5) {
            ++on_arc;
            CHECK(r == doctest::Approx(0.75));
        }
    }
    CHECK(on_arc == 1);
    // enumerate affine pieces of [0,1/2] crossing 0.75 (and its integer translates)
    const auto& xs = five.breakpoints();
    const auto& vs = five.values();
    int crossings = 0;
    for (size_t i = 0; i + 2 < xs.size(); ++i)
        for (int k = -3; k <= 3; ++k) {
            double y = 0.75 + k;
            double lo = std::min(vs[i], vs[i + 1]), hi = std::max(vs[i], vs[i + 1]);
            if (y >= lo && y < hi) ++crossings;
        }
    CHECK(static_cast<int>(q.size()) == crossings + 1);
}

TEST_CASE("preimages round trip") {
    std::mt19937_64 rng(5);
    for (const auto& f : sample_lifts()) {
        std::uniform_real_distribution<double> u(f.x0(), f.x0() + 1.0);
        for (int i = 0; i < 500; ++i) {
            double x = u(rng);
            auto pre = preimages(f, f.eval(x));
            double best = 1.0;
            for (double c : pre) best = std::min(best, std::abs(c - x));
            CHECK(best < 1e-10);
        }
    }
}

TEST_CASE("composition matches repeated evaluation") {
    auto f = quotient_lift(make_phi_eps(0.2));
    auto f3 = power(f, 3);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double x = u(rng);
        CHECK(f3.eval(x) == doctest::Approx(iterate(f, x, 3)).epsilon(1e-11));
    }
}

TEST_CASE("json round trip") {
    for (const auto& f : sample_lifts()) {
        auto g = Lift::from_json(nlohmann::json::parse(f.to_json().dump()));
        for (double x : {0.0, 0.13, 0.5, 0.77, 1.9})
            CHECK(g.eval(x) == doctest::Approx(f.eval(x)).epsilon(1e-15));
        CHECK(g.symmetry() == f.symmetry());
        CHECK(g.turns().has_value() == f.turns().has_value());
    }
}

TEST_CASE("construction rejects bad data") {
    CHECK_THROWS(Lift::piecewise({0.0, 1.0}, {0.0, 2.0}));
    CHECK_THROWS(Lift::piecewise({0.0, 0.5, 0.4, 1.0}, {0.0, 1.0, 1.0, 1.0}));
    CHECK_THROWS(Lift::arnold(-1.0));
}
