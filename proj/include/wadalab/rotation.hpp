#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wadalab/lift.hpp"

namespace wl {

struct Rational {
    long long p = 0;
    long long q = 1;
    double value() const { return static_cast<double>(p) / static_cast<double>(q); }
    std::string str() const { return std::to_string(p) + "/" + std::to_string(q); }
};

struct RotationEstimate {
    double value = 0.0;
    double error_bound = 1.0;
    long long iterations = 0;
    std::optional<Rational> exact;
    double numeric = 0.0;  // orbit average, kept even when certified
    // rigorous bracket from orbits pushed up / down by a rounding margin each step
    double bracket_lo = 0.0, bracket_hi = 0.0;
};

struct RotationInterval {
    RotationEstimate lo, hi;
};

struct ClimbingIntervals {
    double w0, z0_next;  // efficient interval [w0, z0+1]
    double y0, w0_prime;  // lower interval [y0, w0']
};

enum class Side { Upper, Lower };

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct LowerClimbingAbsent : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kDefaultMaxQ = 64;

// throws PreconditionError if the markers do not split the period into a
// nonincreasing piece [z0,y0] and a nondecreasing piece [y0,z0+1]
void check_two_turn(const Lift& f);

std::optional<Rational> certify_rational(const Lift& m, int max_q = kDefaultMaxQ);
RotationEstimate rot_monotone(const Lift& m, double tol, int max_q = kDefaultMaxQ);

Lift envelope(const Lift& f, Side side);
// the two-turn water pouring construction, only valid with turn markers
Lift pouring(const Lift& f, Side side);

RotationInterval rotation_interval(const Lift& f, double tol, int max_q = kDefaultMaxQ);
RotationEstimate pointwise_rotation(const Lift& f, double x, long long n);
ClimbingIntervals climbing_intervals(const Lift& f);

struct BackwardOrbit {
    double point;                // y*
    std::vector<double> orbit;   // y*, y_{-1}, ..., y_{-depth}
    double forward_rotation;
    double backward_rotation;
    double target;               // rho(F+)
};

BackwardOrbit backward_orbit_in_climbing(const Lift& f, int depth, double tol);

// true if x lies in [a, b] + k * period for some integer k, slack tol
bool in_translate(double x, double a, double b, double tol = 1e-10, double period = 1.0);

}  // namespace wl
