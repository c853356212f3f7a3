#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wl {

struct Turns {
    double z0;  // start of the decreasing piece
    double y0;  // start of the increasing piece
};

// flat overlay used by closed form envelopes: value c+k on [a+k, b+k]
struct Plateau {
    double a, b, c;
};

enum class LiftKind { Piecewise, Arnold };

class Lift {
public:
    static Lift piecewise(std::vector<double> xs, std::vector<double> vs,
                          std::optional<Turns> turns = std::nullopt);
    static Lift arnold(double t);
    static Lift identity();
    static Lift rotation(double a);

    double eval(double x) const;
    double slope(double x) const;

    LiftKind kind() const { return kind_; }
    bool is_piecewise() const { return kind_ == LiftKind::Piecewise; }
    bool monotone() const;

    const std::vector<double>& breakpoints() const { return xs_; }
    const std::vector<double>& values() const { return vs_; }
    const std::optional<Turns>& turns() const { return turns_; }
    const std::optional<Plateau>& plateau() const { return plateau_; }
    double arnold_t() const { return t_; }
    double x0() const { return kind_ == LiftKind::Piecewise ? xs_.front() : 0.0; }

    // points splitting one period into monotone (or plateau) pieces, first = x0, last = x0+1
    std::vector<double> monotone_cuts() const;

    Lift with_plateau(Plateau p) const;
    Lift with_turns(Turns t) const;
    // declares f(x + 1/d) = f(x) + 1/d; turn markers then describe one 1/d period
    Lift with_symmetry(int d) const;
    int symmetry() const { return symmetry_; }

    nlohmann::json to_json() const;
    static Lift from_json(const nlohmann::json& j);

private:
    LiftKind kind_ = LiftKind::Piecewise;
    std::vector<double> xs_, vs_;
    double t_ = 0.0;
    std::optional<Plateau> plateau_;
    std::optional<Turns> turns_;
    int symmetry_ = 1;

    double eval_closed(double x) const;
};

// orbit point with the integer displacement kept apart from the fractional part
struct OrbitPoint {
    double frac;
    long long whole;
    double value() const { return static_cast<double>(whole) + frac; }
};

double eval(const Lift& f, double x);
double iterate(const Lift& f, double x, long long n);
OrbitPoint iterate_split(const Lift& f, OrbitPoint p, long long n);
OrbitPoint step_split(const Lift& f, OrbitPoint p);

// all x in [x0, x0+1) with f(x) = y + k for some integer k; returned values are x+k' shifted
// so that eval(f, x) == y up to root-solving error
std::vector<double> preimages(const Lift& f, double y);

// h(x) = d f(x/d) for a lift with symmetry d, and the inverse operation
Lift reduce_symmetry(const Lift& f);
Lift expand_symmetry(const Lift& h, int d);

// exact composition f^n of a piecewise lift, breakpoints on [x0, x0+1]
Lift compose(const Lift& f, const Lift& g);
Lift power(const Lift& f, int n);

}  // namespace wl
