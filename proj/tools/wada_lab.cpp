#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acceptance_suite.hpp"
#include "wadalab/attract.hpp"
#include "wadalab/families.hpp"
#include "wadalab/rotation.hpp"

using namespace wl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string family = "phi-quotient";
    std::string eps = "eps0";
    std::optional<double> t;
    std::vector<std::string> range;
    int steps = 25;
    double tol = 1e-5;
    long iters = 12;
    int res = 1024;
    int depth = -1;
    std::string variant = "A";
    std::string side = "out";
    std::string out = "wada_lab_out";
    int workers = 0;
};

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

fs::path out_dir(const Config& c) {
    const char* env = std::getenv("WADA_LAB_OUT");
    fs::path p = env && *env ? fs::path(env) : fs::path(c.out);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << s;
}

int workers_of(const Config& c) {
    if (c.workers > 0) return c.workers;
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

bool known_family(const std::string& name) {
    for (const auto& f : families_registry())
        if (f["name"] == name) return true;
    return false;
}

void need_family(const Config& c) {
    if (!known_family(c.family)) throw UsageError("unknown family '" + c.family + "'");
}

bool is_phi(const Config& c) { return c.family == "phi-quotient" || c.family == "phi-chain"; }

// a number, or the literal eps0
double parse_param(const std::string& s, const char* flag) {
    if (s == "eps0") return kEps0;
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string(flag) + " takes numbers or eps0");
}

double eps_of(const Config& c) {
    double e = parse_param(c.eps, "--eps");
    if (!(e > 0.0 && e <= kEps0 + 1e-12)) throw UsageError("--eps must lie in (0, " + g17(kEps0) + "]");
    return std::min(e, kEps0);
}

double t_of(const Config& c) {
    double t = c.t.value_or(2.0);
    if (!(t >= 0.0)) throw UsageError("--t must be >= 0");
    return t;
}

char variant_of(const Config& c) {
    if (c.variant != "A" && c.variant != "B") throw UsageError("--variant is A or B");
    return c.variant[0];
}

// lift for a one-parameter family at parameter p
Lift lift_at(const std::string& family, double p) {
    if (family == "phi-quotient" || family == "phi-chain") return quotient_lift(make_phi_eps(p));
    if (family == "arnold") return make_arnold(p);
    if (family == "five-piece") return make_five_piece();
    throw UsageError("family '" + family + "' has no lift");
}

double param_of(const Config& c) {
    if (is_phi(c)) return eps_of(c);
    if (c.family == "arnold") return t_of(c);
    return 0.0;
}

DiskMap disk_of(const Config& c) {
    if (is_phi(c)) return DiskMap::pants(eps_of(c));
    if (c.family == "arnold") return DiskMap::annulus_arnold(t_of(c));
    if (c.family == "five-piece") return DiskMap::five_piece(variant_of(c));
    throw UsageError("family '" + c.family + "' has no disk model");
}

const char* kRowHeader = "family,param,lo,lo_exact,lo_error,hi,hi_exact,hi_error\n";

std::string row(const std::string& family, double p, const RotationInterval& r) {
    auto ex = [](const RotationEstimate& e) { return e.exact ? e.exact->str() : std::string(); };
    return family + "," + g17(p) + "," + g17(r.lo.value) + "," + ex(r.lo) + "," + g17(r.lo.error_bound) + "," +
           g17(r.hi.value) + "," + ex(r.hi) + "," + g17(r.hi.error_bound) + "\n";
}

int cmd_rotset(const Config& c) {
    need_family(c);
    double p = param_of(c);
    auto r = rotation_interval(lift_at(c.family, p), c.tol);
    std::string csv = std::string(kRowHeader) + row(c.family, p, r);
    write_text(out_dir(c) / "rotset.csv", csv);
    std::cout << csv;
    return 0;
}

int cmd_sweep(const Config& c) {
    need_family(c);
    if (c.steps < 2) throw UsageError("--steps must be >= 2");
    double a = parse_param(c.range[0], "--range"), b = parse_param(c.range[1], "--range");
    if (!(a <= b)) throw UsageError("--range needs lo,hi with lo <= hi");
    if (is_phi(c) && !(a > 0.0 && b <= kEps0 + 1e-12)) throw UsageError("range outside family domain (0, eps0]");
    if (c.family == "arnold" && a < 0.0) throw UsageError("range outside family domain [0, inf)");
    if (!is_phi(c) && c.family != "arnold") throw UsageError("family '" + c.family + "' has no parameter");
    b = is_phi(c) ? std::min(b, kEps0) : b;

    int n = c.steps;
    std::vector<double> ps(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) ps[static_cast<size_t>(k)] = k == n - 1 ? b : a + (b - a) * k / (n - 1);
    std::vector<RotationInterval> rows(ps.size());
    // rows are independent; each worker takes every w-th index and writes its own slot
    int w = std::min(workers_of(c), n);
    std::vector<std::thread> ts;
    std::vector<std::string> errs(static_cast<size_t>(w));
    for (int k = 0; k < w; ++k)
        ts.emplace_back([&, k] {
            try {
                for (int i = k; i < n; i += w) {
                    auto ui = static_cast<size_t>(i);
                    rows[ui] = rotation_interval(lift_at(c.family, ps[ui]), c.tol);
                }
            } catch (const std::exception& e) {
                errs[static_cast<size_t>(k)] = e.what();
            }
        });
    for (auto& t : ts) t.join();
    for (const auto& e : errs)
        if (!e.empty()) throw std::invalid_argument(e);

    std::string csv = kRowHeader;
    bool inc = true;
    double sym = 0.0, jump = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<size_t>(i)];
        csv += row(c.family, ps[static_cast<size_t>(i)], r);
        sym = std::max(sym, std::abs(r.lo.value + r.hi.value));
        if (i > 0) {
            const auto& q = rows[static_cast<size_t>(i - 1)];
            inc = inc && r.hi.value > q.hi.value;
            jump = std::max({jump, std::abs(r.hi.value - q.hi.value), std::abs(r.lo.value - q.lo.value)});
        }
    }
    json v{{"strictly_increasing", inc}, {"symmetric", sym < 1e-6}, {"max_symmetry_defect", sym},
           {"max_adjacent_jump", jump}};
    auto dir = out_dir(c);
    write_text(dir / "sweep.csv", csv);
    write_text(dir / "sweep.json", v.dump(2) + "\n");
    std::cout << csv << v.dump() << "\n";
    return 0;
}

const int kAutoCap = 16;

AttractorApprox approx_of(const Config& c, const DiskMap& dm) {
    AttractOptions o;
    o.res = c.res;
    o.workers = c.workers;
    if (c.res < 16) throw UsageError("--res must be >= 16");
    return c.depth >= 0 ? attractor_approx(dm, c.depth, o) : attractor_auto(dm, o, kAutoCap);
}

int cmd_wada(const Config& c) {
    need_family(c);
    auto dm = disk_of(c);
    auto a = approx_of(c, dm);
    auto bg = basin_label(dm, a);
    auto sc = wada_score(bg, 3);
    auto dir = out_dir(c);
    write_pgm((dir / "basins.pgm").string(), basin_gray(bg), bg.res);
    write_png((dir / "basins.png").string(), basin_rgb(bg), bg.res);
    auto j = report_json(a, sc);
    bool ok = std::all_of(sc.begin(), sc.end(), [](double s) { return s >= 0.99; });
    j["pass"] = ok;
    write_text(dir / "wada.json", j.dump(2) + "\n");
    std::cout << j.dump() << "\n";
    return ok ? 0 : 1;
}

int cmd_render(const Config& c) {
    need_family(c);
    auto dm = disk_of(c);
    auto a = approx_of(c, dm);
    auto dir = out_dir(c);
    std::vector<std::uint8_t> gray(a.mask.size());
    for (size_t i = 0; i < gray.size(); ++i) gray[i] = a.mask[i] ? 0 : 255;
    write_pgm((dir / "attractor.pgm").string(), gray, a.frame.res);
    auto j = report_json(a, {});
    // with the automatic depth the 2 px rule must have fired before the cap
    bool ok = c.depth >= 0 || a.depth < kAutoCap;
    j["pass"] = ok;
    write_text(dir / "render.json", j.dump(2) + "\n");
    std::cout << j.dump() << "\n";
    return ok ? 0 : 1;
}

int access_g3(const Config& c) {
    auto g = make_g3();
    std::vector<ChainPoint> cyc{g.marks.at("q1"), g.marks.at("q2"), g.marks.at("q3"), g.marks.at("q4")};
    auto sh = exterior_shifts(g, cyc);
    json j{{"family", "g3"}, {"shifts", sh}};
    std::vector<double> pos;
    for (const auto& q : cyc) pos.push_back(exterior_position(g, q));
    j["exterior_positions"] = pos;
    bool ok = std::all_of(sh.begin(), sh.end(), [](int s) { return s == 3; });
    j["pass"] = ok;
    write_text(out_dir(c) / "access.json", j.dump(2) + "\n");
    std::cout << j.dump() << "\n";
    return ok ? 0 : 1;
}

int cmd_access(const Config& c) {
    need_family(c);
    if (c.family == "g3") return access_g3(c);
    auto dm = disk_of(c);
    int side;
    if (c.side == "out")
        side = dm.kind() == ChartKind::Pants ? 2 : 1;
    else if (c.side == "in" && dm.kind() != ChartKind::Pants)
        side = 0;
    else
        throw UsageError(dm.kind() == ChartKind::Pants ? "the pants model has --side out only" : "--side is in or out");
    int depth = c.depth > 0 ? c.depth : 10;
    Raster frame;
    frame.res = c.res;
    auto arc = accessible_arc(dm, side, depth, 0.3, frame);
    json j{{"family", c.family}, {"side", c.side}, {"depth", depth}, {"point", arc.point},
           {"forward_rotation", arc.forward_rotation}, {"backward_rotation", arc.backward_rotation},
           {"envelope_rotation", arc.envelope_rotation}, {"exposed", arc.exposed}};
    bool ok = arc.exposed && std::abs(arc.forward_rotation - arc.backward_rotation) < 1e-3;
    if (c.family == "five-piece") {
        int reached = 0;
        for (int k = 0; k < 1000; ++k)
            if (radial_access(dm, 0.5 + 0.5 * k / 999.0, side)) ++reached;
        j["fixed_points_reached"] = reached;
        j["fixed_arc_accessible"] = reached > 0;
        // variant B hides the whole arc; variant A shows it from inside only
        if (dm.variant() == 'B') ok = ok && reached == 0;
        if (dm.variant() == 'A' && side == 0) ok = ok && reached > 0 && arc.forward_rotation == 0.0;
    }
    j["pass"] = ok;
    auto dir = out_dir(c);
    std::string csv = "x,y\n";
    for (const auto& p : arc.xy) csv += g17(p[0]) + "," + g17(p[1]) + "\n";
    write_text(dir / "access_arc.csv", csv);
    write_text(dir / "access.json", j.dump(2) + "\n");
    std::cout << j.dump() << "\n";
    return ok ? 0 : 1;
}

int cmd_entropy(const Config& c) {
    double e = eps_of(c);
    if (c.iters < 1 || c.iters > 30) throw UsageError("--iters (laps) must be in 1..30");
    int n = static_cast<int>(c.iters);
    double h = lap_entropy(make_phi_eps(e), n), cf = entropy_closed_form(e);
    double rel = std::abs(h / cf - 1.0);
    bool ok = rel < 0.05;
    json j{{"eps", e}, {"n", n}, {"closed_form", cf}, {"lap_estimate", h}, {"relative_error", rel}, {"pass", ok}};
    auto dir = out_dir(c);
    write_text(dir / "entropy.csv", "eps,n,closed_form,lap_estimate\n" + g17(e) + "," + std::to_string(n) + "," +
                                        g17(cf) + "," + g17(h) + "\n");
    write_text(dir / "entropy.json", j.dump(2) + "\n");
    std::cout << j.dump() << "\n";
    return ok ? 0 : 1;
}

int cmd_selftest(const Config& c) {
    std::string text;
    int failed = 0;
    for (const auto& r : acceptance::run(c.workers)) {
        auto l = acceptance::line(r);
        std::cout << l << std::endl;
        text += l + "\n";
        failed += !r.pass;
    }
    text += std::to_string(failed) + " criteria failed\n";
    write_text(out_dir(c) / "selftest.txt", text);
    std::cout << failed << " criteria failed\n";
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wada_lab: rotation sets, attractors and Wada basins"};
    app.require_subcommand(1);
    Config c;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--family", c.family, "phi-quotient, phi-chain, arnold, five-piece or g3");
        s->add_option("--eps", c.eps, "eps of the phi family, a number or eps0 (default)");
        s->add_option("--t", c.t, "Arnold parameter");
        s->add_option("--tol", c.tol, "rotation number tolerance");
        s->add_option("--out", c.out, "output directory (WADA_LAB_OUT wins)");
        s->add_option("--workers", c.workers, "worker threads, 0 = all cores");
    };
    auto* rotset = app.add_subcommand("rotset", "rotation interval of one family member");
    add_common(rotset);
    auto* sweep = app.add_subcommand("sweep", "rotation intervals over a parameter range");
    add_common(sweep);
    sweep->add_option("--range", c.range, "lo,hi (eps0 allowed)")->delimiter(',')->expected(2)->required();
    sweep->add_option("--steps", c.steps, "grid points");
    auto* wada = app.add_subcommand("wada", "basins of the attractor approximation and their Wada scores");
    auto* render = app.add_subcommand("render", "attractor approximation image");
    for (auto* s : {wada, render}) {
        add_common(s);
        s->add_option("--res", c.res, "pixels per side");
        s->add_option("--depth", c.depth, "image depth N (default: 2 px rule)");
        s->add_option("--variant", c.variant, "five-piece embedding A or B");
    }
    auto* access = app.add_subcommand("access", "accessible point, its rotation data and terminal arc");
    add_common(access);
    access->add_option("--variant", c.variant, "five-piece embedding A or B");
    access->add_option("--side", c.side, "in or out");
    access->add_option("--depth", c.depth, "backward depth");
    access->add_option("--res", c.res, "pixels per side");
    auto* entropy = app.add_subcommand("entropy", "lap growth against the closed form");
    add_common(entropy);
    entropy->add_option("--iters,--laps", c.iters, "iterate used for the lap count");
    auto* selftest = app.add_subcommand("selftest", "acceptance suite");
    selftest->add_option("--out", c.out, "output directory");
    selftest->add_option("--workers", c.workers, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        if (*rotset) return cmd_rotset(c);
        if (*sweep) return cmd_sweep(c);
        if (*wada) return cmd_wada(c);
        if (*render) return cmd_render(c);
        if (*access) return cmd_access(c);
        if (*entropy) return cmd_entropy(c);
        if (*selftest) return cmd_selftest(c);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
