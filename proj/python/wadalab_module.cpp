#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wadalab/attract.hpp"
#include "wadalab/families.hpp"
#include "wadalab/rotation.hpp"

namespace py = pybind11;
using namespace wl;

namespace {

py::object exact_of(const RotationEstimate& r) {
    if (!r.exact) return py::none();
    return py::make_tuple(r.exact->p, r.exact->q);
}

py::dict estimate(const RotationEstimate& r) {
    py::dict d;
    d["value"] = r.value;
    d["exact"] = exact_of(r);
    d["error"] = r.error_bound;
    d["numeric"] = r.numeric;
    d["iterations"] = r.iterations;
    return d;
}

DiskMap disk(const std::string& family, double eps, double t, const std::string& variant) {
    if (family == "phi-chain" || family == "phi-quotient") return DiskMap::pants(eps);
    if (family == "arnold") return DiskMap::annulus_arnold(t);
    if (family == "five-piece") {
        if (variant != "A" && variant != "B") throw std::invalid_argument("variant is A or B");
        return DiskMap::five_piece(variant[0]);
    }
    throw std::invalid_argument("no disk model for family '" + family + "'");
}

py::array_t<std::uint8_t> as_image(const std::vector<std::uint8_t>& v, int res) {
    py::array_t<std::uint8_t> a({res, res});
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

}  // namespace

PYBIND11_MODULE(wadalab, m) {
    m.doc() = "rotation sets of circle maps, attractor pictures and Wada basins";
    m.attr("EPS0") = kEps0;

    py::class_<Lift>(m, "Lift")
        .def_static("piecewise", [](std::vector<double> xs, std::vector<double> vs) {
            return Lift::piecewise(std::move(xs), std::move(vs));
        })
        .def("__call__", &Lift::eval)
        .def("eval", &Lift::eval)
        .def("monotone", &Lift::monotone)
        .def("breakpoints", &Lift::breakpoints)
        .def("values", &Lift::values)
        .def("to_json", [](const Lift& f) { return f.to_json().dump(); });

    m.def("phi_quotient", [](double eps) { return quotient_lift(make_phi_eps(eps)); }, py::arg("eps") = kEps0);
    m.def("arnold", &make_arnold, py::arg("t"));
    m.def("five_piece", &make_five_piece);

    m.def(
        "rotation_interval",
        [](const Lift& f, double tol) {
            auto r = rotation_interval(f, tol);
            return py::make_tuple(estimate(r.lo), estimate(r.hi));
        },
        py::arg("lift"), py::arg("tol") = 1e-5);
    m.def(
        "pointwise_rotation", [](const Lift& f, double x, long long n) { return pointwise_rotation(f, x, n).value; },
        py::arg("lift"), py::arg("x"), py::arg("n") = 10000);
    m.def("entropy_closed_form", &entropy_closed_form);
    m.def(
        "lap_entropy", [](double eps, int n) { return lap_entropy(make_phi_eps(eps), n); }, py::arg("eps"),
        py::arg("n") = 12);

    m.def("g3_shifts", [] {
        auto g = make_g3();
        return exterior_shifts(g, {g.marks.at("q1"), g.marks.at("q2"), g.marks.at("q3"), g.marks.at("q4")});
    });

    m.def(
        "access",
        [](const std::string& family, const std::string& side, const std::string& variant, double eps, double t,
           int depth) {
            auto dm = disk(family, eps, t, variant);
            bool pants = dm.kind() == ChartKind::Pants;
            if (side != "in" && side != "out") throw std::invalid_argument("side is in or out");
            if (pants && side == "in") throw std::invalid_argument("the pants model is reached from outside only");
            int s = side == "out" ? (pants ? 2 : 1) : 0;
            auto a = accessible_arc(dm, s, depth, 0.3, Raster{});
            py::dict d;
            d["point"] = a.point;
            d["forward_rotation"] = a.forward_rotation;
            d["backward_rotation"] = a.backward_rotation;
            d["envelope_rotation"] = a.envelope_rotation;
            d["exposed"] = a.exposed;
            d["arc"] = a.xy;
            return d;
        },
        py::arg("family"), py::arg("side") = "out", py::arg("variant") = "A", py::arg("eps") = kEps0,
        py::arg("t") = 2.0, py::arg("depth") = 10);

    m.def(
        "basins",
        [](const std::string& family, double eps, double t, const std::string& variant, int res, int depth) {
            auto dm = disk(family, eps, t, variant);
            AttractOptions o;
            o.res = res;
            AttractorApprox a;
            {
                py::gil_scoped_release nogil;
                a = depth >= 0 ? attractor_approx(dm, depth, o) : attractor_auto(dm, o);
            }
            auto bg = basin_label(dm, a);
            py::dict d;
            d["depth"] = a.depth;
            d["dh_history"] = a.dh_history;
            d["mask"] = as_image(a.mask, res);
            d["labels"] = as_image(bg.label, res);
            d["wada_scores"] = wada_score(bg, 3);
            return d;
        },
        py::arg("family") = "phi-chain", py::arg("eps") = kEps0, py::arg("t") = 2.0, py::arg("variant") = "A",
        py::arg("res") = 256, py::arg("depth") = -1);
}
