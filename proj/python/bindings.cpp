#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "kakulab/birkhoff.hpp"
#include "kakulab/cf.hpp"
#include "kakulab/errors.hpp"
#include "kakulab/harness.hpp"
#include "kakulab/invariant_lab.hpp"
#include "kakulab/matching.hpp"
#include "kakulab/roof.hpp"
#include "kakulab/special_flow.hpp"

namespace py = pybind11;
using namespace kakulab;

namespace {

using Point = std::pair<double, double>;

FlowPoint to_point(const Point& p) { return FlowPoint::make(p.first, p.second); }
Point from_point(const FlowPoint& p) { return {p.base(), p.x_v}; }

py::dict bracket_dict(const DKBracket& b) {
  py::dict d;
  d["lower"] = b.lower;
  d["value"] = b.value;
  d["upper"] = b.upper;
  d["pass"] = b.pass;
  return d;
}

}  // namespace

PYBIND11_MODULE(_kakulab, m) {
  m.doc() = "Special flows over rotations, matchings and Kakutani boxes";
  m.attr("__version__") = KAKULAB_VERSION;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_OverflowError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_ArithmeticError);
  py::register_exception<PrecisionError>(m, "PrecisionError", PyExc_ArithmeticError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  py::class_<Irrational>(m, "Irrational")
      .def_property_readonly("value", &Irrational::as_double)
      .def_property_readonly("label", &Irrational::label)
      .def_property_readonly("depth", &Irrational::depth)
      .def("a", &Irrational::a, py::arg("k"))
      .def("p", &Irrational::p, py::arg("k"))
      .def("q", &Irrational::q, py::arg("k"))
      .def("convergent_index", &Irrational::convergent_index, py::arg("n"))
      .def("__repr__", [](const Irrational& a) { return "<Irrational " + a.label() + ">"; });

  m.def("golden_mean", &golden_mean, py::arg("depth") = kMaxGoldenDepth);
  m.def("sqrt2_minus_1", &sqrt2_minus_1, py::arg("depth") = kMaxSqrt2Depth);
  m.def("parse_alpha", [](const std::string& s, int depth) { return parse_alpha(s, depth); }, py::arg("spec"),
        py::arg("depth") = 40);
  m.def(
      "from_partial_quotients",
      [](const std::vector<std::uint64_t>& a, const std::string& label) { return from_partial_quotients(a, label); },
      py::arg("a"), py::arg("label") = "synthetic");
  m.def("best_approx_dist", &best_approx_dist, py::arg("alpha"), py::arg("n"));

  py::class_<RoofParams>(m, "RoofParams")
      .def(py::init([](double gamma, const std::string& mode) { return RoofParams::make(gamma, parse_roof_mode(mode)); }),
           py::arg("gamma"), py::arg("mode") = "pure")
      .def_readonly("gamma", &RoofParams::gamma)
      .def_property_readonly("mode", [](const RoofParams& r) { return std::string(to_string(r.mode)); })
      .def_readonly("a1", &RoofParams::a1)
      .def_readonly("b1", &RoofParams::b1);
  m.def("eval_roof", py::overload_cast<const RoofParams&, double, int>(&eval_roof), py::arg("roof"), py::arg("x"),
        py::arg("order") = 0);
  m.def("roof_integral", &roof_integral, py::arg("roof"));
  m.def("roof_minimum", &roof_minimum, py::arg("roof"));

  m.def(
      "birkhoff_sum",
      [](const RoofParams& r, const Irrational& a, double z, std::int64_t n, int order) {
        return birkhoff_sum(r, a, CirclePoint::from_double(z), n, order);
      },
      py::arg("roof"), py::arg("alpha"), py::arg("z"), py::arg("m"), py::arg("order") = 0);
  m.def(
      "orbit_min",
      [](const Irrational& a, double z, std::int64_t n) {
        const OrbitMin o = orbit_min(a, CirclePoint::from_double(z), n);
        return py::make_tuple(o.min_dist, o.argmin_j);
      },
      py::arg("alpha"), py::arg("z"), py::arg("m"), "(min_dist, argmin_j)");
  m.def(
      "dk_check",
      [](const RoofParams& r, const Irrational& a, double z, std::int64_t n) {
        const DKReport rep = dk_check(r, a, CirclePoint::from_double(z), n);
        py::dict d;
        d["m"] = rep.m;
        d["s"] = rep.s;
        d["z_min"] = rep.zmin.min_dist;
        d["f"] = bracket_dict(rep.brackets[0]);
        d["df"] = bracket_dict(rep.brackets[1]);
        d["d2f"] = bracket_dict(rep.brackets[2]);
        d["all_pass"] = rep.all_pass();
        return d;
      },
      py::arg("roof"), py::arg("alpha"), py::arg("z"), py::arg("m"));

  py::class_<SpecialFlow>(m, "SpecialFlow")
      .def(py::init<RoofParams, Irrational>(), py::arg("roof"), py::arg("alpha"))
      .def_property_readonly("roof_integral", &SpecialFlow::roof_integral)
      .def_property_readonly("roof_minimum", &SpecialFlow::roof_minimum)
      .def(
          "flow", [](const SpecialFlow& f, const Point& x, double t) { return from_point(f.flow(to_point(x), t)); },
          py::arg("x"), py::arg("t"), "Flow a (base, height) point for time t.")
      .def(
          "hit_count", [](const SpecialFlow& f, const Point& x, double t) { return f.hit_count(to_point(x), t); },
          py::arg("x"), py::arg("t"))
      .def(
          "sample",
          [](const SpecialFlow& f, std::size_t n, std::uint64_t seed) {
            std::vector<Point> out;
            for (const FlowPoint& p : sample_suspension(f, n, seed)) out.push_back(from_point(p));
            return out;
          },
          py::arg("n"), py::arg("seed") = 1);

  py::class_<ProductFlow>(m, "ProductFlow")
      .def(py::init<SpecialFlow, SpecialFlow>(), py::arg("first"), py::arg("second"))
      .def(
          "flow",
          [](const ProductFlow& f, const Point& a, const Point& b, double t) {
            const ProductPoint p = f.flow({to_point(a), to_point(b)}, t);
            return py::make_tuple(from_point(p.first), from_point(p.second));
          },
          py::arg("x1"), py::arg("x2"), py::arg("t"))
      .def(
          "track",
          [](const ProductFlow& f, const Point& a, const Point& b, double R, double delta, int mpart) {
            const double d = delta > 0.0 ? delta : default_delta(f);
            return sample_track(f, {to_point(a), to_point(b)}, R, d, PartitionSpec(mpart)).symbols;
          },
          py::arg("x1"), py::arg("x2"), py::arg("R"), py::arg("delta") = 0.0, py::arg("m") = 4,
          "Product atom ids sampled every delta up to R.");

  m.def(
      "best_match",
      [](const std::vector<std::uint64_t>& u, const std::vector<std::uint64_t>& v, double eps) {
        const MatchResult r = best_match(u, v, eps);
        py::dict d;
        d["count"] = r.count();
        d["pairs"] = r.pairs;
        d["fraction_u"] = r.fraction_u;
        d["fraction_v"] = r.fraction_v;
        d["epsilon"] = r.epsilon;
        return d;
      },
      py::arg("u"), py::arg("v"), py::arg("epsilon"));

  m.def(
      "theorem_bounds",
      [](double g1, double g2) {
        const BoundsReport b = theorem_bounds(g1, g2);
        return py::make_tuple(b.lower, b.upper, b.nonstandard);
      },
      py::arg("gamma1"), py::arg("gamma2"), "(lower, upper, nonstandard)");
  m.def("nonstandard_threshold", &nonstandard_threshold, py::arg("abs_gamma1"));
  m.def(
      "disjoint_family",
      [](double g1, double g2, int count) {
        std::vector<py::tuple> out;
        for (const BoundsReport& b : disjoint_family(g1, g2, count))
          out.push_back(py::make_tuple(b.gamma1, b.gamma2, b.lower, b.upper));
        return out;
      },
      py::arg("gamma1"), py::arg("gamma2"), py::arg("count"));
  m.def(
      "sn_measure",
      [](const SpecialFlow& f, int n, std::size_t samples, std::uint64_t seed) {
        const MeasureEstimate e = sn_measure(f, n, samples, seed);
        py::dict d;
        d["estimate"] = e.estimate;
        d["standard_error"] = e.standard_error;
        d["bound"] = e.bound;
        d["pass"] = e.pass;
        return d;
      },
      py::arg("flow"), py::arg("n"), py::arg("samples") = 10000, py::arg("seed") = 1);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "kakulab");
        py::gil_scoped_release release;
        return harness::run_cli(args);
      },
      py::arg("args"), "Run a kakulab subcommand; returns the exit status.");
}
