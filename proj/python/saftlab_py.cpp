#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "saftlab/io.hpp"
#include "saftlab/lattice.hpp"
#include "saftlab/meyer.hpp"
#include "saftlab/parallel.hpp"
#include "saftlab/params.hpp"
#include "saftlab/repro.hpp"
#include "saftlab/saft.hpp"
#include "saftlab/selftest.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace saftlab;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

py::object from_json(const io::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

GridFn to_grid(const CArray& values, const std::vector<double>& origin, const std::vector<double>& spacing) {
    const auto n = static_cast<std::size_t>(values.ndim());
    if (origin.size() != n || spacing.size() != n) throw StructuralError("origin and spacing need one entry per axis");
    std::vector<std::size_t> shape(values.shape(), values.shape() + n);
    GridSpec spec = GridSpec::over(RMat::Identity(static_cast<int>(n), static_cast<int>(n)), origin, spacing, shape);
    return GridFn(spec, std::vector<cplx>(values.data(), values.data() + values.size()));
}

py::dict grid_dict(const GridFn& f) {
    CArray values(std::vector<py::ssize_t>(f.spec.shape.begin(), f.spec.shape.end()));
    std::copy(f.values.begin(), f.values.end(), values.mutable_data());
    RMat pts(static_cast<Eigen::Index>(f.size()), f.n());
    for (std::size_t i = 0; i < f.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = f.spec.point(i).transpose();
    return py::dict("values"_a = values, "points"_a = pts, "origin"_a = f.spec.origin, "spacing"_a = f.spec.spacing,
                    "frame"_a = f.spec.frame);
}

SeqFn to_seq(const std::map<std::vector<std::int64_t>, cplx>& m, int n) {
    SeqFn s(n);
    for (const auto& [k, v] : m) {
        if (static_cast<int>(k.size()) != n) throw StructuralError("sequence index has the wrong dimension");
        s.set(k, v);
    }
    return s;
}

std::vector<RVec> to_points(const RMat& w) {
    std::vector<RVec> out;
    for (Eigen::Index i = 0; i < w.rows(); ++i) out.push_back(w.row(i).transpose());
    return out;
}

} // namespace

PYBIND11_MODULE(saftlab, m) {
    m.doc() = "Special affine Fourier transforms, SAFT convolutions and dynamical sampling";

    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ArithmeticError);

    py::class_<SaftParams>(m, "SaftParams")
        .def_static(
            "from_matrices",
            [](RMat A, RMat B, RMat C, RMat D, RVec P, RVec Q, double tol) {
                return SaftParams::from_matrices({A, B, C, D, P, Q}, tol);
            },
            "A"_a, "B"_a, "C"_a, "D"_a, "P"_a, "Q"_a, "tol"_a = kDefaultConstraintTol)
        .def_property_readonly("n", &SaftParams::n)
        .def_property_readonly("A", &SaftParams::A)
        .def_property_readonly("B", &SaftParams::B)
        .def_property_readonly("C", &SaftParams::C)
        .def_property_readonly("D", &SaftParams::D)
        .def_property_readonly("P", &SaftParams::P)
        .def_property_readonly("Q", &SaftParams::Q)
        .def("chirp", py::overload_cast<const RVec&>(&SaftParams::chirp, py::const_), "t"_a)
        .def("modulation", py::overload_cast<const RVec&>(&SaftParams::modulation, py::const_), "w"_a)
        .def("inverse", [](const SaftParams& p) { return inverse_params(p); })
        .def("to_json", [](const SaftParams& p) { return from_json(io::params_to_json(p)); })
        .def("__repr__", [](const SaftParams& p) { return "<SaftParams n=" + std::to_string(p.n()) + ">"; });

    m.def(
        "validate",
        [](RMat A, RMat B, RMat C, RMat D, RVec P, RVec Q, double tol) {
            const auto r = validate({A, B, C, D, P, Q}, tol);
            return py::dict("pass"_a = r.pass, "b_singular"_a = r.b_singular, "det_b"_a = r.det_b, "sym_ab"_a = r.sym_ab,
                            "sym_cd"_a = r.sym_cd, "unit_ad"_a = r.unit_ad, "message"_a = r.message);
        },
        "A"_a, "B"_a, "C"_a, "D"_a, "P"_a, "Q"_a, "tol"_a = kDefaultConstraintTol);
    m.def("params_from_json", [](const std::string& text) { return io::params_from_json(io::json::parse(text)); });

    m.def("fourier", &presets::fourier, "n"_a);
    m.def("fractional", &presets::fractional, "theta"_a);
    m.def("separable_lct", &presets::separable_lct, "a"_a, "b"_a, "c"_a, "d"_a);
    m.def("lorentz", &presets::lorentz, "phi"_a);
    m.def("fresnel", &presets::fresnel, "B"_a);
    m.def("separable_fresnel", &presets::separable_fresnel, "b"_a);
    m.def(
        "random_params",
        [](int n, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return random_params(n, rng);
        },
        "n"_a, "seed"_a = 0);

    m.def(
        "transform",
        [](const SaftParams& p, const CArray& values, std::vector<double> origin, std::vector<double> spacing,
           const std::string& backend) {
            const GridFn f = to_grid(values, origin, spacing);
            return grid_dict(saft_forward(make_plan(p, f.spec, std::nullopt, parse_backend(backend)), f));
        },
        "params"_a, "values"_a, "origin"_a, "spacing"_a, "backend"_a = "fast",
        "Forward SAFT of samples at origin + (k + 1/2) spacing; returns values, points and the output frame.");
    m.def(
        "saft_at",
        [](const SaftParams& p, const CArray& values, std::vector<double> origin, std::vector<double> spacing,
           const RMat& w) { return saft_at(p, to_grid(values, origin, spacing), to_points(w)); },
        "params"_a, "values"_a, "origin"_a, "spacing"_a, "w"_a);
    m.def(
        "dtsaft",
        [](const SaftParams& p, const std::map<std::vector<std::int64_t>, cplx>& s, const RMat& w) {
            return dtsaft_at(p, to_seq(s, p.n()), to_points(w));
        },
        "params"_a, "seq"_a, "w"_a, "DT-SAFT of {index tuple: value} at the rows of w.");

    m.def(
        "lattice",
        [](const IMat& M) {
            const auto lat = build_lattice(M);
            return py::dict("m"_a = lat.m, "gamma"_a = lat.gamma, "eta"_a = lat.eta);
        },
        "M"_a);

    m.def("meyer_psi", &meyer::psi, "x"_a);
    m.def("meyer_psi_check", &meyer::psi_check, "t"_a);

    m.def(
        "worked_example",
        [](cplx c1, cplx c2, std::int64_t window, std::int64_t radius, std::size_t W) {
            repro::Config cfg;
            cfg.c1 = c1;
            cfg.c2 = c2;
            cfg.window = window;
            cfg.radius = radius;
            cfg.W = W;
            const repro::Scenario sc(cfg);
            const auto r = [&] {
                py::gil_scoped_release release;
                return repro::run(sc);
            }();
            return from_json(repro::report_json(sc, r));
        },
        "c1"_a = cplx(1.0), "c2"_a = cplx(0.5), "window"_a = 128, "radius"_a = 256, "W"_a = 8);

    m.def(
        "selftest",
        [](int id, std::uint64_t seed, const std::string& workdir) {
            selftest::CheckResult r;
            {
                py::gil_scoped_release release;
                r = selftest::run_check(id, {seed, workdir});
            }
            return py::dict("id"_a = r.id, "name"_a = r.name, "pass"_a = r.pass, "value"_a = r.value,
                            "threshold"_a = r.threshold, "seconds"_a = r.seconds, "detail"_a = r.detail);
        },
        "criterion"_a, "seed"_a = selftest::Options{}.seed, "workdir"_a = "");

    m.def("set_threads", &set_thread_count, "n"_a);
}
