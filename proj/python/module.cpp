// Python bindings for the main operations: assembling the four semi-discrete
// wave formulations, spectrum diagnostics, the observability Gramian and its
// constants, spectral filters, and the Gramian-based boundary-control solve.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <functional>
#include <stdexcept>
#include <string>

#include "wavobs/assembly.hpp"
#include "wavobs/filters.hpp"
#include "wavobs/hum.hpp"
#include "wavobs/kernels.hpp"
#include "wavobs/observability.hpp"

namespace py = pybind11;

using wavobs::assembly::Formulation;
using wavobs::assembly::SemiDiscreteSystem;
using wavobs::kernels::Matrix;
using wavobs::kernels::Vector;
namespace assembly = wavobs::assembly;
namespace filters = wavobs::filters;
namespace hum = wavobs::hum;
namespace obs = wavobs::observability;

namespace {

// The shape must be passed as an explicit container: a single-element braced
// list would select the array_t(ssize_t count, ...) constructor instead
// (brace elision), which on older pybind11 releases produces a stride-0
// array that reads every index as element 0.
py::array_t<double> to_numpy(const Matrix& m) {
  const std::vector<py::ssize_t> shape = {m.rows, m.cols};
  return py::array_t<double>(shape, m.a.data());
}

py::array_t<double> to_numpy(const Vector& v) {
  const std::vector<py::ssize_t> shape = {static_cast<py::ssize_t>(v.size())};
  return py::array_t<double>(shape, v.data());
}

Vector vector_from(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
  return Vector(arr.data(), arr.data() + arr.shape(0));
}

Formulation parse_formulation(const std::string& name, double gamma) {
  if (name == "classical") return Formulation::classical();
  if (name == "mixed") return Formulation::mixed();
  if (name == "nitsche-sym") return Formulation::nitsche_symmetric(gamma);
  if (name == "nitsche-nonsym") return Formulation::nitsche_nonsymmetric(gamma);
  throw std::invalid_argument(
      "unknown formulation '" + name +
      "' (expected classical, mixed, nitsche-sym, or nitsche-nonsym)");
}

Vector observation_or_default(const SemiDiscreteSystem& sys,
                              const py::object& row) {
  if (row.is_none()) return sys.observation_row;
  return vector_from(row.cast<
      py::array_t<double, py::array::c_style | py::array::forcecast>>());
}

}  // namespace

PYBIND11_MODULE(_wavobs, m) {
  m.doc() =
      "Boundary observability and HUM control for spectral semi-discrete "
      "1-D wave equations on (-1, 1)";

  py::register_exception<hum::NearSingularGramianError>(
      m, "NearSingularGramianError", PyExc_RuntimeError);

  py::class_<SemiDiscreteSystem>(m, "System",
                                 "Assembled semi-discrete formulation")
      .def_property_readonly("formulation",
                             [](const SemiDiscreteSystem& s) {
                               return s.formulation.name();
                             })
      .def_property_readonly("gamma",
                             [](const SemiDiscreteSystem& s) {
                               return s.formulation.gamma;
                             })
      .def_property_readonly("n_poly",
                             [](const SemiDiscreteSystem& s) { return s.n_poly; })
      .def_property_readonly("dof",
                             [](const SemiDiscreteSystem& s) { return s.dof; })
      .def_property_readonly("state_matrix",
                             [](const SemiDiscreteSystem& s) {
                               return to_numpy(s.state_matrix);
                             })
      .def_property_readonly("energy_position",
                             [](const SemiDiscreteSystem& s) {
                               return to_numpy(s.energy_position);
                             })
      .def_property_readonly("energy_velocity",
                             [](const SemiDiscreteSystem& s) {
                               return to_numpy(s.energy_velocity);
                             })
      .def_property_readonly("observation_row",
                             [](const SemiDiscreteSystem& s) {
                               return to_numpy(s.observation_row);
                             })
      .def("__repr__", [](const SemiDiscreteSystem& s) {
        return "<wavobs.System " + s.formulation.name() +
               " N=" + std::to_string(s.n_poly) + ">";
      });

  m.def(
      "assemble",
      [](const std::string& formulation, int N, double gamma) {
        return assembly::assemble(parse_formulation(formulation, gamma), N);
      },
      py::arg("formulation"), py::arg("N"), py::arg("gamma") = 1.0,
      "Assemble one of the four formulations at polynomial degree N");

  m.def(
      "spectrum",
      [](const SemiDiscreteSystem& sys) {
        const obs::SpectrumReport rep = obs::spectrum(sys);
        py::dict out;
        out["lambdas"] = to_numpy(rep.lambdas);
        out["sqrt_gaps"] = to_numpy(rep.sqrt_gaps);
        out["deltas"] = to_numpy(rep.deltas);
        return out;
      },
      py::arg("system"),
      "Eigenvalues, frequency gaps, and boundary densities of the classical "
      "system");

  m.def(
      "gramian_chen",
      [](const SemiDiscreteSystem& sys, double T, const py::object& row) {
        return to_numpy(obs::gramian_chen(sys, T, observation_or_default(sys, row)));
      },
      py::arg("system"), py::arg("T"), py::arg("observation_row") = py::none(),
      "Observability Gramian via one block matrix exponential");

  m.def(
      "gramian_quadrature",
      [](const SemiDiscreteSystem& sys, double T, int n_t,
         const py::object& row) {
        return to_numpy(obs::gramian_quadrature(
            sys, T, observation_or_default(sys, row), n_t));
      },
      py::arg("system"), py::arg("T"), py::arg("n_t") = 64,
      py::arg("observation_row") = py::none(),
      "Observability Gramian via composite Gauss quadrature in time");

  m.def(
      "constants",
      [](const SemiDiscreteSystem& sys, double T, const py::object& row) {
        const obs::GramianResult res =
            obs::observe(sys, T, observation_or_default(sys, row), "");
        return py::make_tuple(res.c_NT, res.C_NT);
      },
      py::arg("system"), py::arg("T") = 8.0,
      py::arg("observation_row") = py::none(),
      "(c_NT, C_NT): extreme eigenvalues of the Gramian against the energy "
      "form");

  m.def(
      "truncated_constants",
      [](const SemiDiscreteSystem& sys, double T, int M) {
        const obs::SpectrumReport rep = obs::spectrum(sys);
        const SemiDiscreteSystem tr = obs::truncated_observation(sys, rep, M);
        const obs::GramianResult res = obs::observe(tr, T);
        return py::make_tuple(res.c_NT, res.C_NT);
      },
      py::arg("system"), py::arg("T") = 8.0, py::arg("M") = 1,
      "Constants after restricting the observation to the first M eigenmodes");

  m.def(
      "filter_sigma",
      [](const std::string& name, double eta, int p, double alpha) {
        return filters::sigma(filters::Filter::from_name(name, p, alpha), eta);
      },
      py::arg("name"), py::arg("eta"), py::arg("p") = 4,
      py::arg("alpha") = filters::kDefaultAlpha,
      "Filter value sigma(eta) for eta in [0, 1]");

  m.def(
      "filtered_observation_row",
      [](const SemiDiscreteSystem& sys, const std::string& name, int p,
         double alpha) {
        return to_numpy(filters::filtered_observation_row(
            sys, filters::Filter::from_name(name, p, alpha)));
      },
      py::arg("system"), py::arg("name"), py::arg("p") = 4,
      py::arg("alpha") = filters::kDefaultAlpha,
      "Observation row of the classical system with per-mode filter damping");

  m.def(
      "solve_control",
      [](const SemiDiscreteSystem& sys, const std::function<double(double)>& y0,
         const std::function<double(double)>& y1, double T, int n_t) {
        const hum::ControlProblem problem{y0, y1, T};
        const Matrix W = obs::gramian_chen(sys, T, sys.observation_row);
        const hum::ControlResult res =
            hum::solve_control(problem, sys, sys.observation_row, W, n_t);
        py::dict out;
        out["u0_coeffs"] = to_numpy(res.u0_coeffs);
        out["u1_coeffs"] = to_numpy(res.u1_coeffs);
        out["t"] = to_numpy(res.t_samples);
        out["v"] = to_numpy(res.v_samples);
        out["l2_norm_v"] = res.l2_norm_v;
        out["residual"] = res.residual;
        out["used_iterative"] = res.used_iterative;
        out["warning"] = res.warning;
        return out;
      },
      py::arg("system"), py::arg("y0"), py::arg("y1"), py::arg("T") = 8.0,
      py::arg("n_t") = 0,
      "Minimal-norm boundary control steering (y0, y1) to rest at time T");

  m.def(
      "worked_example_errors",
      [](const SemiDiscreteSystem& sys) {
        const hum::ExactSolution exact = hum::exact_example();
        const hum::ControlProblem problem{
            [](double x) { return x + 1.0; }, [](double) { return 0.0; }, 8.0};
        const Matrix W = obs::gramian_chen(sys, 8.0, sys.observation_row);
        const hum::ControlResult res =
            hum::solve_control(problem, sys, sys.observation_row, W);
        const hum::ErrorNorms e = hum::error_norms(res, sys, exact);
        py::dict out;
        out["e_u0"] = e.e_u0;
        out["e_u1"] = e.e_u1;
        out["e_v"] = e.e_v;
        out["l2_norm_v"] = res.l2_norm_v;
        out["residual"] = res.residual;
        return out;
      },
      py::arg("system"),
      "Errors of the computed control against the closed-form worked example "
      "(y0 = x + 1, y1 = 0, T = 8)");

  m.def(
      "energy_drift",
      [](const SemiDiscreteSystem& sys, double T, int n_check) {
        return assembly::verify_energy_conservation(sys, T, n_check);
      },
      py::arg("system"), py::arg("T") = 8.0, py::arg("n_check") = 64,
      "Max relative energy drift of the exponential propagator");
}
