// Python extension: tensors cross the boundary as dense numpy arrays of shape (n,) * order.

#include "arp/experiment.hpp"
#include "arp/rates.hpp"
#include "arp/trace_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace arp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

SymTensor to_tensor(const Array& a) {
  if (a.ndim() < 1) throw Error("tensor must have at least one axis");
  const auto n = a.shape(0);
  for (py::ssize_t i = 1; i < a.ndim(); ++i) {
    if (a.shape(i) != n) throw DimensionError("tensor axes must have equal length");
  }
  std::vector<double> data(a.data(), a.data() + a.size());
  return SymTensor::from_dense(DenseTensor(static_cast<int>(a.ndim()), static_cast<int>(n), std::move(data)), 1e-10);
}

Array to_array(const SymTensor& t) {
  std::vector<py::ssize_t> shape(static_cast<std::size_t>(t.order()), t.dim());
  Array out(shape);
  const auto e = t.entries();
  std::copy(e.begin(), e.end(), out.mutable_data());
  return out;
}

ExperimentSpec spec_from(const std::string& problem, int dim, const std::string& config_json,
                         const std::optional<Vector>& x0, double jitter) {
  ExperimentSpec spec;
  spec.problem = problem;
  spec.dim = dim;
  spec.solver = config_from_json(nlohmann::json::parse(config_json));
  spec.x0 = x0;
  spec.x0_jitter = jitter;
  return spec;
}

std::string trace_text(const RunTrace& trace) {
  std::ostringstream out;
  write_jsonl(trace, out);
  return out.str();
}

py::dict tail_dict(const TailStatistic& t) {
  py::dict d;
  d["k"] = t.k;
  d["q"] = t.q;
  d["sup"] = t.sup;
  d["mann_kendall_s"] = t.trend.s;
  d["mann_kendall_z"] = t.trend.z;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Objective-free adaptive regularization with approximate p-th order tensors";
  m.attr("trace_schema_version") = kTraceSchemaVersion;

  py::register_exception<Error>(m, "ArpError", PyExc_ValueError);

  m.def("problem_names", &problem_names);
  m.def(
      "derivative",
      [](const std::string& name, const Vector& x, int order) {
        return to_array(make_problem(name, static_cast<int>(x.size()))->derivative(x, order));
      },
      py::arg("problem"), py::arg("x"), py::arg("order"));
  m.def(
      "value", [](const std::string& name, const Vector& x) { return make_problem(name, static_cast<int>(x.size()))->value(x); },
      py::arg("problem"), py::arg("x"));
  m.def(
      "lipschitz", [](const std::string& name, int dim, int p) { return make_problem(name, dim)->lipschitz(p).value; },
      py::arg("problem"), py::arg("dim"), py::arg("p"));
  m.def(
      "default_start", [](const std::string& name, int dim) { return make_problem(name, dim)->default_start(); },
      py::arg("problem"), py::arg("dim"));

  m.def(
      "hosu_update",
      [](const Array& t_prev, const Vector& s, const Array& y, const Matrix& w) {
        return to_array(hosu_update(to_tensor(t_prev), s, to_tensor(y), WeightMatrix(w)));
      },
      py::arg("t_prev"), py::arg("s"), py::arg("y"), py::arg("w"),
      "Least-change symmetric update: argmin ||(T - T_prev)[W]^p||_F subject to T[s] = y.");
  m.def(
      "dfp_update",
      [](const Array& t_prev, const Vector& s, const Array& y, const Vector& y_vec, double mu, double L,
         double sigma_bar) {
        const DfpWeight dw = build_dfp_weight(s, y_vec, mu, L, sigma_bar);
        return to_array(hosu_update(to_tensor(t_prev), s, to_tensor(y), dw.w));
      },
      py::arg("t_prev"), py::arg("s"), py::arg("y"), py::arg("y_vec"), py::arg("mu") = 1e-4, py::arg("L") = 1e4,
      py::arg("sigma_bar") = 1.0, "Secant update with the constructive DFP weight built from (s, y_vec).");
  m.def(
      "build_dfp_weight",
      [](const Vector& s, const Vector& y, double mu, double L, double sigma_bar) {
        const DfpWeight dw = build_dfp_weight(s, y, mu, L, sigma_bar);
        py::dict d;
        d["w"] = dw.w.matrix();
        d["inverse_square"] = dw.w.inverse_square();
        d["kappa"] = dw.w.condition_number();
        d["kappa_bound"] = dw.kappa_bound;
        d["s_used"] = dw.s_used;
        d["colinear"] = dw.colinear;
        return d;
      },
      py::arg("s"), py::arg("y"), py::arg("mu") = 1e-4, py::arg("L") = 1e4, py::arg("sigma_bar") = 1.0);
  m.def("dfp_guard", &dfp_guard, py::arg("s"), py::arg("y"), py::arg("mu") = 1e-4, py::arg("L") = 1e4);
  m.def(
      "op_norm",
      [](const Array& t, const std::optional<Matrix>& w) {
        const SymTensor st = to_tensor(t);
        return w ? op_norm(st, WeightMatrix(*w)).value : op_norm(st).value;
      },
      py::arg("t"), py::arg("w") = py::none(), "Power-iteration estimate of the (weighted) tensor 2-norm.");

  m.def(
      "solve",
      [](const std::string& problem, int dim, const std::string& config_json, const std::optional<Vector>& x0,
         double jitter) {
        const RunTrace trace = [&] {
          py::gil_scoped_release release;
          return run_experiment(spec_from(problem, dim, config_json, x0, jitter));
        }();
        return trace_text(trace);
      },
      py::arg("problem"), py::arg("dim"), py::arg("config_json") = "{}", py::arg("x0") = py::none(),
      py::arg("jitter") = 0.0, "Runs the solver and returns the JSON-lines trace.");
  m.def(
      "default_config", [] { return config_to_json(SolverConfig{}).dump(); }, "Default solver configuration as JSON.");

  m.def(
      "fit_rates",
      [](const std::string& jsonl, double tail_fraction, std::size_t min_length) {
        std::istringstream in(jsonl);
        const LoadedTrace t = read_jsonl(in);
        const int p = t.header.at("config").at("p").get<int>();
        const RateReport r = fit_rates(t.rows, p, tail_fraction, min_length);
        py::dict d;
        d["points"] = r.points;
        d["tail_points"] = r.tail_points;
        d["grad_slope"] = r.grad_slope;
        d["grad_bound"] = tail_dict(r.grad_bound);
        d["curvature_slope"] = r.curvature_slope;
        d["curvature_bound"] = tail_dict(r.curvature_bound);
        return d;
      },
      py::arg("jsonl"), py::arg("tail_fraction") = 0.5, py::arg("min_length") = 50);
  m.def(
      "mann_kendall",
      [](const std::vector<double>& series) {
        const MannKendall mk = mann_kendall(series);
        return py::make_tuple(mk.s, mk.z);
      },
      py::arg("series"));
}
