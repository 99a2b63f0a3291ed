#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>

#include "hswme/harness.hpp"

namespace py = pybind11;
using namespace hswme;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

RunConfig parse_config(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  RunConfig base;
  if (j.contains("preset")) base = preset(j.at("preset").get<std::string>());
  return apply_json(base, j);
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  if (m.rows() * m.cols() > 0) std::memcpy(a.mutable_data(), m.data().data(), m.rows() * m.cols() * sizeof(double));
  return a;
}

Matrix from_array(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Matrix m(a.shape(0), a.shape(1));
  if (a.size() > 0) std::memcpy(m.data().data(), a.data(), a.size() * sizeof(double));
  return m;
}

// frames stacked into (n_frames, rows, cols)
template <class Frames>
Array stack(const Frames& frames) {
  if (frames.empty()) return Array(std::vector<py::ssize_t>{0, 0, 0});
  const Matrix& first = frames.front().matrix();
  const std::size_t rows = first.rows(), cols = first.cols(), block = rows * cols;
  Array a({frames.size(), rows, cols});
  double* out = a.mutable_data();
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (block > 0) std::memcpy(out + k * block, frames[k].matrix().data().data(), block * sizeof(double));
  }
  return a;
}

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["times"] = t.times;
  d["macro"] = stack(t.macro);
  d["micro"] = stack(t.micro);
  d["solver"] = t.solver;
  d["case"] = std::string(to_string(t.test_case));
  d["n_cells"] = t.grid.n_cells;
  d["n_moments"] = t.params.n_moments;
  return d;
}

py::dict run(const std::string& config, bool keep_frames) {
  SolverRun r;
  {
    py::gil_scoped_release release;
    r = run_solver(parse_config(config), {}, keep_frames);
  }
  py::dict d = trajectory_dict(r.result.trajectory);
  d["mass"] = r.result.report.mass;
  d["momentum"] = r.result.report.momentum;
  d["steps"] = r.result.report.steps;
  d["wall_seconds"] = r.result.report.wall_seconds.total;
  d["offline_seconds"] = r.offline_seconds;
  return d;
}

std::vector<py::dict> sweep(const std::string& config, const std::vector<std::size_t>& ranks) {
  std::vector<SweepRow> rows;
  {
    py::gil_scoped_release release;
    rows = rank_sweep(parse_config(config), ranks);
  }
  std::vector<py::dict> out;
  for (const SweepRow& r : rows) {
    py::dict d;
    d["rank"] = r.rank;
    d["error"] = r.error;
    d["wall_seconds"] = r.wall_seconds;
    d["speedup"] = r.speedup;
    out.push_back(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_hswme, m) {
  m.doc() = "Shallow water moment solvers with POD and low-rank reduction";

  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<FileFormatError>(m, "FileFormatError", PyExc_ValueError);

  m.def("preset_names", &preset_names);
  m.def("preset", [](const std::string& name) { return to_json(preset(name)).dump(); }, py::arg("name"),
        "Preset configuration as a JSON string.");
  m.def("resolve_config", [](const std::string& config) { return to_json(parse_config(config)).dump(); },
        py::arg("config"));
  m.def("run", &run, py::arg("config"), py::arg("keep_frames") = true,
        "Runs the configured solver. Frames are stacked as (n_frames, n_cells, k).");
  m.def("rank_sweep", &sweep, py::arg("config"), py::arg("ranks"));

  m.def(
      "initial_condition",
      [](const std::string& config) {
        const RunConfig c = parse_config(config);
        const State s = initial_condition(c.test_case, c.grid, c.params, c.case_options);
        return py::make_tuple(to_array(s.U.matrix()), to_array(s.V.matrix()));
      },
      py::arg("config"));

  m.def(
      "relative_l2_error",
      [](const Array& a, const Array& reference) {
        return relative_l2_error(MacroState(from_array(a)), MacroState(from_array(reference)));
      },
      py::arg("a"), py::arg("reference"), "Relative L2 error of (h, hu) arrays of shape (n_cells, 2).");

  m.def(
      "legendre",
      [](int n, double zeta) { return legendre_phi(n, zeta); }, py::arg("n"), py::arg("zeta"));

  m.def(
      "load_trajectory", [](const std::string& path) { return trajectory_dict(load_trajectory(path)); },
      py::arg("path"));
  m.def(
      "load_basis",
      [](const std::string& path) {
        const ReducedBasis b = load_basis(path);
        return py::make_tuple(to_array(b.W), b.singular_values);
      },
      py::arg("path"));
}
