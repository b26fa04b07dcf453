#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "meshforge/calibration.hpp"
#include "meshforge/decompose.hpp"
#include "meshforge/errors.hpp"
#include "meshforge/io.hpp"
#include "meshforge/metrics.hpp"
#include "meshforge/programming.hpp"

namespace py = pybind11;
using namespace meshforge;

namespace {

// structured data crosses the boundary as JSON text; the Python wrapper parses it
ParamsDocument params_doc(const std::string& text) { return params_from_json(Json::parse(text)); }

std::string topology_json(const std::string& arch, int n) {
  return to_json(build_architecture(arch, n)).dump();
}

std::string decompose(const TransferMatrix& u) {
  const ParamsDocument doc{rectangular(static_cast<int>(u.rows())), {}, decompose_rectangular(u)};
  return to_json(doc).dump();
}

TransferMatrix matrix_of(const std::string& params) {
  const ParamsDocument doc = params_doc(params);
  return mesh_matrix(doc.topology, doc.params, doc.variant);
}

Eigen::MatrixXcd nset_of(const std::string& params) {
  const ParamsDocument doc = params_doc(params);
  const NullificationSet nset = nullification_set(doc.topology, doc.params, doc.variant);
  Eigen::MatrixXcd out(nset.size(), doc.topology.n);
  for (int l = 0; l < nset.size(); ++l) out.row(l) = nset.vectors[l].transpose();
  return out;
}

std::string random_params(const std::string& arch, int n, std::uint64_t seed) {
  const ColumnedTopology t = build_architecture(arch, n);
  return to_json(ParamsDocument{t, {}, random_phase_params(t, seed)}).dump();
}

std::string program(const std::string& params, std::uint64_t seed, const std::string& mode,
                    double drift_sigma) {
  const ParamsDocument doc = params_doc(params);
  PhysicalMesh physical(doc.topology, doc.variant, {}, seed);
  physical.randomize(seed + 1);
  if (drift_sigma > 0.0) {
    physical.set_settings(doc.params);
    physical.inject_drift(drift_sigma, seed + 2);
  }
  NullifyOptions opt;
  opt.mode = nullify_mode_from_string(mode);
  const ProgramReport r = program_mesh(physical, doc.params, opt);
  return to_json(r).dump();
}

py::dict calibrate(const std::string& arch, int n, std::uint64_t seed) {
  const ColumnedTopology t = build_architecture(arch, n);
  PhysicalMesh physical(t, {}, {}, seed);
  const CalibrationModel model = parallel_calibrate(physical);
  double worst = 0.0;
  for (int l = 0; l < t.depth(); ++l) {
    for (int m = 0; m < t.columns[l].active; ++m) {
      for (auto role : {ShifterId::Role::kTheta, ShifterId::Role::kPhi}) {
        const ShifterId id{l, m, role};
        for (int k = 1; k < 4; ++k) {
          const double truth = physical.hidden_curve(id).coefficients[k];
          worst = std::max(worst, std::abs(model.fit(id).coefficients[k] - truth) / std::abs(truth));
        }
      }
    }
  }
  const MeshParams target = random_phase_params(t, seed + 3);
  flash(physical, model, target);
  py::dict out;
  out["model"] = to_json(model).dump();
  out["max_relative_coefficient_error"] = worst;
  out["flash_fidelity"] = fidelity(mesh_matrix(t, target), physical.matrix());
  return out;
}

py::tuple speedup(const std::string& arch, int n) {
  const ColumnedTopology t = build_architecture(arch, n);
  const int nodes = node_count(t);
  return py::make_tuple(nodes, t.depth(), static_cast<double>(nodes) / t.depth());
}

}  // namespace

PYBIND11_MODULE(_meshforge, m) {
  m.doc() = "Bindings for the meshforge mesh compiler and simulator";
  m.attr("__version__") = tool_version();

  py::register_exception<Error>(m, "MeshforgeError", PyExc_RuntimeError);
  py::register_exception<CycleError>(m, "CycleError", m.attr("MeshforgeError").ptr());
  py::register_exception<NonUnitaryError>(m, "NonUnitaryError", m.attr("MeshforgeError").ptr());
  py::register_exception<NonNullifiableError>(m, "NonNullifiableError", m.attr("MeshforgeError").ptr());
  py::register_exception<ConfigError>(m, "ConfigError", m.attr("MeshforgeError").ptr());

  m.def("topology_json", &topology_json, py::arg("arch"), py::arg("n"));
  m.def("compile_netlist_json", [](const std::string& text) {
    return to_json(compactify(netlist_from_json(Json::parse(text)))).dump();
  });
  m.def("haar", &haar_unitary, py::arg("n"), py::arg("seed"));
  m.def("decompose_json", &decompose, py::arg("u"));
  m.def("mesh_matrix_json", &matrix_of, py::arg("params"));
  m.def("nullification_set_json", &nset_of, py::arg("params"));
  m.def("random_params_json", &random_params, py::arg("arch"), py::arg("n"), py::arg("seed"));
  m.def("program_json", &program, py::arg("params"), py::arg("seed") = 0,
        py::arg("mode") = "closed-form", py::arg("drift_sigma") = 0.0);
  m.def("calibrate", &calibrate, py::arg("arch"), py::arg("n"), py::arg("seed") = 0);
  m.def("speedup", &speedup, py::arg("arch"), py::arg("n"));
  m.def("unitarity_deviation", &unitarity_deviation, py::arg("u"));
}
