#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bingham/ailfem.hpp"
#include "bingham/config.hpp"
#include "bingham/constitutive.hpp"
#include "bingham/mesh.hpp"

namespace py = pybind11;
using namespace bingham;

namespace {

py::dict record_dict(const AdaptiveRecord& r) {
  py::dict d;
  d["step"] = r.step;
  d["noe"] = r.noe;
  d["m"] = r.m;
  d["nit"] = r.nit;
  d["E_pde"] = r.e_pde;
  d["E_ic"] = r.e_ic;
  d["eta"] = r.eta;
  d["res_pde"] = r.res_pde;
  d["res_ic"] = r.res_ic;
  d["error_h1"] = r.error_h1 ? py::object(py::float_(*r.error_h1)) : py::object(py::none());
  d["wall_s"] = r.wall_s;
  d["refined"] = r.refined;
  d["stop"] = to_string(r.stop);
  return d;
}

// One list of records per problem in the config (two for "both").
py::list run(const std::string& config_text, const py::object& on_record) {
  const RunConfig cfg = parse_config(config_text);
  py::list out;
  for (const Problem& p : make_problems(cfg)) {
    py::list rows;
    AdaptiveState st;
    {
      RecordCallback cb;
      if (!on_record.is_none())
        cb = [&](const AdaptiveState&, const AdaptiveRecord& r) {
          py::gil_scoped_acquire gil;
          on_record(record_dict(r));
        };
      py::gil_scoped_release release;
      st = ailfem_run(p, cb);
    }
    for (const auto& r : st.history) rows.append(record_dict(r));
    out.append(rows);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_bingham, m) {
  m.doc() = "Adaptive iteratively linearised FEM for steady Bingham flow";

  m.def("run", &run, py::arg("config") = "", py::arg("on_record") = py::none(),
        "Run the adaptive loop for a config given as key = value text.");
  m.def("default_config", [](const std::string& experiment) {
    return serialize_config(default_config(parse_experiment(experiment)));
  }, py::arg("experiment") = "channel");
  m.def("normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); });

  m.def("mu_n", [](double sigma, double nu, int n_exp, double kappa, double t) {
    return mu_n(RegularisedLaw{sigma, nu, n_exp, kappa}, t);
  }, py::arg("sigma"), py::arg("nu"), py::arg("m"), py::arg("kappa"), py::arg("t"));
  m.def("graph_bound_eta", [](double sigma, double nu, int n_exp, double kappa, double c_graph) {
    return graph_bound_eta(RegularisedLaw{sigma, nu, n_exp, kappa}, c_graph);
  }, py::arg("sigma"), py::arg("nu"), py::arg("m"), py::arg("kappa"), py::arg("c_graph"));
  m.def("zeta", [](int n) { return zeta(n); });
  m.def("channel_profile", &channel_profile);

  m.def("structured_mesh", [](int divisions) {
    const Triangulation t = build_structured_unit_square(divisions);
    return py::make_tuple(t.num_vertices(), t.num_cells());
  }, "Vertex and cell counts of the structured unit-square mesh.");
}
