#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cuspgrowth/experiment.hpp"

namespace py = pybind11;
using namespace cuspgrowth;

namespace {

ExperimentConfig parse_config(const std::string& text) {
  return ExperimentConfig::from_json(text.empty() ? nlohmann::json::object()
                                                  : nlohmann::json::parse(text));
}

HoroPoint point(const std::pair<double, double>& p) { return {p.first, p.second}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<ConstraintError>(m, "ConstraintError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<CuspModel>(m, "CuspModel")
      .def_static("constant", &CuspModel::constant, py::arg("alpha"))
      .def_static("from_config", [](const std::string& cfg) { return build_model(parse_config(cfg)); },
                  py::arg("config_json") = "")
      .def_property_readonly("alpha", &CuspModel::alpha)
      .def_property_readonly("beta", &CuspModel::beta)
      .def_property_readonly("a", &CuspModel::a)
      .def_property_readonly("b", &CuspModel::b)
      .def("u", &CuspModel::u)
      .def("area", &CuspModel::area);

  m.def("exact_distance",
        [](const CuspModel& model, std::pair<double, double> p, std::pair<double, double> q) {
          return exact_distance(model, point(p), point(q));
        });
  m.def("quasigeodesic_distance",
        [](const CuspModel& model, std::pair<double, double> p, std::pair<double, double> q) {
          return quasigeodesic_distance(model, point(p), point(q));
        });
  m.def("meeting_height", &meeting_height);
  m.def("flow_contraction", &flow_contraction);
  m.def("ball_horoball_volume",
        [](const CuspModel& model, double R, double center, double tol) {
          return ball_horoball_volume(model, R, center, tol).volume;
        },
        py::arg("model"), py::arg("R"), py::arg("center_height") = 0.0, py::arg("rel_tol") = 1e-3);
  m.def("log_parabolic_counting",
        [](const CuspModel& model, const std::vector<double>& grid, unsigned threads) {
          return parabolic_counting(model, grid, threads).log_values;
        },
        py::arg("model"), py::arg("R_grid"), py::arg("threads") = 1);
  m.def("log_cuspidal_F", &cuspidal_F, py::arg("model"), py::arg("R"), py::arg("rel_tol") = 1e-6);

  m.def("word_count", &word_count);
  m.def("displacement", [](const std::string& letters, double alpha) {
    return displacement(GroupWord::from_letters(letters), alpha);
  });
  m.def("partial_poincare",
        [](double s, int L, double alpha, unsigned threads) {
          const auto P = partial_poincare(s, L, alpha, threads);
          return py::make_tuple(P.value, P.annulus, P.counts);
        },
        py::arg("s"), py::arg("L"), py::arg("alpha") = 1.0, py::arg("threads") = 1);

  m.def("config_hash", [](const std::string& cfg) { return config_hash(parse_config(cfg)); },
        py::arg("config_json") = "");
  m.def("command_names", &command_names);
  m.def("run_command",
        [](const std::string& verb, const std::string& cfg, const std::string& out) {
          const auto r = run_command(verb, parse_config(cfg), out);
          return py::make_tuple(r.report.dump(), r.exit_code);
        },
        py::arg("verb"), py::arg("config_json"), py::arg("out"));
}
