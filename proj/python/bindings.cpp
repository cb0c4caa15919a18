#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ppac/csv.hpp"
#include "ppac/experiment.hpp"
#include "ppac/verify.hpp"

namespace py = pybind11;
using namespace ppac;

namespace {

// columns as a dict of 1-d arrays
py::dict log_to_dict(const TrajectoryLog& log) {
  py::dict d;
  for (const auto& name : log.columns()) {
    const auto col = log.column(name);
    d[py::str(name)] = py::array_t<double>(static_cast<py::ssize_t>(col.size()), col.data());
  }
  return d;
}

py::dict run_to_dict(const ControllerRun& run) {
  py::dict d;
  d["name"] = run.spec.name;
  d["status"] = to_string(run.outcome.status);
  d["message"] = run.outcome.message;
  d["seconds"] = run.outcome.seconds;
  d["funnel_violations"] = run.funnel_violations;
  d["terminal_x"] = run.terminal_x;
  d["terminal_norm"] = run.terminal_norm;
  d["max_residual"] = run.max_residual;
  py::list checks;
  for (const auto& c : run.checks) {
    checks.append(py::dict(py::arg("name") = c.name, py::arg("status") = to_string(c.status),
                           py::arg("detail") = c.detail));
  }
  d["checks"] = checks;
  d["log"] = log_to_dict(run.outcome.log);
  return d;
}

ExperimentConfig config_from(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  return parse_config(in, source);
}

void apply_overrides(ExperimentConfig& cfg, std::optional<double> dt, std::optional<double> t_final) {
  if (dt) cfg.sim.dt = *dt;
  if (t_final) cfg.sim.t_final = *t_final;
  validate_config(cfg);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive funnel backstepping: transforms, controllers and closed-loop experiments";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<FunnelViolation>(m, "FunnelViolation", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.def("preset_names", &preset_names);
  m.def("preset_text", [](const std::string& name) { return preset_text(name); });

  m.def(
      "psi_inverse",
      [](const std::string& kind, double y) {
        return psi_inverse(kind == "tanh" ? NormalizedFunction::Tanh : NormalizedFunction::Algebraic, y);
      },
      py::arg("kind"), py::arg("y"));

  m.def(
      "transform",
      [](double x, double t, double beta_scale, double beta_rate, double beta_inf, const std::string& strategy,
         const std::string& psi) {
        const TransformStrategy s = strategy == "tangent"    ? TransformStrategy::Tangent
                                    : strategy == "identity" ? TransformStrategy::Identity
                                                             : TransformStrategy::Rational;
        FunnelTransform ft(s, PerformanceFunction::exponential(beta_scale, beta_rate, beta_inf, 1),
                           psi == "tanh" ? NormalizedFunction::Tanh : NormalizedFunction::Algebraic);
        const auto f = transform(ft, x, t);
        return py::dict(py::arg("z") = f.z, py::arg("Pi") = f.pi, py::arg("Psi") = f.psi,
                        py::arg("Psi_x") = f.psi_over_x, py::arg("W") = f.w, py::arg("bound") = ft.bound(t));
      },
      py::arg("x"), py::arg("t"), py::arg("beta_scale") = 0.9, py::arg("beta_rate") = 0.4, py::arg("beta_inf") = 0.1,
      py::arg("strategy") = "rational", py::arg("psi") = "algebraic",
      "Funnel coordinate z and its factors for beta = scale exp(-rate t) + beta_inf.");

  m.def(
      "run",
      [](const std::optional<std::string>& preset, const std::optional<std::string>& config_text,
         std::optional<double> dt, std::optional<double> t_final, unsigned threads) {
        if (preset.has_value() == config_text.has_value()) {
          throw InvalidArgument("pass exactly one of preset= or config_text=");
        }
        ExperimentConfig cfg = preset ? preset_config(*preset) : config_from(*config_text, "<python>");
        apply_overrides(cfg, dt, t_final);
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg, threads);
        }
        py::dict out;
        out["name"] = cfg.name;
        out["summary"] = summary_json(res);
        py::list runs;
        for (const auto& r : res.runs) runs.append(run_to_dict(r));
        out["runs"] = runs;
        return out;
      },
      py::arg("preset") = py::none(), py::arg("config_text") = py::none(), py::arg("dt") = py::none(),
      py::arg("t_final") = py::none(), py::arg("threads") = 0u,
      "Simulate every controller of a preset or INI config; returns logs as numpy arrays.");

  m.def(
      "verify",
      [](const std::optional<std::string>& preset, const std::optional<std::string>& config_text, int samples,
         std::optional<double> t_final) {
        if (preset.has_value() == config_text.has_value()) {
          throw InvalidArgument("pass exactly one of preset= or config_text=");
        }
        ExperimentConfig cfg = preset ? preset_config(*preset) : config_from(*config_text, "<python>");
        apply_overrides(cfg, std::nullopt, t_final);
        VerifyOptions o;
        o.samples = samples;
        VerifyReport rep;
        {
          py::gil_scoped_release release;
          rep = verify_experiment(cfg, o);
        }
        py::list checks;
        for (const auto& c : rep.checks) {
          checks.append(py::dict(py::arg("name") = c.name, py::arg("subject") = c.subject,
                                 py::arg("status") = to_string(c.status), py::arg("detail") = c.detail));
        }
        return py::make_tuple(rep.passed(), checks);
      },
      py::arg("preset") = py::none(), py::arg("config_text") = py::none(), py::arg("samples") = 1000,
      py::arg("t_final") = py::none());

  m.def(
      "read_csv",
      [](const std::filesystem::path& path) { return log_to_dict(read_csv(path)); }, py::arg("path"));
}
