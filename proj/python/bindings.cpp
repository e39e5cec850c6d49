#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "feduhb/config.hpp"
#include "feduhb/errors.hpp"
#include "feduhb/orchestrator.hpp"
#include "feduhb/param_vector.hpp"
#include "feduhb/quadratic.hpp"
#include "feduhb/stopping.hpp"
#include "feduhb/theory.hpp"

namespace py = pybind11;
using namespace feduhb;

namespace {

ParamVector to_pv(const std::vector<double>& xs) { return ParamVector(xs); }

std::vector<double> from_pv(const ParamVector& v) { return v.raw(); }

}  // namespace

PYBIND11_MODULE(feduhb, m) {
  m.doc() = "federated unlearning simulator: heavy-ball retraining, dynamic "
            "stopping, baselines, divergence-bound verification";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
  py::register_exception<MetricError>(m, "MetricError", PyExc_RuntimeError);

  m.def("l2_norm",
        [](const std::vector<double>& v) { return l2_norm(to_pv(v)); },
        py::arg("v"));
  m.def("add_scaled",
        [](const std::vector<double>& v, double a, const std::vector<double>& u) {
          return from_pv(add_scaled(to_pv(v), a, to_pv(u)));
        },
        py::arg("v"), py::arg("a"), py::arg("u"));
  m.def("mean_weighted",
        [](const std::vector<std::vector<double>>& vs, const std::vector<double>& ws) {
          std::vector<ParamVector> pvs;
          pvs.reserve(vs.size());
          for (const auto& v : vs) pvs.push_back(to_pv(v));
          return from_pv(mean_weighted(pvs, ws));
        },
        py::arg("vectors"), py::arg("weights"));

  m.def("heavy_ball_step",
        [](const std::vector<double>& w, const std::vector<double>& w_prev,
           const std::vector<double>& grad, double alpha, double beta) {
          return from_pv(heavy_ball_step(to_pv(w), to_pv(w_prev), to_pv(grad), alpha, beta));
        },
        py::arg("w"), py::arg("w_prev"), py::arg("grad"), py::arg("alpha"),
        py::arg("beta"));
  m.def("weight_change",
        [](const std::vector<double>& w, const std::vector<double>& w_prev, double beta) {
          return weight_change(to_pv(w), to_pv(w_prev), beta);
        },
        py::arg("w"), py::arg("w_prev"), py::arg("beta"));
  m.def("should_stop", &should_stop, py::arg("delta"), py::arg("sigma"),
        py::arg("lambda_"), py::arg("epsilon"));

  py::class_<StopState>(m, "StopState")
      .def(py::init<std::size_t>(), py::arg("window"))
      .def("push",
           [](StopState& s, double delta) {
             const RollingStats stats = s.push(delta);
             return py::make_tuple(stats.mean, stats.stddev);
           },
           py::arg("delta"))
      .def("warmed_up", &StopState::warmed_up)
      .def("count", &StopState::count);

  m.def("theorem_bound", &theorem_bound, py::arg("t"), py::arg("initial_gap"),
        py::arg("alpha"), py::arg("beta"), py::arg("mu"), py::arg("grad_bound"));
  m.def("asymptotic_gap", &asymptotic_gap, py::arg("alpha"), py::arg("beta"),
        py::arg("mu"), py::arg("grad_bound"));

  py::class_<QuadraticProblem>(m, "QuadraticProblem")
      .def_property_readonly("mu", [](const QuadraticProblem& p) { return p.mu; })
      .def_property_readonly("lipschitz",
                             [](const QuadraticProblem& p) { return p.lipschitz; })
      .def_property_readonly("dim", &QuadraticProblem::dim)
      .def_property_readonly("num_clients", &QuadraticProblem::num_clients)
      .def("global_loss",
           [](const QuadraticProblem& p, const std::vector<double>& w) {
             return p.global_loss(to_pv(w));
           })
      .def("global_grad",
           [](const QuadraticProblem& p, const std::vector<double>& w) {
             return from_pv(p.global_grad(to_pv(w)));
           })
      .def("minimizer",
           [](const QuadraticProblem& p) { return from_pv(p.minimizer()); });

  m.def("gen_quadratic",
        [](std::size_t num_clients, std::size_t dim, double mu, double lipschitz,
           std::uint64_t seed) {
          return gen_quadratic(num_clients, dim, mu, lipschitz,
                               RngStream(seed, StreamPurpose::kDataGen));
        },
        py::arg("num_clients"), py::arg("dim"), py::arg("mu"), py::arg("lipschitz"),
        py::arg("seed") = 42);

  m.def("estimate_extremes",
        [](const QuadraticProblem& p) {
          const Eigen::MatrixXd mean = p.mean_hessian();
          return py::make_tuple(inverse_power_iteration_min(mean),
                                power_iteration_max(mean));
        },
        py::arg("problem"),
        "(mu, L) of the mean Hessian via inverse-power/power iteration");

  m.def("divergence_trace",
        [](const QuadraticProblem& p, double alpha, double beta, std::size_t rounds,
           std::uint64_t seed, bool distinct_inits) {
          RngStream rng(seed, StreamPurpose::kUnlearnInit);
          ParamVector heavy(p.dim()), retrain(p.dim());
          for (std::size_t i = 0; i < p.dim(); ++i) heavy[i] = rng.uniform(-1.0, 1.0);
          retrain = heavy;
          if (distinct_inits) {
            RngStream other(seed, StreamPurpose::kUnlearnInit, 1);
            for (std::size_t i = 0; i < p.dim(); ++i) {
              retrain[i] = other.uniform(-1.0, 1.0);
            }
          }
          const BoundTrajectory trace =
              divergence_trace(p, alpha, beta, rounds, heavy, retrain);
          py::dict out;
          out["gap"] = trace.gap;
          out["bound"] = trace.bound;
          out["rho"] = trace.rho;
          out["limit"] = trace.limit;
          out["grad_bound"] = trace.grad_bound_used;
          out["initial_gap"] = trace.initial_gap;
          return out;
        },
        py::arg("problem"), py::arg("alpha"), py::arg("beta"), py::arg("rounds"),
        py::arg("seed") = 42, py::arg("distinct_inits") = false);

  m.def("parse_config",
        [](const std::string& text) { return canonical_text(parse_config(text)); },
        py::arg("text"), "validates and returns the canonical JSON form");
  m.def("config_hash",
        [](const std::string& text) { return config_hash(parse_config(text)); },
        py::arg("text"));

  m.def("run_experiment",
        [](const std::string& config_text, const std::string& out_dir,
           const std::vector<std::string>& stages, std::size_t threads) {
          const ExperimentConfig cfg = parse_config(config_text);
          const RunManifest manifest = run_experiment(cfg, stages, out_dir, threads);
          py::dict out;
          out["config_hash"] = manifest.config_hash;
          out["files"] = manifest.files;
          out["stages"] = manifest.stages;
          return out;
        },
        py::arg("config_text"), py::arg("out_dir"),
        py::arg("stages") = std::vector<std::string>{}, py::arg("threads") = 1);

  m.attr("__version__") = kCodeVersion;
}
