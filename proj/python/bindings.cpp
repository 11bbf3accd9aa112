#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quadenv/envelope.hpp"
#include "quadenv/experiments.hpp"
#include "quadenv/grid_oracle.hpp"
#include "quadenv/penalties.hpp"
#include "quadenv/solver.hpp"
#include "quadenv/spectral.hpp"
#include "quadenv/verify.hpp"

namespace py = pybind11;
using namespace quadenv;

namespace {

// Penalties cross the boundary as descriptor dicts, e.g. {"type": "card", "mu": 1.0}.
nlohmann::json to_json(const py::object& obj) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object from_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

PenaltyPtr penalty_of(const py::object& obj) { return make_penalty(to_json(obj)); }

py::dict grid_dict(const GridFunction& g) {
  py::dict out;
  std::vector<double> xs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) xs[i] = g.x(i);
  out["x"] = xs;
  out["value"] = g.values();
  return out;
}

py::dict solve_dict(const SolveResult& r) {
  py::dict out;
  out["x"] = r.x;
  out["objective_trace"] = r.objective_trace;
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["contact"] = r.contact;
  out["objective"] = r.objective;
  out["envelope_objective"] = r.envelope_objective;
  out["step"] = r.step;
  out["mode"] = to_string(r.mode);
  out["seed"] = r.seed;
  return out;
}

Problem make_problem(const Matrix& A, const Vector& d, const py::object& penalty, double gamma) {
  Problem p{A, d, penalty_of(penalty), Gamma(gamma)};
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quadratic envelopes of sparsity penalties";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);

  m.def("card_prox", &card_prox, py::arg("v"), py::arg("t"), py::arg("mu"));
  m.def("topk_prox", &topk_prox, py::arg("v"), py::arg("t"), py::arg("k"));
  m.def("l1_prox", &l1_prox, py::arg("v"), py::arg("t"), py::arg("lam"));
  m.def(
      "q_card_eval", [](const Vector& x, double gamma, double mu) { return q_card_eval(x, Gamma(gamma), mu); },
      py::arg("x"), py::arg("gamma"), py::arg("mu"));
  m.def(
      "q_card_prox",
      [](const Vector& v, double t, double gamma, double mu) { return q_card_prox(v, t, Gamma(gamma), mu); },
      py::arg("v"), py::arg("t"), py::arg("gamma"), py::arg("mu"));
  m.def(
      "q_topk_eval", [](const Vector& x, double gamma, int k) { return q_topk_eval(x, Gamma(gamma), k); },
      py::arg("x"), py::arg("gamma"), py::arg("k"));

  m.def(
      "penalty_eval", [](const py::object& f, const Vector& x) { return penalty_of(f)->eval(x); }, py::arg("penalty"),
      py::arg("x"));
  m.def(
      "penalty_prox", [](const py::object& f, const Vector& v, double t) { return penalty_of(f)->prox(v, t); },
      py::arg("penalty"), py::arg("v"), py::arg("t"));
  m.def(
      "s_transform", [](const py::object& f, double gamma, const Vector& y) { return s_transform_eval(*penalty_of(f), Gamma(gamma), y); },
      py::arg("penalty"), py::arg("gamma"), py::arg("y"));
  m.def(
      "quad_envelope",
      [](const py::object& f, double gamma, const Vector& x, bool engine) {
        const QuadEnvelope q{penalty_of(f), Gamma(gamma), engine ? EnvelopeMode::Engine : EnvelopeMode::ClosedForm};
        return q(x);
      },
      py::arg("penalty"), py::arg("gamma"), py::arg("x"), py::arg("engine") = false);
  m.def(
      "lasry_lions",
      [](const py::object& f, double s, double t, const Vector& x) { return lasry_lions_eval(*penalty_of(f), s, t, x).value; },
      py::arg("penalty"), py::arg("s"), py::arg("t"), py::arg("x"));

  m.def("singular_values", &singular_values, py::arg("X"));
  m.def(
      "q_spectral_eval",
      [](const Matrix& X, double gamma, const py::object& base) {
        return q_spectral_eval(X, Gamma(gamma), SpectralPenalty(penalty_of(base), X.rows(), X.cols()));
      },
      py::arg("X"), py::arg("gamma"), py::arg("base"));
  m.def(
      "spectral_prox",
      [](const Matrix& V, double t, const py::object& base) {
        return spectral_prox(V, t, SpectralPenalty(penalty_of(base), V.rows(), V.cols()));
      },
      py::arg("V"), py::arg("t"), py::arg("base"));

  m.def(
      "grid_quad_envelope",
      [](const py::object& f, double gamma, double lo, double hi, std::size_t n) {
        return grid_dict(grid_quad_envelope(sample_penalty(*penalty_of(f), lo, hi, n), Gamma(gamma)));
      },
      py::arg("penalty"), py::arg("gamma"), py::arg("lo") = -3.0, py::arg("hi") = 3.0, py::arg("n") = 601);
  m.def(
      "grid_convex_envelope",
      [](const std::vector<double>& values, double lo, double hi) {
        return grid_dict(grid_convex_envelope(GridFunction(lo, hi, values)));
      },
      py::arg("values"), py::arg("lo"), py::arg("hi"));
  m.def(
      "brute_force_global_min",
      [](const Matrix& A, const Vector& d, const py::object& f) {
        const auto r = brute_force_global_min({A, d, penalty_of(f)});
        return py::make_tuple(r.x, r.value);
      },
      py::arg("A"), py::arg("d"), py::arg("penalty"));

  m.def("power_iteration", &power_iteration, py::arg("A"), py::arg("iterations") = 1000, py::arg("seed") = 0);
  m.def(
      "classify_regime",
      [](const Matrix& A, double gamma) {
        const auto r = classify_regime({A, Vector::Zero(A.rows()), std::make_shared<ZeroPenalty>(), Gamma(gamma)});
        py::dict out;
        out["label"] = to_string(r.label);
        out["opnorm_sq"] = r.opnorm_sq;
        out["minsv_sq"] = r.minsv_sq;
        return out;
      },
      py::arg("A"), py::arg("gamma"));
  m.def(
      "fbs_solve",
      [](const Matrix& A, const Vector& d, const py::object& f, double gamma, std::optional<Vector> x0,
         const std::string& mode, double step, int restarts, std::uint64_t seed) {
        const Problem p = make_problem(A, d, f, gamma);
        SolverOptions opts;
        opts.mode = prox_mode_from_string(mode);
        opts.step = step;
        opts.seed = seed;
        SolveResult r;
        {
          py::gil_scoped_release release;
          if (restarts <= 1) {
            r = fbs_solve(p, x0.value_or(Vector::Zero(A.cols())), opts);
          } else {
            MultiStartOptions ms;
            ms.restarts = restarts;
            r = fbs_multistart(p, opts, ms).best;
          }
        }
        return solve_dict(r);
      },
      py::arg("A"), py::arg("d"), py::arg("penalty"), py::arg("gamma"), py::arg("x0") = std::nullopt,
      py::arg("mode") = "auto", py::arg("step") = 0.0, py::arg("restarts") = 1, py::arg("seed") = 0);
  m.def(
      "ista_solve",
      [](const Matrix& A, const Vector& d, double lam, std::optional<Vector> x0) {
        const Problem p{A, d, std::make_shared<L1Penalty>(lam), Gamma(1.0)};
        return solve_dict(ista_solve(p, x0.value_or(Vector::Zero(A.cols()))));
      },
      py::arg("A"), py::arg("d"), py::arg("lam"), py::arg("x0") = std::nullopt);
  m.def("oracle_solution", &oracle_solution, py::arg("A"), py::arg("d"), py::arg("support"));

  m.def(
      "run_fig4",
      [](const py::object& config, std::size_t threads) {
        const auto cfg = config.is_none() ? ExperimentConfig{} : experiment_config_from_json(to_json(config));
        std::vector<ExperimentRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_fig4(cfg, threads);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict row;
          row["method"] = r.method;
          row["noise_level"] = r.noise_level;
          row["trial"] = r.trial;
          row["dist_to_oracle"] = r.dist_to_oracle;
          row["support_match"] = r.support_match;
          row["objective"] = r.objective;
          row["wall_time"] = r.wall_time;
          row["parameter"] = r.parameter;
          out.append(row);
        }
        return out;
      },
      py::arg("config") = py::none(), py::arg("threads") = 1);
  m.def("default_fig4_config", [] { return from_json(to_json(ExperimentConfig{})); });

  m.def(
      "verify",
      [](const std::string& suite) {
        py::list out;
        for (const auto& c : run_verification(suite)) out.append(py::make_tuple(c.suite, c.name, c.passed, c.detail));
        return out;
      },
      py::arg("suite") = "all");
}
