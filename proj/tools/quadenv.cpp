#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "quadenv/envelope.hpp"
#include "quadenv/experiments.hpp"
#include "quadenv/grid_oracle.hpp"
#include "quadenv/io.hpp"
#include "quadenv/parallel.hpp"
#include "quadenv/penalties.hpp"
#include "quadenv/verify.hpp"

using namespace quadenv;

namespace {

struct PenaltyFlags {
  std::string type = "card";
  double mu = 1.0;
  int k = 1;
  double lambda = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--penalty", type, "card, topk, l1 or zero")
        ->check(CLI::IsMember({"card", "topk", "l1", "zero"}));
    app->add_option("--mu", mu, "weight of card");
    app->add_option("--k", k, "sparsity level of topk");
    app->add_option("--lambda", lambda, "weight of l1");
  }

  PenaltyPtr build() const {
    nlohmann::json desc = {{"type", type}};
    if (type == "card") desc["mu"] = mu;
    if (type == "topk") desc["k"] = k;
    if (type == "l1") desc["lambda"] = lambda;
    return make_penalty(desc);
  }
};

struct GridFlags {
  double lo = -3.0;
  double hi = 3.0;
  std::size_t n = 601;
  double gamma = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--gamma", gamma, "curvature parameter");
    app->add_option("--lo", lo, "left end of the grid");
    app->add_option("--hi", hi, "right end of the grid");
    app->add_option("--n", n, "number of grid points");
  }
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

int cmd_envelope(const PenaltyFlags& pf, const GridFlags& gf, const std::string& mode, const std::string& out) {
  const auto f = pf.build();
  const Gamma gamma(gf.gamma);
  const QuadEnvelope q{f, gamma, mode == "engine" ? EnvelopeMode::Engine : EnvelopeMode::ClosedForm};
  const GridFunction grid = GridFunction::sample(gf.lo, gf.hi, gf.n, [](double) { return 0.0; });
  std::ostringstream csv;
  csv << "x,f,Q,S\n";
  Vector x(1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    x[0] = grid.x(i);
    csv << format_double(x[0]) << ',' << format_double(f->eval(x)) << ',' << format_double(q(x)) << ','
        << format_double(s_transform_eval(*f, gamma, x)) << '\n';
  }
  emit(out, csv.str());
  return 0;
}

int cmd_oracle(const PenaltyFlags& pf, const GridFlags& gf, const std::string& transform, const std::string& out) {
  const auto f = sample_penalty(*pf.build(), gf.lo, gf.hi, gf.n);
  std::ostringstream csv;
  auto dump = [&](const GridFunction& g) {
    csv << "x,value\n";
    for (std::size_t i = 0; i < g.size(); ++i) csv << format_double(g.x(i)) << ',' << format_double(g[i]) << '\n';
  };
  int code = 0;
  if (transform == "sample") {
    dump(f);
  } else if (transform == "quad") {
    dump(grid_quad_envelope(f, Gamma(gf.gamma)));
  } else if (transform == "hull") {
    dump(grid_convex_envelope(f));
  } else if (transform == "legendre") {
    dump(grid_legendre(f));
  } else {
    const auto report = curvature_check(grid_quad_envelope(f, Gamma(gf.gamma)), f, Gamma(gf.gamma));
    csv << "x,second_difference,interior\n";
    for (const auto& p : report.points) {
      csv << format_double(p.x) << ',' << format_double(p.second_difference) << ',' << (p.interior ? 1 : 0) << '\n';
    }
    std::cerr << "curvature " << (report.passed ? "passed" : "FAILED") << ": max deviation " << report.max_deviation
              << " (tol " << report.tolerance << ")\n";
    code = report.passed ? 0 : 1;
  }
  emit(out, csv.str());
  return code;
}

int cmd_solve(const std::string& path, const std::string& out, const std::string& trace_out) {
  if (!std::filesystem::exists(path)) {
    std::cerr << "error: problem file not found: " << path << '\n';
    return 2;
  }
  const auto file = load_problem_file(path);
  const auto& p = file.problem;
  const auto regime = classify_regime(p, file.options.power_iterations, file.options.seed);
  SolveResult result;
  if (file.restarts <= 1) {
    result = fbs_solve(p, file.x0.value_or(Vector::Zero(p.A.cols())), file.options);
  } else {
    MultiStartOptions ms;
    ms.restarts = file.restarts;
    ms.threads = worker_count();
    result = fbs_multistart(p, file.options, ms).best;
  }
  emit(out, result_json(file, result, regime).dump(2) + "\n");
  if (!trace_out.empty()) write_text(trace_out, trace_csv(result));
  return 0;
}

int cmd_verify(const std::string& suite) {
  bool ok = true;
  for (const auto& check : run_verification(suite)) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.suite << ": " << check.name << " | " << check.detail
              << '\n';
    ok = ok && check.passed;
  }
  return ok ? 0 : 1;
}

std::string timing_path(const std::string& out) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "_timing" + p.extension().string())).string();
}

int cmd_fig4(const std::string& config_path, const std::string& out, int trials) {
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config " << config_path << '\n';
      return 2;
    }
    cfg = experiment_config_from_json(nlohmann::json::parse(in));
  }
  if (trials >= 0) cfg.trials_per_level = trials;
  cfg.validate();
  const auto rows = run_fig4(cfg, worker_count());
  emit(out, fig4_csv(cfg, rows));
  if (!out.empty() && out != "-") write_text(timing_path(out), fig4_timing_csv(rows));
  for (const auto& s : summarize(rows)) {
    std::fprintf(stderr, "%-8s noise=%4.1f trials=%d mean_dist=%.3e support=%.2f exact=%.2f\n", s.method.c_str(),
                 s.noise_level, s.trials, s.mean_dist, s.support_match_rate, s.exact_rate);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic envelopes of sparsity penalties and the least-squares problems they regularize"};
  app.require_subcommand(1);

  PenaltyFlags env_pen, oracle_pen;
  GridFlags env_grid, oracle_grid;
  std::string env_mode = "closed", env_out, oracle_transform = "quad", oracle_out;
  auto* envelope = app.add_subcommand("envelope", "dump f, Q and S on a 1D grid as CSV");
  env_pen.attach(envelope);
  env_grid.attach(envelope);
  envelope->add_option("--mode", env_mode, "closed (closed form where known) or engine")
      ->check(CLI::IsMember({"closed", "engine"}));
  envelope->add_option("--out", env_out, "output CSV (default stdout)");

  std::string problem_path, solve_out, solve_trace;
  auto* solve = app.add_subcommand("solve", "solve a problem file with forward-backward splitting");
  solve->add_option("problem", problem_path, "problem JSON")->required();
  solve->add_option("--out", solve_out, "result JSON (default stdout)");
  solve->add_option("--trace", solve_trace, "objective trace CSV");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run the envelope and minima checks");
  std::vector<std::string> suites = verification_suites();
  suites.push_back("all");
  verify->add_option("--suite", suite, "suite name or all")->check(CLI::IsMember(suites));

  std::string fig4_config, fig4_out = "fig4.csv";
  int fig4_trials = -1;
  auto* fig4 = app.add_subcommand("fig4", "sparse recovery experiment: l1 sweep against Q(card) and Q(topk)");
  fig4->add_option("--config", fig4_config, "config JSON; defaults apply to missing fields");
  fig4->add_option("--out", fig4_out, "result CSV; timings go to <stem>_timing.csv");
  fig4->add_option("--trials", fig4_trials, "override trials_per_level");

  auto* oracle = app.add_subcommand("oracle", "grid oracle transforms as x,value CSV");
  oracle_pen.attach(oracle);
  oracle_grid.attach(oracle);
  oracle->add_option("--transform", oracle_transform, "sample, quad, hull, legendre or curvature")
      ->check(CLI::IsMember({"sample", "quad", "hull", "legendre", "curvature"}));
  oracle->add_option("--out", oracle_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*envelope) return cmd_envelope(env_pen, env_grid, env_mode, env_out);
    if (*solve) return cmd_solve(problem_path, solve_out, solve_trace);
    if (*verify) return cmd_verify(suite);
    if (*fig4) return cmd_fig4(fig4_config, fig4_out, fig4_trials);
    if (*oracle) return cmd_oracle(oracle_pen, oracle_grid, oracle_transform, oracle_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
