// End-to-end acceptance gate: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "quadenv/envelope.hpp"
#include "quadenv/experiments.hpp"
#include "quadenv/grid_oracle.hpp"
#include "quadenv/parallel.hpp"
#include "quadenv/penalties.hpp"
#include "quadenv/solver.hpp"
#include "quadenv/spectral.hpp"

using namespace quadenv;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out{false, ""};
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = seconds <= budget_seconds;
  const bool ok = out.passed && in_time;
  if (!ok) ++failures;
  std::printf("[%s] %d %s: %s | %.1f s (budget %.0f s)\n", ok ? "PASS" : "FAIL", id, title, out.detail.c_str(), seconds,
              budget_seconds);
  std::fflush(stdout);
}

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

Vector scalar(double x) { return Vector::Constant(1, x); }

Outcome envelope_identity() {
  const double lo = -3.0, hi = 3.0;
  const std::size_t n = 3001;
  const double h = (hi - lo) / static_cast<double>(n - 1);
  double worst = 0.0;
  bool domains_match = true;
  struct Case {
    PenaltyPtr f;
    std::function<double(double, double)> closed;
  };
  const std::vector<Case> cases = {
      {std::make_shared<CardPenalty>(1.0), [](double x, double g) { return q_card_eval(scalar(x), Gamma(g), 1.0); }},
      {std::make_shared<CardPenalty>(0.3), [](double x, double g) { return q_card_eval(scalar(x), Gamma(g), 0.3); }},
      {std::make_shared<TopKIndicator>(0), [](double x, double g) { return q_topk_eval(scalar(x), Gamma(g), 0); }},
  };
  for (const auto& c : cases) {
    for (double g : {0.5, 1.0, 2.0}) {
      for (double d : {0.0, 1.0, -0.7}) {
        const auto shifted = GridFunction::sample(lo, hi, n, [&](double x) { return c.f->eval(scalar(x)) + 0.5 * g * (x - d) * (x - d); });
        const auto hull = grid_convex_envelope(shifted);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = hull.x(i);
          const double target = c.closed(x, g) + 0.5 * g * (x - d) * (x - d);
          if (std::isfinite(target) != std::isfinite(hull[i])) {
            domains_match = false;
          } else if (std::isfinite(target)) {
            worst = std::max(worst, std::abs(hull[i] - target));
          }
        }
      }
    }
  }
  return {domains_match && worst <= 5.0 * h,
          fmt("sup error %.3e (tol %.3e)", worst, 5.0 * h) + (domains_match ? "" : ", +inf sets differ")};
}

Outcome double_transform() {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> gam(0.25, 4.0), mu(0.1, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + trial % 6;
    const Vector x = oracle::random_vector(rng, dim, 1.5);
    const Gamma g(gam(rng));
    const double m = mu(rng);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(dim));
    worst = std::max(worst, std::abs(q_transform_eval_engine(CardPenalty(m), g, x).value - q_card_eval(x, g, m)));
    worst = std::max(worst, std::abs(q_transform_eval_engine(TopKIndicator(k), g, x).value - q_topk_eval(x, g, k)));
  }
  const auto f = sample_penalty(CardPenalty(1.0), -3.0, 3.0, 6001);
  double grid_worst = 0.0;
  for (double g : {0.5, 1.0, 2.0}) {
    const auto q = grid_quad_envelope(f, Gamma(g));
    for (std::size_t i = 0; i < q.size(); ++i) grid_worst = std::max(grid_worst, std::abs(q[i] - q_card_eval(scalar(q.x(i)), Gamma(g), 1.0)));
  }
  return {worst <= 1e-5 && grid_worst <= 1e-2,
          fmt("engine vs closed form %.3e (tol 1e-5), grid vs closed form %.3e (tol 1e-2)", worst, grid_worst)};
}

Outcome curvature() {
  const auto f = sample_penalty(CardPenalty(1.0), -3.0, 3.0, 601);
  bool ok = true;
  double worst = 0.0, tol = 0.0;
  std::size_t checked = 0;
  for (double g : {1.0, 2.0, 4.0}) {
    const auto report = curvature_check(grid_quad_envelope(f, Gamma(g)), f, Gamma(g));
    ok = ok && report.passed;
    worst = std::max(worst, report.max_deviation);
    tol = report.tolerance;
    for (const auto& p : report.points) checked += p.interior ? 1 : 0;
  }
  return {ok && checked > 0, fmt("max |Q'' + gamma| %.3e (tol %.3e)", worst, tol) + ", " + std::to_string(checked) + " stencils"};
}

Outcome monotonicity() {
  const std::vector<double> gammas = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  double worst_drop = 0.0;
  for (double mu : {1.0, 0.3}) {
    const auto f = sample_penalty(CardPenalty(mu), -3.0, 3.0, 1201);
    std::vector<double> previous(f.size(), -kInf);
    for (double g : gammas) {
      const auto q = grid_quad_envelope(f, Gamma(g));
      for (std::size_t i = 0; i < f.size(); ++i) {
        worst_drop = std::max(worst_drop, previous[i] - q[i]);
        previous[i] = q[i];
      }
    }
  }
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = oracle::random_vector(rng, 1 + trial % 5, 1.5);
    double pc = -kInf, pt = -kInf;
    for (double g : gammas) {
      const double qc = q_card_eval(x, Gamma(g), 1.0);
      const double qt = q_topk_eval(x, Gamma(g), 1);
      worst_drop = std::max({worst_drop, pc - qc, pt - qt});
      pc = qc;
      pt = qt;
    }
  }
  double limit_err = 0.0;
  for (double g : {2.0, 2.5, 4.0, 8.0, 100.0, 1e4}) {
    for (double x : {1.0, -1.0}) {
      limit_err = std::max(limit_err, std::abs(q_card_eval(scalar(x), Gamma(g), 1.0) - 1.0));
      limit_err = std::max(limit_err, std::abs(q_transform_eval_engine(CardPenalty(1.0), Gamma(g), scalar(x)).value - 1.0));
    }
  }
  return {worst_drop <= 1e-12 && limit_err <= 1e-9,
          fmt("largest decrease in gamma %.3e, |Q(+-1) - 1| %.3e (tol 1e-9)", worst_drop, limit_err)};
}

Outcome minima_preservation() {
  int agree = 0;
  std::string misses;
  for (int inst = 0; inst < 20; ++inst) {
    std::mt19937_64 rng(1000 + inst);
    std::normal_distribution<double> normal;
    const Matrix A = oracle::random_matrix(rng, 6, 10, 1.0 / std::sqrt(6.0));
    Vector x0 = Vector::Zero(10);
    for (int j = 0; j < 3; ++j) x0[(inst * 3 + j * 4) % 10] = 2.0 * normal(rng);
    Vector d = A * x0;
    for (auto& di : d) di += 0.1 * normal(rng);
    auto card = std::make_shared<CardPenalty>(0.3);
    const double opnorm = power_iteration(A);
    Problem p{A, d, card, Gamma(1.01 * opnorm)};
    SolverOptions opts;
    opts.opnorm_sq = opnorm;
    opts.seed = 100u * static_cast<unsigned>(inst);
    MultiStartOptions ms;
    ms.restarts = 50;
    ms.threads = worker_count();
    const auto best = fbs_multistart(p, opts, ms).best;
    const auto brute = brute_force_global_min({A, d, card});
    if (std::abs(best.objective - brute.value) <= 1e-6 && best.contact) {
      ++agree;
    } else {
      misses += " " + std::to_string(inst);
    }
  }
  return {agree >= 19, std::to_string(agree) + "/20 instances at the brute-force minimum with contact (need 19)" +
                           (misses.empty() ? "" : "; missed:" + misses)};
}

Outcome convex_regime() {
  std::mt19937_64 rng(515);
  std::uniform_real_distribution<double> spread(0.0, 1.0);
  double worst_mid = -kInf, worst_sandwich = -kInf;
  bool regimes_ok = true;
  for (int inst = 0; inst < 20; ++inst) {
    const Eigen::Index n = 8;
    const double g = 0.5 + spread(rng);
    Vector s(n);
    for (auto& si : s) si = std::sqrt(2.0 * g) * (1.0 + spread(rng));
    const Matrix A = oracle::random_orthogonal(rng, n) * s.asDiagonal() * oracle::random_orthogonal(rng, n).transpose();
    PenaltyPtr f = inst % 2 == 0 ? PenaltyPtr(std::make_shared<CardPenalty>(0.2 + spread(rng)))
                                 : PenaltyPtr(std::make_shared<TopKIndicator>(3));
    Problem p{A, oracle::random_vector(rng, n), f, Gamma(g)};
    const auto regime = classify_regime(p);
    regimes_ok = regimes_ok && regime.label == RegimeLabel::ConvexMinorant && regime.minsv_sq >= 2.0 * g;
    for (int pair = 0; pair < 1000; ++pair) {
      const Vector x = oracle::random_vector(rng, n, 1.5), y = oracle::random_vector(rng, n, 1.5);
      const double mid = p.envelope_objective(0.5 * (x + y));
      worst_mid = std::max(worst_mid, mid - 0.5 * p.envelope_objective(x) - 0.5 * p.envelope_objective(y));
      Vector z = oracle::random_vector(rng, n, 1.5);
      if (pair % 2 == 0) z = topk_prox(z, 1.0, 3);
      worst_sandwich = std::max(worst_sandwich, p.envelope_objective(z) - p.objective(z));
    }
  }
  return {regimes_ok && worst_mid <= 1e-9 && worst_sandwich <= 0.0,
          fmt("max midpoint excess %.3e (tol 1e-9), max J_gamma - J %.3e", worst_mid, worst_sandwich) +
              (regimes_ok ? "" : ", regime check failed")};
}

std::vector<ExperimentRow> fig4_rows;

Outcome fig4() {
  const ExperimentConfig cfg;
  fig4_rows = run_fig4(cfg, worker_count());
  std::map<std::pair<std::string, double>, MethodSummary> by;
  for (const auto& s : summarize(fig4_rows)) by[{s.method, s.noise_level}] = s;

  bool ok = true;
  std::ostringstream detail;
  for (const char* m : {"l1_sweep", "q_card", "q_topk"}) {
    const auto& s = by.at({m, 0.0});
    const int exact = static_cast<int>(std::lround(s.exact_rate * s.trials));
    ok = ok && exact >= 19;
    detail << m << "@0 exact " << exact << "/" << s.trials << "; ";
  }
  const double slack = 1e-6;
  for (double level : {1.0, 2.0, 3.0}) {
    const auto& topk = by.at({"q_topk", level});
    const auto& l1 = by.at({"l1_sweep", level});
    ok = ok && topk.support_match_rate >= 0.7 && topk.support_match_rate > l1.support_match_rate;
    detail << "@" << level << " support topk " << topk.support_match_rate << " vs l1 " << l1.support_match_rate << "; ";
  }
  for (const auto& [key, s] : by) {
    if (key.first != "q_topk" || key.second > 3.0) continue;
    const double topk = s.mean_dist, card = by.at({"q_card", key.second}).mean_dist, l1 = by.at({"l1_sweep", key.second}).mean_dist;
    if (!(topk <= card + slack && card <= l1 + slack)) {
      ok = false;
      detail << "ordering fails at " << key.second << "; ";
    }
  }
  detail << "mean dist @3: topk " << by.at({"q_topk", 3.0}).mean_dist << ", card " << by.at({"q_card", 3.0}).mean_dist
         << ", l1 " << by.at({"l1_sweep", 3.0}).mean_dist;
  return {ok, detail.str()};
}

Outcome spectral() {
  std::mt19937_64 rng(88);
  double worst = 0.0, worst_unitary = 0.0;
  for (const PenaltyPtr& base : {PenaltyPtr(std::make_shared<CardPenalty>(0.8)), PenaltyPtr(std::make_shared<TopKIndicator>(1))}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Index dim = 2 + trial % 2;
      const SpectralPenalty p(base, dim, dim);
      const Matrix X = oracle::random_matrix(rng, dim, dim);
      const Gamma g(0.5 + 0.05 * trial);
      const double closed = q_spectral_eval(X, g, p);
      worst = std::max(worst, std::abs(q_transform_eval_engine(p, g, SpectralPenalty::flatten(X)).value - closed));
      const Matrix Y = oracle::random_orthogonal(rng, dim) * X * oracle::random_orthogonal(rng, dim).transpose();
      worst_unitary = std::max(worst_unitary, std::abs(q_spectral_eval(Y, g, p) - closed));
    }
  }
  return {worst <= 1e-5 && worst_unitary <= 1e-9,
          fmt("engine vs closed form %.3e (tol 1e-5), unitary invariance %.3e (tol 1e-9)", worst, worst_unitary)};
}

Outcome monotone_degradation() {
  std::map<std::string, std::vector<double>> means;
  for (const auto& s : summarize(fig4_rows)) means[s.method].push_back(s.mean_dist);
  double worst = 0.0;
  for (const auto& [method, values] : means) {
    for (std::size_t i = 1; i < values.size(); ++i) worst = std::max(worst, values[i - 1] - values[i]);
  }
  return {!fig4_rows.empty() && worst <= 1e-6, fmt("largest decrease of mean dist across noise levels %.3e (slack 1e-6)", worst)};
}

}  // namespace

int main() {
  run(1, "envelope identity", 30, envelope_identity);
  run(2, "double-transform consistency", 60, double_transform);
  run(3, "curvature off the contact set", 10, curvature);
  run(4, "monotonicity and limits in gamma", 10, monotonicity);
  run(5, "minima preservation", 120, minima_preservation);
  run(6, "convex regime", 60, convex_regime);
  run(7, "sparse recovery experiment (default config)", 600, fig4);
  run(8, "spectral consistency", 60, spectral);
  run(9, "monotone degradation of the default experiment (property)", 1, monotone_degradation);
  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
