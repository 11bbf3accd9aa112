#include "quadenv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <random>
#include <sstream>

#include "quadenv/envelope.hpp"
#include "quadenv/grid_oracle.hpp"
#include "quadenv/penalties.hpp"
#include "quadenv/solver.hpp"
#include "quadenv/spectral.hpp"

namespace quadenv {

namespace {

std::string describe(double value, double tol) {
  std::ostringstream out;
  out << "max error " << value << " (tol " << tol << ")";
  return out.str();
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool fa = std::isfinite(a[i]);
    const bool fb = std::isfinite(b[i]);
    if (fa != fb) return kInf;
    if (fa) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

void identity_suite(std::vector<CheckResult>& out) {
  const double lo = -3.0, hi = 3.0;
  const std::size_t n = 601;
  const std::vector<PenaltyPtr> penalties = {std::make_shared<CardPenalty>(1.0), std::make_shared<CardPenalty>(0.3),
                                             std::make_shared<TopKIndicator>(0)};
  for (const auto& f : penalties) {
    for (double g : {0.5, 1.0, 2.0}) {
      for (double d : {0.0, 1.0, -0.7}) {
        Vector x(1);
        auto shifted = GridFunction::sample(lo, hi, n, [&](double t) {
          x[0] = t;
          return f->eval(x) + 0.5 * g * (t - d) * (t - d);
        });
        auto closed = GridFunction::sample(lo, hi, n, [&](double t) {
          x[0] = t;
          return *f->envelope(x, Gamma(g)) + 0.5 * g * (t - d) * (t - d);
        });
        const double err = sup_diff(grid_convex_envelope(shifted), closed);
        const double tol = 5.0 * shifted.step();
        std::ostringstream name;
        name << f->descriptor().dump() << " gamma=" << g << " d=" << d;
        out.push_back({"identity", name.str(), err <= tol, describe(err, tol)});
      }
    }
  }
}

void double_transform_suite(std::vector<CheckResult>& out) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + trial % 6;
    Vector x(dim);
    for (auto& xi : x) xi = 1.5 * normal(rng);
    const Gamma g(0.5 + std::abs(normal(rng)));
    const int k = 1 + trial % dim;
    worst = std::max(worst, std::abs(q_transform_eval_engine(CardPenalty(0.8), g, x).value - q_card_eval(x, g, 0.8)));
    worst = std::max(worst, std::abs(q_transform_eval_engine(TopKIndicator(k), g, x).value - q_topk_eval(x, g, k)));
  }
  out.push_back({"double_transform", "engine vs closed forms (60 points, dims 1-6)", worst <= 1e-5, describe(worst, 1e-5)});

  const CardPenalty card(1.0);
  const auto f = sample_penalty(card, -3.0, 3.0, 1201);
  const auto q = grid_quad_envelope(f, Gamma(2.0));
  double err = 0.0;
  Vector x(1);
  for (std::size_t i = 0; i < q.size(); ++i) {
    x[0] = q.x(i);
    err = std::max(err, std::abs(q[i] - q_card_eval(x, Gamma(2.0), 1.0)));
  }
  out.push_back({"double_transform", "grid double transform vs q_card", err <= 1e-2, describe(err, 1e-2)});
}

void monotonicity_suite(std::vector<CheckResult>& out) {
  const CardPenalty card(1.0);
  const auto f = sample_penalty(card, -3.0, 3.0, 601);
  const std::vector<double> gammas = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  double worst = 0.0;
  auto previous = grid_quad_envelope(f, Gamma(gammas.front()));
  for (std::size_t j = 1; j < gammas.size(); ++j) {
    auto current = grid_quad_envelope(f, Gamma(gammas[j]));
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, previous[i] - current[i]);
    previous = std::move(current);
  }
  out.push_back({"monotonicity", "grid envelope nondecreasing in gamma", worst <= 1e-12, describe(worst, 1e-12)});

  double gap = 0.0;
  for (double g : {2.0, 4.0, 16.0, 1000.0}) {
    gap = std::max(gap, std::abs(q_card_eval(Vector::Constant(1, 1.0), Gamma(g), 1.0) - 1.0));
  }
  out.push_back({"monotonicity", "Q_gamma(card)(1) = 1 for gamma >= 2", gap <= 1e-9, describe(gap, 1e-9)});
}

void curvature_suite(std::vector<CheckResult>& out) {
  const CardPenalty card(1.0);
  const auto f = sample_penalty(card, -3.0, 3.0, 601);
  for (double g : {1.0, 2.0, 4.0}) {
    const auto report = curvature_check(grid_quad_envelope(f, Gamma(g)), f, Gamma(g));
    std::ostringstream name;
    name << "card gamma=" << g;
    out.push_back({"curvature", name.str(), report.passed,
                   describe(report.max_deviation, report.tolerance)});
  }
}

void sandwich_suite(std::vector<CheckResult>& out) {
  // 1D problems J(x) = card(x) + (a x - d)^2 / 2 with gamma >= a^2.
  const double lo = -3.0, hi = 3.0;
  const std::size_t n = 601;
  double worst = 0.0;
  for (double a : {0.5, 1.0, 1.5}) {
    for (double d : {1.0, -0.7, 2.0}) {
      const Gamma g(1.2 * a * a);
      Vector x(1);
      auto J = GridFunction::sample(lo, hi, n, [&](double t) {
        x[0] = t;
        return CardPenalty(1.0).eval(x) + 0.5 * (a * t - d) * (a * t - d);
      });
      auto hull = grid_convex_envelope(J);
      for (std::size_t i = 0; i < n; ++i) {
        x[0] = J.x(i);
        const double jg = q_card_eval(x, g, 1.0) + 0.5 * (a * x[0] - d) * (a * x[0] - d);
        worst = std::max({worst, hull[i] - jg, jg - J[i]});
      }
    }
  }
  out.push_back({"sandwich", "hull(J) <= J_gamma <= J on 1D grids", worst <= 1e-9, describe(worst, 1e-9)});
}

void minima_suite(std::vector<CheckResult>& out) {
  // Planted 3-sparse signals with small noise, 6 x 10 operators.
  int agree = 0;
  const int instances = 10;
  for (int inst = 0; inst < instances; ++inst) {
    std::mt19937_64 rng(2000 + inst);
    std::normal_distribution<double> normal;
    Matrix A(6, 10);
    for (auto& a : A.reshaped()) a = normal(rng) / std::sqrt(6.0);
    Vector x0 = Vector::Zero(10);
    for (int j = 0; j < 3; ++j) x0[(inst * 3 + j * 4) % 10] = 2.0 * normal(rng);
    Vector d = A * x0;
    for (auto& di : d) di += 0.1 * normal(rng);
    auto penalty = std::make_shared<CardPenalty>(0.3);
    const double opnorm = power_iteration(A);
    Problem p{A, d, penalty, Gamma(1.01 * opnorm)};
    SolverOptions opts;
    opts.opnorm_sq = opnorm;
    opts.seed = 100u * static_cast<unsigned>(inst);
    MultiStartOptions ms;
    ms.restarts = 30;
    const auto best = fbs_multistart(p, opts, ms).best;
    const auto brute = brute_force_global_min({A, d, penalty});
    if (std::abs(best.objective - brute.value) <= 1e-6 && best.contact) ++agree;
  }
  out.push_back({"minima", "multistart FBS reaches the brute-force minimum", agree >= instances - 1,
                 std::to_string(agree) + "/" + std::to_string(instances) + " instances"});
}

void spectral_suite(std::vector<CheckResult>& out) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index dim = 2 + trial % 2;
    Matrix X(dim, dim);
    for (auto& v : X.reshaped()) v = normal(rng);
    const Gamma g(1.0);
    for (PenaltyPtr base : {PenaltyPtr(std::make_shared<CardPenalty>(0.7)), PenaltyPtr(std::make_shared<TopKIndicator>(1))}) {
      const SpectralPenalty p(base, dim, dim);
      const double engine = q_transform_eval_engine(p, g, SpectralPenalty::flatten(X)).value;
      worst = std::max(worst, std::abs(engine - q_spectral_eval(X, g, p)));
    }
  }
  out.push_back({"spectral", "q_spectral_eval vs engine (2x2, 3x3)", worst <= 1e-5, describe(worst, 1e-5)});
}

}  // namespace

const std::vector<std::string>& verification_suites() {
  static const std::vector<std::string> suites = {"identity", "double_transform", "monotonicity", "curvature",
                                                  "sandwich", "minima", "spectral"};
  return suites;
}

std::vector<CheckResult> run_verification(const std::string& suite) {
  const auto& known = verification_suites();
  if (suite != "all" && std::find(known.begin(), known.end(), suite) == known.end()) {
    throw std::invalid_argument("unknown verification suite: " + suite);
  }
  std::vector<CheckResult> out;
  auto wants = [&](const char* name) { return suite == "all" || suite == name; };
  if (wants("identity")) identity_suite(out);
  if (wants("double_transform")) double_transform_suite(out);
  if (wants("monotonicity")) monotonicity_suite(out);
  if (wants("curvature")) curvature_suite(out);
  if (wants("sandwich")) sandwich_suite(out);
  if (wants("minima")) minima_suite(out);
  if (wants("spectral")) spectral_suite(out);
  return out;
}

}  // namespace quadenv
