#include "quadenv/solver.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>

#include "quadenv/envelope.hpp"
#include "quadenv/parallel.hpp"
#include "quadenv/penalties.hpp"

namespace quadenv {

std::size_t worker_count() {
  const char* env = std::getenv("QUADENV_THREADS");
  if (!env) return 1;
  const long requested = std::strtol(env, nullptr, 10);
  const auto hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (requested < 1) return 1;
  return std::min<std::size_t>(static_cast<std::size_t>(requested), hw);
}

void Problem::validate() const {
  if (A.rows() < 1 || A.cols() < 1) throw InputError("A must have at least one row and column");
  if (A.rows() != d.size()) throw InputError("A and d have incompatible shapes");
  if (!A.allFinite() || !d.allFinite()) throw InputError("problem data has non-finite entries");
  if (!penalty) throw InputError("problem has no penalty");
}

double Problem::objective(const Vector& x) const { return penalty->eval(x) + 0.5 * (A * x - d).squaredNorm(); }

double Problem::envelope_objective(const Vector& x) const {
  const QuadEnvelope q{penalty, gamma};
  return q(x) + 0.5 * (A * x - d).squaredNorm();
}

std::string to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::ConvexMinorant: return "ConvexMinorant";
    case RegimeLabel::MinimaPreserving: return "MinimaPreserving";
    case RegimeLabel::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

std::string to_string(ProxMode mode) {
  switch (mode) {
    case ProxMode::Auto: return "auto";
    case ProxMode::Exact: return "exact";
    case ProxMode::Hull: return "hull";
  }
  return "auto";
}

ProxMode prox_mode_from_string(const std::string& name) {
  if (name == "auto") return ProxMode::Auto;
  if (name == "exact") return ProxMode::Exact;
  if (name == "hull") return ProxMode::Hull;
  throw InputError("unknown prox mode: " + name);
}

double power_iteration(const Matrix& A, int iterations, std::uint64_t seed) {
  if (iterations < 1) throw ParameterError("power iteration needs at least one iteration");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(A.cols());
  for (auto& vi : v) vi = normal(rng);
  v.normalize();

  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Vector w = A.transpose() * (A * v);
    estimate = std::max(estimate, v.dot(w));
    const double norm = w.norm();
    if (norm == 0.0) break;
    v = w / norm;
  }
  return estimate;
}

Regime classify_regime(const Problem& p, int power_iterations, std::uint64_t seed) {
  p.validate();
  Regime regime{RegimeLabel::Indeterminate, power_iteration(p.A, power_iterations, seed), 0.0};
  if (p.A.rows() >= p.A.cols()) {
    Eigen::BDCSVD<Matrix> svd(p.A);
    const double smin = svd.singularValues().minCoeff();
    regime.minsv_sq = smin * smin;
  }
  const double g = p.gamma.value();
  if (regime.minsv_sq >= g) {
    regime.label = RegimeLabel::ConvexMinorant;
  } else if (regime.opnorm_sq < g) {
    regime.label = RegimeLabel::MinimaPreserving;
  }
  return regime;
}

namespace {

void require_start(const Problem& p, const Vector& x0) {
  if (x0.size() != p.A.cols()) throw InputError("x0 has the wrong dimension");
  require_finite(x0, "x0");
}

bool in_contact(const Problem& p, const Vector& x, double tol) {
  const double fx = p.penalty->eval(x);
  if (!std::isfinite(fx)) return false;
  const QuadEnvelope q{p.penalty, p.gamma};
  return std::abs(q(x) - fx) <= tol;
}

// Relative-change stopping rule shared by both solvers.
class Stopper {
 public:
  explicit Stopper(const SolverOptions& opts) : tol_(opts.tol), step_tol_(opts.step_tol), patience_(opts.patience) {}
  bool update(double previous, double current, const Vector& x_prev, const Vector& x) {
    const bool flat = std::abs(previous - current) <= tol_ * std::abs(previous);
    const bool still = (x - x_prev).norm() <= step_tol_ * std::max(1.0, x.norm());
    streak_ = flat && still ? streak_ + 1 : 0;
    return streak_ >= patience_;
  }

 private:
  double tol_;
  double step_tol_;
  int patience_;
  int streak_ = 0;
};

}  // namespace

SolveResult fbs_solve(const Problem& p, const Vector& x0, const SolverOptions& opts) {
  p.validate();
  require_start(p, x0);
  const double g = p.gamma.value();
  const double lipschitz = opts.opnorm_sq ? *opts.opnorm_sq : power_iteration(p.A, opts.power_iterations, opts.seed);
  const bool convex = p.penalty->is_convex();
  constexpr double kRel = 1e-12;

  ProxMode mode = opts.mode;
  if (mode == ProxMode::Auto) {
    if (convex) {
      mode = ProxMode::Exact;
    } else if (lipschitz <= g * (1.0 + kRel) && (opts.step == 0.0 || std::abs(opts.step * g - 1.0) <= kRel)) {
      mode = ProxMode::Hull;
    } else {
      mode = ProxMode::Exact;
    }
  }

  double step = opts.step;
  if (mode == ProxMode::Hull) {
    if (step == 0.0) step = 1.0 / g;
    if (std::abs(step * g - 1.0) > kRel) throw ParameterError("hull-prox mode requires step t = 1/gamma");
  } else if (step == 0.0) {
    step = 1.0 / (convex ? lipschitz : std::max(lipschitz, g));
    // t gamma must stay below 1 for the exact envelope prox.
    if (!convex && step * g >= 1.0) step = (1.0 - 1e-9) / g;
  }
  if (!(step > 0.0)) throw ParameterError("step must be positive");
  const double bound = 1.0 / (convex ? lipschitz : std::max(lipschitz, g));
  if (step > bound * (1.0 + kRel)) throw ParameterError("step exceeds 1 / max(|A|^2, gamma)");

  auto prox = [&](const Vector& v) -> Vector {
    if (mode == ProxMode::Hull) return p.penalty->prox(v, step);
    auto out = p.penalty->envelope_prox(v, step, p.gamma);
    if (!out) throw ParameterError("no exact envelope prox for this penalty at t = " + std::to_string(step));
    return *out;
  };

  SolveResult result;
  result.mode = mode;
  result.step = step;
  result.seed = opts.seed;
  result.x = x0;
  double current = p.envelope_objective(result.x);
  result.objective_trace.push_back(current);

  const Matrix At = p.A.transpose();
  Stopper stopper(opts);
  int it = 0;
  while (it < opts.max_iterations) {
    const Vector grad = At * (p.A * result.x - p.d);
    Vector next_x = prox(result.x - step * grad);
    ++it;
    const double next = p.envelope_objective(next_x);
    result.objective_trace.push_back(next);
    const bool done = stopper.update(current, next, result.x, next_x);
    result.x = std::move(next_x);
    current = next;
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.iterations = it;
  result.envelope_objective = current;
  result.objective = p.objective(result.x);
  result.contact = in_contact(p, result.x, opts.contact_tol);
  return result;
}

SolveResult ista_solve(const Problem& p, const Vector& x0, const SolverOptions& opts) {
  p.validate();
  require_start(p, x0);
  const auto* l1 = dynamic_cast<const L1Penalty*>(p.penalty.get());
  if (!l1) throw ParameterError("ista_solve needs an l1 penalty");
  const double lipschitz = opts.opnorm_sq ? *opts.opnorm_sq : power_iteration(p.A, opts.power_iterations, opts.seed);
  const double step = opts.step == 0.0 ? 1.0 / lipschitz : opts.step;
  if (!(step > 0.0) || step > (1.0 + 1e-12) / lipschitz) throw ParameterError("ista step must lie in (0, 1/|A|^2]");

  const Matrix At = p.A.transpose();
  auto forward_backward = [&](const Vector& y) {
    return l1_prox(y - step * (At * (p.A * y - p.d)), step, l1->lambda());
  };

  SolveResult result;
  result.mode = ProxMode::Exact;
  result.step = step;
  result.seed = opts.seed;
  result.x = x0;
  double current = p.objective(result.x);
  result.objective_trace.push_back(current);

  Vector y = result.x;
  double theta = 1.0;
  Stopper stopper(opts);
  int it = 0;
  while (it < opts.max_iterations) {
    Vector z = forward_backward(opts.fista ? y : result.x);
    double next = p.objective(z);
    if (next > current) {
      // Momentum overshot: restart from a plain (monotone) step.
      theta = 1.0;
      z = forward_backward(result.x);
      next = p.objective(z);
    }
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    y = z + ((theta - 1.0) / theta_next) * (z - result.x);
    theta = theta_next;
    ++it;
    result.objective_trace.push_back(next);
    const bool done = stopper.update(current, next, result.x, z);
    result.x = std::move(z);
    current = next;
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.iterations = it;
  result.objective = current;
  result.envelope_objective = current;
  result.contact = true;
  return result;
}

Vector oracle_solution(const Matrix& A, const Vector& d, const std::vector<int>& support) {
  if (A.rows() != d.size()) throw InputError("A and d have incompatible shapes");
  Vector x = Vector::Zero(A.cols());
  if (support.empty()) return x;
  Matrix sub(A.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j] < 0 || support[j] >= A.cols()) throw InputError("support index out of range");
    sub.col(static_cast<Eigen::Index>(j)) = A.col(support[j]);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(sub);
  if (qr.rank() < sub.cols()) throw InputError("support columns of A are linearly dependent");
  const Vector z = qr.solve(d);
  for (std::size_t j = 0; j < support.size(); ++j) x[support[j]] = z[static_cast<Eigen::Index>(j)];
  return x;
}

MultiStartResult fbs_multistart(const Problem& p, const SolverOptions& opts, const MultiStartOptions& ms) {
  p.validate();
  if (ms.restarts < 1) throw ParameterError("need at least one restart");
  SolverOptions shared = opts;
  if (!shared.opnorm_sq) shared.opnorm_sq = power_iteration(p.A, opts.power_iterations, opts.seed);
  const double lipschitz = *shared.opnorm_sq;
  const Vector correlation = p.A.transpose() * p.d;
  const double corr_max = correlation.cwiseAbs().maxCoeff();

  std::vector<Vector> starts;
  if (ms.include_zero) starts.push_back(Vector::Zero(p.A.cols()));
  if (ms.include_l1 && corr_max > 0.0 && static_cast<int>(starts.size()) < ms.restarts) {
    Problem l1 = p;
    l1.penalty = std::make_shared<L1Penalty>(ms.l1_lambda_fraction * corr_max);
    SolverOptions l1_opts = shared;
    l1_opts.step = 0.0;
    starts.push_back(ista_solve(l1, Vector::Zero(p.A.cols()), l1_opts).x);
  }
  const double scale = corr_max > 0.0 ? corr_max / lipschitz : 1.0;
  const auto warm = starts.size();
  const Eigen::Index n = p.A.cols();
  const auto max_support = static_cast<std::uint64_t>(std::min(p.A.rows(), n));
  for (std::size_t i = warm; i < static_cast<std::size_t>(ms.restarts); ++i) {
    std::mt19937_64 rng(opts.seed + i);
    if (ms.support_starts && (i - warm) % 2 == 1) {
      // Least-norm fit on a random support of random size.
      std::vector<int> columns(static_cast<std::size_t>(n));
      std::iota(columns.begin(), columns.end(), 0);
      std::shuffle(columns.begin(), columns.end(), rng);
      columns.resize(static_cast<std::size_t>(1 + rng() % max_support));
      Matrix sub(p.A.rows(), static_cast<Eigen::Index>(columns.size()));
      for (std::size_t j = 0; j < columns.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = p.A.col(columns[j]);
      const Vector z = sub.completeOrthogonalDecomposition().solve(p.d);
      Vector x0 = Vector::Zero(n);
      for (std::size_t j = 0; j < columns.size(); ++j) x0[columns[j]] = z[static_cast<Eigen::Index>(j)];
      starts.push_back(std::move(x0));
      continue;
    }
    std::normal_distribution<double> normal(0.0, scale);
    Vector x0(n);
    for (auto& xi : x0) xi = normal(rng);
    starts.push_back(std::move(x0));
  }

  std::vector<SolveResult> runs(starts.size());
  parallel_for(starts.size(), ms.threads, [&](std::size_t i) {
    SolverOptions run_opts = shared;
    run_opts.seed = opts.seed + i;
    runs[i] = fbs_solve(p, starts[i], run_opts);
  });

  MultiStartResult out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out.envelope_objectives.push_back(runs[i].envelope_objective);
    if (runs[i].envelope_objective < runs[out.best_index].envelope_objective) out.best_index = i;
  }
  out.best = std::move(runs[out.best_index]);
  return out;
}

std::vector<int> support_of(const Vector& x, double tol) {
  std::vector<int> support;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > tol) support.push_back(static_cast<int>(i));
  }
  return support;
}

}  // namespace quadenv
