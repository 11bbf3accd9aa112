#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quadenv/penalty.hpp"

namespace quadenv {

/// One instance of  min_x Q_gamma(f)(x) + 1/2 |Ax - d|^2.
struct Problem {
  Matrix A;
  Vector d;
  PenaltyPtr penalty;
  Gamma gamma{1.0};

  void validate() const;
  /// J(x) = f(x) + 1/2 |Ax - d|^2
  double objective(const Vector& x) const;
  /// J_gamma(x) = Q_gamma(f)(x) + 1/2 |Ax - d|^2
  double envelope_objective(const Vector& x) const;
};

enum class RegimeLabel { ConvexMinorant, MinimaPreserving, Indeterminate };
std::string to_string(RegimeLabel label);

struct Regime {
  RegimeLabel label;
  double opnorm_sq;  // |A|^2
  double minsv_sq;   // sigma_min(A)^2, 0 for wide A
};

/// Largest eigenvalue of A^T A by seeded power iteration. Every iterate's
/// Rayleigh quotient is a lower bound; the largest one is returned.
double power_iteration(const Matrix& A, int iterations = 1000, std::uint64_t seed = 0);

/// ConvexMinorant iff sigma_min^2 >= gamma, MinimaPreserving iff |A|^2 < gamma.
Regime classify_regime(const Problem& p, int power_iterations = 1000, std::uint64_t seed = 0);

enum class ProxMode {
  Auto,
  /// Exact prox of t Q_gamma(f); needs t gamma < 1 unless f is convex.
  Exact,
  /// t = 1/gamma and the prox of f itself, which is a prox selection of
  /// Q_gamma(f) at that step (the proximal hull has the same Moreau envelope).
  Hull,
};
std::string to_string(ProxMode mode);
ProxMode prox_mode_from_string(const std::string& name);

struct SolverOptions {
  double step = 0.0;  // 0: chosen from the mode
  ProxMode mode = ProxMode::Auto;
  double tol = 1e-10;
  /// |x_k - x_{k-1}| <= step_tol * max(1, |x_k|) must hold as well.
  double step_tol = 1e-12;
  int patience = 5;
  int max_iterations = 100000;
  int power_iterations = 1000;
  std::optional<double> opnorm_sq;  // skips the power iteration
  double contact_tol = 1e-8;
  std::uint64_t seed = 0;
  bool fista = true;  // ista_solve only
};

struct SolveResult {
  Vector x;
  /// J_gamma at x0 and after every iteration.
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  /// Q_gamma(f)(x) == f(x) within contact_tol.
  bool contact = false;
  double envelope_objective = kInf;
  double objective = kInf;
  double step = 0.0;
  ProxMode mode = ProxMode::Auto;
  std::uint64_t seed = 0;
};

/// Forward-backward splitting x <- prox_{t Q}(x - t A^T (Ax - d)). Stops when
/// both the relative change of J_gamma and the relative step stay below their
/// tolerances for `patience` consecutive iterations.
SolveResult fbs_solve(const Problem& p, const Vector& x0, const SolverOptions& opts = {});

/// Proximal gradient for lambda |x|_1 + 1/2 |Ax - d|^2 (FISTA with a
/// monotone restart when opts.fista).
SolveResult ista_solve(const Problem& p, const Vector& x0, const SolverOptions& opts = {});

/// Least-squares fit on the given support, zero elsewhere.
Vector oracle_solution(const Matrix& A, const Vector& d, const std::vector<int>& support);

struct MultiStartOptions {
  /// Total number of runs: the zero vector, the l1 warm start, then seeded
  /// random starts (seed + index). With support_starts every second random
  /// start is a least-norm fit on a random support instead of a Gaussian point.
  int restarts = 50;
  bool include_zero = true;
  bool include_l1 = true;
  bool support_starts = true;
  /// lambda of the l1 warm start as a fraction of |A^T d|_inf.
  double l1_lambda_fraction = 0.1;
  std::size_t threads = 1;
};

struct MultiStartResult {
  SolveResult best;
  std::size_t best_index = 0;
  std::vector<double> envelope_objectives;
};

/// Best (lowest J_gamma) of several fbs_solve runs.
MultiStartResult fbs_multistart(const Problem& p, const SolverOptions& opts, const MultiStartOptions& ms = {});

/// Indices i with |x_i| > tol.
std::vector<int> support_of(const Vector& x, double tol = 0.0);

}  // namespace quadenv
