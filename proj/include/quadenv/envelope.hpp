#pragma once

#include <vector>

#include "quadenv/penalty.hpp"

namespace quadenv {

struct AscentOptions {
  // Warm-start phase: monotone supergradient ascent.
  int max_iterations = 10000;
  double min_step_norm = 1e-10;

  // Polish phase: central-cut ellipsoid on the same concave objective. It
  // maintains a certified upper bound and stops once the gap closes.
  bool polish = true;
  int polish_max_iterations = 20000;
  double gap_tolerance = 1e-11;
  int max_radius_expansions = 6;

  bool record_trace = false;
};

struct AscentResult {
  double value = 0.0;
  Vector argmax;
  int iterations = 0;
  /// False when the iteration budget ran out; value is still a valid lower bound.
  bool converged = false;
  /// Certified bound on the supremum from the polish phase (+inf without it).
  double upper_bound = kInf;
  /// Best objective after every improvement; nondecreasing.
  std::vector<double> trace;
};

/// S_gamma(f)(y) = -(f(p) + gamma/2 |p - y|^2), p = prox(y, 1/gamma).
double s_transform_eval(const Penalty& f, Gamma gamma, const Vector& y);

/// Q_gamma(f)(x) = sup_y [-S_gamma(f)(y) - gamma/2 |x - y|^2], started at y = x.
/// The objective is concave in y with supergradient gamma (x - prox(y, 1/gamma)).
AscentResult q_transform_eval_engine(const Penalty& f, Gamma gamma, const Vector& x,
                                     const AscentOptions& opts = {});

/// S_{1/s} S_{1/t} (f)(x) for 0 < s <= t. With s == t this is Q_{1/s}(f)(x).
AscentResult lasry_lions_eval(const Penalty& f, double s, double t, const Vector& x,
                              const AscentOptions& opts = {});

}  // namespace quadenv
