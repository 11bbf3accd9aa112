#include "quadenv/envelope.hpp"

#include <algorithm>

namespace quadenv {

namespace {

// Concave objective
//   h(y) = [f(p) + |p - y|^2 / (2t)] - |x - y|^2 / (2s),  p = prox(y, t),
// valid for s <= t, with supergradient (y - p)/t + (x - y)/s at y.
class Objective {
 public:
  Objective(const Penalty& f, double s, double t, const Vector& x) : f_(f), s_(s), t_(t), x_(x) {}

  struct Probe {
    Vector y;
    double value;
    Vector supergradient;
  };

  Probe operator()(Vector y) const {
    const Vector p = f_.prox(y, t_);
    const double value = f_.eval(p) + (p - y).squaredNorm() / (2.0 * t_) - (x_ - y).squaredNorm() / (2.0 * s_);
    Vector g = (y - p) / t_ + (x_ - y) / s_;
    return Probe{std::move(y), value, std::move(g)};
  }

  double s() const { return s_; }
  const Vector& x() const { return x_; }

 private:
  const Penalty& f_;
  double s_;
  double t_;
  const Vector& x_;
};

struct Best {
  Vector y;
  double value;
  std::vector<double>* trace;

  void offer(const Vector& candidate, double candidate_value) {
    if (candidate_value > value) {
      y = candidate;
      value = candidate_value;
      if (trace) trace->push_back(value);
    }
  }
};

// Returns true on a certified stop.
bool ellipsoid_polish(const Objective& objective, double radius, const AscentOptions& opts, Best& best,
                      double& upper_bound, int& iterations) {
  const Eigen::Index n = best.y.size();
  const double tol = opts.gap_tolerance * (1.0 + std::abs(best.value));
  Vector center = best.y;
  upper_bound = kInf;

  if (n == 1) {
    // Bisection on the sign of the supergradient.
    double lo = center[0] - radius;
    double hi = center[0] + radius;
    for (int it = 0; it < opts.polish_max_iterations; ++it, ++iterations) {
      auto probe = objective(center);
      best.offer(probe.y, probe.value);
      const double g = probe.supergradient[0];
      upper_bound = std::min(upper_bound, probe.value + std::abs(g) * std::max(hi - center[0], center[0] - lo));
      if (g == 0.0 || upper_bound - best.value <= tol) return true;
      (g > 0.0 ? lo : hi) = center[0];
      center[0] = 0.5 * (lo + hi);
    }
    return false;
  }

  const double dn = static_cast<double>(n);
  Matrix shape = Matrix::Identity(n, n) * radius * radius;
  for (int it = 0; it < opts.polish_max_iterations; ++it, ++iterations) {
    auto probe = objective(center);
    best.offer(probe.y, probe.value);
    const Vector& g = probe.supergradient;
    const Vector pg = shape * g;
    const double width = std::sqrt(std::max(g.dot(pg), 0.0));
    upper_bound = std::min(upper_bound, probe.value + width);
    if (width == 0.0 || upper_bound - best.value <= tol) return true;

    // Keep the half {z : g.(z - center) >= 0}.
    const Vector b = pg / width;
    center += b / (dn + 1.0);
    shape = (dn * dn / (dn * dn - 1.0)) * (shape - (2.0 / (dn + 1.0)) * b * b.transpose());
    shape = 0.5 * (shape + shape.transpose());
  }
  return false;
}

AscentResult maximize(const Objective& objective, const AscentOptions& opts) {
  AscentResult result;
  auto current = objective(objective.x());
  Best best{current.y, current.value, opts.record_trace ? &result.trace : nullptr};
  if (best.trace) best.trace->push_back(best.value);

  // Warm start: monotone ascent, step s/2 (1/(2 gamma) for the envelope),
  // halved on non-increase and regrown after acceptance.
  const double base_step = 0.5 * objective.s();
  double step = base_step;
  int it = 0;
  bool stalled = false;
  for (; it < opts.max_iterations; ++it) {
    if (step * current.supergradient.norm() < opts.min_step_norm) {
      stalled = true;
      break;
    }
    auto trial = objective(current.y + step * current.supergradient);
    if (trial.value > current.value) {
      current = std::move(trial);
      best.offer(current.y, current.value);
      step = std::min(2.0 * step, base_step);
    } else {
      step *= 0.5;
    }
  }
  result.iterations = it;
  result.converged = stalled;

  if (opts.polish && std::isfinite(best.value)) {
    double radius = 2.0 * (1.0 + (best.y - objective.x()).norm() + objective.x().norm());
    result.converged = false;
    for (int round = 0; round <= opts.max_radius_expansions; ++round) {
      const Vector start = best.y;
      double upper = kInf;
      const bool certified = ellipsoid_polish(objective, radius, opts, best, upper, result.iterations);
      // The bound only holds if a maximizer lies in the starting ball; a best
      // point drifting towards the boundary means it may not.
      const bool interior = (best.y - start).norm() < 0.5 * radius;
      if (certified && interior) {
        result.converged = true;
        result.upper_bound = upper;
        break;
      }
      radius *= 4.0;
    }
  }

  result.value = best.value;
  result.argmax = std::move(best.y);
  return result;
}

}  // namespace

double s_transform_eval(const Penalty& f, Gamma gamma, const Vector& y) {
  require_finite(y, "S-transform input");
  const double g = gamma.value();
  const Vector p = f.prox(y, 1.0 / g);
  return -(f.eval(p) + 0.5 * g * (p - y).squaredNorm());
}

AscentResult q_transform_eval_engine(const Penalty& f, Gamma gamma, const Vector& x,
                                     const AscentOptions& opts) {
  require_finite(x, "envelope input");
  const double step = 1.0 / gamma.value();
  return maximize(Objective(f, step, step, x), opts);
}

AscentResult lasry_lions_eval(const Penalty& f, double s, double t, const Vector& x,
                              const AscentOptions& opts) {
  require_finite(x, "Lasry-Lions input");
  if (!(s > 0.0) || !(t > 0.0)) throw ParameterError("s and t must be positive");
  if (s > t) throw ParameterError("Lasry-Lions composition needs s <= t");
  return maximize(Objective(f, s, t, x), opts);
}

}  // namespace quadenv
