#pragma once

// Brute-force references used only by the tests. They share no code with the
// library transforms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double inf = std::numeric_limits<double>::infinity();

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

/// Minimizer and minimum of fn over a uniform scan.
struct Scan {
  double arg;
  double value;
};

inline Scan scan_min(const std::function<double(double)>& fn, double lo, double hi, double step) {
  Scan best{lo, inf};
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::min(hi, lo + static_cast<double>(i) * step);
    const double v = fn(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

/// Q(x) = max_y min_w [f(w) + g/2 (w-y)^2] - g/2 (x-y)^2 with w and y on the
/// same uniform grid, evaluated at the grid points.
inline std::vector<double> double_transform_1d(const std::vector<double>& xs, const std::vector<double>& f, double g) {
  const std::size_t n = xs.size();
  std::vector<double> e(n, inf), q(n, -inf);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isfinite(f[i])) e[j] = std::min(e[j], f[i] + 0.5 * g * (xs[i] - xs[j]) * (xs[i] - xs[j]));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q[i] = std::max(q[i], e[j] - 0.5 * g * (xs[i] - xs[j]) * (xs[i] - xs[j]));
  }
  return q;
}

/// The same double transform in two dimensions at a single point x. The
/// inner min runs over the finite points of f (given as a list), the outer
/// sup over a square grid of y.
inline double double_transform_2d(const std::vector<Eigen::Vector2d>& domain, const std::vector<double>& fvals,
                                  double g, const Eigen::Vector2d& x, double lo, double hi, std::size_t n) {
  const auto ys = linspace(lo, hi, n);
  double best = -inf;
  for (double y0 : ys) {
    for (double y1 : ys) {
      const Eigen::Vector2d y(y0, y1);
      double e = inf;
      for (std::size_t k = 0; k < domain.size(); ++k) e = std::min(e, fvals[k] + 0.5 * g * (domain[k] - y).squaredNorm());
      best = std::max(best, e - 0.5 * g * (x - y).squaredNorm());
    }
  }
  return best;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index m, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd M(m, n);
  for (auto& x : M.reshaped()) x = normal(rng);
  return M;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n, n));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace oracle
