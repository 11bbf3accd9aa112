#pragma once

#include <functional>
#include <vector>

#include "quadenv/penalty.hpp"

namespace quadenv {

/// Uniform samples of a 1D extended-real function; +inf marks points outside
/// the domain and is skipped by every transform.
class GridFunction {
 public:
  GridFunction(double lo, double hi, std::vector<double> values);

  static GridFunction sample(double lo, double hi, std::size_t n, const std::function<double(double)>& fn);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return values_.size(); }
  double step() const { return (hi_ - lo_) / static_cast<double>(values_.size() - 1); }
  double x(std::size_t i) const { return lo_ + static_cast<double>(i) * step(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

 private:
  double lo_;
  double hi_;
  std::vector<double> values_;
};

/// f evaluated on 1-vectors.
GridFunction sample_penalty(const Penalty& f, double lo, double hi, std::size_t n);

/// g*(y) = max_i x_i y - g_i on a dual grid of the same size. The dual range
/// defaults to [-S, S], S the largest finite difference quotient of g
/// (S = 1 when g has a single finite sample).
GridFunction grid_legendre(const GridFunction& g);
GridFunction grid_legendre(const GridFunction& g, double dual_lo, double dual_hi);

/// Lower convex hull of the finite samples, evaluated back on the grid;
/// +inf outside the hull's x-range. Throws InputError if some sample lies
/// below `floor` (treated as unbounded below).
GridFunction grid_convex_envelope(const GridFunction& g, double floor = -1e12);

/**
 * Q_gamma of the sampled function by the double S-transform:
 *   e(y) = min_w f(w) + gamma/2 (w - y)^2  (w over the grid)
 *   Q(x) = sup_y e(y) - gamma/2 (x - y)^2
 * The outer sup is located on the grid and then refined over real y by a
 * golden-section search on the concave objective, so Q is the envelope of the
 * grid-restricted f rather than a grid-y approximation of it.
 */
GridFunction grid_quad_envelope(const GridFunction& f, Gamma gamma);

struct CurvaturePoint {
  double x;
  double second_difference;
  /// x and both stencil neighbours lie off the contact set.
  bool interior;
};

struct CurvatureReport {
  bool passed = true;
  double tolerance = 0.0;
  double max_deviation = 0.0;
  std::vector<CurvaturePoint> points;
};

/// Off the contact set {Q = f} the envelope has curvature exactly -gamma. Every
/// grid point whose 3-point stencil is off contact (Q < f - contact_tol) must
/// have a centered second difference within 10 * step of -gamma.
CurvatureReport curvature_check(const GridFunction& Q, const GridFunction& f, Gamma gamma,
                                double contact_tol = 1e-9);

struct SupportEnumSpec {
  Matrix A;
  Vector d;
  PenaltyPtr penalty;  // CardPenalty or TopKIndicator
  int max_support = -1;  // -1: no extra bound
};

struct GlobalMin {
  Vector x;
  double value = kInf;
  std::vector<int> support;
};

inline constexpr int kMaxEnumerationDim = 16;

/// Exhaustive minimization of f(x) + 1/2 |Ax - d|^2 over all supports (size
/// <= K for topk), least-squares (least-norm) on each. Ties go to the
/// lexicographically smallest support.
GlobalMin brute_force_global_min(const SupportEnumSpec& spec);

}  // namespace quadenv
