#include "quadenv/grid_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

#include "quadenv/penalties.hpp"

namespace quadenv {

GridFunction::GridFunction(double lo, double hi, std::vector<double> values)
    : lo_(lo), hi_(hi), values_(std::move(values)) {
  if (values_.size() < 2) throw ParameterError("a grid function needs at least 2 samples");
  if (!(hi_ > lo_) || !std::isfinite(lo_) || !std::isfinite(hi_)) {
    throw ParameterError("grid interval must satisfy lo < hi");
  }
  bool any_finite = false;
  for (double v : values_) {
    if (std::isnan(v) || v == -kInf) throw InputError("grid values must be real or +inf");
    any_finite = any_finite || std::isfinite(v);
  }
  if (!any_finite) throw InputError("grid function is +inf everywhere");
}

GridFunction GridFunction::sample(double lo, double hi, std::size_t n,
                                  const std::function<double(double)>& fn) {
  if (n < 2) throw ParameterError("a grid function needs at least 2 samples");
  std::vector<double> values(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) values[i] = fn(lo + static_cast<double>(i) * h);
  return GridFunction(lo, hi, std::move(values));
}

GridFunction sample_penalty(const Penalty& f, double lo, double hi, std::size_t n) {
  Vector x(1);
  return GridFunction::sample(lo, hi, n, [&](double t) {
    x[0] = t;
    return f.eval(x);
  });
}

GridFunction grid_legendre(const GridFunction& g) {
  double slope = 0.0;
  std::size_t prev = g.size();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) continue;
    if (prev < g.size()) {
      slope = std::max(slope, std::abs(g[i] - g[prev]) / (g.x(i) - g.x(prev)));
    }
    prev = i;
  }
  if (slope == 0.0) slope = 1.0;
  return grid_legendre(g, -slope, slope);
}

GridFunction grid_legendre(const GridFunction& g, double dual_lo, double dual_hi) {
  const std::size_t n = g.size();
  const double h = (dual_hi - dual_lo) / static_cast<double>(n - 1);
  std::vector<double> values(n, -kInf);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = dual_lo + static_cast<double>(j) * h;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isfinite(g[i])) values[j] = std::max(values[j], g.x(i) * y - g[i]);
    }
  }
  return GridFunction(dual_lo, dual_hi, std::move(values));
}

GridFunction grid_convex_envelope(const GridFunction& g, double floor) {
  struct Point {
    double x;
    double y;
  };
  std::vector<Point> hull;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) continue;
    if (g[i] < floor) throw InputError("grid function is unbounded below (sample under the floor)");
    const Point p{g.x(i), g[i]};
    while (hull.size() >= 2) {
      const Point& o = hull[hull.size() - 2];
      const Point& a = hull.back();
      const double cross = (a.x - o.x) * (p.y - o.y) - (a.y - o.y) * (p.x - o.x);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(p);
  }

  std::vector<double> values(g.size(), kInf);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    if (x < hull.front().x || x > hull.back().x) continue;
    if (hull.size() == 1) {
      values[i] = hull.front().y;
      continue;
    }
    while (seg + 2 < hull.size() && x > hull[seg + 1].x) ++seg;
    const Point& a = hull[seg];
    const Point& b = hull[seg + 1];
    if (x == a.x) {
      values[i] = a.y;
    } else if (x == b.x) {
      values[i] = b.y;
    } else {
      const double w = (x - a.x) / (b.x - a.x);
      values[i] = (1.0 - w) * a.y + w * b.y;
    }
  }
  return GridFunction(g.lo(), g.hi(), std::move(values));
}

GridFunction grid_quad_envelope(const GridFunction& f, Gamma gamma) {
  const std::size_t n = f.size();
  const double g = gamma.value();
  const double h = f.step();

  std::vector<std::size_t> finite;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(f[i])) finite.push_back(i);
  }

  // e at any real y, w restricted to the grid.
  auto inner = [&](double y) {
    double best = kInf;
    for (std::size_t i : finite) {
      const double dw = f.x(i) - y;
      best = std::min(best, f[i] + 0.5 * g * dw * dw);
    }
    return best;
  };

  std::vector<double> e(n);
  for (std::size_t j = 0; j < n; ++j) e[j] = inner(f.x(j));

  std::vector<double> values(n, kInf);
  const double domain_lo = f.x(finite.front());
  const double domain_hi = f.x(finite.back());
  for (std::size_t k = 0; k < n; ++k) {
    const double x = f.x(k);
    if (x < domain_lo || x > domain_hi) continue;
    auto objective = [&](double y) { return inner(y) - 0.5 * g * (x - y) * (x - y); };

    std::size_t jbest = 0;
    double vbest = -kInf;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = e[j] - 0.5 * g * (x - f.x(j)) * (x - f.x(j));
      if (v > vbest) {
        vbest = v;
        jbest = j;
      }
    }

    // Bracket the real maximizer. Interior grid maxima bracket it between
    // their neighbours; at the ends walk outwards while the objective rises.
    double a = f.x(jbest) - h;
    double b = f.x(jbest) + h;
    if (jbest == n - 1) {
      double w = h;
      for (int it = 0; it < 60 && objective(b + w) > objective(b); ++it, w *= 2.0) b += w;
      b += w;
    }
    if (jbest == 0) {
      double w = h;
      for (int it = 0; it < 60 && objective(a - w) > objective(a); ++it, w *= 2.0) a -= w;
      a -= w;
    }

    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    for (int it = 0; it < 80 && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = objective(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = objective(d);
      }
    }
    values[k] = std::max({vbest, fc, fd});
  }
  return GridFunction(f.lo(), f.hi(), std::move(values));
}

CurvatureReport curvature_check(const GridFunction& Q, const GridFunction& f, Gamma gamma, double contact_tol) {
  if (Q.size() != f.size() || Q.lo() != f.lo() || Q.hi() != f.hi()) {
    throw InputError("curvature check needs Q and f on the same grid");
  }
  if (Q.size() < 50) throw ParameterError("grid too coarse for a curvature check (n < 50)");

  const double h = Q.step();
  CurvatureReport report;
  report.tolerance = 10.0 * h;

  auto off_contact = [&](std::size_t i) { return std::isfinite(Q[i]) && Q[i] < f[i] - contact_tol; };

  for (std::size_t i = 1; i + 1 < Q.size(); ++i) {
    if (!off_contact(i)) continue;
    if (!std::isfinite(Q[i - 1]) || !std::isfinite(Q[i + 1])) continue;
    const double sd = (Q[i + 1] - 2.0 * Q[i] + Q[i - 1]) / (h * h);
    const bool interior = off_contact(i - 1) && off_contact(i + 1);
    report.points.push_back({Q.x(i), sd, interior});
    if (interior) {
      const double deviation = std::abs(sd + gamma.value());
      report.max_deviation = std::max(report.max_deviation, deviation);
      if (deviation > report.tolerance) report.passed = false;
    }
  }
  return report;
}

GlobalMin brute_force_global_min(const SupportEnumSpec& spec) {
  const auto n = spec.A.cols();
  if (n > kMaxEnumerationDim) throw ParameterError("support enumeration is limited to n <= 16");
  if (spec.A.rows() != spec.d.size()) throw InputError("A and d have incompatible shapes");
  if (!spec.penalty) throw ParameterError("support enumeration needs a penalty");

  int size_cap = static_cast<int>(n);
  if (auto* topk = dynamic_cast<const TopKIndicator*>(spec.penalty.get())) {
    size_cap = std::min(size_cap, topk->k());
  } else if (!dynamic_cast<const CardPenalty*>(spec.penalty.get())) {
    throw ParameterError("support enumeration supports card and topk penalties");
  }
  if (spec.max_support >= 0) size_cap = std::min(size_cap, spec.max_support);

  GlobalMin best;
  const std::uint32_t count = std::uint32_t{1} << n;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    if (std::popcount(mask) > size_cap) continue;
    std::vector<int> support;
    for (int i = 0; i < n; ++i) {
      if (mask & (std::uint32_t{1} << i)) support.push_back(i);
    }

    Vector x = Vector::Zero(n);
    if (!support.empty()) {
      Matrix sub(spec.A.rows(), static_cast<Eigen::Index>(support.size()));
      for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = spec.A.col(support[j]);
      const Vector z = sub.completeOrthogonalDecomposition().solve(spec.d);
      for (std::size_t j = 0; j < support.size(); ++j) x[support[j]] = z[static_cast<Eigen::Index>(j)];
    }
    const double value = spec.penalty->eval(x) + 0.5 * (spec.A * x - spec.d).squaredNorm();

    if (!std::isfinite(best.value)) {
      best = GlobalMin{std::move(x), value, std::move(support)};
      continue;
    }
    const double slack = 1e-12 * (1.0 + std::abs(best.value));
    const bool better = value < best.value - slack;
    const bool tie = !better && std::abs(value - best.value) <= slack && support < best.support;
    if (better || tie) {
      best.value = value;
      best.x = std::move(x);
      best.support = std::move(support);
    }
  }
  return best;
}

}  // namespace quadenv
