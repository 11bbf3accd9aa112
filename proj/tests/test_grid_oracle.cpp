#include <doctest.h>

#include "oracles.hpp"
#include "quadenv/grid_oracle.hpp"
#include "quadenv/penalties.hpp"

using namespace quadenv;

namespace {

double sup_diff(const GridFunction& a, const std::function<double(double)>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isfinite(a[i])) worst = std::max(worst, std::abs(a[i] - b(a.x(i))));
  }
  return worst;
}

GridFunction card_grid(double lo, double hi, std::size_t n, double mu = 1.0) {
  return sample_penalty(CardPenalty(mu), lo, hi, n);
}

}  // namespace

TEST_CASE("GridFunction validation") {
  CHECK_THROWS_AS(GridFunction(0.0, 1.0, {1.0}), ParameterError);
  CHECK_THROWS_AS(GridFunction(1.0, 1.0, {1.0, 2.0}), ParameterError);
  CHECK_THROWS_AS(GridFunction(0.0, 1.0, {kInf, kInf}), InputError);
  const GridFunction g(0.0, 1.0, {1.0, kInf, 3.0});
  CHECK(g.step() == 0.5);
  CHECK(g.x(2) == 1.0);
}

TEST_CASE("Legendre transform of textbook pairs") {
  const auto half_sq = GridFunction::sample(-3.0, 3.0, 601, [](double x) { return 0.5 * x * x; });
  const auto conj = grid_legendre(half_sq);
  CHECK(sup_diff(conj, [](double y) { return 0.5 * y * y; }) <= 2.0 * half_sq.step());

  std::vector<double> point(201, kInf);
  point[100] = 0.0;
  const auto at_zero = grid_legendre(GridFunction(-1.0, 1.0, point));
  CHECK(sup_diff(at_zero, [](double) { return 0.0; }) <= 1e-15);

  const auto abs_fn = GridFunction::sample(-3.0, 3.0, 601, [](double x) { return std::abs(x); });
  const auto box = grid_legendre(abs_fn, -2.0, 2.0);
  for (std::size_t i = 0; i < box.size(); ++i) {
    const double y = box.x(i);
    if (std::abs(y) <= 1.0) CHECK(box[i] == doctest::Approx(0.0));
    if (std::abs(y) > 1.1) CHECK(box[i] > 0.25);
  }
  CHECK_THROWS_AS(grid_legendre(abs_fn, 1.0, -1.0), ParameterError);
}

TEST_CASE("convex envelope of textbook shapes") {
  const auto bowl = GridFunction::sample(-2.0, 2.0, 401, [](double x) { return x * x + std::exp(x); });
  const auto bowl_hull = grid_convex_envelope(bowl);
  for (std::size_t i = 0; i < bowl.size(); ++i) CHECK(std::abs(bowl_hull[i] - bowl[i]) <= 1e-12);

  const auto wells = GridFunction::sample(-2.0, 2.0, 401, [](double x) { return std::min((x - 1) * (x - 1), (x + 1) * (x + 1)); });
  const auto wells_hull = grid_convex_envelope(wells);
  CHECK(sup_diff(wells_hull, [](double x) { return std::abs(x) <= 1.0 ? 0.0 : (std::abs(x) - 1) * (std::abs(x) - 1); }) <= 1e-12);

  // |x|_0 + (x-1)^2/2: the hull keeps the global minimizer x = 0, value 1/2.
  const auto fig = GridFunction::sample(-1.0, 3.0, 4001, [](double x) { return (std::abs(x) < 1e-12 ? 0.0 : 1.0) + 0.5 * (x - 1) * (x - 1); });
  const auto fig_hull = grid_convex_envelope(fig);
  std::size_t argmin_f = 0, argmin_h = 0;
  for (std::size_t i = 0; i < fig.size(); ++i) {
    if (fig[i] < fig[argmin_f]) argmin_f = i;
    if (fig_hull[i] < fig_hull[argmin_h]) argmin_h = i;
  }
  CHECK(fig.x(argmin_f) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fig.x(argmin_h) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fig_hull[argmin_h] == doctest::Approx(0.5));

  CHECK_THROWS_AS(grid_convex_envelope(GridFunction::sample(0.0, 1.0, 11, [](double) { return -1e13; })), InputError);
}

TEST_CASE("convex envelope is below, idempotent and convex") {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> uni(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> values(301);
    for (auto& v : values) v = (rng() % 7 == 0) ? kInf : uni(rng);
    values[150] = 1.0;
    const GridFunction g(-1.0, 1.0, values);
    const auto hull = grid_convex_envelope(g);
    const auto twice = grid_convex_envelope(hull);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (std::isfinite(g[i])) CHECK(hull[i] <= g[i] + 1e-12);
      if (std::isfinite(hull[i])) CHECK(twice[i] == doctest::Approx(hull[i]).epsilon(1e-12));
    }
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
      if (std::isfinite(hull[i - 1]) && std::isfinite(hull[i + 1])) CHECK(hull[i - 1] - 2 * hull[i] + hull[i + 1] >= -1e-12);
    }
  }
}

TEST_CASE("grid quadratic envelope") {
  SUBCASE("fixes convex functions") {
    const auto abs_fn = GridFunction::sample(-3.0, 3.0, 601, [](double x) { return std::abs(x); });
    const auto q = grid_quad_envelope(abs_fn, Gamma(1.0));
    CHECK(sup_diff(q, [](double x) { return std::abs(x); }) <= 2.0 * abs_fn.step());
  }
  SUBCASE("card at step 1e-3") {
    const auto f = card_grid(-3.0, 3.0, 6001);
    const auto q = grid_quad_envelope(f, Gamma(2.0));
    CHECK(sup_diff(q, [](double x) { return q_card_eval(Vector::Constant(1, x), Gamma(2.0), 1.0); }) <= 1e-2);
  }
  SUBCASE("two-point indicator") {
    // f = 0 on {-1, 1}: e(y) = (|y| - 1)^2 / 2, so Q(0) = max_y (1 - 2|y|) / 2 = 1/2.
    // Equivalently the hull of f + x^2/2 is 1/2 on [-1, 1].
    std::vector<double> values(401, kInf);
    values[100] = 0.0;
    values[300] = 0.0;
    const GridFunction f(-2.0, 2.0, values);
    const auto q = grid_quad_envelope(f, Gamma(1.0));
    CHECK(q[200] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(q[100] == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("between zero and f, nondecreasing in gamma") {
    const auto f = card_grid(-3.0, 3.0, 601, 0.5);
    auto previous = grid_quad_envelope(f, Gamma(0.25));
    for (double g : {0.5, 1.0, 2.0, 4.0}) {
      const auto q = grid_quad_envelope(f, Gamma(g));
      for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(q[i] <= f[i] + 1e-12);
        CHECK(q[i] >= -1e-12);
        CHECK(q[i] >= previous[i] - 1e-12);
      }
      previous = q;
    }
  }
  SUBCASE("hull of f plus a quadratic") {
    const auto f = card_grid(-3.0, 3.0, 601);
    for (double d : {0.0, 0.7, -0.7}) {
      const double g = 1.5;
      const auto q = grid_quad_envelope(f, Gamma(g));
      const auto shifted = GridFunction::sample(-3.0, 3.0, 601, [&](double x) {
        return (std::abs(x) < 1e-12 ? 0.0 : 1.0) + 0.5 * g * (x - d) * (x - d);
      });
      const auto hull = grid_convex_envelope(shifted);
      double worst = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(hull[i] - q[i] - 0.5 * g * (f.x(i) - d) * (f.x(i) - d)));
      CHECK(worst <= 5.0 * f.step());
    }
  }
}

TEST_CASE("curvature off the contact set") {
  SUBCASE("card") {
    const auto f = card_grid(-3.0, 3.0, 601);
    const auto report = curvature_check(grid_quad_envelope(f, Gamma(2.0)), f, Gamma(2.0));
    CHECK(report.passed);
    int inside = 0;
    for (const auto& p : report.points) {
      if (p.interior && std::abs(p.x) > 0.05 && std::abs(p.x) < 0.95) {
        CHECK(p.second_difference == doctest::Approx(-2.0).epsilon(1e-6));
        ++inside;
      }
    }
    CHECK(inside > 100);
  }
  SUBCASE("convex f is in contact everywhere") {
    const auto f = GridFunction::sample(-3.0, 3.0, 601, [](double x) { return x * x; });
    const auto report = curvature_check(grid_quad_envelope(f, Gamma(1.0)), f, Gamma(1.0));
    CHECK(report.passed);
    for (const auto& p : report.points) CHECK_FALSE(p.interior);
  }
  SUBCASE("two plateaus") {
    const auto f = GridFunction::sample(-3.0, 3.0, 601, [](double x) {
      return std::abs(x - 1.0) < 1e-9 || std::abs(x + 1.0) < 1e-9 ? 0.0 : 1.0;
    });
    const auto report = curvature_check(grid_quad_envelope(f, Gamma(3.0)), f, Gamma(3.0));
    CHECK(report.passed);
    bool between = false;
    for (const auto& p : report.points) {
      if (p.interior && std::abs(p.x) < 0.2) {
        between = true;
        CHECK(p.second_difference == doctest::Approx(-3.0).epsilon(1e-6));
      }
    }
    CHECK(between);
  }
  SUBCASE("coarse grids are rejected") {
    const auto f = card_grid(-3.0, 3.0, 41);
    CHECK_THROWS_AS(curvature_check(grid_quad_envelope(f, Gamma(1.0)), f, Gamma(1.0)), ParameterError);
  }
}

TEST_CASE("brute-force global minimum") {
  auto card = std::make_shared<CardPenalty>(1.0);
  SUBCASE("one coordinate") {
    const auto r = brute_force_global_min({Matrix::Identity(1, 1), Vector::Ones(1), card});
    CHECK(r.x[0] == 0.0);
    CHECK(r.value == doctest::Approx(0.5));
    CHECK(r.support.empty());
  }
  SUBCASE("zero data") {
    const auto r = brute_force_global_min({Matrix::Ones(2, 3), Vector::Zero(2), card});
    CHECK(r.x.isZero());
    CHECK(r.value == 0.0);
  }
  SUBCASE("identity operator is separable") {
    Vector d(3);
    d << 2.0, 0.5, 0.0;
    const auto r = brute_force_global_min({Matrix::Identity(3, 3), d, card});
    CHECK(r.x[0] == doctest::Approx(2.0));
    CHECK(r.x[1] == 0.0);
    CHECK(r.x[2] == 0.0);
    CHECK(r.value == doctest::Approx(1.125));
  }
  SUBCASE("topk limits the support size") {
    Vector d(3);
    d << 2.0, -1.0, 0.5;
    const auto r = brute_force_global_min({Matrix::Identity(3, 3), d, std::make_shared<TopKIndicator>(2)});
    CHECK(r.support == std::vector<int>{0, 1});
    CHECK(r.value == doctest::Approx(0.125));
  }
  SUBCASE("dimension bound") {
    CHECK_THROWS_AS(brute_force_global_min({Matrix::Ones(2, 17), Vector::Ones(2), card}), ParameterError);
    CHECK_THROWS_AS(brute_force_global_min({Matrix::Ones(2, 2), Vector::Ones(2), std::make_shared<L1Penalty>(1.0)}), ParameterError);
  }
}

TEST_CASE("brute force matches a dense grid search in two dimensions") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 4; ++trial) {
    const Matrix A = oracle::random_matrix(rng, 3, 2, 1.0 / std::sqrt(3.0));
    const Vector d = oracle::random_vector(rng, 3);
    const double mu = 0.05 + 0.1 * trial;
    const auto brute = brute_force_global_min({A, d, std::make_shared<CardPenalty>(mu)});
    // Every minimizer is a least-squares fit on its support; the box covers all of them.
    const Vector full = A.colPivHouseholderQr().solve(d);
    double radius = full.cwiseAbs().maxCoeff();
    for (int axis = 0; axis < 2; ++axis) radius = std::max(radius, std::abs(A.col(axis).dot(d) / A.col(axis).squaredNorm()));
    const int half = static_cast<int>(std::ceil((radius + 0.5) / 1e-3));
    double best = oracle::inf;
    for (int i = -half; i <= half; ++i) {
      const double t0 = 1e-3 * i;
      for (int j = -half; j <= half; ++j) {
        const double t1 = 1e-3 * j;
        double r2 = 0.0;
        for (int row = 0; row < 3; ++row) {
          const double r = A(row, 0) * t0 + A(row, 1) * t1 - d[row];
          r2 += r * r;
        }
        best = std::min(best, mu * ((i != 0) + (j != 0)) + 0.5 * r2);
      }
    }
    CHECK(brute.value <= best + 1e-12);
    CHECK(best - brute.value <= 1e-6);
  }
}
