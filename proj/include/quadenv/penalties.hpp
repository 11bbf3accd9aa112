#pragma once

#include "quadenv/penalty.hpp"

namespace quadenv {

// Coordinatewise operators. All vectors are dense; K is clamped to the
// dimension where noted.

/// Hard threshold at sqrt(2 mu t). Ties (|v_i| == threshold) select 0.
Vector card_prox(const Vector& v, double t, double mu);

/// Q_gamma(mu ||.||_0)(x): sum over coordinates of
/// sqrt(2 gamma mu)|z| - gamma z^2 / 2 on |z| <= sqrt(2 mu / gamma), mu beyond.
double q_card_eval(const Vector& x, Gamma gamma, double mu);

/// Exact prox of t * Q_gamma(mu ||.||_0). Requires t * gamma < 1.
Vector q_card_prox(const Vector& v, double t, Gamma gamma, double mu);

/// Projection onto {x : ||x||_0 <= K}. Ties keep the lowest index.
Vector topk_prox(const Vector& v, double t, int k);

/// Q_gamma(iota_K)(x) via the threshold equation on sorted magnitudes.
/// Returns +inf when K == 0 and x != 0.
double q_topk_eval(const Vector& x, Gamma gamma, int k);

/// Soft threshold at t * lambda.
Vector l1_prox(const Vector& v, double t, double lambda);

/// mu * #{i : x_i != 0}
class CardPenalty final : public Penalty {
 public:
  explicit CardPenalty(double mu);
  double mu() const { return mu_; }

  double eval(const Vector& x) const override;
  Vector prox(const Vector& v, double t) const override;
  nlohmann::json descriptor() const override;
  std::optional<double> envelope(const Vector& x, Gamma gamma) const override;
  /// Available for t * gamma < 1 only.
  std::optional<Vector> envelope_prox(const Vector& v, double t, Gamma gamma) const override;

 private:
  double mu_;
};

/// Indicator of the at-most-K-sparse vectors.
class TopKIndicator final : public Penalty {
 public:
  explicit TopKIndicator(int k);
  int k() const { return k_; }

  double eval(const Vector& x) const override;
  Vector prox(const Vector& v, double t) const override;
  nlohmann::json descriptor() const override;
  std::optional<double> envelope(const Vector& x, Gamma gamma) const override;

 private:
  int k_;
};

/// lambda * ||x||_1
class L1Penalty final : public Penalty {
 public:
  explicit L1Penalty(double lambda);
  double lambda() const { return lambda_; }

  double eval(const Vector& x) const override;
  Vector prox(const Vector& v, double t) const override;
  nlohmann::json descriptor() const override;
  bool is_convex() const override { return true; }

 private:
  double lambda_;
};

/// f == 0
class ZeroPenalty final : public Penalty {
 public:
  double eval(const Vector& x) const override;
  Vector prox(const Vector& v, double t) const override;
  nlohmann::json descriptor() const override;
  bool is_convex() const override { return true; }
};

/// (weight / 2) ||x||^2
class SquaredNormPenalty final : public Penalty {
 public:
  explicit SquaredNormPenalty(double weight);

  double eval(const Vector& x) const override;
  Vector prox(const Vector& v, double t) const override;
  nlohmann::json descriptor() const override;
  bool is_convex() const override { return true; }

 private:
  double weight_;
};

/// Builds a penalty from {"type":"card","mu":..}, {"type":"topk","k":..},
/// {"type":"l1","lambda":..}, {"type":"zero"} or {"type":"sqnorm","weight":..}.
PenaltyPtr make_penalty(const nlohmann::json& descriptor);

}  // namespace quadenv
