#pragma once

#include "quadenv/penalty.hpp"

namespace quadenv {

/// Singular values of X in descending order.
Vector singular_values(const Matrix& X);

/**
 * Lift of a sign- and permutation-invariant vector penalty to m x n matrices
 * through their singular values: rank(X) for base card, the rank-K indicator
 * for base topk.
 *
 * As a Penalty it acts on column-major vec(X), so the generic envelope engine
 * can treat the matrix space as a Euclidean space with the Frobenius product.
 */
class SpectralPenalty final : public Penalty {
 public:
  SpectralPenalty(PenaltyPtr base, Eigen::Index rows, Eigen::Index cols);

  const Penalty& base() const { return *base_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  Matrix reshape(const Vector& vec) const;
  static Vector flatten(const Matrix& X);

  double eval(const Vector& x) const override;
  Vector prox(const Vector& v, double t) const override;
  nlohmann::json descriptor() const override;
  std::optional<double> envelope(const Vector& x, Gamma gamma) const override;
  bool is_convex() const override { return base_->is_convex(); }

 private:
  PenaltyPtr base_;
  Eigen::Index rows_;
  Eigen::Index cols_;
};

double spectral_eval(const Matrix& X, const SpectralPenalty& p);

/// U diag(base.prox(sigma, t)) W^T from a full SVD of V.
Matrix spectral_prox(const Matrix& V, double t, const SpectralPenalty& p);

/// Vector envelope of the base applied to sigma(X). Supported bases: card,
/// topk and convex bases (which are their own envelope).
double q_spectral_eval(const Matrix& X, Gamma gamma, const SpectralPenalty& p);

}  // namespace quadenv
