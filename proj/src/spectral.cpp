#include "quadenv/spectral.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "quadenv/penalties.hpp"

namespace quadenv {

namespace {

void require_shape(const Matrix& X, const SpectralPenalty& p) {
  if (X.rows() != p.rows() || X.cols() != p.cols()) {
    throw InputError("matrix shape " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                     " does not match penalty shape " + std::to_string(p.rows()) + "x" +
                     std::to_string(p.cols()));
  }
}

void require_finite_matrix(const Matrix& X) {
  if (!X.allFinite()) throw InputError("matrix has non-finite entries");
}

}  // namespace

Vector singular_values(const Matrix& X) {
  require_finite_matrix(X);
  Eigen::JacobiSVD<Matrix> svd(X);
  return svd.singularValues();
}

SpectralPenalty::SpectralPenalty(PenaltyPtr base, Eigen::Index rows, Eigen::Index cols)
    : base_(std::move(base)), rows_(rows), cols_(cols) {
  if (!base_) throw ParameterError("spectral penalty needs a base penalty");
  if (rows_ < 1 || cols_ < 1) throw ParameterError("matrix shape must be positive");
  static const std::set<std::string> invariant = {"card", "topk", "l1", "zero", "sqnorm"};
  if (!invariant.count(base_->name())) {
    throw ParameterError("base penalty '" + base_->name() + "' is not known to be sign/permutation invariant");
  }
}

Matrix SpectralPenalty::reshape(const Vector& vec) const {
  if (vec.size() != rows_ * cols_) throw InputError("vectorized matrix has the wrong length");
  return Eigen::Map<const Matrix>(vec.data(), rows_, cols_);
}

Vector SpectralPenalty::flatten(const Matrix& X) {
  return Eigen::Map<const Vector>(X.data(), X.size());
}

double SpectralPenalty::eval(const Vector& x) const { return spectral_eval(reshape(x), *this); }

Vector SpectralPenalty::prox(const Vector& v, double t) const {
  return flatten(spectral_prox(reshape(v), t, *this));
}

nlohmann::json SpectralPenalty::descriptor() const {
  return {{"type", "spectral"}, {"base", base_->descriptor()}, {"rows", rows_}, {"cols", cols_}};
}

std::optional<double> SpectralPenalty::envelope(const Vector& x, Gamma gamma) const {
  return q_spectral_eval(reshape(x), gamma, *this);
}

double spectral_eval(const Matrix& X, const SpectralPenalty& p) {
  require_shape(X, p);
  // Numerical rank: singular values at roundoff level of the largest one count
  // as zero, otherwise rank(U diag(s) V^T) would never drop after a prox.
  Vector sigma = singular_values(X);
  const double cutoff = static_cast<double>(std::max(X.rows(), X.cols())) * std::numeric_limits<double>::epsilon() *
                        (sigma.size() > 0 ? sigma[0] : 0.0);
  for (auto& s : sigma) {
    if (s <= cutoff) s = 0.0;
  }
  return p.base().eval(sigma);
}

Matrix spectral_prox(const Matrix& V, double t, const SpectralPenalty& p) {
  require_shape(V, p);
  require_finite_matrix(V);
  Eigen::JacobiSVD<Matrix> svd(V, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector shrunk = p.base().prox(svd.singularValues(), t);
  const Eigen::Index r = shrunk.size();
  return svd.matrixU().leftCols(r) * shrunk.asDiagonal() * svd.matrixV().leftCols(r).transpose();
}

double q_spectral_eval(const Matrix& X, Gamma gamma, const SpectralPenalty& p) {
  require_shape(X, p);
  const Vector sigma = singular_values(X);
  if (auto* card = dynamic_cast<const CardPenalty*>(&p.base())) return q_card_eval(sigma, gamma, card->mu());
  if (auto* topk = dynamic_cast<const TopKIndicator*>(&p.base())) return q_topk_eval(sigma, gamma, topk->k());
  if (p.base().is_convex()) return p.base().eval(sigma);
  throw ParameterError("no closed-form spectral envelope for base '" + p.base().name() + "'");
}

}  // namespace quadenv
