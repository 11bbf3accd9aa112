#include "quadenv/penalties.hpp"
#include "quadenv/spectral.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace quadenv {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError(std::string(what) + " must be a finite positive number");
  }
}

double sign(double v) { return v < 0.0 ? -1.0 : 1.0; }

// Scalar Q_gamma(mu |.|_0).
double q_card_scalar(double z, double gamma, double mu) {
  const double a = std::abs(z);
  const double knee = std::sqrt(2.0 * mu / gamma);
  if (a >= knee) return mu;
  return std::sqrt(2.0 * gamma * mu) * a - 0.5 * gamma * a * a;
}

// Indices ordered by decreasing magnitude, lowest index first among equals.
std::vector<Eigen::Index> magnitude_order(const Vector& v) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(v[a]) > std::abs(v[b]);
  });
  return order;
}

}  // namespace

Vector card_prox(const Vector& v, double t, double mu) {
  require_finite(v, "card_prox input");
  require_positive(t, "step t");
  require_positive(mu, "mu");
  const double threshold = std::sqrt(2.0 * mu * t);
  Vector out = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(std::abs(v[i]) > threshold)) out[i] = 0.0;
  }
  return out;
}

double q_card_eval(const Vector& x, Gamma gamma, double mu) {
  require_finite(x, "q_card_eval input");
  require_positive(mu, "mu");
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) total += q_card_scalar(x[i], gamma.value(), mu);
  return total;
}

Vector q_card_prox(const Vector& v, double t, Gamma gamma, double mu) {
  require_finite(v, "q_card_prox input");
  require_positive(t, "step t");
  require_positive(mu, "mu");
  const double g = gamma.value();
  if (t * g >= 1.0) {
    throw ParameterError(
        "q_card_prox needs t * gamma < 1; use the hull-prox solver mode for t = 1/gamma");
  }
  const double knee = std::sqrt(2.0 * mu / g);
  const double slope = std::sqrt(2.0 * g * mu);

  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double vi = v[i];
    auto objective = [&](double z) { return q_card_scalar(z, g, mu) + (z - vi) * (z - vi) / (2.0 * t); };

    double best = 0.0;
    double best_value = objective(0.0);
    auto consider = [&](double z) {
      const double value = objective(z);
      if (value < best_value || (value == best_value && std::abs(z) < std::abs(best))) {
        best = z;
        best_value = value;
      }
    };
    if (std::abs(vi) >= knee) consider(vi);
    const double interior = (vi - t * sign(vi) * slope) / (1.0 - t * g);
    if (interior != 0.0 && sign(interior) == sign(vi) && std::abs(interior) <= knee) consider(interior);
    out[i] = best;
  }
  return out;
}

Vector topk_prox(const Vector& v, double /*t*/, int k) {
  require_finite(v, "topk_prox input");
  if (k < 0) throw ParameterError("K must be non-negative");
  Vector out = Vector::Zero(v.size());
  const auto order = magnitude_order(v);
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  for (std::size_t j = 0; j < keep; ++j) out[order[j]] = v[order[j]];
  return out;
}

double q_topk_eval(const Vector& x, Gamma gamma, int k) {
  require_finite(x, "q_topk_eval input");
  if (k < 0) throw ParameterError("K must be non-negative");
  const auto n = static_cast<std::size_t>(x.size());
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);

  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(x[static_cast<Eigen::Index>(i)]);
  std::sort(a.begin(), a.end(), std::greater<>());

  double tail = 0.0;
  for (std::size_t i = kk; i < n; ++i) tail += a[i];
  if (tail == 0.0) return 0.0;
  if (kk == 0) return kInf;

  // Solve sum_{i<K} max(s - a_i, 0) = tail. The left side is piecewise linear
  // and increasing past a_{K-1}; walk the active set from the smallest head
  // magnitude upwards.
  double s = 0.0;
  double active_sum = 0.0;
  for (std::size_t c = 1; c <= kk; ++c) {
    active_sum += a[kk - c];
    s = (tail + active_sum) / static_cast<double>(c);
    const bool next_inactive = (c == kk) || s <= a[kk - c - 1];
    if (next_inactive) break;
  }

  double h = 0.0;
  for (std::size_t i = kk; i < n; ++i) h += 2.0 * a[i] * s - a[i] * a[i];
  for (std::size_t i = 0; i < kk; ++i) {
    const double gap = std::max(s - a[i], 0.0);
    h -= gap * gap;
  }
  return 0.5 * gamma.value() * h;
}

Vector l1_prox(const Vector& v, double t, double lambda) {
  require_finite(v, "l1_prox input");
  require_positive(t, "step t");
  require_positive(lambda, "lambda");
  const double shrink = t * lambda;
  return v.unaryExpr([shrink](double vi) { return sign(vi) * std::max(std::abs(vi) - shrink, 0.0); });
}

// --- CardPenalty

CardPenalty::CardPenalty(double mu) : mu_(mu) { require_positive(mu, "mu"); }

double CardPenalty::eval(const Vector& x) const {
  return mu_ * static_cast<double>((x.array() != 0.0).count());
}

Vector CardPenalty::prox(const Vector& v, double t) const { return card_prox(v, t, mu_); }

nlohmann::json CardPenalty::descriptor() const { return {{"type", "card"}, {"mu", mu_}}; }

std::optional<double> CardPenalty::envelope(const Vector& x, Gamma gamma) const {
  return q_card_eval(x, gamma, mu_);
}

std::optional<Vector> CardPenalty::envelope_prox(const Vector& v, double t, Gamma gamma) const {
  if (t * gamma.value() >= 1.0) return std::nullopt;
  return q_card_prox(v, t, gamma, mu_);
}

// --- TopKIndicator

TopKIndicator::TopKIndicator(int k) : k_(k) {
  if (k < 0) throw ParameterError("K must be non-negative");
}

double TopKIndicator::eval(const Vector& x) const {
  return (x.array() != 0.0).count() <= k_ ? 0.0 : kInf;
}

Vector TopKIndicator::prox(const Vector& v, double t) const { return topk_prox(v, t, k_); }

nlohmann::json TopKIndicator::descriptor() const { return {{"type", "topk"}, {"k", k_}}; }

std::optional<double> TopKIndicator::envelope(const Vector& x, Gamma gamma) const {
  return q_topk_eval(x, gamma, k_);
}

// --- L1Penalty

L1Penalty::L1Penalty(double lambda) : lambda_(lambda) { require_positive(lambda, "lambda"); }

double L1Penalty::eval(const Vector& x) const { return lambda_ * x.lpNorm<1>(); }

Vector L1Penalty::prox(const Vector& v, double t) const { return l1_prox(v, t, lambda_); }

nlohmann::json L1Penalty::descriptor() const { return {{"type", "l1"}, {"lambda", lambda_}}; }

// --- ZeroPenalty

double ZeroPenalty::eval(const Vector& /*x*/) const { return 0.0; }

Vector ZeroPenalty::prox(const Vector& v, double /*t*/) const {
  require_finite(v, "prox input");
  return v;
}

nlohmann::json ZeroPenalty::descriptor() const { return {{"type", "zero"}}; }

// --- SquaredNormPenalty

SquaredNormPenalty::SquaredNormPenalty(double weight) : weight_(weight) {
  require_positive(weight, "weight");
}

double SquaredNormPenalty::eval(const Vector& x) const { return 0.5 * weight_ * x.squaredNorm(); }

Vector SquaredNormPenalty::prox(const Vector& v, double t) const {
  require_finite(v, "prox input");
  return v / (1.0 + t * weight_);
}

nlohmann::json SquaredNormPenalty::descriptor() const {
  return {{"type", "sqnorm"}, {"weight", weight_}};
}

PenaltyPtr make_penalty(const nlohmann::json& descriptor) {
  if (!descriptor.is_object() || !descriptor.contains("type")) {
    throw InputError("penalty descriptor must be an object with a \"type\" field");
  }
  const auto type = descriptor.at("type").get<std::string>();
  try {
    if (type == "card") return std::make_shared<CardPenalty>(descriptor.value("mu", 1.0));
    if (type == "topk") return std::make_shared<TopKIndicator>(descriptor.at("k").get<int>());
    if (type == "l1") return std::make_shared<L1Penalty>(descriptor.at("lambda").get<double>());
    if (type == "zero") return std::make_shared<ZeroPenalty>();
    if (type == "sqnorm") return std::make_shared<SquaredNormPenalty>(descriptor.value("weight", 1.0));
    if (type == "spectral") {
      return std::make_shared<SpectralPenalty>(make_penalty(descriptor.at("base")), descriptor.at("rows").get<Eigen::Index>(),
                                               descriptor.at("cols").get<Eigen::Index>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad penalty descriptor: ") + e.what());
  }
  throw InputError("unknown penalty type: " + type);
}

}  // namespace quadenv
