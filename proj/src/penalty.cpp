#include "quadenv/penalty.hpp"

#include "quadenv/envelope.hpp"

namespace quadenv {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw InputError(std::string(what) + " has non-finite entries");
  }
}

std::optional<double> Penalty::envelope(const Vector& x, Gamma /*gamma*/) const {
  if (is_convex()) return eval(x);
  return std::nullopt;
}

std::optional<Vector> Penalty::envelope_prox(const Vector& v, double t, Gamma /*gamma*/) const {
  if (is_convex()) return prox(v, t);
  return std::nullopt;
}

double QuadEnvelope::operator()(const Vector& x) const {
  if (mode == EnvelopeMode::ClosedForm) {
    if (auto value = penalty->envelope(x, gamma)) return *value;
  }
  return q_transform_eval_engine(*penalty, gamma, x).value;
}

}  // namespace quadenv
