#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace quadenv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised for malformed inputs (non-finite coordinates, shape mismatch, bad files).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a parameter is outside the range an operation supports.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Curvature parameter of the quadratic envelope. Always strictly positive.
class Gamma {
 public:
  explicit Gamma(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ParameterError("gamma must be a finite positive number");
    }
  }
  double value() const { return value_; }

 private:
  double value_;
};

void require_finite(const Vector& v, const char* what);

/**
 * A [0, +inf]-valued penalty with an exact global proximal map.
 *
 * prox(v, t) returns one global minimizer of f(z) + |z - v|^2 / (2t). Where
 * the minimizer is not unique every implementation documents its selection,
 * and the selection is a deterministic function of (v, t).
 *
 * Penalties that know their quadratic envelope in closed form override
 * envelope(); penalties that can evaluate the prox of their envelope for some
 * step sizes override envelope_prox().
 */
class Penalty {
 public:
  virtual ~Penalty() = default;

  virtual double eval(const Vector& x) const = 0;
  virtual Vector prox(const Vector& v, double t) const = 0;

  /// {"type": ..., <parameters>}
  virtual nlohmann::json descriptor() const = 0;
  std::string name() const { return descriptor().at("type").get<std::string>(); }

  /// Q_gamma(f)(x) when a closed form exists.
  virtual std::optional<double> envelope(const Vector& x, Gamma gamma) const;

  /// prox_{t Q_gamma(f)}(v) when it can be computed exactly for this t.
  virtual std::optional<Vector> envelope_prox(const Vector& v, double t, Gamma gamma) const;

  /// Convex l.s.c. penalties are their own quadratic envelope.
  virtual bool is_convex() const { return false; }
};

using PenaltyPtr = std::shared_ptr<const Penalty>;

enum class EnvelopeMode { ClosedForm, Engine };

/// Q_gamma(f) as an evaluable object.
struct QuadEnvelope {
  PenaltyPtr penalty;
  Gamma gamma;
  EnvelopeMode mode = EnvelopeMode::ClosedForm;

  /// Falls back to the ascent engine when no closed form is available.
  double operator()(const Vector& x) const;
};

}  // namespace quadenv
