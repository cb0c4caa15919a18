#pragma once

// Performance functions beta(t), normalized functions psi(x) and the funnel
// coordinate transform z(x, t) with the factors the controllers consume:
//
//   z   = beta psi / (beta^2 - psi^2)
//   Pi  = dz/dx = beta psi' (beta^2 + psi^2) / (beta^2 - psi^2)^2
//   Psi = dz/dt = -beta_dot psi (beta^2 + psi^2) / (beta^2 - psi^2)^2
//   Psi_x = Psi / x,   W = x / z = (beta^2 - psi^2) / (beta psi_x)
//
// All quotients by x are formed through psi_x = psi(x)/x, which is analytic at
// the origin, so no special-casing is needed near x = 0.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ppac/errors.hpp"
#include "ppac/jet.hpp"

namespace ppac {

class PerformanceFunction {
 public:
  enum class Variant { Exponential, PrescribedTime };

  /// beta(t) = scale * exp(-rate t) + beta_inf, differentiable up to `order`.
  static PerformanceFunction exponential(double scale, double rate, double beta_inf, int order);
  /// beta(t) = (1 - beta_inf) ((T - t)/T)^order + beta_inf for t < T, beta_inf afterwards.
  static PerformanceFunction prescribed_time(double horizon, double beta_inf, int order);

  Variant variant() const { return variant_; }
  int order() const { return order_; }
  double beta_inf() const { return beta_inf_; }
  double scale() const { return scale_; }
  double rate() const { return rate_; }
  double horizon() const { return horizon_; }

  double operator()(double t) const;
  /// beta(t), beta'(t), ..., beta^(k)(t). Throws UnsupportedDerivativeOrder for k > order.
  std::vector<double> derivatives(double t, int k) const;

 private:
  PerformanceFunction() = default;

  Variant variant_ = Variant::Exponential;
  double scale_ = 0.0;
  double rate_ = 0.0;
  double horizon_ = 0.0;
  double beta_inf_ = 0.0;
  int order_ = 0;
};

std::vector<double> beta_derivatives(const PerformanceFunction& pf, double t, int k);

enum class NormalizedFunction { Algebraic, Tanh };

std::string to_string(NormalizedFunction nf);

template <class T>
struct PsiValues {
  T psi;
  T derivative;  // psi'(x)
  T ratio;       // psi(x)/x, equal to psi'(0) at the origin
};

template <class T>
PsiValues<T> psi_values(NormalizedFunction nf, const T& x) {
  using std::pow;
  using std::tanh;
  if (nf == NormalizedFunction::Algebraic) {
    T r = pow(x * x + 1.0, -0.5);
    return {x * r, r * r * r, r};
  }
  T t = tanh(x);
  return {t, 1.0 - t * t, tanhc(x)};
}

struct PsiEval {
  double psi = 0.0;
  double derivative = 0.0;
  double ratio = 0.0;
};

PsiEval psi_eval(NormalizedFunction nf, double x);
/// psi^{-1}(y); returns +/-infinity at |y| = 1, DomainError for |y| > 1.
double psi_inverse(NormalizedFunction nf, double y);

template <class T>
T psi_inverse_at(NormalizedFunction nf, const T& y) {
  using std::atanh;
  using std::sqrt;
  if (nf == NormalizedFunction::Algebraic) return y / sqrt(1.0 - y * y);
  return atanh(y);
}

enum class TransformStrategy { Rational, Tangent, Identity };

std::string to_string(TransformStrategy s);

/// Which closed form to use for Pi. `Printed` reproduces the numerator with a
/// squared (beta^2 - psi^2) on its first term; it exists only so the Jacobian
/// consistency check can be shown to reject it.
enum class PiFormula { Exact, Printed };

template <class T>
struct TransformFactors {
  T z;
  T pi;         // dz/dx
  T psi;        // dz/dt
  T psi_over_x; // Psi / x
  T w;          // x / z
};

class FunnelTransform {
 public:
  FunnelTransform(TransformStrategy strategy, PerformanceFunction beta, NormalizedFunction psi,
                  PiFormula pi_formula = PiFormula::Exact);

  TransformStrategy strategy() const { return strategy_; }
  const PerformanceFunction& beta() const { return beta_; }
  NormalizedFunction psi() const { return psi_; }
  PiFormula pi_formula() const { return pi_formula_; }

  /// Half-width of the funnel on x at time t: psi^{-1}(beta) for the rational
  /// and identity strategies (the latter only as a reference), beta for the
  /// tangent strategy.
  double bound(double t) const;
  /// Whether the strategy keeps x inside bound(t) (false for identity).
  bool enforces_funnel() const { return strategy_ != TransformStrategy::Identity; }
  /// Strict interior test on values; no tolerance.
  bool inside(double x, double beta) const;

  /// Factors at state x given beta and beta_dot as (possibly jet) values.
  /// Throws FunnelViolation (stamped with `time`) outside the funnel.
  template <class T>
  TransformFactors<T> factors(const T& x, const T& beta, const T& beta_dot, double time) const;

  /// x from z given beta (jet-capable); finite for every finite z.
  template <class T>
  T inverse(const T& z, const T& beta) const;

 private:
  TransformStrategy strategy_;
  PerformanceFunction beta_;
  NormalizedFunction psi_;
  PiFormula pi_formula_;
};

/// (z, Pi, Psi, Psi_x, W) at (x, t).
TransformFactors<double> transform(const FunnelTransform& ft, double x, double t);
double inverse_transform(const FunnelTransform& ft, double z, double t);

[[noreturn]] void throw_funnel_violation(double x, double beta, double time);

template <class T>
TransformFactors<T> FunnelTransform::factors(const T& x, const T& beta, const T& beta_dot, double time) const {
  using std::cos;
  using std::tan;
  switch (strategy_) {
    case TransformStrategy::Identity:
      return {x, T(1.0), T(0.0), T(0.0), T(1.0)};
    case TransformStrategy::Tangent: {
      if (!inside(value_of(x), value_of(beta))) throw_funnel_violation(value_of(x), value_of(beta), time);
      constexpr double half_pi = std::numbers::pi / 2.0;
      T a = half_pi * x / beta;
      T c = cos(a);
      T sec2 = 1.0 / (c * c);
      T scale = half_pi / beta;
      T psi_over_x = -(scale / beta) * beta_dot * sec2;
      return {tan(a), scale * sec2, psi_over_x * x, psi_over_x, c / (scale * sinc(a))};
    }
    case TransformStrategy::Rational:
      break;
  }
  PsiValues<T> pv = psi_values(psi_, x);
  if (!(std::abs(value_of(pv.psi)) < value_of(beta))) throw_funnel_violation(value_of(x), value_of(beta), time);
  T b2 = beta * beta;
  T p2 = pv.psi * pv.psi;
  T gap = b2 - p2;
  T inv_gap2 = 1.0 / (gap * gap);
  T sum = b2 + p2;
  T pi = pi_formula_ == PiFormula::Exact
             ? beta * pv.derivative * sum * inv_gap2
             : (gap * gap * beta * pv.derivative + 2.0 * p2 * pv.derivative * beta) * inv_gap2;
  T psi_over_x = -beta_dot * pv.ratio * sum * inv_gap2;
  return {beta * pv.psi / gap, pi, psi_over_x * x, psi_over_x, gap / (beta * pv.ratio)};
}

template <class T>
T FunnelTransform::inverse(const T& z, const T& beta) const {
  using std::atan;
  using std::sqrt;
  switch (strategy_) {
    case TransformStrategy::Identity:
      return z;
    case TransformStrategy::Tangent:
      return (2.0 / std::numbers::pi) * beta * atan(z);
    case TransformStrategy::Rational:
      break;
  }
  T psi = 2.0 * beta * z / (1.0 + sqrt(1.0 + 4.0 * z * z));
  return psi_inverse_at(psi_, psi);
}

}  // namespace ppac
