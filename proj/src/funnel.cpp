#include "ppac/funnel.hpp"

#include <limits>
#include <sstream>

namespace ppac {

PerformanceFunction PerformanceFunction::exponential(double scale, double rate, double beta_inf, int order) {
  if (!(beta_inf > 0.0 && beta_inf < 1.0)) throw InvalidArgument("beta_inf must lie in (0, 1)");
  if (!(rate > 0.0)) throw InvalidArgument("performance function rate must be positive");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw InvalidArgument("performance function scale must be >= 0");
  if (order < 0) throw InvalidArgument("performance function order must be >= 0");
  PerformanceFunction pf;
  pf.variant_ = Variant::Exponential;
  pf.scale_ = scale;
  pf.rate_ = rate;
  pf.beta_inf_ = beta_inf;
  pf.order_ = order;
  return pf;
}

PerformanceFunction PerformanceFunction::prescribed_time(double horizon, double beta_inf, int order) {
  if (!(beta_inf > 0.0 && beta_inf < 1.0)) throw InvalidArgument("beta_inf must lie in (0, 1)");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("prescribed time T must be positive");
  if (order < 1) throw InvalidArgument("prescribed-time performance function needs order >= 1");
  PerformanceFunction pf;
  pf.variant_ = Variant::PrescribedTime;
  pf.scale_ = 1.0 - beta_inf;
  pf.horizon_ = horizon;
  pf.beta_inf_ = beta_inf;
  pf.order_ = order;
  return pf;
}

double PerformanceFunction::operator()(double t) const { return derivatives(t, 0)[0]; }

std::vector<double> PerformanceFunction::derivatives(double t, int k) const {
  if (k < 0 || k > order_) {
    std::ostringstream msg;
    msg << "derivative order " << k << " requested from a performance function of order " << order_;
    throw UnsupportedDerivativeOrder(msg.str());
  }
  if (!(t >= 0.0)) throw DomainError("performance functions are defined for t >= 0");
  std::vector<double> out(static_cast<std::size_t>(k) + 1, 0.0);
  if (variant_ == Variant::Exponential) {
    double term = scale_ * std::exp(-rate_ * t);
    for (int j = 0; j <= k; ++j) {
      out[static_cast<std::size_t>(j)] = term;
      term *= -rate_;
    }
    out[0] += beta_inf_;
    return out;
  }
  // Prescribed time. At t == T the derivative of order n is the left limit; lower
  // orders agree on both sides.
  const int n = order_;
  if (t > horizon_ || (t == horizon_ && k < n)) {
    out[0] = beta_inf_;
    return out;
  }
  const double s = (horizon_ - t) / horizon_;
  double falling = 1.0;  // n (n-1) ... (n-j+1)
  for (int j = 0; j <= k; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    out[static_cast<std::size_t>(j)] =
        scale_ * falling * sign * std::pow(s, n - j) / std::pow(horizon_, j);
    falling *= static_cast<double>(n - j);
  }
  if (t == horizon_) {
    for (int j = 0; j < n && j <= k; ++j) out[static_cast<std::size_t>(j)] = 0.0;
  }
  out[0] += beta_inf_;
  return out;
}

std::vector<double> beta_derivatives(const PerformanceFunction& pf, double t, int k) {
  return pf.derivatives(t, k);
}

std::string to_string(NormalizedFunction nf) {
  return nf == NormalizedFunction::Algebraic ? "algebraic" : "tanh";
}

PsiEval psi_eval(NormalizedFunction nf, double x) {
  if (std::isinf(x)) return {x > 0 ? 1.0 : -1.0, 0.0, 0.0};
  auto v = psi_values(nf, x);
  return {v.psi, v.derivative, v.ratio};
}

double psi_inverse(NormalizedFunction nf, double y) {
  if (std::isnan(y) || std::abs(y) > 1.0) throw DomainError("psi^{-1} needs |y| <= 1");
  if (std::abs(y) == 1.0) return std::copysign(std::numeric_limits<double>::infinity(), y);
  return psi_inverse_at(nf, y);
}

std::string to_string(TransformStrategy s) {
  switch (s) {
    case TransformStrategy::Rational:
      return "rational";
    case TransformStrategy::Tangent:
      return "tangent";
    case TransformStrategy::Identity:
      return "identity";
  }
  return "?";
}

FunnelTransform::FunnelTransform(TransformStrategy strategy, PerformanceFunction beta, NormalizedFunction psi,
                                 PiFormula pi_formula)
    : strategy_(strategy), beta_(beta), psi_(psi), pi_formula_(pi_formula) {
  if (strategy_ == TransformStrategy::Rational && std::abs(beta_(0.0) - 1.0) > 1e-12) {
    throw InvalidArgument("the rational funnel needs beta(0) = 1 so that every initial state is admissible");
  }
}

double FunnelTransform::bound(double t) const {
  const double b = beta_(t);
  if (strategy_ == TransformStrategy::Tangent) return b;
  if (b >= 1.0) return std::numeric_limits<double>::infinity();
  return psi_inverse(psi_, b);
}

bool FunnelTransform::inside(double x, double beta) const {
  switch (strategy_) {
    case TransformStrategy::Identity:
      return true;
    case TransformStrategy::Tangent:
      return std::abs(x) < beta;
    case TransformStrategy::Rational:
      break;
  }
  return std::abs(psi_eval(psi_, x).psi) < beta;
}

void throw_funnel_violation(double x, double beta, double time) {
  std::ostringstream msg;
  msg << "state x = " << x << " outside the performance funnel (beta = " << beta << ") at t = " << time;
  throw FunnelViolation(msg.str(), time);
}

TransformFactors<double> transform(const FunnelTransform& ft, double x, double t) {
  auto b = ft.beta().derivatives(t, std::min(1, ft.beta().order()));
  const double beta_dot = b.size() > 1 ? b[1] : 0.0;
  return ft.factors(x, b[0], beta_dot, t);
}

double inverse_transform(const FunnelTransform& ft, double z, double t) {
  if (!std::isfinite(z)) throw DomainError("inverse transform needs a finite z");
  return ft.inverse(z, ft.beta()(t));
}

}  // namespace ppac
