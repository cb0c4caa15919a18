#pragma once

// Strict-feedback plants
//   x_i' = phi_i(x_1..x_i)^T theta(t, x) + x_{i+1},   i < n
//   x_n' = phi_n(x)^T theta(t, x) + b(t, x) u
// with regressors that vanish at the origin and bounded parameter signals.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppac/jet.hpp"

namespace ppac {

using SignalFn = std::function<double(double t, std::span<const double> x)>;

/// A scalar time-varying parameter with declared bounds [lower, upper].
class ParameterSignal {
 public:
  ParameterSignal(SignalFn fn, double lower, double upper, std::string description = {});

  double operator()(double t, std::span<const double> x) const { return fn_(t, x); }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double center() const { return 0.5 * (lower_ + upper_); }
  double radius() const { return 0.5 * (upper_ - lower_); }
  const std::string& description() const { return description_; }

 private:
  SignalFn fn_;
  double lower_;
  double upper_;
  std::string description_;
};

/// Control gain signal: the declared interval must exclude zero.
class GainSignal : public ParameterSignal {
 public:
  GainSignal(SignalFn fn, double lower, double upper, std::string description = {});

  int sign() const { return lower() > 0.0 ? 1 : -1; }
  /// The smallest |b| allowed, signed (a valid choice of l_b).
  double ell() const { return sign() > 0 ? lower() : upper(); }
};

/// phi_i evaluated on x_1..x_i (the span may be longer); returns q entries.
using RegressorFn = std::function<std::vector<Jet>(std::span<const Jet> x)>;

class RegressorBank {
 public:
  /// `phi1_factor` is Phi_1 with phi_1(x_1) = Phi_1(x_1) x_1; when empty it is
  /// computed as the integral of phi_1' over [0, x_1] by Gauss-Legendre.
  RegressorBank(int order, int params, std::vector<RegressorFn> phi, RegressorFn phi1_factor = {});

  int order() const { return order_; }
  int params() const { return params_; }

  std::vector<Jet> phi(int i, std::span<const Jet> x) const;
  std::vector<Jet> phi1_factor(const Jet& x1) const;
  std::vector<double> phi_values(int i, std::span<const double> x) const;

 private:
  int order_;
  int params_;
  std::vector<RegressorFn> phi_;
  RegressorFn phi1_factor_;
};

class Plant {
 public:
  Plant(RegressorBank regressors, std::vector<ParameterSignal> theta, GainSignal b, std::string name = {});

  int order() const { return regressors_.order(); }
  int params() const { return regressors_.params(); }
  const RegressorBank& regressors() const { return regressors_; }
  const std::vector<ParameterSignal>& theta_signals() const { return theta_; }
  const GainSignal& b_signal() const { return b_; }
  const std::string& name() const { return name_; }

  Eigen::VectorXd theta(double t, std::span<const double> x) const;
  double b(double t, std::span<const double> x) const { return b_(t, x); }
  Eigen::VectorXd derivative(std::span<const double> x, double u, double t) const;

  /// Centre of the declared theta box (a valid l_theta) and the Euclidean
  /// radius of the box (a valid bound on |theta - l_theta|).
  Eigen::VectorXd theta_center() const;
  double theta_radius() const;

  /// Throws AssumptionViolation when a sample leaves the declared bounds.
  void check_assumptions(double t, std::span<const double> x) const;

 private:
  RegressorBank regressors_;
  std::vector<ParameterSignal> theta_;
  GainSignal b_;
  std::string name_;
};

/// The two-state showcase: x1' = theta x1 + x2, x2' = b u with
///   theta = 2 + 0.8 sin t + sin(x1 x2) + 0.2 sin(x1 t) + sign(sin t),
///   b     = 2 + 0.1 cos x1 + sign(x1 x2).
Plant showcase_plant();
/// The showcase with every sign(s) replaced by tanh(sharpness s); smooth, so
/// fixed-step integrators reach their formal order on it.
Plant smoothed_showcase_plant(double sharpness);

double sign_of(double v);

}  // namespace ppac
