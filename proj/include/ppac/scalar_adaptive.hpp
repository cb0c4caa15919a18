#pragma once

// Adaptive funnel controller for x' = b(t) u + theta(t) x.
//
//   kappa = k/Pi + (delta + 1)/2 + W^2/2 (theta_hat + Psi_x/Pi)^2
//   u_bar = -kappa z,  u = rho_hat u_bar
//   theta_hat' = gamma_theta z Pi x,   rho_hat' = -gamma_rho sgn(l_b) z Pi u_bar

#include "ppac/controller.hpp"
#include "ppac/funnel.hpp"

namespace ppac {

struct ScalarGains {
  double k = 1.0;
  double gamma_theta = 1.0;
  double gamma_rho = 1.0;
  double delta = 1.0;
};

struct ScalarControllerState {
  double theta_hat = 0.0;
  double rho_hat = 1.0;
  ScalarGains gains;
  int sign_lb = 1;
};

/// Throws InvalidArgument on non-positive gains or a rho_hat of the wrong sign.
void validate(const ScalarControllerState& state);

struct ScalarControl {
  double u = 0.0;
  double u_bar = 0.0;
  double kappa = 0.0;
  double z = 0.0;
};

struct ScalarRates {
  double theta_hat_dot = 0.0;
  double rho_hat_dot = 0.0;
};

ScalarControl scalar_control(const ScalarControllerState& state, const FunnelTransform& ft, double x, double t);
ScalarRates scalar_adaptation(const ScalarControllerState& state, const FunnelTransform& ft, double x, double t,
                              double u_bar);
/// V = z^2/2 + (l_theta - theta_hat)^2/(2 gamma_theta) + |l_b|/(2 gamma_rho) (1/l_b - rho_hat)^2.
double scalar_lyapunov(const ScalarControllerState& state, double z, double ell_theta, double ell_b);

class ScalarAdaptiveController : public Controller {
 public:
  ScalarAdaptiveController(ScalarControllerState initial, FunnelTransform ft, std::string name = "scalar");

  std::string name() const override { return name_; }
  int order() const override { return 1; }
  int params() const override { return 1; }
  const FunnelTransform& funnel() const override { return ft_; }
  Estimates initial_estimates() const override;
  int sign_lb() const override { return initial_.sign_lb; }
  const ScalarControllerState& initial_state() const { return initial_; }

  ControlOutput evaluate(std::span<const double> x, double t, const Estimates& est) const override;
  double lyapunov(std::span<const double> z, const Estimates& est, const LyapunovOracle& oracle) const override;

 private:
  ScalarControllerState with(const Estimates& est) const;

  ScalarControllerState initial_;
  FunnelTransform ft_;
  std::string name_;
};

}  // namespace ppac
