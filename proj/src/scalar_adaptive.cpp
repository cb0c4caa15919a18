#include "ppac/scalar_adaptive.hpp"

#include <cmath>

namespace ppac {

void validate(const ScalarControllerState& s) {
  const auto& g = s.gains;
  if (!(g.k > 0.0)) throw InvalidArgument("gain k must be > 0");
  if (!(g.gamma_theta > 0.0)) throw InvalidArgument("gain gamma_theta must be > 0");
  if (!(g.gamma_rho > 0.0)) throw InvalidArgument("gain gamma_rho must be > 0");
  if (!(g.delta >= 0.0)) throw InvalidArgument("delta must be >= 0");
  if (s.sign_lb != 1 && s.sign_lb != -1) throw InvalidArgument("sign of l_b must be +1 or -1");
  if (!(s.rho_hat * s.sign_lb > 0.0)) throw InvalidArgument("rho_hat(0) must be nonzero with the sign of l_b");
  if (!std::isfinite(s.theta_hat)) throw InvalidArgument("theta_hat(0) must be finite");
}

ScalarControl scalar_control(const ScalarControllerState& s, const FunnelTransform& ft, double x, double t) {
  const auto f = transform(ft, x, t);
  const auto& g = s.gains;
  const double a = s.theta_hat + f.psi_over_x / f.pi;
  const double kappa = g.k / f.pi + 0.5 * (g.delta + 1.0) + 0.5 * f.w * f.w * a * a;
  ScalarControl out;
  out.z = f.z;
  out.kappa = kappa;
  out.u_bar = -kappa * f.z;
  out.u = s.rho_hat * out.u_bar;
  return out;
}

ScalarRates scalar_adaptation(const ScalarControllerState& s, const FunnelTransform& ft, double x, double t,
                              double u_bar) {
  const auto f = transform(ft, x, t);
  ScalarRates r;
  r.theta_hat_dot = s.gains.gamma_theta * f.z * f.pi * x;
  r.rho_hat_dot = -s.gains.gamma_rho * s.sign_lb * f.z * f.pi * u_bar;
  return r;
}

double scalar_lyapunov(const ScalarControllerState& s, double z, double ell_theta, double ell_b) {
  if (ell_b == 0.0 || !std::isfinite(ell_b)) throw InvalidArgument("oracle l_b must be finite and nonzero");
  const double dt = ell_theta - s.theta_hat;
  const double dr = 1.0 / ell_b - s.rho_hat;
  return 0.5 * z * z + dt * dt / (2.0 * s.gains.gamma_theta) + std::abs(ell_b) / (2.0 * s.gains.gamma_rho) * dr * dr;
}

ScalarAdaptiveController::ScalarAdaptiveController(ScalarControllerState initial, FunnelTransform ft, std::string name)
    : initial_(initial), ft_(std::move(ft)), name_(std::move(name)) {
  validate(initial_);
}

Estimates ScalarAdaptiveController::initial_estimates() const {
  Estimates e;
  e.theta_hat = Eigen::VectorXd::Constant(1, initial_.theta_hat);
  e.rho_hat = initial_.rho_hat;
  return e;
}

ScalarControllerState ScalarAdaptiveController::with(const Estimates& est) const {
  ScalarControllerState s = initial_;
  s.theta_hat = est.theta_hat[0];
  s.rho_hat = est.rho_hat;
  return s;
}

ControlOutput ScalarAdaptiveController::evaluate(std::span<const double> x, double t, const Estimates& est) const {
  const auto s = with(est);
  const auto c = scalar_control(s, ft_, x[0], t);
  const auto r = scalar_adaptation(s, ft_, x[0], t, c.u_bar);
  ControlOutput out;
  out.u = c.u;
  out.u_bar = c.u_bar;
  out.kappa = c.kappa;
  out.z = {c.z};
  out.theta_hat_dot = Eigen::VectorXd::Constant(1, r.theta_hat_dot);
  out.rho_hat_dot = r.rho_hat_dot;
  return out;
}

double ScalarAdaptiveController::lyapunov(std::span<const double> z, const Estimates& est,
                                          const LyapunovOracle& oracle) const {
  return scalar_lyapunov(with(est), z[0], oracle.ell_theta[0], oracle.ell_b);
}

}  // namespace ppac
