#pragma once

// Adaptive backstepping with tuning functions for order-n strict-feedback
// plants, with the funnel transform on x_1 and nonlinear damping against the
// time-varying parts of theta and b.
//
// z_1 comes from the funnel transform, z_i = x_i - alpha_{i-1}. Every partial
// of a virtual law is taken with nested jets, and the Hadamard factors W_i,
// Omega_bar are the integral-mean-value form W^T = int_0^1 J(s z) ds, evaluated
// by Gauss-Legendre along the triangular chain z -> x.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppac/controller.hpp"
#include "ppac/funnel.hpp"
#include "ppac/jet.hpp"
#include "ppac/plant.hpp"

namespace ppac {

struct BacksteppingGains {
  std::vector<double> k;          // k_1..k_n
  Eigen::MatrixXd gamma;          // adaptation gain, symmetric positive definite
  double gamma_rho = 0.1;
  double delta = 1.0;             // bound on |theta - l_theta|
  double eps_psi = 1.0;
  double eps_omega = 1.0;
  int nodes = 16;                 // Gauss-Legendre nodes for Hadamard factors
  int max_nodes = 32;             // escalation when the residual check fails
};

struct BacksteppingState {
  Eigen::VectorXd theta_hat;
  double rho_hat = 0.25;
  int sign_lb = 1;
};

struct StepRecord {
  double z = 0.0;
  double alpha = 0.0;              // alpha_i (not set for the last step)
  std::vector<double> w;           // w_i (i >= 2)
  std::vector<double> tau;         // tau_i
  double zeta = 0.0;
  double w_frobenius2 = 0.0;       // |W_i|_F^2 (W_1 contributes via Phi_1 W_1)
  double residual = 0.0;           // relative Hadamard residual of w_i
  int nodes = 0;                   // quadrature nodes used for W_i
  /// Partials of alpha_i along x_1..x_i, theta_hat, beta^(0..i).
  std::vector<double> alpha_partials;
};

struct RecursionTrace {
  std::vector<StepRecord> steps;
  double omega = 0.0;
  double omega_bar2 = 0.0;
  double residual = 0.0;           // relative residual of the stacked [w_n; Omega] split
  int nodes = 0;
  double kappa = 0.0;
  double u_bar = 0.0;
  double u = 0.0;
  std::vector<double> theta_hat_dot;
  double rho_hat_dot = 0.0;
};

struct HadamardResult {
  Eigen::MatrixXd w;     // i x m, so f(z) = W^T z
  double residual = 0.0; // max_r |(W^T z - f)_r| / (1 + |f_r|)
  int nodes = 0;
};

/// Tolerance of the runtime residual identity |W^T z - f| < tol (1 + |f|).
inline constexpr double kHadamardTolerance = 1e-8;

/// Hadamard factor of a jet-evaluable map with f(0) = 0, with `nodes`
/// Gauss-Legendre points. Throws FactorizationError above tolerance.
HadamardResult hadamard_factor(const std::function<std::vector<Jet>(std::span<const Jet>)>& f,
                               std::span<const double> zbar, int nodes);

class BacksteppingController : public Controller {
 public:
  BacksteppingController(RegressorBank regressors, FunnelTransform ft, BacksteppingGains gains,
                         BacksteppingState initial, std::string name = "backstepping");

  std::string name() const override { return name_; }
  int order() const override { return regressors_.order(); }
  int params() const override { return regressors_.params(); }
  const FunnelTransform& funnel() const override { return ft_; }
  Estimates initial_estimates() const override;
  int sign_lb() const override { return initial_.sign_lb; }
  const BacksteppingGains& gains() const { return gains_; }
  const RegressorBank& regressors() const { return regressors_; }

  ControlOutput evaluate(std::span<const double> x, double t, const Estimates& est) const override;
  double lyapunov(std::span<const double> z, const Estimates& est, const LyapunovOracle& oracle) const override;

  /// Full evaluation with every intermediate recorded.
  RecursionTrace control_pipeline(std::span<const double> x, double t, const Estimates& est) const;

  /// alpha_i as a function of (x_1..x_i, theta_hat, beta^(0..i)) at the given
  /// point; gradient in that order. For i < n.
  ValueAndGradient virtual_law(int i, std::span<const double> x, const Eigen::VectorXd& theta_hat,
                               std::span<const double> beta) const;

 private:
  RegressorBank regressors_;
  FunnelTransform ft_;
  BacksteppingGains gains_;
  BacksteppingState initial_;
  std::string name_;
};

}  // namespace ppac
