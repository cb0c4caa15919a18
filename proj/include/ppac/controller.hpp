#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppac/funnel.hpp"

namespace ppac {

struct ControlOutput {
  double u = 0.0;
  double u_bar = 0.0;
  double kappa = 0.0;
  std::vector<double> z;         // z_1..z_n
  Eigen::VectorXd theta_hat_dot;
  double rho_hat_dot = 0.0;
  /// Largest relative Hadamard residual seen during the evaluation (0 when none).
  double residual = 0.0;
};

/// The estimate part of the closed-loop state.
struct Estimates {
  Eigen::VectorXd theta_hat;
  double rho_hat = 0.0;
};

/// True parameters the Lyapunov surrogate is measured against. Controllers
/// never see these; only diagnostics do.
struct LyapunovOracle {
  Eigen::VectorXd ell_theta;
  double ell_b = 0.0;
};

class Controller {
 public:
  virtual ~Controller() = default;

  virtual std::string name() const = 0;
  virtual int order() const = 0;
  virtual int params() const = 0;
  virtual const FunnelTransform& funnel() const = 0;
  virtual Estimates initial_estimates() const = 0;
  virtual int sign_lb() const = 0;

  /// Pure in (x, t, estimates). Throws FunnelViolation outside the funnel.
  virtual ControlOutput evaluate(std::span<const double> x, double t, const Estimates& est) const = 0;
  virtual double lyapunov(std::span<const double> z, const Estimates& est, const LyapunovOracle& oracle) const = 0;
};

}  // namespace ppac
