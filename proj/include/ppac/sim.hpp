#pragma once

// Fixed-step integration of the closed loop on the augmented state
// [x, theta_hat, rho_hat], with per-sample logging and funnel monitoring.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppac/controller.hpp"
#include "ppac/errors.hpp"
#include "ppac/plant.hpp"

namespace ppac {

enum class Integrator { RK4, Euler };
enum class FunnelPolicy { Abort, RecordAndContinue };

std::string to_string(Integrator i);
std::string to_string(FunnelPolicy p);

struct SimConfig {
  double dt = 1e-3;
  double t_final = 20.0;
  Integrator integrator = Integrator::RK4;
  FunnelPolicy funnel_policy = FunnelPolicy::Abort;
  /// Check the plant's declared parameter bounds at every sample.
  bool check_assumptions = true;
  /// l_theta, l_b for the V column; defaults to the plant's declared centre and l_b.
  std::optional<LyapunovOracle> oracle;

  /// Number of integration steps; throws InvalidArgument unless t_final/dt is
  /// (numerically) an integer and both are positive.
  long steps() const;
};

/// Uniformly sampled closed-loop log. Columns (n states, q parameters):
///   t, x1..xn, z1..zn, u, theta_hat1..q, rho_hat, beta, bound, kappa, V,
///   margin, residual, theta1..q, b
class TrajectoryLog {
 public:
  TrajectoryLog() = default;
  TrajectoryLog(std::string controller, int n, int q);

  static std::vector<std::string> header(int n, int q);

  const std::string& controller() const { return controller_; }
  int order() const { return n_; }
  int params() const { return q_; }
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return data_.size(); }
  const std::vector<double>& row(std::size_t r) const { return data_[r]; }
  void append(std::vector<double> row);

  /// Index of a named column; throws InvalidArgument for unknown names.
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  double at(std::size_t r, const std::string& name) const { return data_[r][column_index(name)]; }

  /// Rows with |x1| >= bound (the funnel was left or touched).
  long funnel_violations() const;

  friend bool operator==(const TrajectoryLog& a, const TrajectoryLog& b);

 private:
  std::string controller_;
  int n_ = 0;
  int q_ = 0;
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> data_;
};

/// NaN or overflow in the closed-loop state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

enum class SimStatus { Completed, FunnelAbort, Diverged, Failed };

std::string to_string(SimStatus s);

struct SimOutcome {
  TrajectoryLog log;  // complete, or every valid row before the failure
  SimStatus status = SimStatus::Completed;
  std::string message;
  double failure_time = 0.0;
  double seconds = 0.0;  // wall-clock time of the run
};

/// Never throws for closed-loop failures; they are reported in the outcome.
SimOutcome run_simulation(const Plant& plant, const Controller& controller, std::span<const double> x0,
                          const SimConfig& cfg);

/// As run_simulation, but throws FunnelViolation (abort policy),
/// DivergenceError or the underlying error.
TrajectoryLog simulate(const Plant& plant, const Controller& controller, std::span<const double> x0,
                       const SimConfig& cfg);

/// sum z_i^2/2 + (l_theta - theta_hat)^T Gamma^{-1} (l_theta - theta_hat)/2
///   + |l_b|/(2 gamma_rho) (1/l_b - rho_hat)^2 for every row of the log.
std::vector<double> lyapunov_series(const TrajectoryLog& log, const LyapunovOracle& oracle,
                                    const Eigen::MatrixXd& gamma, double gamma_rho);

}  // namespace ppac
