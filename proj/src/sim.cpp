#include "ppac/sim.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace ppac {

std::string to_string(Integrator i) { return i == Integrator::RK4 ? "rk4" : "euler"; }

std::string to_string(FunnelPolicy p) { return p == FunnelPolicy::Abort ? "abort" : "record-and-continue"; }

std::string to_string(SimStatus s) {
  switch (s) {
    case SimStatus::Completed:
      return "completed";
    case SimStatus::FunnelAbort:
      return "funnel-abort";
    case SimStatus::Diverged:
      return "diverged";
    case SimStatus::Failed:
      return "failed";
  }
  return "?";
}

long SimConfig::steps() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw InvalidArgument("t_final must be > 0");
  const double ratio = t_final / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument("t_final must be an integer multiple of dt");
  }
  return static_cast<long>(n);
}

TrajectoryLog::TrajectoryLog(std::string controller, int n, int q)
    : controller_(std::move(controller)), n_(n), q_(q), columns_(header(n, q)) {}

std::vector<std::string> TrajectoryLog::header(int n, int q) {
  std::vector<std::string> h{"t"};
  for (int i = 1; i <= n; ++i) h.push_back("x" + std::to_string(i));
  for (int i = 1; i <= n; ++i) h.push_back("z" + std::to_string(i));
  h.push_back("u");
  for (int r = 1; r <= q; ++r) h.push_back("theta_hat" + std::to_string(r));
  for (const char* c : {"rho_hat", "beta", "bound", "kappa", "V", "margin", "residual"}) h.emplace_back(c);
  for (int r = 1; r <= q; ++r) h.push_back("theta" + std::to_string(r));
  h.emplace_back("b");
  return h;
}

void TrajectoryLog::append(std::vector<double> row) {
  if (row.size() != columns_.size()) throw InvalidArgument("log row has the wrong number of columns");
  data_.push_back(std::move(row));
}

std::size_t TrajectoryLog::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw InvalidArgument("no log column named '" + name + "'");
}

std::vector<double> TrajectoryLog::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(data_.size());
  for (const auto& r : data_) out.push_back(r[c]);
  return out;
}

long TrajectoryLog::funnel_violations() const {
  const std::size_t x1 = column_index("x1");
  const std::size_t bound = column_index("bound");
  long count = 0;
  for (const auto& r : data_) {
    if (!(std::abs(r[x1]) < r[bound])) ++count;
  }
  return count;
}

bool operator==(const TrajectoryLog& a, const TrajectoryLog& b) {
  if (a.controller_ != b.controller_ || a.n_ != b.n_ || a.q_ != b.q_ || a.columns_ != b.columns_) return false;
  if (a.data_.size() != b.data_.size()) return false;
  for (std::size_t r = 0; r < a.data_.size(); ++r) {
    for (std::size_t c = 0; c < a.data_[r].size(); ++c) {
      const double u = a.data_[r][c];
      const double v = b.data_[r][c];
      if (!(u == v || (std::isnan(u) && std::isnan(v)))) return false;
    }
  }
  return true;
}

namespace {

struct Closed {
  const Plant& plant;
  const Controller& ctrl;
  int n;
  int q;

  Estimates estimates(const Eigen::VectorXd& y) const {
    return {y.segment(n, q), y[n + q]};
  }

  Eigen::VectorXd field(double t, const Eigen::VectorXd& y, const ControlOutput& out) const {
    Eigen::VectorXd dy(y.size());
    std::span<const double> x(y.data(), static_cast<std::size_t>(n));
    dy.head(n) = plant.derivative(x, out.u, t);
    dy.segment(n, q) = out.theta_hat_dot;
    dy[n + q] = out.rho_hat_dot;
    return dy;
  }

  Eigen::VectorXd field(double t, const Eigen::VectorXd& y) const {
    std::span<const double> x(y.data(), static_cast<std::size_t>(n));
    return field(t, y, ctrl.evaluate(x, t, estimates(y)));
  }
};

bool finite(const Eigen::VectorXd& v) { return v.allFinite() && v.cwiseAbs().maxCoeff() < 1e150; }

}  // namespace

SimOutcome run_simulation(const Plant& plant, const Controller& controller, std::span<const double> x0,
                          const SimConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const int n = plant.order();
  const int q = plant.params();
  if (controller.order() != n) throw InvalidArgument("controller and plant orders differ");
  if (controller.params() != q) throw InvalidArgument("controller and plant parameter dimensions differ");
  if (static_cast<int>(x0.size()) != n) throw InvalidArgument("initial state has the wrong dimension");
  const long steps = cfg.steps();
  const double dt = cfg.dt;

  const LyapunovOracle oracle =
      cfg.oracle ? *cfg.oracle : LyapunovOracle{plant.theta_center(), plant.b_signal().ell()};
  const FunnelTransform& ft = controller.funnel();

  SimOutcome res;
  res.log = TrajectoryLog(controller.name(), n, q);

  const Estimates e0 = controller.initial_estimates();
  Eigen::VectorXd y(n + q + 1);
  for (int i = 0; i < n; ++i) y[i] = x0[static_cast<std::size_t>(i)];
  y.segment(n, q) = e0.theta_hat;
  y[n + q] = e0.rho_hat;

  Closed cl{plant, controller, n, q};
  auto finish = [&](SimStatus s, std::string msg, double t) {
    res.status = s;
    res.message = std::move(msg);
    res.failure_time = t;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  };

  if (ft.enforces_funnel() && !(std::abs(x0[0]) < ft.bound(0.0))) {
    std::ostringstream msg;
    msg << "initial state x1 = " << x0[0] << " is not inside the funnel bound " << ft.bound(0.0);
    return finish(SimStatus::FunnelAbort, msg.str(), 0.0);
  }

  double t = 0.0;
  try {
    for (long k = 0; k <= steps; ++k) {
      t = static_cast<double>(k) * dt;
      std::span<const double> x(y.data(), static_cast<std::size_t>(n));
      const Estimates est = cl.estimates(y);
      const ControlOutput out = controller.evaluate(x, t, est);
      if (cfg.check_assumptions) plant.check_assumptions(t, x);

      const double beta = ft.beta()(t);
      const double bound = ft.bound(t);
      std::vector<double> row;
      row.reserve(res.log.columns().size());
      row.push_back(t);
      for (int i = 0; i < n; ++i) row.push_back(y[i]);
      for (int i = 0; i < n; ++i) row.push_back(out.z[static_cast<std::size_t>(i)]);
      row.push_back(out.u);
      for (int r = 0; r < q; ++r) row.push_back(est.theta_hat[r]);
      row.push_back(est.rho_hat);
      row.push_back(beta);
      row.push_back(bound);
      row.push_back(out.kappa);
      row.push_back(controller.lyapunov(out.z, est, oracle));
      row.push_back(bound - std::abs(y[0]));
      row.push_back(out.residual);
      const Eigen::VectorXd th = plant.theta(t, x);
      for (int r = 0; r < q; ++r) row.push_back(th[r]);
      row.push_back(plant.b(t, x));
      res.log.append(std::move(row));

      if (cfg.funnel_policy == FunnelPolicy::Abort && !(std::abs(y[0]) < bound)) {
        std::ostringstream msg;
        msg << "x1 = " << y[0] << " left the funnel (bound " << bound << ") at t = " << t;
        return finish(SimStatus::FunnelAbort, msg.str(), t);
      }
      if (k == steps) break;

      Eigen::VectorXd next;
      const Eigen::VectorXd k1 = cl.field(t, y, out);
      if (cfg.integrator == Integrator::Euler) {
        next = y + dt * k1;
      } else {
        const Eigen::VectorXd k2 = cl.field(t + 0.5 * dt, y + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = cl.field(t + 0.5 * dt, y + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = cl.field(t + dt, y + dt * k3);
        next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      if (!finite(next)) {
        std::ostringstream msg;
        msg << "closed-loop state diverged after t = " << t;
        return finish(SimStatus::Diverged, msg.str(), t + dt);
      }
      y = next;
    }
  } catch (const FunnelViolation& e) {
    return finish(SimStatus::FunnelAbort, e.what(), e.time());
  } catch (const Error& e) {
    return finish(SimStatus::Failed, e.what(), t);
  }
  return finish(SimStatus::Completed, {}, t);
}

TrajectoryLog simulate(const Plant& plant, const Controller& controller, std::span<const double> x0,
                       const SimConfig& cfg) {
  SimOutcome o = run_simulation(plant, controller, x0, cfg);
  switch (o.status) {
    case SimStatus::Completed:
      return std::move(o.log);
    case SimStatus::FunnelAbort:
      throw FunnelViolation(o.message, o.failure_time);
    case SimStatus::Diverged:
      throw DivergenceError(o.message, o.failure_time);
    case SimStatus::Failed:
      throw Error(o.message);
  }
  return std::move(o.log);
}

std::vector<double> lyapunov_series(const TrajectoryLog& log, const LyapunovOracle& oracle,
                                    const Eigen::MatrixXd& gamma, double gamma_rho) {
  const int n = log.order();
  const int q = log.params();
  if (gamma.rows() != q || gamma.cols() != q) throw InvalidArgument("Gamma must be q x q");
  if (oracle.ell_theta.size() != q) throw InvalidArgument("oracle l_theta has the wrong dimension");
  if (oracle.ell_b == 0.0) throw InvalidArgument("oracle l_b must be nonzero");
  const Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  std::vector<std::size_t> zc, tc;
  for (int i = 1; i <= n; ++i) zc.push_back(log.column_index("z" + std::to_string(i)));
  for (int r = 1; r <= q; ++r) tc.push_back(log.column_index("theta_hat" + std::to_string(r)));
  const std::size_t rc = log.column_index("rho_hat");
  std::vector<double> v;
  v.reserve(log.rows());
  for (std::size_t k = 0; k < log.rows(); ++k) {
    const auto& row = log.row(k);
    double s = 0.0;
    for (auto c : zc) s += 0.5 * row[c] * row[c];
    Eigen::VectorXd e(q);
    for (int r = 0; r < q; ++r) e[r] = oracle.ell_theta[r] - row[tc[static_cast<std::size_t>(r)]];
    s += 0.5 * e.dot(llt.solve(e));
    const double dr = 1.0 / oracle.ell_b - row[rc];
    s += std::abs(oracle.ell_b) / (2.0 * gamma_rho) * dr * dr;
    v.push_back(s);
  }
  return v;
}

}  // namespace ppac
