#include "ppac/plant.hpp"

#include <cmath>
#include <sstream>

#include "ppac/errors.hpp"
#include "ppac/quadrature.hpp"

namespace ppac {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

ParameterSignal::ParameterSignal(SignalFn fn, double lower, double upper, std::string description)
    : fn_(std::move(fn)), lower_(lower), upper_(upper), description_(std::move(description)) {
  if (!fn_) throw InvalidArgument("parameter signal needs an evaluator");
  if (!std::isfinite(lower_) || !std::isfinite(upper_) || lower_ > upper_) {
    throw InvalidArgument("parameter signal needs finite bounds with lower <= upper");
  }
}

GainSignal::GainSignal(SignalFn fn, double lower, double upper, std::string description)
    : ParameterSignal(std::move(fn), lower, upper, std::move(description)) {
  if (lower <= 0.0 && upper >= 0.0) {
    throw InvalidArgument("control gain b(t) must keep one sign: declared interval [" + std::to_string(lower) + ", " +
                          std::to_string(upper) + "] contains zero");
  }
}

RegressorBank::RegressorBank(int order, int params, std::vector<RegressorFn> phi, RegressorFn phi1_factor)
    : order_(order), params_(params), phi_(std::move(phi)), phi1_factor_(std::move(phi1_factor)) {
  if (order_ < 1) throw InvalidArgument("plant order must be >= 1");
  if (params_ < 1) throw InvalidArgument("parameter dimension must be >= 1");
  if (static_cast<int>(phi_.size()) != order_) throw InvalidArgument("need one regressor per state");
  for (const auto& f : phi_) {
    if (!f) throw InvalidArgument("empty regressor");
  }

  const std::vector<double> zero(static_cast<std::size_t>(order_), 0.0);
  for (int i = 1; i <= order_; ++i) {
    auto v = phi_values(i, zero);
    if (static_cast<int>(v.size()) != params_) throw InvalidArgument("regressor dimension mismatch");
    for (double c : v) {
      if (c != 0.0) throw InvalidArgument("regressor phi_" + std::to_string(i) + " does not vanish at the origin");
    }
  }

  for (double x : {-1.7, -0.3, 0.45, 2.2}) {
    std::vector<double> xs(static_cast<std::size_t>(order_), 0.0);
    xs[0] = x;
    auto phi1 = phi_values(1, xs);
    auto factor = this->phi1_factor(Jet(x));
    for (int r = 0; r < params_; ++r) {
      const double lhs = factor[static_cast<std::size_t>(r)].value() * x;
      const double rhs = phi1[static_cast<std::size_t>(r)];
      if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(rhs))) {
        throw InvalidArgument("Phi_1 x_1 does not reproduce phi_1");
      }
    }
  }
}

std::vector<Jet> RegressorBank::phi(int i, std::span<const Jet> x) const {
  return phi_[static_cast<std::size_t>(i - 1)](x);
}

std::vector<Jet> RegressorBank::phi1_factor(const Jet& x1) const {
  if (phi1_factor_) return phi1_factor_(std::span<const Jet>(&x1, 1));
  // Phi_1(x) = int_0^1 phi_1'(s x) ds
  const QuadratureRule& rule = gauss_legendre_unit(24);
  const LevelStack local = x1.levels().pushed(1);
  std::vector<Jet> out(static_cast<std::size_t>(params_), Jet(0.0));
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    Jet y = Jet::variable(rule.nodes[k] * x1, local, 0);
    auto v = phi_[0](std::span<const Jet>(&y, 1));
    for (int r = 0; r < params_; ++r) {
      out[static_cast<std::size_t>(r)] += rule.weights[k] * v[static_cast<std::size_t>(r)].partial(0);
    }
  }
  return out;
}

std::vector<double> RegressorBank::phi_values(int i, std::span<const double> x) const {
  std::vector<Jet> xs(x.begin(), x.end());
  auto v = phi(i, xs);
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.value());
  return out;
}

Plant::Plant(RegressorBank regressors, std::vector<ParameterSignal> theta, GainSignal b, std::string name)
    : regressors_(std::move(regressors)), theta_(std::move(theta)), b_(std::move(b)), name_(std::move(name)) {
  if (static_cast<int>(theta_.size()) != regressors_.params()) {
    throw InvalidArgument("theta has " + std::to_string(theta_.size()) + " signals but the regressors expect " +
                          std::to_string(regressors_.params()));
  }
}

Eigen::VectorXd Plant::theta(double t, std::span<const double> x) const {
  Eigen::VectorXd v(params());
  for (int r = 0; r < params(); ++r) v[r] = theta_[static_cast<std::size_t>(r)](t, x);
  return v;
}

Eigen::VectorXd Plant::derivative(std::span<const double> x, double u, double t) const {
  const int n = order();
  if (static_cast<int>(x.size()) != n) throw InvalidArgument("state dimension mismatch");
  const Eigen::VectorXd th = theta(t, x);
  Eigen::VectorXd dx(n);
  for (int i = 1; i <= n; ++i) {
    auto phi = regressors_.phi_values(i, x);
    double acc = 0.0;
    for (int r = 0; r < params(); ++r) acc += phi[static_cast<std::size_t>(r)] * th[r];
    dx[i - 1] = acc + (i < n ? x[static_cast<std::size_t>(i)] : b_(t, x) * u);
  }
  return dx;
}

Eigen::VectorXd Plant::theta_center() const {
  Eigen::VectorXd c(params());
  for (int r = 0; r < params(); ++r) c[r] = theta_[static_cast<std::size_t>(r)].center();
  return c;
}

double Plant::theta_radius() const {
  double s = 0.0;
  for (const auto& sig : theta_) s += sig.radius() * sig.radius();
  return std::sqrt(s);
}

void Plant::check_assumptions(double t, std::span<const double> x) const {
  constexpr double tol = 1e-12;
  for (int r = 0; r < params(); ++r) {
    const auto& sig = theta_[static_cast<std::size_t>(r)];
    const double v = sig(t, x);
    if (!(v >= sig.lower() - tol && v <= sig.upper() + tol)) {
      std::ostringstream msg;
      msg << "theta_" << r + 1 << " = " << v << " outside [" << sig.lower() << ", " << sig.upper() << "] at t = " << t;
      throw AssumptionViolation(msg.str());
    }
  }
  const double bv = b_(t, x);
  if (!(bv >= b_.lower() - tol && bv <= b_.upper() + tol)) {
    std::ostringstream msg;
    msg << "b = " << bv << " outside [" << b_.lower() << ", " << b_.upper() << "] at t = " << t;
    throw AssumptionViolation(msg.str());
  }
}

namespace {

RegressorBank showcase_regressors() {
  std::vector<RegressorFn> phi{
      [](std::span<const Jet> x) { return std::vector<Jet>{x[0]}; },
      [](std::span<const Jet>) { return std::vector<Jet>{Jet(0.0)}; },
  };
  RegressorFn factor = [](std::span<const Jet>) { return std::vector<Jet>{Jet(1.0)}; };
  return RegressorBank(2, 1, std::move(phi), std::move(factor));
}

template <class Switch>
Plant make_showcase(Switch sw, std::string name) {
  ParameterSignal theta(
      [sw](double t, std::span<const double> x) {
        return 2.0 + 0.8 * std::sin(t) + std::sin(x[0] * x[1]) + 0.2 * std::sin(x[0] * t) + sw(std::sin(t));
      },
      -1.0, 5.0, "2 + 0.8 sin(t) + sin(x1 x2) + 0.2 sin(x1 t) + sign(sin t)");
  GainSignal b([sw](double, std::span<const double> x) { return 2.0 + 0.1 * std::cos(x[0]) + sw(x[0] * x[1]); }, 0.9,
               3.1, "2 + 0.1 cos(x1) + sign(x1 x2)");
  return Plant(showcase_regressors(), {theta}, b, std::move(name));
}

}  // namespace

Plant showcase_plant() {
  return make_showcase([](double s) { return sign_of(s); }, "showcase");
}

Plant smoothed_showcase_plant(double sharpness) {
  if (!(sharpness > 0.0)) throw InvalidArgument("smoothing sharpness must be positive");
  return make_showcase([sharpness](double s) { return std::tanh(sharpness * s); }, "showcase-smoothed");
}

}  // namespace ppac
