#pragma once

#include <memory>
#include <random>

#include "ppac/backstepping.hpp"
#include "ppac/plant.hpp"
#include "ppac/scalar_adaptive.hpp"

namespace ppac::testing {

inline BacksteppingGains showcase_gains() {
  BacksteppingGains g;
  g.k = {0.1, 0.1};
  g.gamma = Eigen::MatrixXd::Constant(1, 1, 0.1);
  g.gamma_rho = 0.1;
  g.delta = 1.0;
  return g;
}

inline BacksteppingState showcase_state() {
  BacksteppingState s;
  s.theta_hat = Eigen::VectorXd::Zero(1);
  s.rho_hat = 0.25;
  s.sign_lb = 1;
  return s;
}

inline FunnelTransform showcase_funnel(TransformStrategy strategy = TransformStrategy::Rational) {
  const double scale = strategy == TransformStrategy::Tangent ? 4.0 : 0.9;
  return FunnelTransform(strategy, PerformanceFunction::exponential(scale, 0.4, 0.1, 2), NormalizedFunction::Algebraic);
}

inline BacksteppingController showcase_controller(const Plant& plant,
                                                  TransformStrategy strategy = TransformStrategy::Rational,
                                                  BacksteppingGains gains = showcase_gains()) {
  return BacksteppingController(plant.regressors(), showcase_funnel(strategy), std::move(gains), showcase_state());
}

inline RegressorBank scalar_regressors() {
  return RegressorBank(1, 1, {[](std::span<const Jet> x) { return std::vector<Jet>{x[0]}; }},
                       [](std::span<const Jet>) { return std::vector<Jet>{Jet(1.0)}; });
}

/// x' = b(t) u + theta(t) x with a smooth plus switching part in each signal.
/// Declared bounds are the exact ranges of the formulas; sign is +1 or -1.
struct RandomScalarPlant {
  Plant plant;
  int sign;
  double x0;
};

inline RandomScalarPlant random_scalar_plant(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double c = -1.0 + 3.0 * u(rng), a1 = u(rng), w1 = 0.5 + 2.0 * u(rng), p1 = 6.0 * u(rng);
  const double a2 = 0.8 * u(rng), w2 = 0.3 + u(rng);
  const int s = u(rng) < 0.3 ? -1 : 1;
  const double b0 = 0.8 + 1.5 * u(rng), a3 = 0.3 * b0 * u(rng), w3 = 0.5 + u(rng);
  const double a4 = 0.3 * b0 * u(rng), w4 = 0.2 + u(rng);
  ParameterSignal theta(
      [=](double t, std::span<const double>) { return c + a1 * std::sin(w1 * t + p1) + a2 * sign_of(std::sin(w2 * t)); },
      c - a1 - a2, c + a1 + a2);
  const double lo = b0 - a3 - a4, hi = b0 + a3 + a4;
  GainSignal b(
      [=](double t, std::span<const double>) {
        return s * (b0 + a3 * std::cos(w3 * t) + a4 * sign_of(std::sin(w4 * t + 1.0)));
      },
      s > 0 ? lo : -hi, s > 0 ? hi : -lo);
  const double x0 = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + 2.5 * u(rng));
  return {Plant(scalar_regressors(), {theta}, b, "random-scalar"), s, x0};
}

}  // namespace ppac::testing
