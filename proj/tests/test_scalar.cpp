#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "ppac/scalar_adaptive.hpp"
#include "ppac/sim.hpp"

using namespace ppac;

namespace {
ScalarControllerState slow_gains() {
  ScalarControllerState s;
  s.gains = {0.1, 1.0, 1.0, 1.0};
  s.theta_hat = 0.0;
  s.rho_hat = 0.25;
  return s;
}
FunnelTransform rational() {
  return FunnelTransform(TransformStrategy::Rational, PerformanceFunction::exponential(0.9, 0.4, 0.1, 1),
                         NormalizedFunction::Algebraic);
}
}  // namespace

TEST_CASE("scalar law at the origin") {
  auto c = scalar_control(slow_gains(), rational(), 0.0, 0.0);
  CHECK(c.z == 0.0);
  CHECK(c.u == 0.0);
  CHECK(c.u_bar == 0.0);
  CHECK(c.kappa == doctest::Approx(1.1648));
  auto r = scalar_adaptation(slow_gains(), rational(), 0.0, 0.0, c.u_bar);
  CHECK(r.theta_hat_dot == 0.0);
  CHECK(r.rho_hat_dot == 0.0);
}

TEST_CASE("theta_hat enters u only through the damping square") {
  auto s = slow_gains();
  const auto ft = rational();
  const auto f = transform(ft, 0.6, 1.0);
  for (double th : {-2.0, 0.0, 0.7, 3.0}) {
    s.theta_hat = th;
    auto c = scalar_control(s, ft, 0.6, 1.0);
    const double a = th + f.psi_over_x / f.pi;
    const double expected = -(0.1 / f.pi + 1.0 + 0.5 * f.w * f.w * a * a) * f.z;
    CHECK(c.u_bar == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("adaptation signs") {
  auto s = slow_gains();
  const auto ft = rational();
  for (double x : {-1.5, -0.2, 0.3, 2.0}) {
    auto c = scalar_control(s, ft, x, 0.0);
    auto r = scalar_adaptation(s, ft, x, 0.0, c.u_bar);
    CHECK(r.rho_hat_dot > 0.0);
    CHECK(r.theta_hat_dot > 0.0);
  }
  s.sign_lb = -1;
  s.rho_hat = -0.25;
  auto c = scalar_control(s, ft, 0.4, 0.5);
  CHECK(scalar_adaptation(s, ft, 0.4, 0.5, c.u_bar).rho_hat_dot < 0.0);
}

TEST_CASE("scalar Lyapunov candidate") {
  auto s = slow_gains();
  s.gains.gamma_theta = s.gains.gamma_rho = 1.0;
  s.theta_hat = 0.7;
  s.rho_hat = 0.5;
  CHECK(scalar_lyapunov(s, 0.0, 0.7, 2.0) == 0.0);
  CHECK(scalar_lyapunov(s, 1.0, 0.7, 2.0) == 0.5);
  CHECK_THROWS_AS(scalar_lyapunov(s, 1.0, 0.7, 0.0), InvalidArgument);
}

TEST_CASE("scalar gain guards") {
  auto s = slow_gains();
  s.gains.k = 0.0;
  CHECK_THROWS_AS(validate(s), InvalidArgument);
  s = slow_gains();
  s.rho_hat = -1.0;
  CHECK_THROWS_AS(ScalarAdaptiveController(s, rational()), InvalidArgument);
  s = slow_gains();
  s.gains.gamma_rho = -1.0;
  CHECK_THROWS_AS(validate(s), InvalidArgument);
}

TEST_CASE("scalar closed loop: V decreases and estimates settle") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    auto rp = testing::random_scalar_plant(rng);
    auto pf = PerformanceFunction::exponential(0.95, 0.5, 0.05, 1);
    ScalarControllerState st;
    st.gains = {1.0, 1.0, 1.0, 2.0 * rp.plant.theta_radius() * 0.95};
    st.rho_hat = 0.5 * rp.sign;
    st.sign_lb = rp.sign;
    ScalarAdaptiveController ctrl(st, FunnelTransform(TransformStrategy::Rational, pf, NormalizedFunction::Algebraic));
    SimConfig cfg;
    cfg.t_final = 30.0;
    auto log = simulate(rp.plant, ctrl, std::span(&rp.x0, 1), cfg);
    auto v = log.column("V");
    for (std::size_t k = 1; k < v.size(); ++k) REQUIRE(v[k] <= v[k - 1] + 1e-6 * (1 + std::abs(v[k - 1])));
    CHECK(std::abs(log.at(log.rows() - 1, "z1")) < 1e-3);
    CHECK(log.funnel_violations() == 0);
  }
}
