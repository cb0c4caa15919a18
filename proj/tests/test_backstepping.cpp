#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracle_values.hpp"
#include "ppac/backstepping.hpp"
#include "ppac/quadrature.hpp"
#include "ppac/sim.hpp"
#include "ppac/verify.hpp"

using namespace ppac;

namespace {
Estimates est(double theta_hat, double rho_hat = 0.25) { return {Eigen::VectorXd::Constant(1, theta_hat), rho_hat}; }
}  // namespace

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int n : {1, 2, 5, 16, 32}) {
    const auto& r = gauss_legendre_unit(n);
    double w = 0, m = 0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      w += r.weights[k];
      m += r.weights[k] * std::pow(r.nodes[k], 2 * n - 1);
    }
    CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m == doctest::Approx(1.0 / (2 * n)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gauss_legendre_unit(0), InvalidArgument);
}

TEST_CASE("Hadamard factor of a linear map is its transpose") {
  Eigen::Matrix2d a;
  a << 1.5, -2.0, 0.25, 3.0;
  auto f = [&](std::span<const Jet> z) {
    return std::vector<Jet>{a(0, 0) * z[0] + a(0, 1) * z[1], a(1, 0) * z[0] + a(1, 1) * z[1]};
  };
  const double zbar[] = {0.7, -1.3};
  for (int nodes : {1, 4, 16}) {
    auto h = hadamard_factor(f, zbar, nodes);
    CHECK((h.w - a.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(h.residual < 1e-14);
  }
  auto zero = hadamard_factor([](std::span<const Jet>) { return std::vector<Jet>{Jet(0.0)}; }, zbar, 8);
  CHECK(zero.w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Hadamard factor of a nonlinear map reproduces it") {
  auto f = [](std::span<const Jet> z) { return std::vector<Jet>{z[0] * sin(z[1]) + z[1] * exp(z[0]) - z[1]}; };
  const double zbar[] = {0.4, 0.9};
  auto h = hadamard_factor(f, zbar, 16);
  const double fv = 0.4 * std::sin(0.9) + 0.9 * std::exp(0.4) - 0.9;
  CHECK(h.w(0, 0) * zbar[0] + h.w(1, 0) * zbar[1] == doctest::Approx(fv).epsilon(1e-13));
  CHECK(h.residual < 1e-12);
}

TEST_CASE("pipeline matches the symbolic reference") {
  const Plant plant = showcase_plant();
  const auto ctrl = testing::showcase_controller(plant);
  for (const auto& r : oracle::kShowcasePipeline) {
    const double x[] = {r.x1, r.x2};
    auto tr = ctrl.control_pipeline(x, r.t, est(r.theta_hat));
    CAPTURE(r.t);
    REQUIRE(tr.steps.size() == 2);
    CHECK(tr.steps[0].z == doctest::Approx(r.z1).epsilon(1e-10));
    CHECK(tr.steps[0].alpha == doctest::Approx(r.alpha1).epsilon(1e-10));
    CHECK(tr.steps[0].alpha_partials[0] == doctest::Approx(r.dalpha1_dx1).epsilon(1e-10));
    CHECK(tr.steps[1].z == doctest::Approx(r.z2).epsilon(1e-10));
    CHECK(tr.steps[1].w_frobenius2 == doctest::Approx(r.w2_frobenius2).epsilon(1e-6));
    CHECK(tr.omega_bar2 == doctest::Approx(r.omega_bar2).epsilon(1e-6));
    CHECK(tr.kappa == doctest::Approx(r.kappa).epsilon(1e-6));
    CHECK(tr.steps[1].w[0] == doctest::Approx(r.w2).epsilon(1e-10));
    CHECK(tr.omega == doctest::Approx(r.omega).epsilon(1e-10));
  }
}

TEST_CASE("w2 of the showcase is -d alpha1/d x1 times phi1") {
  const Plant plant = showcase_plant();
  const auto ctrl = testing::showcase_controller(plant);
  const double x[] = {0.6, -0.4};
  auto tr = ctrl.control_pipeline(x, 1.2, est(0.8));
  CHECK(tr.steps[1].w[0] == doctest::Approx(-tr.steps[0].alpha_partials[0] * x[0]).epsilon(1e-14));
}

TEST_CASE("origin is a fixpoint of the recursion") {
  const Plant plant = showcase_plant();
  for (auto s : {TransformStrategy::Rational, TransformStrategy::Tangent, TransformStrategy::Identity}) {
    const auto ctrl = testing::showcase_controller(plant, s);
    const double x[] = {0.0, 0.0};
    auto tr = ctrl.control_pipeline(x, 3.0, est(1.7));
    for (const auto& st : tr.steps) {
      CHECK(st.z == 0.0);
      for (double w : st.w) CHECK(w == 0.0);
      for (double t : st.tau) CHECK(t == 0.0);
    }
    CHECK(tr.steps[0].alpha == 0.0);
    CHECK(tr.omega == 0.0);
    CHECK(tr.u == 0.0);
    CHECK(tr.rho_hat_dot == 0.0);
    CHECK(tr.theta_hat_dot[0] == 0.0);
  }
}

TEST_CASE("identity baseline differs from the funnel controller away from the origin") {
  const Plant plant = showcase_plant();
  const double x[] = {1.0, -1.0};
  auto a = testing::showcase_controller(plant).evaluate(x, 0.0, est(0.0));
  auto b = testing::showcase_controller(plant, TransformStrategy::Identity).evaluate(x, 0.0, est(0.0));
  CHECK(std::isfinite(a.u));
  CHECK(std::isfinite(b.u));
  CHECK(a.u != b.u);
}

TEST_CASE("structural signs along random states") {
  const Plant plant = showcase_plant();
  const auto ctrl = testing::showcase_controller(plant);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> t(0, 15), u(-0.95, 0.95), x2(-3, 3), th(-1, 5);
  for (int i = 0; i < 50; ++i) {
    const double ti = t(rng);
    const double x[] = {u(rng) * ctrl.funnel().bound(ti), x2(rng)};
    auto tr = ctrl.control_pipeline(x, ti, est(th(rng)));
    CHECK(tr.kappa >= 0.1);
    CHECK(tr.rho_hat_dot >= 0.0);
    CHECK(tr.residual < kHadamardTolerance);
  }
}

TEST_CASE("virtual law partials against finite differences") {
  const Plant plant = showcase_plant();
  const auto ctrl = testing::showcase_controller(plant);
  const double x1 = 0.45;
  Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 1.3);
  const double beta[] = {0.8, -0.2};
  auto r = ctrl.virtual_law(1, std::span(&x1, 1), th, beta);
  auto f = [&](std::span<const double> p) {
    Eigen::VectorXd t2 = Eigen::VectorXd::Constant(1, p[1]);
    const double b[] = {p[2], p[3]};
    return ctrl.virtual_law(1, p.subspan(0, 1), t2, b).value;
  };
  const std::vector<double> p{x1, 1.3, 0.8, -0.2};
  REQUIRE(r.gradient.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(relative_error(r.gradient[i], central_difference(f, p, i, 1e-3)) < 1e-6);
}

TEST_CASE("first-order backstepping reduces to the scalar controller") {
  const FunnelTransform ft(TransformStrategy::Rational, PerformanceFunction::exponential(0.9, 0.4, 0.1, 1),
                           NormalizedFunction::Algebraic);
  BacksteppingGains g;
  g.k = {0.7};
  g.gamma = Eigen::MatrixXd::Constant(1, 1, 0.3);
  g.gamma_rho = 0.4;
  g.delta = 1.5;
  BacksteppingState s;
  s.theta_hat = Eigen::VectorXd::Constant(1, 0.2);
  s.rho_hat = 0.5;
  BacksteppingController bs(testing::scalar_regressors(), ft, g, s);
  ScalarControllerState ss;
  ss.gains = {0.7, 0.3, 0.4, 1.5};
  ss.theta_hat = 0.2;
  ss.rho_hat = 0.5;
  ScalarAdaptiveController sc(ss, ft);
  for (double x : {-1.1, -0.3, 0.0, 0.8, 1.2}) {
    const auto a = bs.evaluate(std::span(&x, 1), 0.7, est(-0.4, 0.9));
    const auto b = sc.evaluate(std::span(&x, 1), 0.7, est(-0.4, 0.9));
    CHECK(a.u == doctest::Approx(b.u).epsilon(1e-14));
    CHECK(a.theta_hat_dot[0] == doctest::Approx(b.theta_hat_dot[0]).epsilon(1e-14));
    CHECK(a.rho_hat_dot == doctest::Approx(b.rho_hat_dot).epsilon(1e-14));
  }
}

TEST_CASE("backstepping guards") {
  const Plant plant = showcase_plant();
  auto g = testing::showcase_gains();
  g.k = {0.1, -1.0};
  CHECK_THROWS_AS(testing::showcase_controller(plant, TransformStrategy::Rational, g), InvalidArgument);
  g = testing::showcase_gains();
  g.k = {0.1};
  CHECK_THROWS_AS(testing::showcase_controller(plant, TransformStrategy::Rational, g), InvalidArgument);
  g = testing::showcase_gains();
  g.gamma(0, 0) = -0.1;
  CHECK_THROWS_AS(testing::showcase_controller(plant, TransformStrategy::Rational, g), InvalidArgument);
  g = testing::showcase_gains();
  g.eps_omega = 0.0;
  CHECK_THROWS_AS(testing::showcase_controller(plant, TransformStrategy::Rational, g), InvalidArgument);
}

TEST_CASE("showcase Lyapunov function decreases when delta covers the theta box") {
  // theta in [-1, 5] around l_theta = 2 needs delta >= 3
  const Plant plant = showcase_plant();
  auto g = testing::showcase_gains();
  g.delta = 3.0;
  const auto ctrl = testing::showcase_controller(plant, TransformStrategy::Rational, g);
  SimConfig cfg;
  cfg.t_final = 8.0;
  const double x0[] = {1.0, -1.0};
  auto log = simulate(plant, ctrl, x0, cfg);
  auto v = log.column("V");
  double worst = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) worst = std::max(worst, (v[k] - v[k - 1]) / (1 + std::abs(v[k - 1])));
  CHECK(worst <= 1e-6);
  CHECK(log.funnel_violations() == 0);
}
