#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ppac/experiment.hpp"
#include "ppac/funnel.hpp"
#include "ppac/verify.hpp"

using namespace ppac;

namespace {
FunnelTransform rational() {
  return FunnelTransform(TransformStrategy::Rational, PerformanceFunction::exponential(0.9, 0.4, 0.1, 2),
                         NormalizedFunction::Algebraic);
}
}  // namespace

TEST_CASE("exponential performance function") {
  auto pf = PerformanceFunction::exponential(0.9, 0.4, 0.1, 1);
  auto d = pf.derivatives(0.0, 1);
  CHECK(d[0] == doctest::Approx(1.0));
  CHECK(d[1] == doctest::Approx(-0.36));
  CHECK_THROWS_AS(pf.derivatives(0.0, 2), UnsupportedDerivativeOrder);
  CHECK(pf(50.0) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("prescribed-time performance function") {
  auto pf = PerformanceFunction::prescribed_time(5.0, 0.1, 2);
  CHECK(pf(2.5) == doctest::Approx(0.325));
  CHECK(pf(0.0) == doctest::Approx(1.0));
  auto late = pf.derivatives(7.0, 1);
  CHECK(late[0] == 0.1);
  CHECK(late[1] == 0.0);
  // derivatives by finite differences inside the horizon
  const double h = 1e-5;
  auto d = pf.derivatives(1.3, 2);
  CHECK(d[1] == doctest::Approx((pf(1.3 + h) - pf(1.3 - h)) / (2 * h)).epsilon(1e-6));
  CHECK(d[2] == doctest::Approx(2 * 0.9 / 25.0).epsilon(1e-9));
}

TEST_CASE("performance function guards") {
  CHECK_THROWS_AS(PerformanceFunction::exponential(0.9, -0.4, 0.1, 1), InvalidArgument);
  CHECK_THROWS_AS(PerformanceFunction::exponential(0.9, 0.4, 0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(PerformanceFunction::prescribed_time(-1.0, 0.1, 2), InvalidArgument);
}

TEST_CASE("normalized functions") {
  auto a0 = psi_eval(NormalizedFunction::Algebraic, 0.0);
  CHECK(a0.psi == 0.0);
  CHECK(a0.derivative == 1.0);
  CHECK(a0.ratio == 1.0);
  auto a1 = psi_eval(NormalizedFunction::Algebraic, 1.0);
  CHECK(a1.psi == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(a1.derivative == doctest::Approx(0.35355).epsilon(1e-5));
  CHECK(a1.ratio == doctest::Approx(0.70711).epsilon(1e-5));
  const double h = 1e-6;
  CHECK(a1.derivative == doctest::Approx((psi_eval(NormalizedFunction::Algebraic, 1 + h).psi -
                                          psi_eval(NormalizedFunction::Algebraic, 1 - h).psi) / (2 * h)));
  CHECK(psi_eval(NormalizedFunction::Tanh, 40.0).psi == doctest::Approx(1.0));

  CHECK(psi_inverse(NormalizedFunction::Tanh, 0.9) == doctest::Approx(1.47222).epsilon(1e-5));
  CHECK(psi_inverse(NormalizedFunction::Algebraic, 0.70711) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(psi_inverse(NormalizedFunction::Algebraic, 0.0) == 0.0);
  CHECK(psi_inverse(NormalizedFunction::Tanh, 0.0) == 0.0);
  CHECK(psi_inverse(NormalizedFunction::Algebraic, 1.0) == std::numeric_limits<double>::infinity());
  CHECK(psi_inverse(NormalizedFunction::Tanh, -1.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(psi_inverse(NormalizedFunction::Algebraic, 1.2), DomainError);
}

TEST_CASE("rational transform at the origin") {
  auto f = transform(rational(), 0.0, 0.0);
  CHECK(f.z == 0.0);
  CHECK(f.pi == doctest::Approx(1.0));
  CHECK(f.psi == 0.0);
  CHECK(f.psi_over_x == doctest::Approx(0.36));
  CHECK(f.w == doctest::Approx(1.0));
}

TEST_CASE("rational transform at x = 1") {
  auto f = transform(rational(), 1.0, 0.0);
  CHECK(f.z == doctest::Approx(1.41421).epsilon(1e-5));
  CHECK(f.pi == doctest::Approx(2.12132).epsilon(1e-5));
  CHECK(f.w == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(f.psi == doctest::Approx(f.psi_over_x));
  const double h = 1e-5;
  const auto ft = rational();
  CHECK(f.pi == doctest::Approx((transform(ft, 1 + h, 0).z - transform(ft, 1 - h, 0).z) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("identity transform") {
  FunnelTransform ft(TransformStrategy::Identity, PerformanceFunction::exponential(0.9, 0.4, 0.1, 1),
                     NormalizedFunction::Algebraic);
  auto f = transform(ft, 7.5, 3.0);
  CHECK(f.z == 7.5);
  CHECK(f.pi == 1.0);
  CHECK(f.psi == 0.0);
  CHECK(f.w == 1.0);
  CHECK_FALSE(ft.enforces_funnel());
}

TEST_CASE("inverse transform") {
  const auto ft = rational();
  CHECK(inverse_transform(ft, 0.0, 3.0) == 0.0);
  CHECK(inverse_transform(ft, 1.41421, 0.0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(inverse_transform(ft, -1.41421, 0.0) == doctest::Approx(-1.0).epsilon(1e-5));
  for (double z : {-50.0, -3.0, 0.2, 40.0}) {
    const double x = inverse_transform(ft, z, 4.0);
    CHECK(transform(ft, x, 4.0).z == doctest::Approx(z).epsilon(1e-9));
  }
  // far out the map saturates towards the edge but stays finite and inside
  for (double z : {-1e12, 1e8}) {
    const double x = inverse_transform(ft, z, 4.0);
    CHECK(std::isfinite(x));
    CHECK(std::abs(x) < ft.bound(4.0));
  }
}

TEST_CASE("leaving the funnel throws") {
  const auto ft = rational();
  const double edge = ft.bound(10.0);
  CHECK_THROWS_AS(transform(ft, edge * 1.01, 10.0), FunnelViolation);
  CHECK_THROWS_AS(transform(ft, -edge * 1.01, 10.0), FunnelViolation);
  CHECK_NOTHROW(transform(ft, edge * 0.99, 10.0));
  FunnelTransform tan(TransformStrategy::Tangent, PerformanceFunction::exponential(4, 0.4, 0.1, 1),
                      NormalizedFunction::Algebraic);
  CHECK(tan.bound(0.0) == doctest::Approx(4.1));
  CHECK_THROWS_AS(transform(tan, 4.2, 0.0), FunnelViolation);
}

TEST_CASE("W never exceeds beta for the algebraic rational funnel") {
  const auto ft = rational();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(0.0, 20.0), u(-0.999, 0.999);
  for (int i = 0; i < 500; ++i) {
    const double ti = t(rng);
    const double x = u(rng) * ft.bound(ti);
    const auto f = transform(ft, x, ti);
    CHECK(f.w <= ft.beta()(ti) * (1 + 1e-12));
    CHECK(f.w > 0.0);
    CHECK(f.pi > 0.0);
  }
}

TEST_CASE("randomized Jacobian consistency") {
  std::mt19937_64 rng(5);
  ControllerSpec spec;
  spec.psi = NormalizedFunction::Tanh;
  spec.beta.variant = PerformanceFunction::Variant::PrescribedTime;
  CHECK(check_transform(spec, 2, 300, rng).status == CheckStatus::Pass);
  spec.psi = NormalizedFunction::Algebraic;
  spec.beta = BetaSpec{};
  CHECK(check_transform(spec, 2, 300, rng).status == CheckStatus::Pass);
  spec.strategy = TransformStrategy::Tangent;
  spec.beta.scale = 4.0;
  CHECK(check_transform(spec, 2, 300, rng).status == CheckStatus::Pass);
}

TEST_CASE("the printed Pi formula is rejected by the Jacobian check") {
  std::mt19937_64 rng(5);
  ControllerSpec spec;
  spec.pi_formula = PiFormula::Printed;
  CHECK(check_transform(spec, 2, 300, rng).status == CheckStatus::Fail);
}
