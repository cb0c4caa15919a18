// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracle_values.hpp"
#include "ppac/experiment.hpp"
#include "ppac/verify.hpp"

using namespace ppac;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ControllerRun& run_named(const ExperimentResult& r, const std::string& name) {
  for (const auto& run : r.runs) {
    if (run.spec.name == name) return run;
  }
  throw InvalidArgument("no controller named " + name);
}

double state_norm(const TrajectoryLog& log, std::size_t r) {
  double s = 0.0;
  for (int j = 1; j <= log.order(); ++j) s += std::pow(log.at(r, "x" + std::to_string(j)), 2);
  return std::sqrt(s);
}

double max_norm_between(const TrajectoryLog& log, double a, double b) {
  double m = 0.0;
  for (std::size_t r = 0; r < log.rows(); ++r) {
    const double t = log.at(r, "t");
    if (t >= a && t <= b) m = std::max(m, state_norm(log, r));
  }
  return m;
}

bool completed(const ControllerRun& run, double t_final) {
  const auto& log = run.outcome.log;
  return run.outcome.status == SimStatus::Completed && log.rows() > 0 &&
         std::abs(log.at(log.rows() - 1, "t") - t_final) < 1e-9;
}

// 1
Verdict funnel_containment(const ExperimentResult& showcase) {
  const auto& run = run_named(showcase, "proposed");
  Verdict v;
  v.pass = completed(run, 20.0) && run.funnel_violations == 0 && run.outcome.seconds < 30.0;
  v.detail = to_string(run.outcome.status) + ", " + std::to_string(run.funnel_violations) + " rows at or outside the funnel of " +
             std::to_string(run.outcome.log.rows()) + ", " + num(run.outcome.seconds) + " s";
  return v;
}

// 2
Verdict regulation(const ExperimentResult& showcase) {
  const auto& run = run_named(showcase, "proposed");
  const auto& log = run.outcome.log;
  if (!completed(run, 20.0)) return {false, "run did not complete: " + run.outcome.message};
  const std::size_t last = log.rows() - 1;
  const double x1 = std::abs(log.at(last, "x1")), x2 = std::abs(log.at(last, "x2"));
  const double late = max_norm_between(log, 15.0, 20.0), early = max_norm_between(log, 5.0, 10.0);
  return {x1 < 1e-2 && x2 < 1e-2 && late < early, "|x1(20)| = " + num(x1) + ", |x2(20)| = " + num(x2) +
                                                      ", max|x| on [15,20] = " + num(late) + " vs [5,10] = " + num(early)};
}

// 3
Verdict scalar_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  int failures = 0;
  double worst_v = 0.0, worst_rho = 0.0, worst_rate = 0.0;
  long violations = 0;
  std::string first_failure;
  for (int trial = 0; trial < 20; ++trial) {
    auto rp = testing::random_scalar_plant(rng);
    const auto pf = PerformanceFunction::exponential(0.95, 0.5, 0.05, 1);
    FunnelTransform ft(TransformStrategy::Rational, pf, NormalizedFunction::Algebraic);
    ScalarControllerState st;
    // sup W = beta(0) for this funnel; delta covers 2 sup|theta - l_theta| sup W
    st.gains = {1.0, 1.0, 1.0, 2.0 * rp.plant.theta_radius() * pf(0.0)};
    st.rho_hat = 0.5 * rp.sign;
    st.sign_lb = rp.sign;
    ScalarAdaptiveController ctrl(st, ft);
    SimConfig cfg;
    cfg.t_final = 30.0;
    auto out = run_simulation(rp.plant, ctrl, std::span(&rp.x0, 1), cfg);
    const auto& log = out.log;
    bool ok = out.status == SimStatus::Completed;
    if (ok) {
      const auto v = log.column("V");
      const auto rho = log.column("rho_hat");
      double wv = 0.0, wr = 0.0;
      for (std::size_t k = 1; k < v.size(); ++k) {
        wv = std::max(wv, (v[k] - v[k - 1]) / (1.0 + std::abs(v[k - 1])));
        wr = std::max(wr, rp.sign * (rho[k - 1] - rho[k]));
      }
      const std::size_t last = log.rows() - 1;
      const double x = log.at(last, "x1");
      const Estimates est{Eigen::VectorXd::Constant(1, log.at(last, "theta_hat1")), log.at(last, "rho_hat")};
      const auto rates = ctrl.evaluate(std::span(&x, 1), 30.0, est);
      const double rate = std::max(std::abs(rates.theta_hat_dot[0]), std::abs(rates.rho_hat_dot));
      worst_v = std::max(worst_v, wv);
      worst_rho = std::max(worst_rho, wr);
      worst_rate = std::max(worst_rate, rate);
      violations += log.funnel_violations();
      ok = wv <= 1e-6 && wr <= 1e-12 && rate < 1e-4 && log.funnel_violations() == 0;
    }
    if (!ok) {
      ++failures;
      if (first_failure.empty()) first_failure = "; first failure: trial " + std::to_string(trial) + " " + out.message;
    }
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 120.0,
          std::to_string(20 - failures) + "/20 plants, worst V step rise " + num(worst_v) + ", worst rho_hat drop " +
              num(worst_rho) + ", worst |rate| at t=30 " + num(worst_rate) + ", violations " + std::to_string(violations) +
              ", " + num(secs) + " s" + first_failure};
}

// 4
Verdict hadamard(const ExperimentResult& showcase, const Plant& plant) {
  std::mt19937_64 rng(4);
  bool ok = true;
  std::string detail;
  for (const char* name : {"proposed", "tangent"}) {
    const auto& run = run_named(showcase, name);
    const auto ctrl = build_controller(run.spec, plant);
    const Check c = check_hadamard_identity(run, *ctrl, 1000, rng);
    ok = ok && c.status == CheckStatus::Pass;
    detail += std::string(name) + ": " + c.detail + "; ";
  }
  // closed form of the n = 2 showcase pipeline
  const auto ctrl = testing::showcase_controller(plant);
  double worst = 0.0;
  for (const auto& r : oracle::kShowcasePipeline) {
    const double x[] = {r.x1, r.x2};
    const auto tr = ctrl.control_pipeline(x, r.t, {Eigen::VectorXd::Constant(1, r.theta_hat), 0.25});
    const double got[] = {tr.steps[1].w_frobenius2, tr.omega_bar2, tr.kappa, tr.steps[1].w[0], tr.omega};
    const double want[] = {r.w2_frobenius2, r.omega_bar2, r.kappa, r.w2, r.omega};
    for (std::size_t i = 0; i < 5; ++i) worst = std::max(worst, std::abs(got[i] - want[i]) / std::abs(want[i]));
  }
  ok = ok && worst < 1e-6;
  detail += "symbolic reference worst relative error " + num(worst);
  return {ok, detail};
}

// 5
Verdict differentiation(const ExperimentResult& showcase, const Plant& plant) {
  std::mt19937_64 rng(5);
  const Check jets = check_jet_gradients(1000, rng);
  bool ok = jets.status == CheckStatus::Pass;
  std::string detail = "random expressions: " + jets.detail;
  for (const char* name : {"proposed", "tangent", "baseline"}) {
    const auto& run = run_named(showcase, name);
    const auto ctrl = build_controller(run.spec, plant);
    const Check c = check_virtual_law_partials(run, *ctrl, 1000, rng);
    ok = ok && c.status == CheckStatus::Pass;
    detail += "; d alpha1 (" + std::string(name) + "): " + c.detail;
  }
  return {ok, detail};
}

// 6
Verdict transform_correctness(const ExperimentConfig& cfg) {
  std::mt19937_64 rng(6);
  bool ok = true;
  std::string detail;
  std::vector<ControllerSpec> specs;
  for (const auto& c : cfg.controllers) {
    if (c.strategy != TransformStrategy::Identity) specs.push_back(c);
  }
  ControllerSpec tanh_pt = specs.back();
  tanh_pt.name = "tanh prescribed-time";
  tanh_pt.psi = NormalizedFunction::Tanh;
  tanh_pt.beta.variant = PerformanceFunction::Variant::PrescribedTime;
  specs.push_back(tanh_pt);
  for (const auto& s : specs) {
    const Check c = check_transform(s, 2, 1000, rng);
    ok = ok && c.status == CheckStatus::Pass;
    detail += s.name + ": " + c.detail + "; ";
  }
  ControllerSpec printed = cfg.controllers.back();
  printed.pi_formula = PiFormula::Printed;
  const Check p = check_transform(printed, 2, 1000, rng);
  ok = ok && p.status == CheckStatus::Fail;
  detail += "printed Pi rejected: " + std::string(p.status == CheckStatus::Fail ? "yes" : "no");
  return {ok, detail};
}

// 7
Verdict baseline_comparison(const ExperimentResult& showcase) {
  const auto& base = run_named(showcase, "baseline");
  const auto& tan = run_named(showcase, "tangent");
  const auto& prop = run_named(showcase, "proposed");
  const bool ok = completed(base, 20.0) && completed(prop, 20.0) && completed(tan, 20.0) && base.terminal_norm < 0.1 &&
                  prop.terminal_norm < 0.1 && tan.funnel_violations == 0 && prop.funnel_violations == 0;
  return {ok, "|x(20)| baseline " + num(base.terminal_norm) + ", tangent " + num(tan.terminal_norm) + ", proposed " +
                  num(prop.terminal_norm) + "; funnel rows violated: tangent " + std::to_string(tan.funnel_violations) +
                  ", proposed " + std::to_string(prop.funnel_violations) + ", baseline (recorded only) " +
                  std::to_string(base.funnel_violations)};
}

// 8
Verdict first_order_equivalence() {
  const ExperimentConfig cfg = preset_config("scalar-demo");
  const Plant plant = build_plant(cfg.plant);
  ControllerSpec scalar = cfg.controllers.front();
  ControllerSpec bs = scalar;
  bs.type = ControllerType::Backstepping;
  const auto a = build_controller(scalar, plant);
  const auto b = build_controller(bs, plant);
  SimConfig sc = cfg.sim;
  const auto la = simulate(plant, *a, cfg.x0, sc);
  const auto lb = simulate(plant, *b, cfg.x0, sc);
  if (la.rows() != lb.rows() || la.columns() != lb.columns()) return {false, "logs differ in shape"};
  double worst = 0.0;
  for (std::size_t r = 0; r < la.rows(); ++r) {
    for (std::size_t c = 0; c < la.columns().size(); ++c) {
      const double x = la.row(r)[c], y = lb.row(r)[c];
      worst = std::max(worst, std::abs(x - y) / (1.0 + std::abs(x)));
    }
  }
  return {worst <= 1e-12, std::to_string(la.rows()) + " rows, worst relative difference over all columns " + num(worst)};
}

// 9
Verdict integrator_order() {
  const Plant plant = smoothed_showcase_plant(10.0);
  const auto ctrl = testing::showcase_controller(plant);
  const double x0[] = {1.0, -1.0};
  std::vector<std::vector<double>> finals;
  for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_final = 2.0;
    const auto log = simulate(plant, ctrl, x0, cfg);
    const auto& row = log.row(log.rows() - 1);
    finals.push_back({row[log.column_index("x1")], row[log.column_index("x2")], row[log.column_index("theta_hat1")],
                      row[log.column_index("rho_hat")]});
  }
  auto diff = [&](std::size_t a, std::size_t b) {
    double m = 0.0;
    for (std::size_t j = 0; j < finals[a].size(); ++j) m = std::max(m, std::abs(finals[a][j] - finals[b][j]));
    return m;
  };
  const double p1 = std::log2(diff(0, 1) / diff(1, 2));
  const double p2 = std::log2(diff(1, 2) / diff(2, 3));
  const bool ok = p1 >= 3.5 && p1 <= 4.5 && p2 >= 3.5 && p2 <= 4.5;
  return {ok, "observed order " + num(p1) + " (dt 0.01/0.005/0.0025), " + num(p2) + " (dt 0.005/0.0025/0.00125)"};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig showcase_cfg = preset_config("paper-sim");
  const Plant plant = build_plant(showcase_cfg.plant);
  std::fprintf(stderr, "simulating the paper-sim preset...\n");
  const ExperimentResult showcase = run_experiment(showcase_cfg, 0);

  struct Row {
    int id;
    const char* title;
    Verdict v;
  };
  std::vector<Row> rows;
  auto record = [&](int id, const char* title, auto fn) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str());
    std::fflush(stdout);
    rows.push_back({id, title, v});
  };
  record(1, "funnel containment", [&] { return funnel_containment(showcase); });
  record(2, "asymptotic regulation", [&] { return regulation(showcase); });
  record(3, "scalar Lyapunov suite", [&] { return scalar_suite(); });
  record(4, "Hadamard identity", [&] { return hadamard(showcase, plant); });
  record(5, "differentiation integrity", [&] { return differentiation(showcase, plant); });
  record(6, "transform correctness", [&] { return transform_correctness(showcase_cfg); });
  record(7, "baseline comparison", [&] { return baseline_comparison(showcase); });
  record(8, "first-order equivalence", [&] { return first_order_equivalence(); });
  record(9, "integrator order", [&] { return integrator_order(); });

  const auto passed = std::count_if(rows.begin(), rows.end(), [](const Row& r) { return r.v.pass; });
  std::printf("%ld/%zu criteria pass (%.1f s)\n", static_cast<long>(passed), rows.size(), seconds_since(t0));
  return passed == static_cast<long>(rows.size()) ? 0 : 1;
}
