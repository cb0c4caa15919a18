#include "ppac/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ppac/backstepping.hpp"
#include "ppac/csv.hpp"

namespace ppac {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

}  // namespace

std::string random_expression(std::mt19937_64& rng, int vars, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  auto leaf = [&]() -> std::string {
    if (pick(rng) < 7) return "x" + std::to_string(std::uniform_int_distribution<int>(1, vars)(rng));
    std::ostringstream s;
    s.precision(3);
    s << uniform(rng, 0.2, 2.0);
    return s.str();
  };
  if (depth <= 0) return leaf();
  const std::string a = random_expression(rng, vars, depth - 1);
  switch (pick(rng)) {
    case 0:
      return "sin(" + a + ")";
    case 1:
      return "cos(" + a + ")";
    case 2:
      return "tanh(" + a + ")";
    case 3:
      return "exp(tanh(" + a + "))";
    case 4:
      return "(" + a + ")^2";
    case 5:
      return "(" + a + ")/(1.5 + sin(" + random_expression(rng, vars, depth - 2) + "))";
    case 6:
      return "(" + a + ") - (" + random_expression(rng, vars, depth - 1) + ")";
    case 7:
    case 8:
      return "(" + a + ")*(" + random_expression(rng, vars, depth - 1) + ")";
    default:
      return "(" + a + ") + (" + random_expression(rng, vars, depth - 1) + ")";
  }
}

double central_difference(const std::function<double(std::span<const double>)>& f, std::vector<double> x, std::size_t i,
                          double h) {
  const double x0 = x[i];
  auto d = [&](double step) {
    x[i] = x0 + step;
    const double fp = f(x);
    x[i] = x0 - step;
    const double fm = f(x);
    x[i] = x0;
    return (fp - fm) / (2.0 * step);
  };
  const double d1 = d(h);
  const double d2 = d(0.5 * h);
  return (4.0 * d2 - d1) / 3.0;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Check check_jet_gradients(int samples, std::mt19937_64& rng) {
  constexpr int vars = 3;
  const SeedRegistry reg = SeedRegistry::coordinates(vars);
  double worst = 0.0;
  std::string worst_expr;
  for (int s = 0; s < samples; ++s) {
    const Expression e = Expression::parse(random_expression(rng, vars));
    std::vector<double> x(vars);
    for (double& v : x) v = uniform(rng, -1.0, 1.0);
    const auto vg = evaluate_with_gradient([&](std::span<const Jet> xs) { return e.evaluate(xs); }, x, reg);
    auto f = [&](std::span<const double> p) { return e.evaluate(0.0, p); };
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double err = relative_error(vg.gradient[i], central_difference(f, x, i, 1e-3));
      if (err > worst) {
        worst = err;
        worst_expr = e.text();
      }
    }
  }
  Check c{"jet gradients vs finite differences", "expressions", worst < 1e-6 ? CheckStatus::Pass : CheckStatus::Fail,
          std::to_string(samples) + " random expressions, worst relative error " + fmt(worst)};
  if (c.status == CheckStatus::Fail) c.detail += " at " + worst_expr;
  return c;
}

Check check_transform(const ControllerSpec& spec, int plant_order, int samples, std::mt19937_64& rng) {
  const FunnelTransform ft = build_transform(spec, plant_order);
  Check c{"transform Jacobian and inverse", spec.name, CheckStatus::Pass, ""};
  double worst_pi = 0.0;
  double worst_psi = 0.0;
  double worst_inv = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double t = uniform(rng, 0.01, 20.0);
    const double beta = ft.beta()(t);
    const double u = uniform(rng, -0.95, 0.95);
    double x = u;
    switch (spec.strategy) {
      case TransformStrategy::Rational:
        x = psi_inverse(spec.psi, u * std::min(beta, 1.0));
        break;
      case TransformStrategy::Tangent:
        x = u * beta;
        break;
      case TransformStrategy::Identity:
        x = 2.0 * u;
        break;
    }
    const auto f = transform(ft, x, t);
    auto zx = [&](std::span<const double> p) { return transform(ft, p[0], t).z; };
    auto zt = [&](std::span<const double> p) { return transform(ft, x, p[0]).z; };
    const double hx = 1e-4 * std::max(1e-2, std::abs(x));
    worst_pi = std::max(worst_pi, relative_error(f.pi, central_difference(zx, {x}, 0, hx)));
    worst_psi = std::max(worst_psi, relative_error(f.psi, central_difference(zt, {t}, 0, 1e-4)));
    const double back = inverse_transform(ft, f.z, t);
    worst_inv = std::max(worst_inv, std::abs(back - x) / std::max(1.0, std::abs(x)));
  }
  c.detail = "worst relative error: Pi " + fmt(worst_pi) + ", Psi " + fmt(worst_psi) + "; inverse round trip " +
             fmt(worst_inv);
  if (!(worst_pi < 1e-6 && worst_psi < 1e-6 && worst_inv < 1e-10)) c.status = CheckStatus::Fail;
  return c;
}

namespace {

// Row indices spread over the log, plus random ones.
std::vector<std::size_t> sample_rows(const TrajectoryLog& log, int samples, std::mt19937_64& rng) {
  std::vector<std::size_t> rows;
  if (log.rows() == 0) return rows;
  std::uniform_int_distribution<std::size_t> pick(0, log.rows() - 1);
  for (int s = 0; s < samples; ++s) rows.push_back(pick(rng));
  return rows;
}

struct RowState {
  std::vector<double> x;
  double t = 0.0;
  Estimates est;
};

RowState row_state(const TrajectoryLog& log, std::size_t r) {
  RowState s;
  s.t = log.at(r, "t");
  for (int j = 1; j <= log.order(); ++j) s.x.push_back(log.at(r, "x" + std::to_string(j)));
  s.est.theta_hat.resize(log.params());
  for (int j = 1; j <= log.params(); ++j) s.est.theta_hat[j - 1] = log.at(r, "theta_hat" + std::to_string(j));
  s.est.rho_hat = log.at(r, "rho_hat");
  return s;
}

}  // namespace

Check check_virtual_law_partials(const ControllerRun& run, const Controller& ctrl, int samples, std::mt19937_64& rng) {
  Check c{"virtual law partials vs finite differences", run.spec.name, CheckStatus::Pass, ""};
  const auto* bs = dynamic_cast<const BacksteppingController*>(&ctrl);
  if (bs == nullptr || ctrl.order() < 2) {
    c.status = CheckStatus::NotApplicable;
    c.detail = "no virtual laws";
    return c;
  }
  const auto& log = run.outcome.log;
  const int q = ctrl.params();
  double worst = 0.0;
  int evaluated = 0;
  for (std::size_t r : sample_rows(log, samples, rng)) {
    const RowState s = row_state(log, r);
    const std::vector<double> beta = ctrl.funnel().beta().derivatives(s.t, 1);
    // arguments in gradient order: x1, theta_hat, beta, beta'
    std::vector<double> args{s.x[0]};
    for (int j = 0; j < q; ++j) args.push_back(s.est.theta_hat[j]);
    args.insert(args.end(), beta.begin(), beta.end());
    auto alpha = [&](std::span<const double> a) {
      Eigen::VectorXd th(q);
      for (int j = 0; j < q; ++j) th[j] = a[static_cast<std::size_t>(1 + j)];
      const std::vector<double> b(a.begin() + 1 + q, a.end());
      return bs->virtual_law(1, a.subspan(0, 1), th, b).value;
    };
    ValueAndGradient vg;
    try {
      vg = bs->virtual_law(1, s.x, s.est.theta_hat, beta);
    } catch (const FunnelViolation&) {
      continue;  // rows recorded after leaving the funnel
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      const double h = 1e-4 * std::max(1e-2, std::abs(args[i]));
      worst = std::max(worst, relative_error(vg.gradient[i], central_difference(alpha, args, i, h)));
    }
    ++evaluated;
  }
  c.detail = std::to_string(evaluated) + " states, worst relative error " + fmt(worst);
  if (evaluated == 0) {
    c.status = CheckStatus::NotApplicable;
    c.detail = "no in-funnel states to sample";
  } else if (!(worst < 1e-6)) {
    c.status = CheckStatus::Fail;
  }
  return c;
}

Check check_hadamard_identity(const ControllerRun& run, const Controller& ctrl, int samples, std::mt19937_64& rng) {
  Check c{"Hadamard identity at sampled states", run.spec.name, CheckStatus::Pass, ""};
  const auto* bs = dynamic_cast<const BacksteppingController*>(&ctrl);
  if (bs == nullptr || ctrl.order() < 2) {
    c.status = CheckStatus::NotApplicable;
    c.detail = "no Hadamard split for first-order plants";
    return c;
  }
  const auto& log = run.outcome.log;
  double worst = 0.0;
  int evaluated = 0;
  std::string failure;
  for (std::size_t r : sample_rows(log, samples, rng)) {
    const RowState s = row_state(log, r);
    try {
      const RecursionTrace tr = bs->control_pipeline(s.x, s.t, s.est);
      for (const auto& st : tr.steps) worst = std::max(worst, st.residual);
      worst = std::max(worst, tr.residual);
    } catch (const FunnelViolation&) {
      continue;
    } catch (const FactorizationError& e) {
      failure = e.what();
      worst = std::max(worst, 1.0);
    }
    ++evaluated;
  }
  c.detail = std::to_string(evaluated) + " states, worst relative residual " + fmt(worst);
  if (!failure.empty()) c.detail += "; " + failure;
  if (evaluated == 0) {
    c.status = CheckStatus::NotApplicable;
    c.detail = "no in-funnel states to sample";
  } else if (!(worst < kHadamardTolerance)) {
    c.status = CheckStatus::Fail;
  }
  return c;
}

Check check_csv_roundtrip(const ControllerRun& run) {
  Check c{"CSV round trip and violation recount", run.spec.name, CheckStatus::Pass, ""};
  std::stringstream buf;
  write_csv(run.outcome.log, buf);
  const TrajectoryLog back = read_csv(buf, run.outcome.log.controller());
  const bool same = back == run.outcome.log;
  // independent scan of the text: |x1| >= bound
  std::stringstream again;
  write_csv(run.outcome.log, again);
  std::string line;
  std::getline(again, line);
  long count = 0;
  while (std::getline(again, line)) {
    std::vector<std::string> cells;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) cells.push_back(cell);
    const double x1 = parse_double(cells[1]);
    const double bound = parse_double(cells[back.column_index("bound")]);
    if (!(std::abs(x1) < bound)) ++count;
  }
  c.detail = std::string(same ? "identical" : "differs") + " after re-parsing; violations " + std::to_string(count) +
             " (summary " + std::to_string(run.funnel_violations) + ")";
  if (!same || count != run.funnel_violations) c.status = CheckStatus::Fail;
  return c;
}

bool VerifyReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.status == CheckStatus::Fail; });
}

VerifyReport verify_experiment(const ExperimentConfig& cfg, const VerifyOptions& opts) {
  VerifyReport rep;
  std::mt19937_64 rng(opts.seed);
  rep.checks.push_back(check_jet_gradients(opts.samples, rng));
  const Plant plant = build_plant(cfg.plant);
  for (const auto& spec : cfg.controllers) rep.checks.push_back(check_transform(spec, plant.order(), opts.samples, rng));

  rep.result = run_experiment(cfg, opts.threads);
  for (const auto& run : rep.result.runs) {
    const auto ctrl = build_controller(run.spec, plant);
    for (const auto& c : run.checks) rep.checks.push_back(c);
    rep.checks.push_back(check_virtual_law_partials(run, *ctrl, std::max(1, opts.samples / 10), rng));
    rep.checks.push_back(check_hadamard_identity(run, *ctrl, opts.samples, rng));
    rep.checks.push_back(check_csv_roundtrip(run));
  }
  return rep;
}

std::string format_report(const std::vector<Check>& checks) {
  std::size_t wn = 5, ws = 7;
  for (const auto& c : checks) {
    wn = std::max(wn, c.name.size());
    ws = std::max(ws, c.subject.size());
  }
  std::ostringstream o;
  o << std::left << std::setw(static_cast<int>(wn)) << "check" << "  " << std::setw(static_cast<int>(ws)) << "subject"
    << "  " << std::setw(14) << "result" << "  detail\n";
  for (const auto& c : checks) {
    o << std::setw(static_cast<int>(wn)) << c.name << "  " << std::setw(static_cast<int>(ws)) << c.subject << "  "
      << std::setw(14) << to_string(c.status) << "  " << c.detail << '\n';
  }
  return o.str();
}

}  // namespace ppac
