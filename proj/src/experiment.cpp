#include "ppac/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ppac/csv.hpp"
#include "ppac/expression.hpp"
#include "ppac/scalar_adaptive.hpp"
#include "ppac/svg.hpp"

namespace ppac {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : InvalidArgument(line > 0 ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// '#' or ';' starts a comment at the beginning of a line or after whitespace.
std::string strip_comment(const std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((s[i] == '#' || s[i] == ';') && (i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t')) return s.substr(0, i);
  }
  return s;
}

}  // namespace

IniDocument IniDocument::parse(std::istream& in, const std::string& source) {
  IniDocument doc;
  doc.source = source;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, lineno, "unterminated section header");
      IniSection sec;
      sec.name = trim(line.substr(1, line.size() - 2));
      sec.line = lineno;
      if (sec.name.empty()) throw ConfigError(source, lineno, "empty section name");
      for (const auto& s : doc.sections) {
        if (s.name == sec.name) {
          throw ConfigError(source, lineno, "section [" + sec.name + "] repeats line " + std::to_string(s.line));
        }
      }
      doc.sections.push_back(std::move(sec));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, lineno, "expected 'key = value'");
    if (doc.sections.empty()) throw ConfigError(source, lineno, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, lineno, "empty key");
    auto& entries = doc.sections.back().entries;
    if (entries.count(key)) {
      throw ConfigError(source, lineno, "key '" + key + "' repeats line " + std::to_string(entries[key].line));
    }
    entries[key] = IniEntry{value, lineno, false};
  }
  return doc;
}

namespace {

// Typed access to one section; every read marks the key as used so leftovers
// can be reported as unknown.
class Reader {
 public:
  Reader(const std::string& source, IniSection& sec) : source_(source), sec_(sec) {}

  bool has(const std::string& key) const { return sec_.entries.count(key) > 0; }
  int line_of(const std::string& key) const { return has(key) ? sec_.entries.at(key).line : sec_.line; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(source_, line_of(key), "[" + sec_.name + "] " + key + ": " + what);
  }

  std::optional<std::string> text(const std::string& key) {
    auto it = sec_.entries.find(key);
    if (it == sec_.entries.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }

  std::string text(const std::string& key, const std::string& fallback) { return text(key).value_or(fallback); }

  std::string required(const std::string& key) {
    auto v = text(key);
    if (!v) throw ConfigError(source_, sec_.line, "[" + sec_.name + "] missing required key '" + key + "'");
    return *v;
  }

  double number_of(const std::string& key, const std::string& s) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      fail(key, "'" + s + "' is not a number");
    }
    if (pos != s.size()) fail(key, "'" + s + "' is not a number");
    if (!std::isfinite(v)) fail(key, "value must be finite");
    return v;
  }

  std::optional<double> number(const std::string& key) {
    auto v = text(key);
    if (!v) return std::nullopt;
    return number_of(key, *v);
  }

  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  std::optional<int> integer(const std::string& key) {
    auto v = number(key);
    if (!v) return std::nullopt;
    if (*v != std::floor(*v) || std::abs(*v) > 1e9) fail(key, "expected an integer");
    return static_cast<int>(*v);
  }

  std::optional<std::vector<double>> list(const std::string& key) {
    auto v = text(key);
    if (!v) return std::nullopt;
    std::vector<double> out;
    std::stringstream s(*v);
    std::string item;
    while (std::getline(s, item, ',')) out.push_back(number_of(key, trim(item)));
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  std::optional<std::pair<double, double>> interval(const std::string& key) {
    auto v = list(key);
    if (!v) return std::nullopt;
    if (v->size() != 2) fail(key, "expected 'lower, upper'");
    if (!((*v)[0] <= (*v)[1])) fail(key, "lower bound exceeds upper bound");
    return std::pair{(*v)[0], (*v)[1]};
  }

  template <class E>
  E choice(const std::string& key, const std::vector<std::pair<std::string, E>>& options, E fallback) {
    auto v = text(key);
    if (!v) return fallback;
    for (const auto& [name, e] : options) {
      if (*v == name) return e;
    }
    std::string names;
    for (const auto& o : options) names += (names.empty() ? "" : ", ") + o.first;
    fail(key, "unknown value '" + *v + "' (expected one of: " + names + ")");
  }

  void reject_unknown() const {
    for (const auto& [key, e] : sec_.entries) {
      if (!e.used) throw ConfigError(source_, e.line, "[" + sec_.name + "] unknown key '" + key + "'");
    }
  }

 private:
  const std::string& source_;
  IniSection& sec_;
};

const std::vector<std::pair<std::string, TransformStrategy>> kStrategies{
    {"rational", TransformStrategy::Rational}, {"tangent", TransformStrategy::Tangent}, {"identity", TransformStrategy::Identity}};
const std::vector<std::pair<std::string, NormalizedFunction>> kPsi{{"algebraic", NormalizedFunction::Algebraic},
                                                                    {"tanh", NormalizedFunction::Tanh}};
const std::vector<std::pair<std::string, FunnelPolicy>> kPolicies{{"abort", FunnelPolicy::Abort},
                                                                   {"record-and-continue", FunnelPolicy::RecordAndContinue}};

void read_plant(Reader& r, PlantSpec& p) {
  p.kind = r.choice<PlantKind>(
      "kind", {{"showcase", PlantKind::Showcase}, {"showcase-smoothed", PlantKind::SmoothedShowcase}, {"expressions", PlantKind::Expressions}},
      PlantKind::Showcase);
  if (p.kind == PlantKind::SmoothedShowcase) {
    p.sharpness = r.number("sharpness", 50.0);
    if (!(p.sharpness > 0.0)) r.fail("sharpness", "must be > 0");
  }
  if (p.kind != PlantKind::Expressions) {
    p.order = 2;
    p.params = 1;
    return;
  }
  auto order = r.integer("order");
  if (!order) r.fail("order", "expression plants need 'order'");
  if (*order < 1 || *order > 6) r.fail("order", "must lie in [1, 6]");
  p.order = *order;
  for (int i = 1; i <= p.order; ++i) {
    const std::string key = "phi" + std::to_string(i);
    std::vector<std::string> comps;
    std::stringstream s(r.required(key));
    std::string item;
    while (std::getline(s, item, ',')) comps.push_back(trim(item));
    if (i == 1) p.params = static_cast<int>(comps.size());
    if (static_cast<int>(comps.size()) != p.params) r.fail(key, "every phi_i needs the same number of components");
    for (const auto& c : comps) {
      try {
        const Expression e = Expression::parse(c);
        if (e.uses_time()) r.fail(key, "regressors may not depend on t");
        if (e.uses_nonsmooth()) r.fail(key, "regressors must be smooth (no sign)");
        if (e.max_state_index() > i) r.fail(key, "phi_" + std::to_string(i) + " may only use x1..x" + std::to_string(i));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        r.fail(key, e.what());
      }
    }
    p.phi.push_back(std::move(comps));
  }
  for (int j = 1; j <= p.params; ++j) {
    const std::string key = "theta" + std::to_string(j);
    p.theta.push_back(r.required(key));
    p.theta_bounds.push_back(r.interval(key + "_bounds"));
  }
  p.b = r.required("b");
  p.b_bounds = r.interval("b_bounds");
}

void read_controller(Reader& r, ControllerSpec& c) {
  c.type = r.choice<ControllerType>("type", {{"scalar", ControllerType::Scalar}, {"backstepping", ControllerType::Backstepping}},
                                    ControllerType::Backstepping);
  c.strategy = r.choice("strategy", kStrategies, TransformStrategy::Rational);
  c.psi = r.choice("psi", kPsi, NormalizedFunction::Algebraic);
  c.pi_formula = r.choice<PiFormula>("pi_formula", {{"exact", PiFormula::Exact}, {"printed", PiFormula::Printed}},
                                     PiFormula::Exact);
  c.beta.variant = r.choice<PerformanceFunction::Variant>(
      "beta", {{"exponential", PerformanceFunction::Variant::Exponential}, {"prescribed-time", PerformanceFunction::Variant::PrescribedTime}},
      PerformanceFunction::Variant::Exponential);
  c.beta.scale = r.number("beta_scale", c.beta.scale);
  c.beta.rate = r.number("beta_rate", c.beta.rate);
  c.beta.beta_inf = r.number("beta_inf", c.beta.beta_inf);
  c.beta.horizon = r.number("beta_horizon", c.beta.horizon);
  c.beta.order = r.integer("beta_order");
  c.k = r.list("k").value_or(std::vector<double>{1.0});
  c.gamma = r.list("gamma").value_or(std::vector<double>{1.0});
  c.gamma_rho = r.number("gamma_rho", c.gamma_rho);
  c.delta = r.number("delta", c.delta);
  c.eps_psi = r.number("eps_psi", c.eps_psi);
  c.eps_omega = r.number("eps_omega", c.eps_omega);
  c.nodes = r.integer("nodes").value_or(c.nodes);
  c.max_nodes = r.integer("max_nodes").value_or(std::max(c.nodes, c.max_nodes));
  c.theta_hat0 = r.list("theta_hat0").value_or(std::vector<double>{0.0});
  c.rho_hat0 = r.number("rho_hat0", c.rho_hat0);
  if (r.has("funnel_policy")) c.funnel_policy = r.choice("funnel_policy", kPolicies, FunnelPolicy::Abort);
  for (double k : c.k) {
    if (!(k > 0.0)) r.fail("k", "gains k_i must be > 0");
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  IniDocument doc = IniDocument::parse(in, source);
  ExperimentConfig cfg;
  cfg.source = source;
  bool have_plant = false;
  bool have_experiment = false;
  for (auto& sec : doc.sections) {
    Reader r(source, sec);
    if (sec.name == "experiment") {
      have_experiment = true;
      cfg.name = r.text("name", cfg.name);
      auto x0 = r.list("x0");
      if (!x0) r.fail("x0", "missing required key 'x0'");
      cfg.x0 = *x0;
      if (auto s = r.integer("seed")) {
        if (*s < 0) r.fail("seed", "must be >= 0");
        cfg.seed = static_cast<unsigned>(*s);
      }
      if (auto o = r.text("output")) cfg.output = *o;
    } else if (sec.name == "plant") {
      have_plant = true;
      read_plant(r, cfg.plant);
    } else if (sec.name == "sim") {
      cfg.sim.dt = r.number("dt", cfg.sim.dt);
      cfg.sim.t_final = r.number("t_final", cfg.sim.t_final);
      cfg.sim.integrator =
          r.choice<Integrator>("integrator", {{"rk4", Integrator::RK4}, {"euler", Integrator::Euler}}, Integrator::RK4);
      cfg.sim.check_assumptions = r.choice<bool>("check_assumptions", {{"true", true}, {"false", false}}, true);
      try {
        cfg.sim.steps();
      } catch (const InvalidArgument& e) {
        r.fail(r.has("t_final") ? "t_final" : "dt", e.what());
      }
    } else if (sec.name.rfind("controller.", 0) == 0) {
      ControllerSpec c;
      c.name = sec.name.substr(11);
      c.line = sec.line;
      if (c.name.empty() || c.name.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_-") != std::string::npos) {
        throw ConfigError(source, sec.line, "controller names use [a-z0-9_-] only");
      }
      read_controller(r, c);
      cfg.controllers.push_back(std::move(c));
    } else if (sec.name == "oracle") {
      LyapunovOracle o;
      auto th = r.list("ell_theta");
      auto lb = r.number("ell_b");
      if (!th || !lb) throw ConfigError(source, sec.line, "[oracle] needs both ell_theta and ell_b");
      o.ell_theta = Eigen::Map<const Eigen::VectorXd>(th->data(), static_cast<Eigen::Index>(th->size()));
      if (*lb == 0.0) r.fail("ell_b", "must be nonzero");
      o.ell_b = *lb;
      cfg.sim.oracle = o;
    } else {
      throw ConfigError(source, sec.line, "unknown section [" + sec.name + "]");
    }
    r.reject_unknown();
  }
  if (!have_experiment) throw ConfigError(source, 0, "missing section [experiment]");
  if (!have_plant) throw ConfigError(source, 0, "missing section [plant]");
  if (cfg.controllers.empty()) throw ConfigError(source, 0, "no [controller.<name>] section");
  if (static_cast<int>(cfg.x0.size()) != cfg.plant.order) {
    throw ConfigError(source, 0, "x0 has " + std::to_string(cfg.x0.size()) + " entries but the plant has order " +
                                     std::to_string(cfg.plant.order));
  }
  if (cfg.sim.oracle && cfg.sim.oracle->ell_theta.size() != cfg.plant.params) {
    throw ConfigError(source, 0, "[oracle] ell_theta must have one entry per parameter");
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path.string(), 0, "cannot open config");
  return parse_config(f, path.string());
}

namespace {

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p{
      {"paper-sim", R"(# Three controllers on the two-state showcase plant
#   x1' = theta(t, x) x1 + x2
#   x2' = b(t, x) u
# theta = 2 + 0.8 sin t + sin(x1 x2) + 0.2 sin(x1 t) + sign(sin t)   in [-1, 5]
# b     = 2 + 0.1 cos x1 + sign(x1 x2)                                in [0.9, 3.1]

[experiment]
name = paper-sim
x0 = 1, -1
seed = 0                      # reserved; runs are deterministic

[plant]
kind = showcase

[sim]
dt = 0.001
t_final = 20
integrator = rk4              # rk4 | euler
check_assumptions = true      # stop if theta or b leave their declared bounds

# Shared gains: k1 = k2 = gamma_rho = 0.1, delta = 1, Gamma = 0.1 I,
# theta_hat(0) = 0, rho_hat(0) = 0.25.

[controller.baseline]
# Adaptive backstepping without a funnel (z1 = x1). beta only draws the
# reference funnel in the plots; leaving it is recorded, not an error.
type = backstepping
strategy = identity
beta = exponential
beta_scale = 0.9
beta_rate = 0.4
beta_inf = 0.1
k = 0.1, 0.1
gamma = 0.1
gamma_rho = 0.1
delta = 1
theta_hat0 = 0
rho_hat0 = 0.25
funnel_policy = record-and-continue

[controller.tangent]
# Tangent barrier z1 = tan(pi x1 / (2 beta)) with beta = 4 e^{-0.4 t} + 0.1.
type = backstepping
strategy = tangent
beta = exponential
beta_scale = 4
beta_rate = 0.4
beta_inf = 0.1
k = 0.1, 0.1
gamma = 0.1
gamma_rho = 0.1
delta = 1
theta_hat0 = 0
rho_hat0 = 0.25

[controller.proposed]
# Rational funnel z1 = beta psi / (beta^2 - psi^2), psi(x) = x / sqrt(1 + x^2),
# beta = 0.9 e^{-0.4 t} + 0.1 (beta(0) = 1, so every x1(0) is admissible).
type = backstepping
strategy = rational
psi = algebraic
beta = exponential
beta_scale = 0.9
beta_rate = 0.4
beta_inf = 0.1
k = 0.1, 0.1
gamma = 0.1
gamma_rho = 0.1
delta = 1
theta_hat0 = 0
rho_hat0 = 0.25
)"},
      {"scalar-demo", R"(# First-order plant x' = b(t) u + theta(t) x under the scalar adaptive
# funnel controller.

[experiment]
name = scalar-demo
x0 = 2
seed = 0

[plant]
kind = expressions
order = 1
phi1 = x1
theta1 = 1 + 0.5*sin(2*t) + 0.5*sign(sin(t))
theta1_bounds = 0, 2
b = 1.5 + 0.4*cos(t)
b_bounds = 1.1, 1.9

[sim]
dt = 0.001
t_final = 10
integrator = rk4

[controller.scalar]
type = scalar
strategy = rational
psi = algebraic
beta = exponential
beta_scale = 0.95
beta_rate = 0.5
beta_inf = 0.05
k = 1
gamma = 1                     # gamma_theta
gamma_rho = 1
delta = 2                     # twice the half-width of the theta interval
theta_hat0 = 0
rho_hat0 = 0.5
)"},
  };
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : presets()) out.push_back(k);
  return out;
}

const std::string& preset_text(const std::string& name) {
  auto it = presets().find(name);
  if (it == presets().end()) throw InvalidArgument("unknown preset '" + name + "'");
  return it->second;
}

ExperimentConfig preset_config(const std::string& name) {
  std::istringstream in(preset_text(name));
  return parse_config(in, "preset:" + name);
}

Plant build_plant(const PlantSpec& spec) {
  switch (spec.kind) {
    case PlantKind::Showcase:
      return showcase_plant();
    case PlantKind::SmoothedShowcase:
      return smoothed_showcase_plant(spec.sharpness);
    case PlantKind::Expressions:
      break;
  }
  std::vector<RegressorFn> phi;
  for (const auto& comps : spec.phi) {
    std::vector<Expression> exprs;
    for (const auto& c : comps) exprs.push_back(Expression::parse(c));
    phi.push_back([exprs](std::span<const Jet> x) {
      std::vector<Jet> out;
      out.reserve(exprs.size());
      for (const auto& e : exprs) out.push_back(e.evaluate(x));
      return out;
    });
  }
  RegressorBank bank(spec.order, spec.params, std::move(phi));

  auto bounded = [](const Expression& e, const std::optional<std::pair<double, double>>& declared,
                    const std::string& what) {
    if (declared) return *declared;
    const Interval iv = e.bounds();
    if (!iv.bounded()) throw InvalidArgument(what + " has no finite bound; declare " + what + "_bounds");
    return std::pair{iv.lower, iv.upper};
  };
  std::vector<ParameterSignal> theta;
  for (std::size_t j = 0; j < spec.theta.size(); ++j) {
    const Expression e = Expression::parse(spec.theta[j]);
    const std::string what = "theta" + std::to_string(j + 1);
    if (e.max_state_index() > spec.order) throw InvalidArgument(what + " references a state beyond the plant order");
    const auto [lo, hi] = bounded(e, spec.theta_bounds[j], what);
    theta.emplace_back([e](double t, std::span<const double> x) { return e.evaluate(t, x); }, lo, hi, e.text());
  }
  const Expression eb = Expression::parse(spec.b);
  if (eb.max_state_index() > spec.order) throw InvalidArgument("b references a state beyond the plant order");
  const auto [blo, bhi] = bounded(eb, spec.b_bounds, "b");
  GainSignal b([eb](double t, std::span<const double> x) { return eb.evaluate(t, x); }, blo, bhi, eb.text());
  return Plant(std::move(bank), std::move(theta), std::move(b), "expressions");
}

PerformanceFunction build_beta(const BetaSpec& spec, int plant_order) {
  const int order = spec.order.value_or(std::max(plant_order, 1));
  if (spec.variant == PerformanceFunction::Variant::PrescribedTime) {
    return PerformanceFunction::prescribed_time(spec.horizon, spec.beta_inf, order);
  }
  return PerformanceFunction::exponential(spec.scale, spec.rate, spec.beta_inf, order);
}

FunnelTransform build_transform(const ControllerSpec& spec, int plant_order) {
  return FunnelTransform(spec.strategy, build_beta(spec.beta, plant_order), spec.psi, spec.pi_formula);
}

namespace {

Eigen::MatrixXd gamma_matrix(const std::vector<double>& g, int q) {
  if (g.size() == 1) return g[0] * Eigen::MatrixXd::Identity(q, q);
  if (static_cast<int>(g.size()) == q) {
    return Eigen::Map<const Eigen::VectorXd>(g.data(), q).asDiagonal();
  }
  if (static_cast<int>(g.size()) == q * q) {
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(g.data(), q, q);
  }
  throw InvalidArgument("gamma needs 1, q or q*q entries");
}

}  // namespace

std::unique_ptr<Controller> build_controller(const ControllerSpec& spec, const Plant& plant) {
  const int n = plant.order();
  const int q = plant.params();
  FunnelTransform ft = build_transform(spec, n);
  const int sgn = plant.b_signal().sign();
  if (spec.type == ControllerType::Scalar) {
    if (n != 1 || q != 1) throw InvalidArgument("the scalar controller needs a first-order plant with one parameter");
    for (double x : {-1.3, 0.4, 2.5}) {
      const double xs[1] = {x};
      if (std::abs(plant.regressors().phi_values(1, xs)[0] - x) > 1e-12) {
        throw InvalidArgument("the scalar controller needs phi1 = x1");
      }
    }
    if (spec.k.size() != 1) throw InvalidArgument("the scalar controller takes a single gain k");
    if (spec.gamma.size() != 1) throw InvalidArgument("the scalar controller takes a single gamma (gamma_theta)");
    if (spec.theta_hat0.size() != 1) throw InvalidArgument("theta_hat0 needs one entry");
    ScalarControllerState s;
    s.theta_hat = spec.theta_hat0[0];
    s.rho_hat = spec.rho_hat0;
    s.sign_lb = sgn;
    s.gains = ScalarGains{spec.k[0], spec.gamma[0], spec.gamma_rho, spec.delta};
    return std::make_unique<ScalarAdaptiveController>(s, std::move(ft), spec.name);
  }
  BacksteppingGains g;
  if (spec.k.size() == 1) {
    g.k.assign(static_cast<std::size_t>(n), spec.k[0]);
  } else if (static_cast<int>(spec.k.size()) == n) {
    g.k = spec.k;
  } else {
    throw InvalidArgument("k needs 1 or " + std::to_string(n) + " entries");
  }
  g.gamma = gamma_matrix(spec.gamma, q);
  g.gamma_rho = spec.gamma_rho;
  g.delta = spec.delta;
  g.eps_psi = spec.eps_psi;
  g.eps_omega = spec.eps_omega;
  g.nodes = spec.nodes;
  g.max_nodes = spec.max_nodes;
  BacksteppingState s;
  if (spec.theta_hat0.size() == 1) {
    s.theta_hat = Eigen::VectorXd::Constant(q, spec.theta_hat0[0]);
  } else if (static_cast<int>(spec.theta_hat0.size()) == q) {
    s.theta_hat = Eigen::Map<const Eigen::VectorXd>(spec.theta_hat0.data(), q);
  } else {
    throw InvalidArgument("theta_hat0 needs 1 or " + std::to_string(q) + " entries");
  }
  s.rho_hat = spec.rho_hat0;
  s.sign_lb = sgn;
  return std::make_unique<BacksteppingController>(plant.regressors(), std::move(ft), std::move(g), std::move(s),
                                                  spec.name);
}

void validate_config(const ExperimentConfig& cfg) {
  std::optional<Plant> plant;
  try {
    plant.emplace(build_plant(cfg.plant));
  } catch (const Error& e) {
    throw ConfigError(cfg.source, 0, std::string("[plant] ") + e.what());
  }
  for (const auto& c : cfg.controllers) {
    try {
      build_controller(c, *plant);
    } catch (const Error& e) {
      throw ConfigError(cfg.source, c.line, "[controller." + c.name + "] " + e.what());
    }
  }
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "PASS";
    case CheckStatus::Fail:
      return "FAIL";
    case CheckStatus::NotApplicable:
      return "not applicable";
  }
  return "?";
}

bool ExperimentResult::simulations_completed() const {
  return std::all_of(runs.begin(), runs.end(), [](const auto& r) { return r.outcome.status == SimStatus::Completed; });
}

bool ExperimentResult::checks_passed() const {
  for (const auto& r : runs) {
    for (const auto& c : r.checks) {
      if (c.status == CheckStatus::Fail) return false;
    }
  }
  return true;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// Largest |theta - l_theta| over the declared box.
double theta_spread(const Plant& plant, const Eigen::VectorXd& ell) {
  double s = 0.0;
  for (int r = 0; r < plant.params(); ++r) {
    const auto& sig = plant.theta_signals()[static_cast<std::size_t>(r)];
    const double d = std::max(std::abs(sig.upper() - ell[r]), std::abs(sig.lower() - ell[r]));
    s += d * d;
  }
  return std::sqrt(s);
}

// sup of W = x/z over the funnel, for the scalar law's damping requirement.
double w_sup(const FunnelTransform& ft) {
  const double b0 = ft.beta()(0.0);
  switch (ft.strategy()) {
    case TransformStrategy::Identity:
      return 1.0;
    case TransformStrategy::Tangent:
      return 2.0 * b0 / std::numbers::pi;
    case TransformStrategy::Rational:
      return b0;
  }
  return 1.0;
}

}  // namespace

std::vector<Check> trajectory_checks(const ControllerRun& run, const Plant& plant) {
  std::vector<Check> out;
  const auto& log = run.outcome.log;
  const std::string& who = run.spec.name;
  const int n = plant.order();

  {
    Check c{"simulation", who, CheckStatus::Pass, to_string(run.outcome.status)};
    if (run.outcome.status != SimStatus::Completed) {
      c.status = CheckStatus::Fail;
      c.detail += ": " + run.outcome.message;
    }
    out.push_back(c);
  }

  {
    Check c{"funnel", who, CheckStatus::Pass, std::to_string(run.funnel_violations) + " rows outside"};
    if (!run.enforces_funnel) {
      c.status = CheckStatus::NotApplicable;
      c.detail = "no funnel enforced; " + std::to_string(run.funnel_violations) + " rows outside the reference funnel";
    } else if (run.funnel_violations != 0 || run.outcome.status == SimStatus::FunnelAbort) {
      c.status = CheckStatus::Fail;
    }
    out.push_back(c);
  }

  {
    Check c{"hadamard", who, CheckStatus::Pass, "max relative residual " + fmt(run.max_residual)};
    if (run.spec.type == ControllerType::Scalar || n < 2) {
      c.status = CheckStatus::NotApplicable;
      c.detail = "no Hadamard split for first-order plants";
    } else if (!(run.max_residual < kHadamardTolerance)) {
      c.status = CheckStatus::Fail;
    }
    out.push_back(c);
  }

  if (log.rows() > 0) {
    const auto rho = log.column("rho_hat");
    const double sgn = plant.b_signal().sign();
    double worst = 0.0;
    for (std::size_t k = 1; k < rho.size(); ++k) worst = std::max(worst, sgn * (rho[k - 1] - rho[k]));
    Check c{"rho_hat monotone", who, worst <= 1e-12 ? CheckStatus::Pass : CheckStatus::Fail,
            "largest decrease of sgn(l_b) rho_hat " + fmt(worst)};
    out.push_back(c);
  }

  if (log.rows() > 0) {
    const LyapunovOracle& oracle = run.oracle;
    Check c{"lyapunov", who, CheckStatus::Pass, ""};
    const double spread = theta_spread(plant, oracle.ell_theta);
    const auto& bs = plant.b_signal();
    const bool ell_b_valid = oracle.ell_b * bs.sign() > 0.0 && std::abs(oracle.ell_b) <= std::min(std::abs(bs.lower()), std::abs(bs.upper()));
    double needed = spread;
    if (run.spec.type == ControllerType::Scalar) {
      needed = 2.0 * spread * w_sup(build_transform(run.spec, n));
    }
    if (!ell_b_valid) {
      c.status = CheckStatus::NotApplicable;
      c.detail = "oracle l_b = " + fmt(oracle.ell_b) + " is not a lower bound of |b| with its sign";
    } else if (run.spec.delta < needed) {
      c.status = CheckStatus::NotApplicable;
      c.detail = "delta = " + fmt(run.spec.delta) + " does not cover the parameter variation (needs >= " + fmt(needed) +
                 "); decrease is not guaranteed";
    } else {
      const auto v = log.column("V");
      double worst = 0.0;
      for (std::size_t k = 1; k < v.size(); ++k) {
        worst = std::max(worst, (v[k] - v[k - 1]) / (1.0 + std::abs(v[k - 1])));
      }
      c.detail = "largest relative step increase " + fmt(worst);
      if (worst > 1e-6) c.status = CheckStatus::Fail;
    }
    out.push_back(c);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  const Plant plant = build_plant(cfg.plant);
  std::vector<std::unique_ptr<Controller>> ctrls;
  for (const auto& c : cfg.controllers) ctrls.push_back(build_controller(c, plant));

  auto one = [&](std::size_t i) {
    const ControllerSpec& spec = cfg.controllers[i];
    const Controller& ctrl = *ctrls[i];
    ControllerRun run;
    run.spec = spec;
    run.enforces_funnel = ctrl.funnel().enforces_funnel();
    run.policy = spec.funnel_policy.value_or(run.enforces_funnel ? FunnelPolicy::Abort : FunnelPolicy::RecordAndContinue);
    SimConfig sc = cfg.sim;
    run.oracle = cfg.sim.oracle.value_or(LyapunovOracle{plant.theta_center(), plant.b_signal().ell()});
    sc.oracle = run.oracle;
    sc.funnel_policy = run.policy;
    run.outcome = run_simulation(plant, ctrl, cfg.x0, sc);
    const auto& log = run.outcome.log;
    run.funnel_violations = log.rows() ? log.funnel_violations() : 0;
    if (log.rows()) {
      const std::size_t last = log.rows() - 1;
      double s = 0.0;
      for (int j = 1; j <= plant.order(); ++j) {
        const double x = log.at(last, "x" + std::to_string(j));
        run.terminal_x.push_back(x);
        s += x * x;
      }
      run.terminal_norm = std::sqrt(s);
      for (double r : log.column("residual")) run.max_residual = std::max(run.max_residual, r);
    }
    run.checks = trajectory_checks(run, plant);
    return run;
  };

  ExperimentResult res;
  res.config = cfg;
  res.runs.resize(cfg.controllers.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || cfg.controllers.size() == 1) {
    for (std::size_t i = 0; i < cfg.controllers.size(); ++i) res.runs[i] = one(i);
    return res;
  }
  // Batches of at most `threads` simulations at a time.
  for (std::size_t start = 0; start < cfg.controllers.size(); start += threads) {
    std::vector<std::future<ControllerRun>> jobs;
    const std::size_t stop = std::min(cfg.controllers.size(), start + threads);
    for (std::size_t i = start; i < stop; ++i) jobs.push_back(std::async(std::launch::async, one, i));
    for (std::size_t i = start; i < stop; ++i) res.runs[i] = jobs[i - start].get();
  }
  return res;
}

std::string summary_json(const ExperimentResult& result) {
  using nlohmann::json;
  const auto& cfg = result.config;
  json j;
  j["experiment"] = cfg.name;
  j["seed"] = cfg.seed;
  j["dt"] = cfg.sim.dt;
  j["t_final"] = cfg.sim.t_final;
  j["integrator"] = to_string(cfg.sim.integrator);
  j["x0"] = cfg.x0;
  j["controllers"] = json::array();
  for (const auto& r : result.runs) {
    json c;
    c["name"] = r.spec.name;
    c["type"] = r.spec.type == ControllerType::Scalar ? "scalar" : "backstepping";
    c["strategy"] = to_string(r.spec.strategy);
    c["csv"] = r.spec.name + ".csv";
    c["status"] = to_string(r.outcome.status);
    if (!r.outcome.message.empty()) c["message"] = r.outcome.message;
    if (r.outcome.status != SimStatus::Completed) c["failure_time"] = r.outcome.failure_time;
    c["rows"] = r.outcome.log.rows();
    c["funnel_policy"] = to_string(r.policy);
    c["funnel_enforced"] = r.enforces_funnel;
    c["funnel_violations"] = r.funnel_violations;
    c["terminal_x"] = r.terminal_x;
    c["terminal_norm"] = r.terminal_norm;
    c["max_hadamard_residual"] = r.max_residual;
    c["seconds"] = r.outcome.seconds;
    json checks = json::array();
    for (const auto& ch : r.checks) {
      checks.push_back({{"name", ch.name}, {"status", to_string(ch.status)}, {"detail", ch.detail}});
    }
    c["checks"] = checks;
    j["controllers"].push_back(c);
  }
  j["simulations_completed"] = result.simulations_completed();
  j["checks_passed"] = result.checks_passed();
  return j.dump(2) + "\n";
}

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

Series series_of(const TrajectoryLog& log, const std::string& col, const std::string& label, std::size_t colour,
                 bool dashed = false, double scale = 1.0) {
  Series s;
  s.label = label;
  s.x = log.column("t");
  s.y = log.column(col);
  if (scale != 1.0) {
    for (double& v : s.y) v *= scale;
  }
  s.color = kColors[colour % std::size(kColors)];
  s.dashed = dashed;
  return s;
}

}  // namespace

std::vector<std::filesystem::path> write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& r : result.runs) {
    const auto p = dir / (r.spec.name + ".csv");
    write_csv(r.outcome.log, p);
    written.push_back(p);
  }

  const Plant plant = build_plant(result.config.plant);
  const int n = plant.order();
  const int q = plant.params();
  auto finish = [&](Plot plot, const std::string& file) {
    const auto p = dir / file;
    write_svg(plot, p);
    written.push_back(p);
  };

  {
    Plot y;
    y.title = "output y = x1 and funnel bounds";
    y.y_label = "x1";
    double extent = 0.0;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      const auto& r = result.runs[i];
      if (!r.outcome.log.rows()) continue;
      y.series.push_back(series_of(r.outcome.log, "x1", r.spec.name, i));
      for (double v : r.outcome.log.column("x1")) {
        if (std::isfinite(v)) extent = std::max(extent, std::abs(v));
      }
    }
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      const auto& r = result.runs[i];
      if (!r.outcome.log.rows() || !r.enforces_funnel) continue;
      y.series.push_back(series_of(r.outcome.log, "bound", r.spec.name + " bound", i, true));
      y.series.push_back(series_of(r.outcome.log, "bound", "", i, true, -1.0));
    }
    // the rational bound starts at infinity; frame the trajectories instead
    y.y_range = std::pair{-1.5 * std::max(extent, 0.1), 1.5 * std::max(extent, 0.1)};
    finish(y, "fig1_output.svg");
  }
  auto per_run = [&](const std::string& col, const std::string& title, const std::string& file) {
    Plot p;
    p.title = title;
    p.y_label = col;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      const auto& r = result.runs[i];
      if (r.outcome.log.rows()) p.series.push_back(series_of(r.outcome.log, col, r.spec.name, i));
    }
    finish(p, file);
  };
  if (n >= 2) {
    per_run("x2", "state x2", "fig2_x2.svg");
  } else {
    per_run("z1", "transformed error z1", "fig2_z1.svg");
  }
  per_run("u", "control input u", "fig3_u.svg");
  for (int r = 1; r <= q; ++r) {
    const std::string col = "theta_hat" + std::to_string(r);
    per_run(col, "estimate " + col, q == 1 ? "fig4_theta_hat.svg" : "fig4_" + col + ".svg");
  }
  per_run("rho_hat", "estimate rho_hat", "fig5_rho_hat.svg");
  {
    Plot p;
    p.title = "time-varying parameters theta(t) and b(t)";
    p.y_label = "value";
    const ControllerRun* ref = nullptr;
    for (const auto& r : result.runs) {
      if (r.outcome.log.rows()) ref = &r;
      if (ref && r.enforces_funnel) break;
    }
    if (ref) {
      for (int r = 1; r <= q; ++r) {
        p.series.push_back(series_of(ref->outcome.log, "theta" + std::to_string(r), "theta" + std::to_string(r),
                                     static_cast<std::size_t>(r - 1)));
      }
      p.series.push_back(series_of(ref->outcome.log, "b", "b", static_cast<std::size_t>(q)));
      p.title += " along " + ref->spec.name;
    }
    finish(p, "fig6_parameters.svg");
  }

  const auto s = dir / "summary.json";
  std::ofstream f(s);
  if (!f) throw Error("cannot write " + s.string());
  f << summary_json(result);
  written.push_back(s);
  return written;
}

}  // namespace ppac
