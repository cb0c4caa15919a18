#include "ppac/backstepping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ppac/errors.hpp"
#include "ppac/quadrature.hpp"

namespace ppac {

namespace {

using JetVec = std::vector<Jet>;

Jet dot(const JetVec& a, const JetVec& b) {
  Jet acc(0.0);
  for (std::size_t r = 0; r < a.size(); ++r) acc += a[r] * b[r];
  return acc;
}

JetVec gamma_times(const Eigen::MatrixXd& m, const JetVec& v) {
  JetVec out(static_cast<std::size_t>(m.rows()), Jet(0.0));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double g = m(r, c);
      if (g != 0.0) out[static_cast<std::size_t>(r)] += g * v[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

// Inputs of a virtual law at one nesting depth. Every jet's level stack is a
// prefix of `levels`.
struct Args {
  JetVec x;      // x_1..x_m
  JetVec theta;  // theta_hat
  JetVec beta;   // beta^(0)..beta^(n)
  LevelStack levels;
};

struct Chain {
  JetVec z;                   // z_1..z_i
  JetVec alpha;               // alpha_1..alpha_i
  std::vector<JetVec> w;      // w_1..w_i (w_1 empty)
  JetVec tau;                 // tau_i
  Jet pi;                     // Pi at x_1
  JetVec zeta;
  JetVec w_frobenius2;
  std::vector<double> residual;
  std::vector<int> nodes;
};

// Chain through m, with the partials of every alpha_j (j <= m) along a fresh
// level seeded at x_1..x_m, theta_hat, beta^(0..m).
struct Lifted {
  Chain chain;
  std::vector<JetVec> dalpha;  // dalpha[j-1][slot]
  int m = 0;
  int q = 0;

  const Jet& dx(int j, int var) const { return dalpha[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(var - 1)]; }
  const Jet& dtheta(int j, int r) const { return dalpha[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(m + r)]; }
  const Jet& dbeta(int j, int order) const {
    return dalpha[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(m + q + order)];
  }
};

struct Core {
  Lifted lifted;  // through i-1
  Args args;      // x_1..x_i filled
  Jet z;
  JetVec w;
  JetVec tau;
};

struct Split {
  std::vector<JetVec> w;  // w[c][r]: coordinate c, output r
  double residual = 0.0;
  int nodes = 0;
};

class Engine {
 public:
  Engine(const RegressorBank& bank, const FunnelTransform& ft, const BacksteppingGains& gains, double time)
      : bank_(bank), ft_(ft), g_(gains), n_(bank.order()), q_(bank.params()), time_(time) {}

  Chain through(int i, const Args& a) const {
    if (i == 1) return step1(a);
    Core c = core(i, a, nullptr);
    Chain chain = std::move(c.lifted.chain);
    JetVec zbar = chain.z;
    zbar.push_back(c.z);
    Split split = hadamard(i, c.args, zbar, c.w, [this, i](const Args& node, const Jet& zi) {
      return core(i, node, &zi).w;
    });
    Jet wf2(0.0);
    for (const auto& col : split.w) {
      for (const auto& e : col) wf2 += e * e;
    }
    const double delta = g_.delta;
    Jet zeta = 0.5 * (delta * wf2 + static_cast<double>(n_ + 1 - i) * delta + 1.0 / g_.eps_psi);

    const Lifted& L = c.lifted;
    const int p = i - 1;
    Jet coupling = (p == 1) ? chain.pi * chain.z[0] : chain.z[static_cast<std::size_t>(p - 1)];
    Jet alpha = -coupling - (g_.k[static_cast<std::size_t>(i - 1)] + zeta) * c.z - dot(c.w, a.theta);
    for (int j = 1; j <= p; ++j) alpha += L.dx(p, j) * c.args.x[static_cast<std::size_t>(j)];
    for (int j = 0; j <= p; ++j) alpha += L.dbeta(p, j) * a.beta[static_cast<std::size_t>(j + 1)];
    alpha += swapping(L, chain, c.w, i);
    for (int r = 0; r < q_; ++r) alpha += L.dtheta(p, r) * c.tau[static_cast<std::size_t>(r)];

    chain.z.push_back(c.z);
    chain.alpha.push_back(alpha);
    chain.w.push_back(c.w);
    chain.tau = c.tau;
    chain.zeta.push_back(zeta);
    chain.w_frobenius2.push_back(wf2);
    chain.residual.push_back(split.residual);
    chain.nodes.push_back(split.nodes);
    return chain;
  }

  Lifted lift(int m, const Args& a) const {
    const std::size_t width = static_cast<std::size_t>(m + q_ + m + 1);
    Args up;
    up.levels = a.levels.pushed(width);
    for (int j = 0; j < m; ++j) up.x.push_back(Jet::variable(a.x[static_cast<std::size_t>(j)], up.levels, static_cast<std::size_t>(j)));
    for (int r = 0; r < q_; ++r) {
      up.theta.push_back(Jet::variable(a.theta[static_cast<std::size_t>(r)], up.levels, static_cast<std::size_t>(m + r)));
    }
    for (std::size_t j = 0; j < a.beta.size(); ++j) {
      up.beta.push_back(static_cast<int>(j) <= m
                            ? Jet::variable(a.beta[j], up.levels, static_cast<std::size_t>(m + q_) + j)
                            : a.beta[j]);
    }
    Chain c = through(m, up);
    const int lv = up.levels.depth();

    Lifted out;
    out.m = m;
    out.q = q_;
    for (const auto& al : c.alpha) {
      JetVec d;
      d.reserve(width);
      for (std::size_t s = 0; s < width; ++s) d.push_back(al.partial_at(lv, s));
      out.dalpha.push_back(std::move(d));
    }
    auto strip = [lv](JetVec& v) {
      for (auto& e : v) e = e.primal_at(lv);
    };
    strip(c.z);
    strip(c.alpha);
    for (auto& w : c.w) strip(w);
    strip(c.tau);
    c.pi = c.pi.primal_at(lv);
    strip(c.zeta);
    strip(c.w_frobenius2);
    out.chain = std::move(c);
    return out;
  }

  // z_i, w_i, tau_i. With `z_given` the state x_i is reconstructed as
  // z_i + alpha_{i-1} (coordinate mode), otherwise read from the args.
  Core core(int i, const Args& a, const Jet* z_given) const {
    Args below = a;
    below.x.resize(static_cast<std::size_t>(i - 1));
    Core c;
    c.lifted = lift(i - 1, below);
    const Jet& alpha_prev = c.lifted.chain.alpha[static_cast<std::size_t>(i - 2)];
    c.args = below;
    if (z_given != nullptr) {
      c.z = *z_given;
      c.args.x.push_back(*z_given + alpha_prev);
    } else {
      c.args.x.push_back(a.x[static_cast<std::size_t>(i - 1)]);
      c.z = c.args.x.back() - alpha_prev;
    }
    c.w = bank_.phi(i, c.args.x);
    for (int j = 1; j < i; ++j) {
      JetVec phij = bank_.phi(j, c.args.x);
      const Jet& d = c.lifted.dx(i - 1, j);
      for (int r = 0; r < q_; ++r) c.w[static_cast<std::size_t>(r)] -= d * phij[static_cast<std::size_t>(r)];
    }
    JetVec wz(c.w.size());
    for (std::size_t r = 0; r < wz.size(); ++r) wz[r] = c.w[r] * c.z;
    c.tau = c.lifted.chain.tau;
    JetVec gw = gamma_times(g_.gamma, wz);
    for (int r = 0; r < q_; ++r) c.tau[static_cast<std::size_t>(r)] += gw[static_cast<std::size_t>(r)];
    return c;
  }

  // Omega of the final step, from the core of step n.
  Jet omega(const Core& c, const Args& a) const {
    const Lifted& L = c.lifted;
    const Chain& ch = L.chain;
    const int p = n_ - 1;
    Jet out = (p == 1) ? ch.pi * ch.z[0] : ch.z[static_cast<std::size_t>(p - 1)];
    out += dot(c.w, a.theta);
    for (int r = 0; r < q_; ++r) out -= L.dtheta(p, r) * c.tau[static_cast<std::size_t>(r)];
    for (int j = 1; j <= p; ++j) out -= L.dx(p, j) * c.args.x[static_cast<std::size_t>(j)];
    for (int j = 0; j <= p; ++j) out -= L.dbeta(p, j) * a.beta[static_cast<std::size_t>(j + 1)];
    out -= swapping(L, ch, c.w, n_);
    return out;
  }

  JetVec final_terms(const Args& a, const Jet* z_given, Core* keep = nullptr) const {
    Core c = core(n_, a, z_given);
    JetVec f = c.w;
    f.push_back(omega(c, c.args));
    if (keep != nullptr) *keep = std::move(c);
    return f;
  }

  template <class F>
  Split hadamard(int i, const Args& a, const JetVec& zbar, const JetVec& f0, F&& f) const {
    Split s = hadamard_with(i, a, zbar, f0, f, g_.nodes);
    if (s.residual < kHadamardTolerance) return s;
    if (g_.max_nodes > g_.nodes) {
      s = hadamard_with(i, a, zbar, f0, f, g_.max_nodes);
      if (s.residual < kHadamardTolerance) return s;
    }
    std::ostringstream msg;
    msg << "Hadamard factor of step " << i << " has relative residual " << s.residual << " with " << s.nodes
        << " nodes at t = " << time_;
    throw FactorizationError(msg.str());
  }

  Chain step1(const Args& a) const {
    const Jet& x1 = a.x[0];
    auto fac = ft_.factors(x1, a.beta[0], a.beta[1], time_);
    JetVec factor = bank_.phi1_factor(x1);
    JetVec phi1 = bank_.phi(1, a.x);
    Jet phi_norm2 = dot(factor, factor);
    const double delta = g_.delta;
    Jet w1sq = fac.w * fac.w;
    Jet zeta = 0.5 * (1.0 / g_.eps_psi + delta * fac.pi * phi_norm2 * w1sq + fac.pi * delta +
                      static_cast<double>(n_ - 1) * delta);
    Jet inv_pi = 1.0 / fac.pi;
    Jet alpha = -(g_.k[0] + zeta) * fac.z * inv_pi - fac.psi_over_x * inv_pi * x1 - dot(phi1, a.theta);

    JetVec v(static_cast<std::size_t>(q_));
    Jet s = fac.z * fac.pi * x1;
    for (int r = 0; r < q_; ++r) v[static_cast<std::size_t>(r)] = s * factor[static_cast<std::size_t>(r)];

    Chain c;
    c.z = {fac.z};
    c.alpha = {alpha};
    c.w = {JetVec{}};
    c.tau = gamma_times(g_.gamma, v);
    c.pi = fac.pi;
    c.zeta = {zeta};
    c.w_frobenius2 = {phi_norm2 * w1sq};
    c.residual = {0.0};
    c.nodes = {0};
    return c;
  }

  int order() const { return n_; }
  int params() const { return q_; }

 private:
  // sum_{j=2}^{i-1} (d alpha_{j-1} / d theta_hat) Gamma z_j w_i
  Jet swapping(const Lifted& L, const Chain& ch, const JetVec& w, int i) const {
    Jet acc(0.0);
    if (i < 3) return acc;
    JetVec gw = gamma_times(g_.gamma, w);
    for (int j = 2; j <= i - 1; ++j) {
      Jet row(0.0);
      for (int r = 0; r < q_; ++r) row += L.dtheta(j - 1, r) * gw[static_cast<std::size_t>(r)];
      acc += row * ch.z[static_cast<std::size_t>(j - 1)];
    }
    return acc;
  }

  template <class F>
  Split hadamard_with(int i, const Args& a, const JetVec& zbar, const JetVec& f0, F& f, int points) const {
    const QuadratureRule& rule = gauss_legendre_unit(points);
    const LevelStack local = a.levels.pushed(static_cast<std::size_t>(i));
    const int lv = local.depth();
    const std::size_t m = f0.size();
    Split s;
    s.nodes = points;
    s.w.assign(static_cast<std::size_t>(i), JetVec(m, Jet(0.0)));
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double sk = rule.nodes[k];
      JetVec zl;
      zl.reserve(static_cast<std::size_t>(i));
      for (int j = 0; j < i; ++j) {
        zl.push_back(Jet::variable(sk * zbar[static_cast<std::size_t>(j)], local, static_cast<std::size_t>(j)));
      }
      Args node;
      node.levels = local;
      node.theta = a.theta;
      node.beta = a.beta;
      node.x.push_back(ft_.inverse(zl[0], a.beta[0]));
      for (int j = 2; j <= i - 1; ++j) {
        Chain below = through(j - 1, node);
        node.x.push_back(zl[static_cast<std::size_t>(j - 1)] + below.alpha.back());
      }
      JetVec out = f(node, zl[static_cast<std::size_t>(i - 1)]);
      for (int c = 0; c < i; ++c) {
        for (std::size_t r = 0; r < m; ++r) {
          s.w[static_cast<std::size_t>(c)][r] += rule.weights[k] * out[r].partial_at(lv, static_cast<std::size_t>(c));
        }
      }
    }
    for (std::size_t r = 0; r < m; ++r) {
      double lhs = 0.0;
      for (int c = 0; c < i; ++c) lhs += s.w[static_cast<std::size_t>(c)][r].value() * zbar[static_cast<std::size_t>(c)].value();
      const double fr = f0[r].value();
      s.residual = std::max(s.residual, std::abs(lhs - fr) / (1.0 + std::abs(fr)));
    }
    if (!std::isfinite(s.residual)) s.residual = std::numeric_limits<double>::infinity();
    return s;
  }

  const RegressorBank& bank_;
  const FunnelTransform& ft_;
  const BacksteppingGains& g_;
  int n_;
  int q_;
  double time_;
};

std::vector<double> values(const JetVec& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(e.value());
  return out;
}

}  // namespace

HadamardResult hadamard_factor(const std::function<std::vector<Jet>(std::span<const Jet>)>& f,
                               std::span<const double> zbar, int nodes) {
  const QuadratureRule& rule = gauss_legendre_unit(nodes);
  const std::size_t i = zbar.size();
  const LevelStack local = LevelStack().pushed(i);
  std::vector<double> f0;
  {
    std::vector<Jet> z(zbar.begin(), zbar.end());
    for (const auto& e : f(z)) f0.push_back(e.value());
  }
  const std::size_t m = f0.size();
  HadamardResult res;
  res.nodes = nodes;
  res.w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    std::vector<Jet> z;
    for (std::size_t j = 0; j < i; ++j) z.push_back(Jet::variable(rule.nodes[k] * zbar[j], local, j));
    auto out = f(z);
    if (out.size() != m) throw InvalidArgument("map changed output dimension");
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < i; ++c) {
        res.w(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) +=
            rule.weights[k] * out[r].partial_at(1, c).value();
      }
    }
  }
  for (std::size_t r = 0; r < m; ++r) {
    double lhs = 0.0;
    for (std::size_t c = 0; c < i; ++c) lhs += res.w(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) * zbar[c];
    res.residual = std::max(res.residual, std::abs(lhs - f0[r]) / (1.0 + std::abs(f0[r])));
  }
  if (!(res.residual < kHadamardTolerance)) {
    std::ostringstream msg;
    msg << "Hadamard factor residual " << res.residual << " with " << nodes << " nodes";
    throw FactorizationError(msg.str());
  }
  return res;
}

BacksteppingController::BacksteppingController(RegressorBank regressors, FunnelTransform ft, BacksteppingGains gains,
                                               BacksteppingState initial, std::string name)
    : regressors_(std::move(regressors)),
      ft_(std::move(ft)),
      gains_(std::move(gains)),
      initial_(std::move(initial)),
      name_(std::move(name)) {
  const int n = regressors_.order();
  const int q = regressors_.params();
  if (static_cast<int>(gains_.k.size()) != n) {
    throw InvalidArgument("need " + std::to_string(n) + " gains k_i, got " + std::to_string(gains_.k.size()));
  }
  for (std::size_t i = 0; i < gains_.k.size(); ++i) {
    if (!(gains_.k[i] > 0.0)) throw InvalidArgument("gain k" + std::to_string(i + 1) + " must be > 0");
  }
  if (gains_.gamma.rows() != q || gains_.gamma.cols() != q) throw InvalidArgument("Gamma must be q x q");
  if (!gains_.gamma.isApprox(gains_.gamma.transpose(), 0.0)) throw InvalidArgument("Gamma must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(gains_.gamma);
  if (llt.info() != Eigen::Success) throw InvalidArgument("Gamma must be positive definite");
  if (!(gains_.gamma_rho > 0.0)) throw InvalidArgument("gamma_rho must be > 0");
  if (!(gains_.delta >= 0.0)) throw InvalidArgument("delta must be >= 0");
  if (!(gains_.eps_psi > 0.0)) throw InvalidArgument("eps_psi must be > 0");
  if (!(gains_.eps_omega > 0.0)) throw InvalidArgument("eps_omega must be > 0");
  if (gains_.nodes < 1 || gains_.max_nodes < 1 || gains_.nodes > 256 || gains_.max_nodes > 256) {
    throw InvalidArgument("quadrature node counts must lie in [1, 256]");
  }
  if (initial_.sign_lb != 1 && initial_.sign_lb != -1) throw InvalidArgument("sign of l_b must be +1 or -1");
  if (!(initial_.rho_hat * initial_.sign_lb > 0.0)) {
    throw InvalidArgument("rho_hat(0) must be nonzero with the sign of l_b");
  }
  if (initial_.theta_hat.size() != q) throw InvalidArgument("theta_hat(0) must have q entries");
  if (ft_.beta().order() < n) {
    throw UnsupportedDerivativeOrder("an order-" + std::to_string(n) +
                                     " plant needs beta derivatives up to order " + std::to_string(n));
  }
}

Estimates BacksteppingController::initial_estimates() const { return {initial_.theta_hat, initial_.rho_hat}; }

RecursionTrace BacksteppingController::control_pipeline(std::span<const double> x, double t,
                                                        const Estimates& est) const {
  const int n = order();
  const int q = params();
  if (static_cast<int>(x.size()) != n) throw InvalidArgument("state dimension mismatch");
  if (est.theta_hat.size() != q) throw InvalidArgument("theta_hat dimension mismatch");
  RecursionTrace trace;
  const double sgn = static_cast<double>(initial_.sign_lb);

  if (n == 1) {
    // First-order plant: the scalar law with theta_hat^T Phi_1 in place of theta_hat.
    const auto f = transform(ft_, x[0], t);
    auto factor = regressors_.phi1_factor(Jet(x[0]));
    double proj = 0.0;
    for (int r = 0; r < q; ++r) proj += factor[static_cast<std::size_t>(r)].value() * est.theta_hat[r];
    const double a = proj + f.psi_over_x / f.pi;
    const double kappa = gains_.k[0] / f.pi + 0.5 * (gains_.delta + 1.0) + 0.5 * f.w * f.w * a * a;
    StepRecord s;
    s.z = f.z;
    Eigen::VectorXd v(q);
    for (int r = 0; r < q; ++r) v[r] = f.z * f.pi * x[0] * factor[static_cast<std::size_t>(r)].value();
    Eigen::VectorXd tau = gains_.gamma * v;
    s.tau.assign(tau.data(), tau.data() + q);
    trace.steps.push_back(s);
    trace.kappa = kappa;
    trace.u_bar = -kappa * f.z;
    trace.u = est.rho_hat * trace.u_bar;
    trace.theta_hat_dot = s.tau;
    trace.rho_hat_dot = -gains_.gamma_rho * sgn * f.z * f.pi * trace.u_bar;
    return trace;
  }

  Engine eng(regressors_, ft_, gains_, t);
  Args a;
  for (double xi : x) a.x.emplace_back(xi);
  for (int r = 0; r < q; ++r) a.theta.emplace_back(est.theta_hat[r]);
  for (double b : ft_.beta().derivatives(t, n)) a.beta.emplace_back(b);

  Core c;
  JetVec f0 = eng.final_terms(a, nullptr, &c);
  JetVec zbar = c.lifted.chain.z;
  zbar.push_back(c.z);
  Split split = eng.hadamard(n, c.args, zbar, f0, [&eng](const Args& node, const Jet& zn) {
    return eng.final_terms(node, &zn);
  });

  const Chain& ch = c.lifted.chain;
  for (int j = 1; j < n; ++j) {
    const auto idx = static_cast<std::size_t>(j - 1);
    StepRecord s;
    s.z = ch.z[idx].value();
    s.alpha = ch.alpha[idx].value();
    s.w = values(ch.w[idx]);
    s.zeta = ch.zeta[idx].value();
    s.w_frobenius2 = ch.w_frobenius2[idx].value();
    s.residual = ch.residual[idx];
    s.nodes = ch.nodes[idx];
    const Lifted& L = c.lifted;
    for (int v = 1; v <= j; ++v) s.alpha_partials.push_back(L.dx(j, v).value());
    for (int r = 0; r < q; ++r) s.alpha_partials.push_back(L.dtheta(j, r).value());
    for (int o = 0; o <= j; ++o) s.alpha_partials.push_back(L.dbeta(j, o).value());
    trace.steps.push_back(std::move(s));
  }
  // tau_j for j < n are not kept separately by the chain except the last one.
  trace.steps.back().tau = values(ch.tau);

  double wf2 = 0.0;
  double ob2 = 0.0;
  for (int col = 0; col < n; ++col) {
    const auto& wc = split.w[static_cast<std::size_t>(col)];
    for (int r = 0; r < q; ++r) wf2 += wc[static_cast<std::size_t>(r)].value() * wc[static_cast<std::size_t>(r)].value();
    ob2 += wc[static_cast<std::size_t>(q)].value() * wc[static_cast<std::size_t>(q)].value();
  }
  StepRecord last;
  last.z = c.z.value();
  last.w = values(c.w);
  last.tau = values(c.tau);
  last.w_frobenius2 = wf2;
  last.residual = split.residual;
  last.nodes = split.nodes;
  trace.steps.push_back(std::move(last));

  const auto& g = gains_;
  trace.omega = f0.back().value();
  trace.omega_bar2 = ob2;
  trace.residual = split.residual;
  trace.nodes = split.nodes;
  trace.kappa = g.k.back() + 0.5 * (g.delta * wf2 + g.delta + 1.0 / g.eps_omega + g.eps_omega * ob2);
  const double zn = c.z.value();
  trace.u_bar = -trace.kappa * zn;
  trace.u = est.rho_hat * trace.u_bar;
  trace.theta_hat_dot = values(c.tau);
  trace.rho_hat_dot = -g.gamma_rho * sgn * zn * trace.u_bar;
  return trace;
}

ControlOutput BacksteppingController::evaluate(std::span<const double> x, double t, const Estimates& est) const {
  RecursionTrace tr = control_pipeline(x, t, est);
  ControlOutput out;
  out.u = tr.u;
  out.u_bar = tr.u_bar;
  out.kappa = tr.kappa;
  for (const auto& s : tr.steps) {
    out.z.push_back(s.z);
    out.residual = std::max(out.residual, s.residual);
  }
  out.residual = std::max(out.residual, tr.residual);
  out.theta_hat_dot = Eigen::Map<const Eigen::VectorXd>(tr.theta_hat_dot.data(),
                                                        static_cast<Eigen::Index>(tr.theta_hat_dot.size()));
  out.rho_hat_dot = tr.rho_hat_dot;
  return out;
}

double BacksteppingController::lyapunov(std::span<const double> z, const Estimates& est,
                                        const LyapunovOracle& oracle) const {
  if (oracle.ell_b == 0.0 || !std::isfinite(oracle.ell_b)) throw InvalidArgument("oracle l_b must be finite and nonzero");
  double v = 0.0;
  for (double zi : z) v += 0.5 * zi * zi;
  const Eigen::VectorXd e = oracle.ell_theta - est.theta_hat;
  v += 0.5 * e.dot(gains_.gamma.llt().solve(e));
  const double dr = 1.0 / oracle.ell_b - est.rho_hat;
  v += std::abs(oracle.ell_b) / (2.0 * gains_.gamma_rho) * dr * dr;
  return v;
}

ValueAndGradient BacksteppingController::virtual_law(int i, std::span<const double> x,
                                                     const Eigen::VectorXd& theta_hat,
                                                     std::span<const double> beta) const {
  const int n = order();
  if (i < 1 || i >= n) throw InvalidArgument("virtual laws exist for 1 <= i < n");
  if (static_cast<int>(x.size()) < i || static_cast<int>(beta.size()) < i + 1) {
    throw InvalidArgument("virtual law needs x_1..x_i and beta^(0..i)");
  }
  Engine eng(regressors_, ft_, gains_, 0.0);
  Args a;
  for (int j = 0; j < i; ++j) a.x.emplace_back(x[static_cast<std::size_t>(j)]);
  for (Eigen::Index r = 0; r < theta_hat.size(); ++r) a.theta.emplace_back(theta_hat[r]);
  for (double b : beta) a.beta.emplace_back(b);
  while (static_cast<int>(a.beta.size()) < n + 1) a.beta.emplace_back(0.0);
  Lifted L = eng.lift(i, a);
  ValueAndGradient out;
  out.value = L.chain.alpha[static_cast<std::size_t>(i - 1)].value();
  for (const auto& d : L.dalpha[static_cast<std::size_t>(i - 1)]) out.gradient.push_back(d.value());
  return out;
}

}  // namespace ppac
