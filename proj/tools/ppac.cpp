// ppac run    --config <file> [--out <dir>] [--dt <s>] [--t-final <s>] [--seed <n>]
// ppac verify --config <file> [--samples <n>] [--dt <s>] [--t-final <s>] [--seed <n>]
//
// Exit status: 0 success, 1 bad arguments or config, 2 failed simulation or check.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ppac/experiment.hpp"
#include "ppac/verify.hpp"

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<unsigned> seed;
  unsigned threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  auto* cfg = app->add_option("--config", c.config, "experiment config (INI)")->check(CLI::ExistingFile);
  auto* pre = app->add_option("--preset", c.preset, "built-in preset instead of a config file")
                  ->check(CLI::IsMember({"paper-sim", "scalar-demo"}));
  cfg->excludes(pre);
  app->add_option("--dt", c.dt, "override [sim] dt")->check(CLI::PositiveNumber);
  app->add_option("--t-final", c.t_final, "override [sim] t_final")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "reserved; the pipeline is deterministic");
  app->add_option("--threads", c.threads, "parallel simulations (0 = hardware threads)");
}

ppac::ExperimentConfig load(const Common& c) {
  if (c.config.empty() && c.preset.empty()) throw ppac::InvalidArgument("one of --config or --preset is required");
  ppac::ExperimentConfig cfg = c.config.empty() ? ppac::preset_config(c.preset) : ppac::load_config(c.config);
  if (c.dt) cfg.sim.dt = *c.dt;
  if (c.t_final) cfg.sim.t_final = *c.t_final;
  if (c.seed) cfg.seed = *c.seed;
  cfg.sim.steps();  // t_final must stay a multiple of dt after overrides
  return cfg;
}

int run(const Common& c, const std::string& out) {
  const ppac::ExperimentConfig cfg = load(c);
  std::filesystem::path dir = out.empty() ? cfg.output.value_or("out/" + cfg.name) : std::filesystem::path(out);
  const ppac::ExperimentResult res = ppac::run_experiment(cfg, c.threads);
  for (const auto& p : ppac::write_artifacts(res, dir)) std::cout << "wrote " << p.string() << '\n';
  for (const auto& r : res.runs) {
    std::cout << r.spec.name << ": " << ppac::to_string(r.outcome.status) << ", |x(T)| = " << r.terminal_norm
              << ", funnel violations " << r.funnel_violations << (r.enforces_funnel ? "" : " (reference only)")
              << ", " << r.outcome.seconds << " s\n";
    if (!r.outcome.message.empty()) std::cout << "  " << r.outcome.message << '\n';
  }
  std::vector<ppac::Check> checks;
  for (const auto& r : res.runs) checks.insert(checks.end(), r.checks.begin(), r.checks.end());
  std::cout << '\n' << ppac::format_report(checks);
  return res.simulations_completed() && res.checks_passed() ? 0 : 2;
}

int verify(const Common& c, int samples) {
  const ppac::ExperimentConfig cfg = load(c);
  ppac::VerifyOptions opts;
  opts.samples = samples;
  opts.threads = c.threads;
  const ppac::VerifyReport rep = ppac::verify_experiment(cfg, opts);
  std::cout << ppac::format_report(rep.checks);
  std::cout << (rep.passed() ? "all checks passed\n" : "some checks FAILED\n");
  return rep.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prescribed-performance adaptive control experiments"};
  app.require_subcommand(1);

  Common run_opts;
  std::string out;
  auto* run_cmd = app.add_subcommand("run", "simulate every controller of a config and write CSV, SVG and summary.json");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--out", out, "output directory (default: [experiment] output or out/<name>)");

  Common verify_opts;
  int samples = 1000;
  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suites and print a pass/fail table");
  add_common(verify_cmd, verify_opts);
  verify_cmd->add_option("--samples", samples, "points per randomized check")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(run_opts, out);
    return verify(verify_opts, samples);
  } catch (const ppac::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
