#pragma once

// Experiment configs (INI-style, see configs/*.ini), construction of plants
// and controllers from them, batch runs and the artifacts they leave behind.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppac/backstepping.hpp"
#include "ppac/controller.hpp"
#include "ppac/errors.hpp"
#include "ppac/funnel.hpp"
#include "ppac/plant.hpp"
#include "ppac/sim.hpp"

namespace ppac {

/// Schema violation; `line` is 0 when the problem is not tied to one line.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Raw sections of an INI file, with the line of every key.
struct IniEntry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct IniSection {
  std::string name;
  int line = 0;
  std::map<std::string, IniEntry> entries;
};

struct IniDocument {
  std::string source;
  std::vector<IniSection> sections;

  static IniDocument parse(std::istream& in, const std::string& source);
};

enum class PlantKind { Showcase, SmoothedShowcase, Expressions };

struct PlantSpec {
  PlantKind kind = PlantKind::Showcase;
  double sharpness = 50.0;  // smoothed showcase only
  int order = 0;
  int params = 0;
  std::vector<std::vector<std::string>> phi;  // phi[i-1][r]
  std::vector<std::string> theta;
  std::vector<std::optional<std::pair<double, double>>> theta_bounds;
  std::string b;
  std::optional<std::pair<double, double>> b_bounds;
};

enum class ControllerType { Scalar, Backstepping };

struct BetaSpec {
  PerformanceFunction::Variant variant = PerformanceFunction::Variant::Exponential;
  double scale = 0.9;
  double rate = 0.4;
  double beta_inf = 0.1;
  double horizon = 5.0;
  std::optional<int> order;  // defaults to the plant order
};

struct ControllerSpec {
  std::string name;
  int line = 0;
  ControllerType type = ControllerType::Backstepping;
  TransformStrategy strategy = TransformStrategy::Rational;
  NormalizedFunction psi = NormalizedFunction::Algebraic;
  PiFormula pi_formula = PiFormula::Exact;
  BetaSpec beta;
  std::vector<double> k;
  std::vector<double> gamma;  // one entry (times identity), q entries (diagonal) or q*q (row-major)
  double gamma_rho = 0.1;
  double delta = 1.0;
  double eps_psi = 1.0;
  double eps_omega = 1.0;
  int nodes = 16;
  int max_nodes = 32;
  std::vector<double> theta_hat0;
  double rho_hat0 = 0.25;
  std::optional<FunnelPolicy> funnel_policy;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string source;
  unsigned seed = 0;  // reserved: every run is deterministic
  std::vector<double> x0;
  PlantSpec plant;
  SimConfig sim;
  std::vector<ControllerSpec> controllers;
  std::optional<std::filesystem::path> output;
};

ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Names accepted by preset_config: "paper-sim", "scalar-demo".
std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);
/// The commented INI text a preset is parsed from.
const std::string& preset_text(const std::string& name);

Plant build_plant(const PlantSpec& spec);
PerformanceFunction build_beta(const BetaSpec& spec, int plant_order);
FunnelTransform build_transform(const ControllerSpec& spec, int plant_order);
std::unique_ptr<Controller> build_controller(const ControllerSpec& spec, const Plant& plant);
/// Every construction guard of the referenced modules, without simulating.
void validate_config(const ExperimentConfig& cfg);

enum class CheckStatus { Pass, Fail, NotApplicable };
std::string to_string(CheckStatus s);

struct Check {
  std::string name;
  std::string subject;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct ControllerRun {
  ControllerSpec spec;
  SimOutcome outcome;
  FunnelPolicy policy = FunnelPolicy::Abort;
  LyapunovOracle oracle;
  bool enforces_funnel = true;
  long funnel_violations = 0;
  std::vector<double> terminal_x;
  double terminal_norm = 0.0;
  double max_residual = 0.0;
  std::vector<Check> checks;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ControllerRun> runs;

  bool simulations_completed() const;
  bool checks_passed() const;
};

/// Simulates every controller of the config (in parallel when `threads` > 1)
/// and evaluates the per-run checks.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 0);

/// <name>.csv per controller, the six figure analogs as SVG and summary.json.
/// Returns the paths written.
std::vector<std::filesystem::path> write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir);
std::string summary_json(const ExperimentResult& result);

/// Checks that only need a finished log: funnel containment, Hadamard
/// residual, rho_hat sign, Lyapunov decrease (when the gains cover the
/// declared parameter variation).
std::vector<Check> trajectory_checks(const ControllerRun& run, const Plant& plant);

}  // namespace ppac
