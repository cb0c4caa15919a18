#pragma once

// Invariant suites behind `ppac verify`: derivative and transform checks
// against finite differences, Hadamard identities re-evaluated at states
// sampled from the trajectories, the per-run trajectory checks and CSV
// round trips.

#include <random>
#include <string>
#include <vector>

#include "ppac/experiment.hpp"
#include "ppac/expression.hpp"

namespace ppac {

struct VerifyOptions {
  int samples = 1000;        // points per randomized check
  unsigned seed = 20240601;  // the suites are deterministic for a fixed seed
  unsigned threads = 0;
};

/// Random smooth expression in x1..x`vars` from the expression vocabulary
/// (no sign, no t), with bounded nesting so values stay moderate on [-1, 1].
std::string random_expression(std::mt19937_64& rng, int vars, int depth = 4);

/// Fourth-order central difference of f at x along coordinate i (Richardson
/// combination of steps h and h/2).
double central_difference(const std::function<double(std::span<const double>)>& f, std::vector<double> x, std::size_t i,
                          double h);

/// |a - b| / max(1, |b|).
double relative_error(double a, double b);

// Each suite appends its rows.
Check check_jet_gradients(int samples, std::mt19937_64& rng);
Check check_transform(const ControllerSpec& spec, int plant_order, int samples, std::mt19937_64& rng);
Check check_virtual_law_partials(const ControllerRun& run, const Controller& ctrl, int samples, std::mt19937_64& rng);
Check check_hadamard_identity(const ControllerRun& run, const Controller& ctrl, int samples, std::mt19937_64& rng);
Check check_csv_roundtrip(const ControllerRun& run);

struct VerifyReport {
  ExperimentResult result;
  std::vector<Check> checks;

  bool passed() const;
};

VerifyReport verify_experiment(const ExperimentConfig& cfg, const VerifyOptions& opts = {});
/// Fixed-width pass/fail table.
std::string format_report(const std::vector<Check>& checks);

}  // namespace ppac
