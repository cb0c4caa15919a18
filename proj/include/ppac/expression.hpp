#pragma once

// A small arithmetic vocabulary for declaring plants in experiment configs:
// numbers, t, x1..xn, + - * / ^(integer), and sin cos tanh exp sign.
// Expressions evaluate on doubles (signals), on jets (regressors) and on
// intervals (declared bounds of parameter signals).

#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ppac/jet.hpp"

namespace ppac {

struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool bounded() const { return std::isfinite(lower) && std::isfinite(upper); }
  bool contains(double v) const { return v >= lower && v <= upper; }
};

class Expression {
 public:
  /// Throws InvalidArgument with the offending column on malformed input.
  static Expression parse(const std::string& text);

  const std::string& text() const { return text_; }
  /// Highest state index referenced (0 when none).
  int max_state_index() const;
  bool uses_time() const;
  /// True when the expression contains a non-smooth function (sign).
  bool uses_nonsmooth() const;

  double evaluate(double t, std::span<const double> x) const;
  /// Time-free evaluation on jets (regressors).
  Jet evaluate(std::span<const Jet> x) const;
  /// Enclosure over t >= 0 and unconstrained states.
  Interval bounds() const;

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace ppac
