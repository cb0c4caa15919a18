#pragma once

// Forward-mode differentiation with nested first-order jets.
//
// A Jet of depth d carries a value together with first partial derivatives
// with respect to d independent "levels" of seeds. Level l has its own width
// (number of seeds). Nesting is what lets the backstepping recursion
// differentiate a quantity that was itself obtained by differentiation: the
// partial of a depth-d jet along its top level is a depth-(d-1) jet that still
// carries all derivatives with respect to the lower levels.
//
// Storage is a flat tensor of shape (w_1+1) x ... x (w_d+1) with the newest
// level outermost, so block 0 of the top level is the primal (a depth-(d-1)
// jet) and a lower-depth jet embeds as a prefix.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "ppac/errors.hpp"

namespace ppac {

/// Identifier of an independent variable registered for differentiation.
struct Seed {
  enum class Kind : std::uint8_t { State, Estimate, BetaDerivative, Coordinate };
  Kind kind = Kind::State;
  int index = 0;  // 1-based for states/estimates/coordinates, derivative order for beta

  friend bool operator==(const Seed&, const Seed&) = default;
};

std::string to_string(const Seed& seed);

inline Seed state_seed(int i) { return {Seed::Kind::State, i}; }
inline Seed estimate_seed(int i) { return {Seed::Kind::Estimate, i}; }
inline Seed beta_seed(int order) { return {Seed::Kind::BetaDerivative, order}; }
inline Seed coordinate_seed(int i) { return {Seed::Kind::Coordinate, i}; }

/// Ordered, duplicate-free list of seeds for one jet level.
class SeedRegistry {
 public:
  SeedRegistry() = default;
  explicit SeedRegistry(std::vector<Seed> seeds);

  /// x_1..x_states, theta_hat_1..theta_hat_params, beta^(0)..beta^(beta_slots-1).
  static SeedRegistry for_virtual_law(int states, int params, int beta_slots);
  /// Coordinates z_1..z_count (the local level of a Hadamard integrand).
  static SeedRegistry coordinates(int count);

  std::size_t size() const { return seeds_.size(); }
  const Seed& operator[](std::size_t i) const { return seeds_[i]; }
  bool contains(const Seed& seed) const;
  /// Throws RegistryError for an unregistered seed.
  std::size_t index_of(const Seed& seed) const;

 private:
  std::vector<Seed> seeds_;
};

/// Widths of the levels a jet is differentiated against, oldest first.
class LevelStack {
 public:
  static constexpr int kMaxDepth = 8;

  LevelStack() = default;

  int depth() const { return depth_; }
  std::size_t width(int level) const { return widths_[static_cast<std::size_t>(level)]; }
  std::size_t top_width() const { return widths_[static_cast<std::size_t>(depth_ - 1)]; }
  /// Number of coefficients of a jet with this stack.
  std::size_t size() const { return sizes_[static_cast<std::size_t>(depth_)]; }
  /// Number of coefficients of a jet with the first `depth` levels of this stack.
  std::size_t size_at(int depth) const { return sizes_[static_cast<std::size_t>(depth)]; }

  LevelStack pushed(std::size_t width) const;
  LevelStack popped() const;
  /// True when `other` is this stack truncated to other.depth() levels.
  bool has_prefix(const LevelStack& other) const;

  friend bool operator==(const LevelStack& a, const LevelStack& b);

 private:
  std::array<std::uint16_t, kMaxDepth> widths_{};
  std::array<std::uint32_t, kMaxDepth + 1> sizes_{1};
  std::uint8_t depth_ = 0;
};

class Jet {
 public:
  using Storage = boost::container::small_vector<double, 40>;

  Jet() : Jet(0.0) {}
  Jet(double value) : coeffs_{value} {}  // NOLINT(google-explicit-constructor)

  /// Depth-1 jet with a unit partial at `seed`.
  static Jet lift(double value, const SeedRegistry& registry, const Seed& seed);
  /// Seeds a new top level: `levels` must be `value.levels()` extended (possibly
  /// through intermediate levels) by one; the result has `value` as primal and a
  /// unit partial at `slot`.
  static Jet variable(const Jet& value, const LevelStack& levels, std::size_t slot);
  /// Embeds `value` into `levels` with zero partials on the added levels.
  static Jet constant(const Jet& value, const LevelStack& levels);

  double value() const { return coeffs_[0]; }
  int depth() const { return levels_.depth(); }
  const LevelStack& levels() const { return levels_; }
  std::span<const double> coefficients() const { return {coeffs_.data(), coeffs_.size()}; }

  /// Strips the top level.
  Jet primal() const;
  /// Partial along slot `slot` of the top level.
  Jet partial(std::size_t slot) const;
  /// Level-aware variants: a jet shallower than `level` does not depend on it.
  Jet primal_at(int level) const;
  Jet partial_at(int level, std::size_t slot) const;
  /// Top-level partials of a depth-1 jet as plain numbers.
  std::vector<double> gradient() const;

  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator/=(const Jet& rhs);
  Jet& operator+=(double rhs);
  Jet& operator-=(double rhs);
  Jet& operator*=(double rhs);
  Jet& operator/=(double rhs);

  friend Jet operator-(const Jet& a);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator-(double a, const Jet& b) { return -b + a; }
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }
  friend Jet operator/(Jet a, double b) { return a /= b; }
  friend Jet operator/(double a, const Jet& b);

  /// Bitwise equality of structure and coefficients.
  friend bool identical(const Jet& a, const Jet& b);

 private:
  friend class JetAccess;
  Jet(LevelStack levels, Storage coeffs) : levels_(levels), coeffs_(std::move(coeffs)) {}

  LevelStack levels_;
  Storage coeffs_;
};

Jet reciprocal(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double exponent);
Jet powi(const Jet& a, int exponent);
Jet exp(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet atan(const Jet& a);
Jet tanh(const Jet& a);
Jet atanh(const Jet& a);
/// sin(a)/a, analytic at 0.
Jet sinc(const Jet& a);
/// tanh(a)/a, analytic at 0.
Jet tanhc(const Jet& a);

double sinc(double a);
double tanhc(double a);
inline double powi(double a, int exponent) { return std::pow(a, exponent); }

inline double value_of(double v) { return v; }
inline double value_of(const Jet& j) { return j.value(); }

/// Evaluates `f` with every coordinate of `point` seeded against `registry`
/// (one level) and returns the value and the gradient in registry order.
struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};
ValueAndGradient evaluate_with_gradient(const std::function<Jet(std::span<const Jet>)>& f,
                                        std::span<const double> point, const SeedRegistry& registry);

}  // namespace ppac
