#include "ppac/jet.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>

namespace ppac {

std::string to_string(const Seed& seed) {
  switch (seed.kind) {
    case Seed::Kind::State:
      return "x" + std::to_string(seed.index);
    case Seed::Kind::Estimate:
      return "theta_hat" + std::to_string(seed.index);
    case Seed::Kind::BetaDerivative:
      return "beta^(" + std::to_string(seed.index) + ")";
    case Seed::Kind::Coordinate:
      return "z" + std::to_string(seed.index);
  }
  return "?";
}

SeedRegistry::SeedRegistry(std::vector<Seed> seeds) : seeds_(std::move(seeds)) {
  for (std::size_t i = 0; i < seeds_.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds_.size(); ++j) {
      if (seeds_[i] == seeds_[j]) throw RegistryError("duplicate seed " + to_string(seeds_[i]));
    }
  }
}

SeedRegistry SeedRegistry::for_virtual_law(int states, int params, int beta_slots) {
  std::vector<Seed> seeds;
  for (int i = 1; i <= states; ++i) seeds.push_back(state_seed(i));
  for (int i = 1; i <= params; ++i) seeds.push_back(estimate_seed(i));
  for (int j = 0; j < beta_slots; ++j) seeds.push_back(beta_seed(j));
  return SeedRegistry(std::move(seeds));
}

SeedRegistry SeedRegistry::coordinates(int count) {
  std::vector<Seed> seeds;
  for (int i = 1; i <= count; ++i) seeds.push_back(coordinate_seed(i));
  return SeedRegistry(std::move(seeds));
}

bool SeedRegistry::contains(const Seed& seed) const {
  return std::find(seeds_.begin(), seeds_.end(), seed) != seeds_.end();
}

std::size_t SeedRegistry::index_of(const Seed& seed) const {
  auto it = std::find(seeds_.begin(), seeds_.end(), seed);
  if (it == seeds_.end()) throw RegistryError("seed " + to_string(seed) + " is not registered");
  return static_cast<std::size_t>(it - seeds_.begin());
}

LevelStack LevelStack::pushed(std::size_t width) const {
  if (depth_ >= kMaxDepth) throw RegistryError("jet nesting deeper than supported");
  if (width == 0 || width > 0xffff) throw RegistryError("invalid jet level width");
  LevelStack out = *this;
  out.widths_[static_cast<std::size_t>(depth_)] = static_cast<std::uint16_t>(width);
  const std::size_t size = sizes_[static_cast<std::size_t>(depth_)] * (width + 1);
  if (size > 0xffffffffu) throw RegistryError("jet too large");
  out.sizes_[static_cast<std::size_t>(depth_ + 1)] = static_cast<std::uint32_t>(size);
  ++out.depth_;
  return out;
}

LevelStack LevelStack::popped() const {
  if (depth_ == 0) throw RegistryError("cannot strip a level from a plain value");
  LevelStack out = *this;
  --out.depth_;
  out.widths_[static_cast<std::size_t>(out.depth_)] = 0;
  out.sizes_[static_cast<std::size_t>(depth_)] = 0;
  return out;
}

bool LevelStack::has_prefix(const LevelStack& other) const {
  if (other.depth_ > depth_) return false;
  for (int l = 0; l < other.depth_; ++l) {
    if (widths_[static_cast<std::size_t>(l)] != other.widths_[static_cast<std::size_t>(l)]) return false;
  }
  return true;
}

bool operator==(const LevelStack& a, const LevelStack& b) {
  return a.depth_ == b.depth_ && a.has_prefix(b);
}

class JetAccess {
 public:
  static Jet make(const LevelStack& levels) { return Jet(levels, Jet::Storage(levels.size(), 0.0)); }
  static Jet::Storage& coeffs(Jet& j) { return j.coeffs_; }
  static const Jet::Storage& coeffs(const Jet& j) { return j.coeffs_; }
  static LevelStack& levels(Jet& j) { return j.levels_; }
};

namespace {

const LevelStack& common_levels(const Jet& a, const Jet& b) {
  const Jet& deep = a.depth() >= b.depth() ? a : b;
  const Jet& shallow = a.depth() >= b.depth() ? b : a;
  if (!deep.levels().has_prefix(shallow.levels())) {
    throw RegistryError("jets combined across incompatible level stacks");
  }
  return deep.levels();
}

Jet embedded(const Jet& value, const LevelStack& levels) {
  if (!levels.has_prefix(value.levels())) throw RegistryError("jet does not embed into the requested levels");
  if (value.depth() == levels.depth()) return value;
  Jet out = JetAccess::make(levels);
  const auto& src = JetAccess::coeffs(value);
  std::copy(src.begin(), src.end(), JetAccess::coeffs(out).begin());
  return out;
}

// out += a * b, where a, b, out all have the first `depth` levels of `levels`.
void mul_acc(const double* a, const double* b, double* out, const LevelStack& levels, int depth) {
  if (depth == 0) {
    *out += *a * *b;
    return;
  }
  if (depth == 1) {
    const double a0 = a[0];
    const double b0 = b[0];
    out[0] += a0 * b0;
    const std::size_t w = levels.width(0);
    for (std::size_t k = 1; k <= w; ++k) out[k] += a0 * b[k] + a[k] * b0;
    return;
  }
  const std::size_t block = levels.size_at(depth - 1);
  const std::size_t width = levels.width(depth - 1);
  mul_acc(a, b, out, levels, depth - 1);
  for (std::size_t k = 1; k <= width; ++k) {
    mul_acc(a, b + k * block, out + k * block, levels, depth - 1);
    mul_acc(a + k * block, b, out + k * block, levels, depth - 1);
  }
}

// `a` has depth <= b.depth(); a is constant along the extra levels of b.
Jet multiply(const Jet& a, const Jet& b) {
  if (a.depth() > b.depth()) return multiply(b, a);
  if (a.depth() == 0) {
    Jet out = b;
    const double s = a.value();
    for (double& c : JetAccess::coeffs(out)) c *= s;
    return out;
  }
  const LevelStack& levels = common_levels(a, b);
  Jet out = JetAccess::make(levels);
  const double* pa = JetAccess::coeffs(a).data();
  const double* pb = JetAccess::coeffs(b).data();
  double* po = JetAccess::coeffs(out).data();
  const std::size_t block = levels.size_at(a.depth());
  const std::size_t blocks = levels.size() / block;
  for (std::size_t j = 0; j < blocks; ++j) {
    mul_acc(pa, pb + j * block, po + j * block, levels, a.depth());
  }
  return out;
}

// Chain rule for a scalar function f: primal f(a0), partials f'(a0) * a_k.
// `rule` maps the depth-(d-1) primal to the pair (f(a0), f'(a0)).
template <class Rule>
Jet chain(const Jet& a, Rule&& rule) {
  const LevelStack& levels = a.levels();
  const int d = levels.depth();
  const LevelStack lower = levels.popped();
  const Jet a0 = a.primal();
  auto [f0, df0] = rule(a0);
  const Jet f0e = embedded(f0, lower);
  const Jet df0e = embedded(df0, lower);
  Jet out = JetAccess::make(levels);
  auto& o = JetAccess::coeffs(out);
  const auto& src = JetAccess::coeffs(a);
  const auto& fc = JetAccess::coeffs(f0e);
  std::copy(fc.begin(), fc.end(), o.begin());
  const std::size_t block = levels.size_at(d - 1);
  for (std::size_t k = 1; k <= levels.top_width(); ++k) {
    mul_acc(JetAccess::coeffs(df0e).data(), src.data() + k * block, o.data() + k * block, levels, d - 1);
  }
  return out;
}

// Taylor coefficients of tanh(x)/x in powers of x^2 from t' = 1 - t^2.
const std::vector<double>& tanhc_series() {
  static const std::vector<double> coeffs = [] {
    constexpr int kOrder = 41;
    std::vector<double> t(kOrder + 1, 0.0);  // tanh(x) = sum t[m] x^m
    t[1] = 1.0;
    for (int m = 1; m < kOrder; ++m) {
      double conv = 0.0;
      for (int i = 1; i < m; ++i) conv += t[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(m - i)];
      // (m+1) t[m+1] = [m==0] - sum_{i+j=m} t_i t_j
      t[static_cast<std::size_t>(m + 1)] = -conv / (m + 1);
    }
    std::vector<double> even;
    for (int m = 1; m <= kOrder; m += 2) even.push_back(t[static_cast<std::size_t>(m)]);
    return even;
  }();
  return coeffs;
}

template <class T>
T horner_even(const std::vector<double>& c, const T& x) {
  T x2 = x * x;
  T acc = T(c.back());
  for (std::size_t i = c.size() - 1; i-- > 0;) acc = acc * x2 + c[i];
  return acc;
}

const std::vector<double>& sinc_series() {
  static const std::vector<double> coeffs = [] {
    std::vector<double> c;
    double f = 1.0;
    for (int k = 0; k < 14; ++k) {
      c.push_back((k % 2 == 0 ? 1.0 : -1.0) / f);
      f *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
    }
    return c;
  }();
  return coeffs;
}

constexpr double kSeriesRadius = 0.5;

}  // namespace

Jet Jet::lift(double value, const SeedRegistry& registry, const Seed& seed) {
  const std::size_t slot = registry.index_of(seed);
  return variable(Jet(value), LevelStack{}.pushed(registry.size()), slot);
}

Jet Jet::variable(const Jet& value, const LevelStack& levels, std::size_t slot) {
  if (levels.depth() == 0) throw RegistryError("seeding requires at least one level");
  if (slot >= levels.top_width()) throw RegistryError("seed slot outside level width");
  Jet out = constant(value, levels);
  out.coeffs_[(slot + 1) * levels.size_at(levels.depth() - 1)] = 1.0;
  return out;
}

Jet Jet::constant(const Jet& value, const LevelStack& levels) { return embedded(value, levels); }

Jet Jet::primal() const {
  const LevelStack lower = levels_.popped();
  Storage c(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lower.size()));
  return Jet(lower, std::move(c));
}

Jet Jet::partial(std::size_t slot) const {
  const LevelStack lower = levels_.popped();
  if (slot >= levels_.top_width()) throw RegistryError("partial slot outside level width");
  const std::size_t block = lower.size();
  auto first = coeffs_.begin() + static_cast<std::ptrdiff_t>((slot + 1) * block);
  Storage c(first, first + static_cast<std::ptrdiff_t>(block));
  return Jet(lower, std::move(c));
}

Jet Jet::primal_at(int level) const {
  if (depth() < level) return *this;
  if (depth() > level) throw RegistryError("jet is deeper than the level being stripped");
  return primal();
}

Jet Jet::partial_at(int level, std::size_t slot) const {
  if (depth() < level) return Jet(0.0);
  if (depth() > level) throw RegistryError("jet is deeper than the level being stripped");
  return partial(slot);
}

std::vector<double> Jet::gradient() const {
  if (depth() != 1) throw RegistryError("gradient() needs a depth-1 jet");
  return {coeffs_.begin() + 1, coeffs_.end()};
}

Jet& Jet::operator+=(const Jet& rhs) {
  common_levels(*this, rhs);
  if (rhs.depth() > depth()) {
    Jet sum = rhs;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) sum.coeffs_[i] += coeffs_[i];
    return *this = std::move(sum);
  }
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  common_levels(*this, rhs);
  if (rhs.depth() > depth()) {
    Jet diff = -rhs;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) diff.coeffs_[i] += coeffs_[i];
    return *this = std::move(diff);
  }
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& rhs) {
  if (rhs.depth() == 0) return *this *= rhs.value();
  return *this = multiply(*this, rhs);
}
Jet& Jet::operator/=(const Jet& rhs) { return *this = multiply(*this, reciprocal(rhs)); }

Jet& Jet::operator+=(double rhs) {
  coeffs_[0] += rhs;
  return *this;
}
Jet& Jet::operator-=(double rhs) {
  coeffs_[0] -= rhs;
  return *this;
}
Jet& Jet::operator*=(double rhs) {
  for (double& c : coeffs_) c *= rhs;
  return *this;
}
Jet& Jet::operator/=(double rhs) {
  if (rhs == 0.0) throw DomainError("division of a jet by zero");
  for (double& c : coeffs_) c /= rhs;
  return *this;
}

Jet operator-(const Jet& a) {
  Jet out = a;
  for (double& c : JetAccess::coeffs(out)) c = -c;
  return out;
}

Jet operator*(const Jet& a, const Jet& b) { return multiply(a, b); }
Jet operator/(const Jet& a, const Jet& b) {
  if (b.depth() == 0) return a / b.value();
  return multiply(a, reciprocal(b));
}
Jet operator/(double a, const Jet& b) { return reciprocal(b) * a; }

bool identical(const Jet& a, const Jet& b) {
  if (!(a.levels_ == b.levels_) || a.coeffs_.size() != b.coeffs_.size()) return false;
  return std::equal(a.coeffs_.begin(), a.coeffs_.end(), b.coeffs_.begin(),
                    [](double x, double y) { return std::memcmp(&x, &y, sizeof(double)) == 0; });
}

Jet reciprocal(const Jet& a) {
  if (a.value() == 0.0) throw DomainError("division by a zero-valued jet");
  if (a.depth() == 0) return Jet(1.0 / a.value());
  return chain(a, [](const Jet& a0) {
    Jet r = reciprocal(a0);
    return std::pair{r, -(r * r)};
  });
}

Jet sqrt(const Jet& a) {
  if (a.value() < 0.0) throw DomainError("sqrt of a negative jet");
  if (a.depth() == 0) return Jet(std::sqrt(a.value()));
  return chain(a, [](const Jet& a0) {
    Jet r = sqrt(a0);
    return std::pair{r, 0.5 / r};
  });
}

Jet pow(const Jet& a, double exponent) {
  if (a.depth() == 0) return Jet(std::pow(a.value(), exponent));
  return chain(a, [exponent](const Jet& a0) {
    return std::pair{pow(a0, exponent), exponent * pow(a0, exponent - 1.0)};
  });
}

Jet powi(const Jet& a, int exponent) {
  if (exponent < 0) return reciprocal(powi(a, -exponent));
  Jet out(1.0);
  Jet base = a;
  while (exponent > 0) {
    if (exponent & 1) out = out * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return out;
}

Jet exp(const Jet& a) {
  if (a.depth() == 0) return Jet(std::exp(a.value()));
  return chain(a, [](const Jet& a0) {
    Jet e = exp(a0);
    return std::pair{e, e};
  });
}

Jet sin(const Jet& a) {
  if (a.depth() == 0) return Jet(std::sin(a.value()));
  return chain(a, [](const Jet& a0) { return std::pair{sin(a0), cos(a0)}; });
}

Jet cos(const Jet& a) {
  if (a.depth() == 0) return Jet(std::cos(a.value()));
  return chain(a, [](const Jet& a0) { return std::pair{cos(a0), -sin(a0)}; });
}

Jet tan(const Jet& a) {
  if (a.depth() == 0) return Jet(std::tan(a.value()));
  return chain(a, [](const Jet& a0) {
    Jet t = tan(a0);
    return std::pair{t, 1.0 + t * t};
  });
}

Jet atan(const Jet& a) {
  if (a.depth() == 0) return Jet(std::atan(a.value()));
  return chain(a, [](const Jet& a0) { return std::pair{atan(a0), reciprocal(1.0 + a0 * a0)}; });
}

Jet tanh(const Jet& a) {
  if (a.depth() == 0) return Jet(std::tanh(a.value()));
  return chain(a, [](const Jet& a0) {
    Jet t = tanh(a0);
    return std::pair{t, 1.0 - t * t};
  });
}

Jet atanh(const Jet& a) {
  if (std::abs(a.value()) >= 1.0) throw DomainError("atanh argument outside (-1, 1)");
  if (a.depth() == 0) return Jet(std::atanh(a.value()));
  return chain(a, [](const Jet& a0) { return std::pair{atanh(a0), reciprocal(1.0 - a0 * a0)}; });
}

double sinc(double a) {
  if (std::abs(a) < kSeriesRadius) return horner_even(sinc_series(), a);
  return std::sin(a) / a;
}

double tanhc(double a) {
  if (std::abs(a) < kSeriesRadius) return horner_even(tanhc_series(), a);
  return std::tanh(a) / a;
}

Jet sinc(const Jet& a) {
  if (std::abs(a.value()) < kSeriesRadius) return horner_even(sinc_series(), a);
  return sin(a) / a;
}

Jet tanhc(const Jet& a) {
  if (std::abs(a.value()) < kSeriesRadius) return horner_even(tanhc_series(), a);
  return tanh(a) / a;
}

ValueAndGradient evaluate_with_gradient(const std::function<Jet(std::span<const Jet>)>& f,
                                        std::span<const double> point, const SeedRegistry& registry) {
  if (point.size() != registry.size()) throw RegistryError("point size does not match the registry");
  const LevelStack levels = LevelStack{}.pushed(registry.size());
  std::vector<Jet> vars;
  vars.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) vars.push_back(Jet::variable(Jet(point[i]), levels, i));
  const Jet out = f(vars);
  ValueAndGradient result;
  result.value = out.value();
  if (out.depth() == 0) {
    result.gradient.assign(registry.size(), 0.0);
  } else {
    result.gradient = out.gradient();
  }
  return result;
}

}  // namespace ppac
