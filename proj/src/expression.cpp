#include "ppac/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>

#include "ppac/errors.hpp"

namespace ppac {

struct Expression::Node {
  enum class Kind { Number, Time, State, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Tanh, Exp, Sign };
  Kind kind = Kind::Number;
  double number = 0.0;
  int index = 0;  // state index or integer exponent
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "expression '" << text_ << "' column " << pos_ + 1 << ": " << what;
    throw InvalidArgument(msg.str());
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) n = make(Kind::Add, n, term());
      else if (accept('-')) n = make(Kind::Sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = factor();
    for (;;) {
      if (accept('*')) n = make(Kind::Mul, n, factor());
      else if (accept('/')) n = make(Kind::Div, n, factor());
      else return n;
    }
  }

  NodePtr factor() {
    if (accept('-')) return make(Kind::Neg, factor());
    if (accept('+')) return factor();
    NodePtr base = primary();
    if (accept('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a non-negative integer");
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Pow;
      n->index = std::stoi(text_.substr(start, pos_ - start));
      n->lhs = base;
      return n;
    }
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Number;
      n->number = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string word = text_.substr(start, pos_ - start);
      if (word == "t") return make(Kind::Time);
      if (word.size() > 1 && word[0] == 'x' &&
          std::all_of(word.begin() + 1, word.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::State;
        n->index = std::stoi(word.substr(1));
        if (n->index < 1) fail("state indices start at x1");
        return n;
      }
      Kind k;
      if (word == "sin") k = Kind::Sin;
      else if (word == "cos") k = Kind::Cos;
      else if (word == "tanh") k = Kind::Tanh;
      else if (word == "exp") k = Kind::Exp;
      else if (word == "sign") k = Kind::Sign;
      else {
        pos_ = start;
        fail("unknown name '" + word + "'");
      }
      if (!accept('(')) fail("expected '(' after " + word);
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(k, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

template <class T>
T eval(const Expression::Node& n, double t, std::span<const T> x) {
  using std::cos;
  using std::exp;
  using std::sin;
  using std::tanh;
  switch (n.kind) {
    case Kind::Number:
      return T(n.number);
    case Kind::Time:
      return T(t);
    case Kind::State:
      if (static_cast<std::size_t>(n.index) > x.size()) throw InvalidArgument("expression references a missing state");
      return x[static_cast<std::size_t>(n.index - 1)];
    case Kind::Add:
      return eval(*n.lhs, t, x) + eval(*n.rhs, t, x);
    case Kind::Sub:
      return eval(*n.lhs, t, x) - eval(*n.rhs, t, x);
    case Kind::Mul:
      return eval(*n.lhs, t, x) * eval(*n.rhs, t, x);
    case Kind::Div:
      return eval(*n.lhs, t, x) / eval(*n.rhs, t, x);
    case Kind::Neg:
      return -eval(*n.lhs, t, x);
    case Kind::Pow:
      return powi(eval(*n.lhs, t, x), n.index);
    case Kind::Sin:
      return sin(eval(*n.lhs, t, x));
    case Kind::Cos:
      return cos(eval(*n.lhs, t, x));
    case Kind::Tanh:
      return tanh(eval(*n.lhs, t, x));
    case Kind::Exp:
      return exp(eval(*n.lhs, t, x));
    case Kind::Sign:
      if constexpr (std::is_same_v<T, double>) {
        return sign_of(eval(*n.lhs, t, x));
      } else {
        throw InvalidArgument("sign() is not differentiable and cannot appear in a regressor");
      }
  }
  return T(0.0);
}

double mul_bound(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

Interval mul(const Interval& a, const Interval& b) {
  const double c[4] = {mul_bound(a.lower, b.lower), mul_bound(a.lower, b.upper), mul_bound(a.upper, b.lower),
                       mul_bound(a.upper, b.upper)};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

Interval bounds_of(const Expression::Node& n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (n.kind) {
    case Kind::Number:
      return {n.number, n.number};
    case Kind::Time:
      return {0.0, inf};
    case Kind::State:
      return {-inf, inf};
    case Kind::Add: {
      auto a = bounds_of(*n.lhs), b = bounds_of(*n.rhs);
      return {a.lower + b.lower, a.upper + b.upper};
    }
    case Kind::Sub: {
      auto a = bounds_of(*n.lhs), b = bounds_of(*n.rhs);
      return {a.lower - b.upper, a.upper - b.lower};
    }
    case Kind::Mul:
      return mul(bounds_of(*n.lhs), bounds_of(*n.rhs));
    case Kind::Div: {
      auto a = bounds_of(*n.lhs), b = bounds_of(*n.rhs);
      if (b.lower <= 0.0 && b.upper >= 0.0) return {-inf, inf};
      return mul(a, {1.0 / b.upper, 1.0 / b.lower});
    }
    case Kind::Neg: {
      auto a = bounds_of(*n.lhs);
      return {-a.upper, -a.lower};
    }
    case Kind::Pow: {
      auto a = bounds_of(*n.lhs);
      if (n.index == 0) return {1.0, 1.0};
      if (n.index % 2 == 0) {
        const double lo = (a.lower <= 0.0 && a.upper >= 0.0) ? 0.0 : std::min(std::abs(a.lower), std::abs(a.upper));
        const double hi = std::max(std::abs(a.lower), std::abs(a.upper));
        return {std::pow(lo, n.index), std::pow(hi, n.index)};
      }
      return {std::pow(a.lower, n.index), std::pow(a.upper, n.index)};
    }
    case Kind::Sin:
    case Kind::Cos:
    case Kind::Tanh:
    case Kind::Sign:
      return {-1.0, 1.0};
    case Kind::Exp: {
      auto a = bounds_of(*n.lhs);
      return {std::exp(a.lower), std::exp(a.upper)};
    }
  }
  return {};
}

void walk(const Expression::Node& n, const std::function<void(const Expression::Node&)>& f) {
  f(n);
  if (n.lhs) walk(*n.lhs, f);
  if (n.rhs) walk(*n.rhs, f);
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

int Expression::max_state_index() const {
  int m = 0;
  walk(*root_, [&](const Node& n) {
    if (n.kind == Kind::State) m = std::max(m, n.index);
  });
  return m;
}

bool Expression::uses_time() const {
  bool used = false;
  walk(*root_, [&](const Node& n) { used = used || n.kind == Kind::Time; });
  return used;
}

bool Expression::uses_nonsmooth() const {
  bool used = false;
  walk(*root_, [&](const Node& n) { used = used || n.kind == Kind::Sign; });
  return used;
}

double Expression::evaluate(double t, std::span<const double> x) const { return eval<double>(*root_, t, x); }

Jet Expression::evaluate(std::span<const Jet> x) const { return eval<Jet>(*root_, 0.0, x); }

Interval Expression::bounds() const { return bounds_of(*root_); }

}  // namespace ppac
