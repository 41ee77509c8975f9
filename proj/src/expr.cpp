#include "multiflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace multiflow {

struct Expr::Node {
  Kind kind = Kind::Constant;
  double value = 0.0;
  std::size_t axis = 0;
  unsigned exponent = 0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

std::shared_ptr<const Expr::Node> zero_node() {
  static const auto zero = std::make_shared<const Expr::Node>();
  return zero;
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string("non-finite result in ") + what);
  }
  return v;
}

double apply_unary(Expr::Kind kind, double x) {
  switch (kind) {
    case Expr::Kind::Neg: return -x;
    case Expr::Kind::Exp: return checked(std::exp(x), "exp");
    case Expr::Kind::Sin: return std::sin(x);
    case Expr::Kind::Cos: return std::cos(x);
    case Expr::Kind::Log:
      if (!(x > 0.0)) throw DomainError("log of a non-positive value");
      return std::log(x);
    default: break;
  }
  throw Error("not a unary kind");
}

double apply_binary(Expr::Kind kind, double x, double y) {
  switch (kind) {
    case Expr::Kind::Add: return checked(x + y, "+");
    case Expr::Kind::Sub: return checked(x - y, "-");
    case Expr::Kind::Mul: return checked(x * y, "*");
    case Expr::Kind::Div:
      if (y == 0.0) throw DomainError("division by zero");
      return checked(x / y, "/");
    default: break;
  }
  throw Error("not a binary kind");
}

double int_pow(double x, unsigned n) {
  double r = 1.0;
  for (unsigned i = 0; i < n; ++i) r *= x;
  return checked(r, "^");
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("literal must be finite");
  if (value == 0.0) return Expr();
  auto n = std::make_shared<Node>();
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::size_t axis) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->axis = axis;
  return Expr(std::move(n));
}

Expr Expr::make(Kind kind, Expr a, Expr b, unsigned exponent) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->exponent = exponent;
  n->a = std::move(a.node_);
  n->b = std::move(b.node_);
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }

std::optional<double> Expr::literal() const {
  if (is_constant()) return node_->value;
  return std::nullopt;
}

std::size_t Expr::arity() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant: return 0;
    case Kind::Variable: return n.axis + 1;
    default: break;
  }
  std::size_t r = Expr(n.a).arity();
  if (n.b) r = std::max(r, Expr(n.b).arity());
  return r;
}

double Expr::eval(std::span<const double> t) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant: return n.value;
    case Kind::Variable:
      if (n.axis >= t.size()) {
        throw DimensionError("expression references t" +
                             std::to_string(n.axis + 1) + " but point has " +
                             std::to_string(t.size()) + " coordinates");
      }
      return t[n.axis];
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div:
      return apply_binary(n.kind, Expr(n.a).eval(t), Expr(n.b).eval(t));
    case Kind::Pow: return int_pow(Expr(n.a).eval(t), n.exponent);
    default: return apply_unary(n.kind, Expr(n.a).eval(t));
  }
}

// Folding constructors. A constant fold that would raise a domain error is
// skipped so the error surfaces at evaluation time instead.

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    double v = a.node_->value + b.node_->value;
    if (std::isfinite(v)) return Expr::constant(v);
  }
  if (a.literal() == 0.0) return b;
  if (b.literal() == 0.0) return a;
  return Expr::make(Expr::Kind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    double v = a.node_->value - b.node_->value;
    if (std::isfinite(v)) return Expr::constant(v);
  }
  if (b.literal() == 0.0) return a;
  if (a.literal() == 0.0) return -b;
  return Expr::make(Expr::Kind::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    double v = a.node_->value * b.node_->value;
    if (std::isfinite(v)) return Expr::constant(v);
  }
  if (a.literal() == 0.0 || b.literal() == 0.0) return Expr();
  if (a.literal() == 1.0) return b;
  if (b.literal() == 1.0) return a;
  if (a.literal() == -1.0) return -b;
  if (b.literal() == -1.0) return -a;
  return Expr::make(Expr::Kind::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.node_->value != 0.0) {
    double v = a.node_->value / b.node_->value;
    if (std::isfinite(v)) return Expr::constant(v);
  }
  if (b.literal() == 1.0) return a;
  if (a.literal() == 0.0 && b.literal() != 0.0) return Expr();
  return Expr::make(Expr::Kind::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.node_->value);
  if (a.kind() == Expr::Kind::Neg) return Expr(a.node_->a);
  return Expr::make(Expr::Kind::Neg, a);
}

Expr pow(const Expr& base, unsigned exponent) {
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return base;
  if (base.is_constant()) {
    double v = 1.0;
    for (unsigned i = 0; i < exponent; ++i) v *= base.node_->value;
    if (std::isfinite(v)) return Expr::constant(v);
  }
  return Expr::make(Expr::Kind::Pow, base, Expr(), exponent);
}

Expr Expr::unary(Kind kind, const Expr& a) {
  if (a.is_constant()) {
    try {
      double v = apply_unary(kind, a.node_->value);
      if (std::isfinite(v)) return constant(v);
    } catch (const DomainError&) {
    }
  }
  return make(kind, a);
}

Expr exp(const Expr& a) { return Expr::unary(Expr::Kind::Exp, a); }
Expr sin(const Expr& a) { return Expr::unary(Expr::Kind::Sin, a); }
Expr cos(const Expr& a) { return Expr::unary(Expr::Kind::Cos, a); }
Expr log(const Expr& a) { return Expr::unary(Expr::Kind::Log, a); }

Expr Expr::differentiate(std::size_t axis) const {
  const Node& n = *node_;
  const Expr a = n.a ? Expr(n.a) : Expr();
  const Expr b = n.b ? Expr(n.b) : Expr();
  switch (n.kind) {
    case Kind::Constant: return Expr();
    case Kind::Variable:
      return n.axis == axis ? Expr::constant(1.0) : Expr();
    case Kind::Add: return a.differentiate(axis) + b.differentiate(axis);
    case Kind::Sub: return a.differentiate(axis) - b.differentiate(axis);
    case Kind::Mul:
      return a.differentiate(axis) * b + a * b.differentiate(axis);
    case Kind::Div:
      return (a.differentiate(axis) * b - a * b.differentiate(axis)) /
             pow(b, 2);
    case Kind::Pow:
      return Expr::constant(static_cast<double>(n.exponent)) *
             pow(a, n.exponent - 1) * a.differentiate(axis);
    case Kind::Neg: return -a.differentiate(axis);
    case Kind::Exp: return *this * a.differentiate(axis);
    case Kind::Sin: return cos(a) * a.differentiate(axis);
    case Kind::Cos: return -(sin(a) * a.differentiate(axis));
    case Kind::Log: return a.differentiate(axis) / a;
  }
  return Expr();
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  auto bin = [&](const char* op) {
    return "(" + Expr(n.a).to_string() + " " + op + " " +
           Expr(n.b).to_string() + ")";
  };
  auto fn = [&](const char* name) {
    return std::string(name) + "(" + Expr(n.a).to_string() + ")";
  };
  switch (n.kind) {
    case Kind::Constant: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", std::fabs(n.value));
      if (n.value < 0.0) return std::string("(-") + buf + ")";
      return buf;
    }
    case Kind::Variable: return "t" + std::to_string(n.axis + 1);
    case Kind::Add: return bin("+");
    case Kind::Sub: return bin("-");
    case Kind::Mul: return bin("*");
    case Kind::Div: return bin("/");
    case Kind::Pow:
      return "(" + Expr(n.a).to_string() + "^" + std::to_string(n.exponent) +
             ")";
    case Kind::Neg: return "(-" + Expr(n.a).to_string() + ")";
    case Kind::Exp: return fn("exp");
    case Kind::Sin: return fn("sin");
    case Kind::Cos: return fn("cos");
    case Kind::Log: return fn("log");
  }
  return "?";
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::size_t m) : text_(text), m_(m) {}

  Expr parse_all() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    Expr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(std::string("unexpected character '") + text_[pos_] +
                           "'",
                       pos_);
    }
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_product();
      } else if (accept('-')) {
        lhs = lhs - parse_product();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    while (accept('^')) {
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      if (pos_ == start ||
          (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' ||
                                   text_[pos_] == 'E'))) {
        throw ParseError("exponent must be a non-negative integer literal",
                         start);
      }
      unsigned exponent = 0;
      auto [ptr, ec] =
          std::from_chars(text_.data() + start, text_.data() + pos_, exponent);
      if (ec != std::errc()) throw ParseError("exponent out of range", start);
      base = pow(base, exponent);
    }
    return base;
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t s = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      return pos_ - s;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        ++pos_;
      }
      if (digits() == 0) throw ParseError("malformed exponent in number", mark);
    }
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || !std::isfinite(value)) {
      throw ParseError("number out of range", start);
    }
    return Expr::constant(value);
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ == text_.size()) {
      throw ParseError("unexpected end of expression", pos_);
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isalnum(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name.size() > 1 && name[0] == 't' &&
          name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
        std::size_t index = 0;
        auto [ptr, ec] = std::from_chars(name.data() + 1,
                                         name.data() + name.size(), index);
        if (ec != std::errc() || index == 0 || index > m_) {
          throw ParseError("unknown identifier '" + std::string(name) +
                               "' (variables are t1..t" + std::to_string(m_) +
                               ")",
                           start);
        }
        return Expr::variable(index - 1);
      }
      Expr (*fn)(const Expr&) = nullptr;
      if (name == "exp") fn = exp;
      if (name == "sin") fn = sin;
      if (name == "cos") fn = cos;
      if (name == "log") fn = log;
      if (fn == nullptr) {
        throw ParseError("unknown identifier '" + std::string(name) + "'",
                         start);
      }
      expect('(');
      Expr arg = parse_sum();
      expect(')');
      return fn(arg);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view text_;
  std::size_t m_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(std::string_view text, std::size_t m) {
  return Parser(text, m).parse_all();
}

}  // namespace multiflow
