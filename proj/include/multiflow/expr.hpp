#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "multiflow/core.hpp"

namespace multiflow {

/// Immutable scalar expression in the multitime variables t1..tm.
///
/// Grammar (whitespace is insignificant):
///
///     sum     := product (('+' | '-') product)*
///     product := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' UINT)*
///     primary := NUMBER | 't' UINT | FUNC '(' sum ')' | '(' sum ')'
///     FUNC    := exp | sin | cos | log
///
/// Variables are 1-based in text and 0-based in the API. Exponents are
/// non-negative integer literals. Constant subtrees are folded on
/// construction, so "3^2" is the literal 9.
class Expr {
 public:
  enum class Kind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Exp, Sin, Cos, Log };

  /// The literal 0.
  Expr();

  static Expr constant(double value);
  static Expr variable(std::size_t axis);

  /// Parses `text` with variables restricted to t1..tm.
  static Expr parse(std::string_view text, std::size_t m);

  Kind kind() const;
  bool is_constant() const { return kind() == Kind::Constant; }
  std::optional<double> literal() const;

  /// 1 + largest variable index referenced, or 0 for a variable-free tree.
  std::size_t arity() const;

  /// Throws DomainError on division by zero, log of a non-positive value,
  /// or a non-finite result.
  double eval(std::span<const double> t) const;
  double eval(const MultiTime& t) const { return eval(t.coords()); }

  /// Exact partial derivative with respect to t^{axis+1}.
  Expr differentiate(std::size_t axis) const;

  /// Fully parenthesized text that parses back to an equivalent tree.
  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, unsigned exponent);
  friend Expr exp(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr log(const Expr& a);

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node);
  static Expr make(Kind kind, Expr a, Expr b = Expr(), unsigned exponent = 0);
  static Expr unary(Kind kind, const Expr& a);

  std::shared_ptr<const Node> node_;
};

Expr pow(const Expr& base, unsigned exponent);
Expr exp(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr log(const Expr& a);

}  // namespace multiflow
