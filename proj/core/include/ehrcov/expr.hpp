#pragma once

// Coordinate-expression language.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | ident | func '(' expr ')' | '(' expr ')'
//   func    := 'sin' | 'cos' | 'tan' | 'exp' | 'ln' | 'sqrt' | 'abs'
//   number  := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//   ident   := [A-Za-z_][A-Za-z0-9_]*
//
// '^' binds tighter than unary minus and is right associative, so -x^2 is
// -(x^2) and a^b^c is a^(b^c). There is no implicit multiplication.

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ehrcov/jet.hpp"

namespace ehrcov {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string expected, std::string found);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  std::size_t offset_;
  std::string expected_;
  std::string found_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnboundVariableError : public EvalError {
 public:
  explicit UnboundVariableError(const std::string& name)
      : EvalError("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

enum class NodeKind { Constant, Variable, Negate, Binary, Call };
enum class Function { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs };

class Expr {
 public:
  struct Node;

  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr variable(std::string name);
  static Expr negate(Expr operand);
  static Expr binary(char op, Expr lhs, Expr rhs);
  static Expr call(Function fn, Expr argument);

  NodeKind kind() const;
  double constant_value() const;
  const std::string& name() const;  // variable name
  char op() const;                  // binary operator
  Function function() const;
  const std::vector<Expr>& children() const;

  /// Structural equality (constants compared bitwise).
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr parse(std::string_view text);
std::string to_string(const Expr& e);
std::string to_string(Function fn);

/// Variables in order of first appearance.
std::vector<std::string> free_vars(const Expr& e);

/// An expression with variables resolved to positions in a fixed list.
class BoundExpr {
 public:
  BoundExpr() = default;
  /// Throws UnboundVariableError when a free variable is not in `names`.
  BoundExpr(Expr e, std::span<const std::string> names);

  const Expr& expr() const noexcept { return expr_; }

  template <class Scalar>
  Scalar eval(std::span<const Scalar> values) const;

 private:
  template <class Scalar>
  Scalar eval_node(const Expr& e, std::span<const Scalar> values) const;

  Expr expr_;
  std::map<std::string, int, std::less<>> slots_;
};

template <class Scalar>
Scalar eval(const Expr& e, const std::map<std::string, Scalar>& env) {
  std::vector<std::string> names;
  std::vector<Scalar> values;
  for (const auto& [k, v] : env) {
    names.push_back(k);
    values.push_back(v);
  }
  return BoundExpr(e, names).eval<Scalar>(std::span<const Scalar>(values));
}

namespace detail {

inline double ipow(double a, int k) {
  if (k < 0) {
    if (a == 0.0) throw DomainError("division", "zero raised to a negative power");
    return 1.0 / ipow(a, -k);
  }
  double r = 1.0;
  double b = a;
  while (k > 0) {
    if (k & 1) r *= b;
    k >>= 1;
    if (k > 0) b *= b;
  }
  return r;
}

inline double ipow_any(double a, int k) { return ipow(a, k); }
inline Jet ipow_any(const Jet& a, int k) {
  if (k < 0 && a.value() == 0.0) throw DomainError("division", "zero raised to a negative power");
  return pow(a, k);
}

// Integer exponent when the exponent node is an integral literal (optionally negated).
bool integer_exponent(const Expr& e, int& k);

}  // namespace detail

template <class Scalar>
Scalar BoundExpr::eval(std::span<const Scalar> values) const {
  return eval_node<Scalar>(expr_, values);
}

template <class Scalar>
Scalar BoundExpr::eval_node(const Expr& e, std::span<const Scalar> values) const {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  using std::tan;
  switch (e.kind()) {
    case NodeKind::Constant:
      return Scalar(e.constant_value());
    case NodeKind::Variable:
      return values[static_cast<std::size_t>(slots_.find(e.name())->second)];
    case NodeKind::Negate:
      return -eval_node<Scalar>(e.children()[0], values);
    case NodeKind::Binary: {
      const Expr& lhs = e.children()[0];
      const Expr& rhs = e.children()[1];
      if (e.op() == '^') {
        int k = 0;
        if (detail::integer_exponent(rhs, k)) return detail::ipow_any(eval_node<Scalar>(lhs, values), k);
        const Scalar base = eval_node<Scalar>(lhs, values);
        if (!(value_of(base) > 0.0)) {
          throw DomainError("pow", "non-integer power of non-positive base in " + to_string(e));
        }
        return exp(eval_node<Scalar>(rhs, values) * log(base));
      }
      const Scalar a = eval_node<Scalar>(lhs, values);
      const Scalar b = eval_node<Scalar>(rhs, values);
      switch (e.op()) {
        case '+':
          return a + b;
        case '-':
          return a - b;
        case '*':
          return a * b;
        default:
          if (value_of(b) == 0.0) throw DomainError("division", "divisor is zero in " + to_string(e));
          return a / b;
      }
    }
    case NodeKind::Call: {
      const Scalar a = eval_node<Scalar>(e.children()[0], values);
      const double v = value_of(a);
      try {
        switch (e.function()) {
          case Function::Sin:
            return sin(a);
          case Function::Cos:
            return cos(a);
          case Function::Tan:
            if (std::cos(v) == 0.0) throw DomainError("tan", "argument is a pole");
            return tan(a);
          case Function::Exp:
            return exp(a);
          case Function::Ln:
            if (!(v > 0.0)) throw DomainError("ln", "argument is not positive");
            return log(a);
          case Function::Sqrt:
            if (v < 0.0) throw DomainError("sqrt", "argument is negative");
            return sqrt(a);
          case Function::Abs:
            return abs(a);
        }
      } catch (const DomainError& err) {
        throw DomainError(err.op(), err.detail() + " in " + to_string(e));
      }
    }
  }
  throw EvalError("malformed expression node");
}

}  // namespace ehrcov
