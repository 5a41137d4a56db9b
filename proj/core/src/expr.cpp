#include "ehrcov/expr.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <charconv>
#include <set>

namespace ehrcov {

struct Expr::Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;
  std::string name;
  char op = 0;
  Function fn = Function::Sin;
  std::vector<Expr> children;
};

ParseError::ParseError(std::size_t offset, std::string expected, std::string found)
    : std::runtime_error("parse error at offset " + std::to_string(offset) + ": expected " + expected +
                         ", found " + found),
      offset_(offset),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

Expr::Expr() : node_(std::make_shared<Node>()) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Variable;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Negate;
  n->children.push_back(std::move(operand));
  return Expr(std::move(n));
}

Expr Expr::binary(char op, Expr lhs, Expr rhs) {
  if (op != '+' && op != '-' && op != '*' && op != '/' && op != '^') {
    throw std::invalid_argument(std::string("unsupported binary operator '") + op + "'");
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Binary;
  n->op = op;
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr Expr::call(Function fn, Expr argument) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->fn = fn;
  n->children.push_back(std::move(argument));
  return Expr(std::move(n));
}

NodeKind Expr::kind() const { return node_->kind; }
double Expr::constant_value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
char Expr::op() const { return node_->op; }
Function Expr::function() const { return node_->fn; }
const std::vector<Expr>& Expr::children() const { return node_->children; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case NodeKind::Constant:
      return std::bit_cast<std::uint64_t>(a.constant_value()) == std::bit_cast<std::uint64_t>(b.constant_value());
    case NodeKind::Variable:
      return a.name() == b.name();
    case NodeKind::Negate:
      break;
    case NodeKind::Binary:
      if (a.op() != b.op()) return false;
      break;
    case NodeKind::Call:
      if (a.function() != b.function()) return false;
      break;
  }
  const auto& ca = a.children();
  const auto& cb = b.children();
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (!(ca[i] == cb[i])) return false;
  }
  return true;
}

std::string to_string(Function fn) {
  switch (fn) {
    case Function::Sin:
      return "sin";
    case Function::Cos:
      return "cos";
    case Function::Tan:
      return "tan";
    case Function::Exp:
      return "exp";
    case Function::Ln:
      return "ln";
    case Function::Sqrt:
      return "sqrt";
    case Function::Abs:
      return "abs";
  }
  return "?";
}

namespace {

bool lookup_function(std::string_view name, Function& fn) {
  static const std::pair<std::string_view, Function> table[] = {
      {"sin", Function::Sin}, {"cos", Function::Cos},   {"tan", Function::Tan}, {"exp", Function::Exp},
      {"ln", Function::Ln},   {"sqrt", Function::Sqrt}, {"abs", Function::Abs},
  };
  for (const auto& [n, f] : table) {
    if (n == name) {
      fn = f;
      return true;
    }
  }
  return false;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("operator or end of input");
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  std::string describe_here() const {
    if (pos_ >= text_.size()) return "end of input";
    std::size_t end = pos_ + 1;
    const auto is_word = [&](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
    if (is_word(text_[pos_])) {
      while (end < text_.size() && is_word(text_[end])) ++end;
    }
    return "'" + std::string(text_.substr(pos_, end - pos_)) + "'";
  }

  [[noreturn]] void fail(const std::string& expected) const { throw ParseError(pos_, expected, describe_here()); }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (char c = peek(); c == '+' || c == '-'; c = peek()) {
      ++pos_;
      lhs = Expr::binary(c, lhs, parse_term());
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (char c = peek(); c == '*' || c == '/'; c = peek()) {
      ++pos_;
      lhs = Expr::binary(c, lhs, parse_unary());
    }
    return lhs;
  }

  Expr parse_unary() {
    if (peek() == '-') {
      ++pos_;
      return Expr::negate(parse_unary());
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (peek() == '^') {
      ++pos_;
      return Expr::binary('^', base, parse_unary());
    }
    return base;
  }

  Expr parse_primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      if (peek() != ')') fail("')'");
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("number, identifier, function call or '('");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    const auto digits = [&] {
      const std::size_t from = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - from;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) {
      pos_ = start;
      fail("number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = mark;
        fail("exponent digits");
      }
    }
    double value = 0.0;
    const auto* first = text_.data() + start;
    const auto* last = text_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      fail("number");
    }
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      fail("operator (implicit multiplication is not supported)");
    }
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    Function fn{};
    const bool is_function = lookup_function(name, fn);
    if (peek() == '(') {
      if (!is_function) {
        pos_ = start;
        fail("known function (sin, cos, tan, exp, ln, sqrt, abs)");
      }
      ++pos_;
      Expr arg = parse_expr();
      if (peek() != ')') fail("')'");
      ++pos_;
      return Expr::call(fn, arg);
    }
    if (is_function) fail("'(' after function name");
    return Expr::variable(std::string(name));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Constant: {
      char buf[64];
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.constant_value());
      out.append(buf, ptr);
      return;
    }
    case NodeKind::Variable:
      out += e.name();
      return;
    case NodeKind::Negate:
      out += "(-";
      print(e.children()[0], out);
      out += ")";
      return;
    case NodeKind::Binary:
      out += "(";
      print(e.children()[0], out);
      out += e.op();
      print(e.children()[1], out);
      out += ")";
      return;
    case NodeKind::Call:
      out += to_string(e.function());
      out += "(";
      print(e.children()[0], out);
      out += ")";
      return;
  }
}

void collect(const Expr& e, std::vector<std::string>& out, std::set<std::string>& seen) {
  if (e.kind() == NodeKind::Variable) {
    if (seen.insert(e.name()).second) out.push_back(e.name());
    return;
  }
  for (const auto& c : e.children()) collect(c, out, seen);
}

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::vector<std::string> free_vars(const Expr& e) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collect(e, out, seen);
  return out;
}

BoundExpr::BoundExpr(Expr e, std::span<const std::string> names) : expr_(std::move(e)) {
  for (const auto& v : free_vars(expr_)) {
    int slot = -1;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == v) {
        slot = static_cast<int>(i);
        break;
      }
    }
    if (slot < 0) throw UnboundVariableError(v);
    slots_.emplace(v, slot);
  }
}

namespace detail {

bool integer_exponent(const Expr& e, int& k) {
  if (e.kind() == NodeKind::Constant) {
    const double v = e.constant_value();
    if (v == std::floor(v) && std::abs(v) <= 1024.0) {
      k = static_cast<int>(v);
      return true;
    }
    return false;
  }
  if (e.kind() == NodeKind::Negate && integer_exponent(e.children()[0], k)) {
    k = -k;
    return true;
  }
  return false;
}

}  // namespace detail

}  // namespace ehrcov
