#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <string>

#include "ehrcov/expr.hpp"

using namespace ehrcov;

namespace {

double ev(const std::string& text, std::map<std::string, double> env = {}) { return eval<double>(parse(text), env); }

}  // namespace

TEST(Expr, Precedence) {
  EXPECT_DOUBLE_EQ(ev("1 + 2*3"), 7.0);
  EXPECT_DOUBLE_EQ(ev("(1 + 2)*3"), 9.0);
  EXPECT_DOUBLE_EQ(ev("8/2/2"), 2.0);
  EXPECT_DOUBLE_EQ(ev("1 - 2 - 3"), -4.0);
}

TEST(Expr, PowerBindsTighterThanUnaryMinus) {
  EXPECT_DOUBLE_EQ(ev("-x^2", {{"x", 3.0}}), -9.0);
  EXPECT_DOUBLE_EQ(ev("2^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(ev("2^-1"), 0.5);
}

TEST(Expr, Functions) {
  EXPECT_NEAR(ev("sin(x)^2 + cos(x)^2", {{"x", 0.37}}), 1.0, 1e-15);
  EXPECT_NEAR(ev("ln(exp(2.5))"), 2.5, 1e-15);
  EXPECT_NEAR(ev("sqrt(abs(-16))"), 4.0, 1e-15);
  EXPECT_NEAR(ev("tan(0.3)"), std::tan(0.3), 1e-15);
}

TEST(Expr, NumberForms) {
  EXPECT_DOUBLE_EQ(ev("1.5e2"), 150.0);
  EXPECT_DOUBLE_EQ(ev("2E-1"), 0.2);
}

TEST(Expr, FreeVariablesInOrderOfAppearance) {
  const auto v = free_vars(parse("y*x + sin(z) - y"));
  EXPECT_EQ(v, (std::vector<std::string>{"y", "x", "z"}));
}

TEST(Expr, RoundTripThroughPrinter) {
  for (const std::string text : {"-x^2", "(a - b) - c", "a - (b - c)", "2^3^2", "(2^3)^2", "sin(x*y)/(1 + x^2)"}) {
    const Expr e = parse(text);
    EXPECT_TRUE(parse(to_string(e)) == e) << text << " -> " << to_string(e);
  }
}

TEST(Expr, ParseErrorsCarryOffsets) {
  try {
    parse("1 + * 2");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
    EXPECT_EQ(e.found(), "'*'");
  }
  EXPECT_THROW(parse("sin x"), ParseError);
  EXPECT_THROW(parse("(1 + 2"), ParseError);
  EXPECT_THROW(parse("1 2"), ParseError);
  EXPECT_THROW(parse("foo(1)"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(Expr, UnboundVariable) {
  try {
    ev("x + q", {{"x", 1.0}});
    FAIL() << "expected UnboundVariableError";
  } catch (const UnboundVariableError& e) {
    EXPECT_EQ(e.name(), "q");
  }
}

TEST(Expr, DomainErrorsDuringEvaluation) {
  EXPECT_THROW(ev("ln(0 - 1)"), DomainError);
  EXPECT_THROW(ev("1/0"), DomainError);
}

TEST(Expr, JetEvaluationDifferentiates) {
  const Expr e = parse("x^3*y + sin(y)");
  const std::string names[] = {"x", "y"};
  const BoundExpr b(e, names);
  const double p[] = {2.0, 0.5};
  const auto v = seed(std::span<const double>(p, 2), 2);
  const Jet j = b.eval<Jet>(std::span<const Jet>(v));
  EXPECT_NEAR(j.value(), 4.0 + std::sin(0.5), 1e-14);
  EXPECT_NEAR(j.extract({0}), 3 * 4.0 * 0.5, 1e-14);
  EXPECT_NEAR(j.extract({1, 1}), -std::sin(0.5), 1e-14);
  EXPECT_NEAR(j.extract({0, 1}), 12.0, 1e-14);
}
