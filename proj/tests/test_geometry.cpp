#include <gtest/gtest.h>

#include <cmath>

#include "ehrcov/geometry.hpp"

using namespace ehrcov;

namespace {

SpacePtr plane() { return make_space("R3", {"x", "y", "z"}); }

At at(const SpacePtr& s, std::vector<double> p, int depth = 3) { return At(s, Point{std::move(p)}, depth); }

}  // namespace

TEST(Geometry, CoordinateBracketsVanish) {
  const auto s = plane();
  const auto b = lie_bracket(VectorField::coordinate(s, 0), VectorField::coordinate(s, 1));
  EXPECT_EQ(max_abs(b.values(at(s, {0.3, 0.1, -0.2}))), 0.0);
}

TEST(Geometry, BracketOfRotationGenerators) {
  const auto s = plane();
  const auto lx = VectorField::from_strings(s, "Lx", {"0", "-z", "y"});
  const auto ly = VectorField::from_strings(s, "Ly", {"z", "0", "-x"});
  const auto lz = VectorField::from_strings(s, "Lz", {"-y", "x", "0"});
  const At a = at(s, {0.3, -0.7, 0.9});
  // [Lx, Ly] = -Lz in this sign convention ([X,Y] = X(Y) - Y(X)).
  EXPECT_LT(max_abs_diff(lie_bracket(lx, ly).values(a), (-1.0 * lz).values(a)), 1e-15);
}

TEST(Geometry, JacobiIdentity) {
  const auto s = plane();
  const auto x = VectorField::from_strings(s, "X", {"sin(y)", "x*z", "1"});
  const auto y = VectorField::from_strings(s, "Y", {"z^2", "exp(x)", "x*y"});
  const auto z = VectorField::from_strings(s, "Z", {"y", "cos(z)", "x^2"});
  const auto j = lie_bracket(x, lie_bracket(y, z)) + lie_bracket(y, lie_bracket(z, x)) + lie_bracket(z, lie_bracket(x, y));
  for (const auto& p : s->sample(10, 7)) {
    EXPECT_LT(max_abs(j.values(At(s, p, 3))), 1e-12);
  }
}

TEST(Geometry, BracketIsLeibnizInFunctions) {
  const auto s = plane();
  const auto f = ScalarField::from_string(s, "x*y + z");
  const auto x = VectorField::from_strings(s, "X", {"y", "1", "x"});
  const auto y = VectorField::from_strings(s, "Y", {"z", "x^2", "0"});
  const auto lhs = lie_bracket(x, f * y);
  const auto rhs = derivative_along(x, f) * y + f * lie_bracket(x, y);
  const At a = at(s, {0.2, 0.5, -0.4});
  EXPECT_LT(max_abs_diff(lhs.values(a), rhs.values(a)), 1e-14);
}

TEST(Geometry, DepthBudgetErrorNamesTheChain) {
  const auto s = plane();
  const auto x = VectorField::from_strings(s, "X", {"y", "0", "0"});
  const auto y = VectorField::from_strings(s, "Y", {"0", "x", "0"});
  const auto nested = lie_bracket(x, lie_bracket(x, y));
  const At a = at(s, {0.1, 0.2, 0.3}, 1);
  try {
    nested.values(a);
    FAIL() << "expected DepthBudgetError";
  } catch (const DepthBudgetError& e) {
    EXPECT_FALSE(e.chain().empty());
    EXPECT_NE(std::string(e.what()).find("X"), std::string::npos);
  }
  EXPECT_NO_THROW(nested.values(at(s, {0.1, 0.2, 0.3}, 2)));
}

TEST(Geometry, SingularFrameIsRejected) {
  const auto s = plane();
  const Frame f("F", {VectorField::from_strings(s, "A", {"1", "x", "0"}),
                      VectorField::from_strings(s, "B", {"2", "2*x", "0"}),
                      VectorField::coordinate(s, 2)});
  try {
    f.check_independent(at(s, {0.5, 0.0, 0.0}));
    FAIL() << "expected SingularFrameError";
  } catch (const SingularFrameError& e) {
    EXPECT_LT(e.ratio(), kFrameDegeneracyRatio);
    EXPECT_EQ(e.point().size(), 3u);
  }
}

TEST(Geometry, DualCoframeRecoversCoefficients) {
  const auto s = plane();
  const auto e1 = VectorField::from_strings(s, "E1", {"cos(z)", "sin(z)", "0"});
  const auto e2 = VectorField::from_strings(s, "E2", {"-sin(z)", "cos(z)", "0"});
  const auto e3 = VectorField::from_strings(s, "E3", {"y", "0", "1"});
  const DualCoframe cof({Frame("E", {e1, e2, e3})});
  const auto v = 2.0 * e1 + (-3.0) * e2 + 0.5 * e3;
  const At a = at(s, {0.4, -0.6, 1.1});
  const auto c = values_of(cof.coefficients(a, 0, v.eval(a, 0)));
  EXPECT_NEAR(c[0], 2.0, 1e-14);
  EXPECT_NEAR(c[1], -3.0, 1e-14);
  EXPECT_NEAR(c[2], 0.5, 1e-14);
  EXPECT_NEAR(pairing(cof.covector(1), e2).value(a), 1.0, 1e-14);
  EXPECT_NEAR(pairing(cof.covector(1), e3).value(a), 0.0, 1e-14);
}

TEST(Geometry, CoframeProjectorIsIdempotent) {
  const auto s = plane();
  const Frame f("F", {VectorField::from_strings(s, "A", {"1", "y", "0"}), VectorField::coordinate(s, 1),
                      VectorField::from_strings(s, "C", {"x", "0", "1"})});
  const DualCoframe cof({f});
  const Endo11 p = cof.projector(0, 2, "P");
  const auto w = VectorField::from_strings(s, "W", {"z", "x*y", "2"});
  const At a = at(s, {0.3, 0.2, -0.5});
  EXPECT_LT(max_abs_diff(p(p(w)).values(a), p(w).values(a)), 1e-14);
  EXPECT_LT(max_abs(p(f[2]).values(a)), 1e-14);
}

TEST(Geometry, EmbeddedSphereSamplesAndNormals) {
  SpaceOptions opt;
  opt.constraints = {"x^2 + y^2 + z^2 + w^2 - 1"};
  opt.unit_sphere = true;
  const auto s = make_space("S3", {"x", "y", "z", "w"}, opt);
  EXPECT_EQ(s->dim(), 3);
  for (const auto& p : s->sample(5, 3)) EXPECT_LT(s->constraint_residual(p.coords), 1e-14);
  EXPECT_THROW(s->point({1.0, 1.0, 0.0, 0.0}), std::invalid_argument);
  const auto v = VectorField::from_strings(s, "V", {"y", "-x", "-w", "z"});
  EXPECT_LT(tangency_defect(v, At(s, s->point({0.5, 0.5, 0.5, 0.5}), 2)), 1e-15);
}

TEST(Geometry, SamplingIsDeterministic) {
  const auto s = plane();
  const auto a = s->sample(4, 11);
  const auto b = s->sample(4, 11);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].coords, b[i].coords);
  EXPECT_NE(s->sample(4, 12)[0].coords, a[0].coords);
}
