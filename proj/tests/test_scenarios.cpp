#include <gtest/gtest.h>

#include <cmath>

#include "ehrcov/scenarios.hpp"

using namespace ehrcov;

namespace {

const SampleConfig kCfg{};

}  // namespace

class BuiltinScenario : public ::testing::TestWithParam<std::string> {};

TEST_P(BuiltinScenario, VerifiesCleanly) {
  const Scenario sc = builtin_scenario(GetParam(), kCfg);
  const auto recs = verify_scenario(sc, kCfg);
  EXPECT_GT(recs.size(), 20u);
  for (const auto& r : recs) EXPECT_TRUE(r.pass) << r.id << " max_dev " << r.max_dev << " " << r.error;
}

TEST_P(BuiltinScenario, VerificationIsDeterministic) {
  const Scenario sc = builtin_scenario(GetParam(), kCfg);
  const auto a = verify_scenario(sc, kCfg);
  const auto b = verify_scenario(builtin_scenario(GetParam(), kCfg), kCfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].max_dev, b[i].max_dev);
    EXPECT_EQ(a[i].worst_point, b[i].worst_point);
  }
}

INSTANTIATE_TEST_SUITE_P(All, BuiltinScenario,
                         ::testing::Values("trivial-r3", "hopf", "affine-tangent", "nonlinear-tangent", "sode-tangent",
                                           "frame-bundle"),
                         [](const auto& info) {
                           std::string s = info.param;
                           for (auto& c : s) c = c == '-' ? '_' : c;
                           return s;
                         });

TEST(Scenarios, ListingMatchesConstructors) {
  const auto list = builtin_scenarios();
  ASSERT_EQ(list.size(), 6u);
  for (const auto& b : list) {
    const Scenario sc = builtin_scenario(b.name, kCfg);
    EXPECT_EQ(sc.name, b.name);
    EXPECT_EQ(sc.space->dim(), b.dim);
  }
  EXPECT_THROW(builtin_scenario("no-such-scenario"), std::out_of_range);
}

TEST(Scenarios, UnknownFieldListsNames) {
  const Scenario sc = hopf(kCfg);
  try {
    sc.field("Omega");
    FAIL();
  } catch (const std::out_of_range& e) {
    EXPECT_NE(std::string(e.what()).find("Lambda"), std::string::npos);
  }
}

TEST(Scenarios, HopfBracketAtNorthPole) {
  const Scenario sc = hopf(kCfg);
  const At a(sc.space, sc.space->point({1, 0, 0, 0}), 3);
  const auto b = lie_bracket(sc.field("Sigma"), sc.field("Lambda")).values(a);
  EXPECT_NEAR(b[0], 0.0, 1e-15);
  EXPECT_NEAR(b[1], -2.0, 1e-15);
  EXPECT_NEAR(b[2], 0.0, 1e-15);
  EXPECT_NEAR(b[3], 0.0, 1e-15);
}

TEST(Scenarios, MetricChecksCatchIndefiniteForms) {
  const Scenario sc = trivial_r3(kCfg);
  const Metric bad = metric_from_strings(sc.space, {{"1", "0", "0"}, {"0", "-1", "0"}, {"0", "0", "1"}});
  bool positive_failed = false;
  for (const auto& r : metric_checks(bad, sc.frame(), kCfg)) {
    if (r.id == "metric.positive") positive_failed = !r.pass;
    if (r.id == "metric.symmetric") EXPECT_TRUE(r.pass);
  }
  EXPECT_TRUE(positive_failed);
}

TEST(Scenarios, ExpectedOpNamesRoundTrip) {
  for (const auto op : {ExpectedOp::Nabla, ExpectedOp::Bracket, ExpectedOp::Torsion, ExpectedOp::Curvature,
                        ExpectedOp::TorsionHorizontal, ExpectedOp::TorsionVertical, ExpectedOp::Coframe}) {
    EXPECT_EQ(expected_op_from_string(to_string(op)), op);
  }
  EXPECT_THROW(expected_op_from_string("laplacian"), std::invalid_argument);
}

TEST(Scenarios, WrongExpectationFailsVerification) {
  ScenarioSpec spec;
  spec.name = "wrong";
  spec.coords = {"x", "y", "th"};
  spec.space.base_coords = {0, 1};
  spec.fields = {{"H1", {"1", "0", "cos(th)"}}, {"H2", {"0", "1", "sin(th)"}}, {"V", {"0", "0", "1"}}};
  spec.k = {"V"};
  spec.blocks = {{"H1"}, {"H2"}};
  spec.expected = {{"nabla", {"H1", "H1"}, {{"H1", "cos(th)"}}}};
  const auto recs = verify_scenario(build_scenario(spec, kCfg), kCfg);
  EXPECT_FALSE(all_pass(recs));
  // The wrong row fails; the unlisted nonzero families are flagged too.
  for (const auto& r : recs) {
    if (r.id.rfind("expected.", 0) == 0 || r.id == "nabla.unlisted-zero") EXPECT_FALSE(r.pass) << r.id;
  }
  EXPECT_EQ(count_failed(recs), 2);
}

TEST(Tangent, SprayPredicate) {
  const auto tm = tangent_space(1);
  EXPECT_TRUE(is_spray(tm, 1, {ScalarField::from_string(tm, "x1*u1^2")}, kCfg));
  EXPECT_FALSE(is_spray(tm, 1, {ScalarField::from_string(tm, "u1^2 + u1")}, kCfg));
}

TEST(Tangent, SodeProjectorCoefficients) {
  const auto tm = tangent_space(1);
  const auto sode = sode_projector(tm, 1, {ScalarField::from_string(tm, "-u1^3")});
  const At a(tm, Point{{0.3, 0.5}}, 3);
  // upsilon = -1/2 df/du = 3/2 u^2; P_H(d/dx) = d/dx - upsilon d/du.
  EXPECT_NEAR(sode.upsilon[0][0].value(a), 1.5 * 0.25, 1e-15);
  const auto h = sode.ph(VectorField::coordinate(tm, 0)).values(a);
  EXPECT_NEAR(h[0], 1.0, 1e-15);
  EXPECT_NEAR(h[1], -1.5 * 0.25, 1e-15);
  EXPECT_LT(max_abs(sode.ph(VectorField::coordinate(tm, 1)).values(a)), 1e-15);
}

TEST(Tangent, SufficiencyIsVacuousForGenericInput) {
  const Scenario sc = nonlinear_tangent(2, default_nonlinear_gamma(), kCfg);
  const auto rep = sode_sufficiency_check(sc, kCfg);
  EXPECT_FALSE(rep.conditions_hold);
  EXPECT_TRUE(rep.implication_holds);
  EXPECT_FALSE(rep.coincide.has_value());
}

TEST(Tangent, SufficiencyHoldsForSymmetricAffine) {
  const Scenario sc = nonlinear_tangent(1, {"x1*u1"}, kCfg);
  const auto rep = sode_sufficiency_check(sc, kCfg);
  EXPECT_TRUE(rep.conditions_hold);
  ASSERT_TRUE(rep.coincide.has_value());
  EXPECT_TRUE(rep.coincide->pass);
  EXPECT_TRUE(rep.implication_holds);
}

TEST(Tangent, AffineInputMustDependOnBaseOnly) {
  std::vector<std::string> g = default_affine_gamma();
  g[0] = "u1";
  EXPECT_ANY_THROW(affine_tangent(2, g, kCfg));
}

TEST(FrameBundle, RejectsNonCycles) {
  EXPECT_THROW(cycle_decomposition(3, {1, 2}), std::invalid_argument);
  EXPECT_THROW(cycle_decomposition(3, {1, 1, 2}), std::invalid_argument);
  EXPECT_THROW(cycle_decomposition(3, {1, 2, 4}), std::invalid_argument);
}

TEST(FrameBundle, DecompositionOfFourCycle) {
  const auto basis = cycle_decomposition(4, {2, 4, 1, 3});
  ASSERT_EQ(basis.bases.size(), 4u);
  const auto chk = check_decomposition(basis);
  EXPECT_TRUE(chk.columns);
  EXPECT_TRUE(chk.invariant);
  EXPECT_TRUE(chk.direct_sum);
  EXPECT_EQ(chk.rank, 16);
}

TEST(FrameBundle, CycleChoiceDoesNotChangeNabla) {
  const Scenario a = frame_bundle(2, {1, 2}, default_frame_gamma(), kCfg);
  const Scenario b = frame_bundle(2, {2, 1}, default_frame_gamma(), kCfg);
  for (const auto& p : a.space->sample(4, 5)) {
    const At aa(a.space, p, 3), ab(b.space, p, 3);
    for (const auto& x : a.frame_names) {
      for (const auto& y : a.frame_names) {
        EXPECT_LT(max_abs_diff(a.nabla(a.field(x), a.field(y)).values(aa), b.nabla(b.field(x), b.field(y)).values(ab)),
                  1e-12);
      }
    }
  }
}
