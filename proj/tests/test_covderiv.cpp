#include <gtest/gtest.h>

#include "ehrcov/covderiv.hpp"
#include "ehrcov/scenarios.hpp"

using namespace ehrcov;

namespace {

const SampleConfig kCfg{};

}  // namespace

TEST(CovDeriv, TotalDerivativeSatisfiesAxioms) {
  const Scenario sc = trivial_r3(kCfg);
  const auto recs = axiom_suite(sc.nabla, sc.frame(), test_functions(sc.space, kCfg.seed), kCfg);
  ASSERT_EQ(recs.size(), 4u);
  for (const auto& r : recs) EXPECT_TRUE(r.pass) << r.id << " " << r.max_dev;
}

TEST(CovDeriv, TorsionIsAntisymmetricAndTensorial) {
  const Scenario sc = hopf(kCfg);
  for (const auto& r : torsion_suite(sc.nabla, sc.frame(), test_functions(sc.space, 3), kCfg)) {
    EXPECT_TRUE(r.pass) << r.id;
  }
}

TEST(CovDeriv, ExtensionMatchesDefinitionOnMembers) {
  // For X already in the distribution the extension is the derivation itself.
  const Scenario sc = trivial_r3(kCfg);
  const auto parts = split_parts(sc.split);
  const VectorField v = sc.field("V");
  const At a(sc.space, Point{{0.2, -0.1, 0.8}}, 3);
  const auto d = parts[0].extended(v, v);
  EXPECT_LT(max_abs(d.values(a)), 1e-14);
}

TEST(CovDeriv, MembershipIsEnforced) {
  const Scenario sc = trivial_r3(kCfg);
  const auto [dk, dl] = [&] {
    auto n = nfold_derivatives(sc.split);
    return std::make_pair(n.first, n.second);
  }();
  const At a(sc.space, Point{{0.2, -0.1, 0.8}}, 3);
  // H1 is not vertical, so the K derivation refuses it.
  EXPECT_THROW(dk.rule(sc.field("V"), sc.field("H1")).values(a), MembershipError);
  EXPECT_NO_THROW(dk.rule(sc.field("V"), sc.field("V")).values(a));
}

TEST(CovDeriv, EqualRankTotalNeedsOneBlock) {
  const Scenario sc = trivial_r3(kCfg);
  EXPECT_THROW(total_equal_rank(sc.split, kCfg), ConnectionError);
  EXPECT_THROW(pair_derivatives(sc.split), ConnectionError);
}

TEST(CovDeriv, EqualAndMultipleRankTotalsAgreeForOneBlock) {
  const Scenario sc = affine_tangent(2, default_affine_gamma(), kCfg);
  const CovDeriv a = total_equal_rank(sc.split, kCfg);
  const CovDeriv b = total_multiple_rank(sc.split, kCfg);
  const Frame f = sc.frame();
  for (const auto& p : sc.space->sample(5, 9)) {
    const At at(sc.space, p, 3);
    for (const auto& x : f.fields()) {
      for (const auto& y : f.fields()) EXPECT_LT(max_abs_diff(a(x, y).values(at), b(x, y).values(at)), 1e-12);
    }
  }
}

TEST(CovDeriv, ProjectorsAreParallel) {
  const Scenario sc = frame_bundle(2, {1, 2}, default_frame_gamma(), kCfg);
  const Frame f = sc.frame();
  const auto parts = split_parts(sc.split);
  for (int b = 0; b < static_cast<int>(parts.size()); ++b) {
    const auto rep = check_parallel_projector(parts, b, f, kCfg);
    EXPECT_TRUE(rep.parallel.pass);
    EXPECT_TRUE(rep.closed.pass);
    EXPECT_TRUE(rep.agree);
  }
}

TEST(CovDeriv, LeakBreaksBothSidesOfTheEquivalence) {
  const Scenario sc = trivial_r3(kCfg);
  auto parts = split_parts(sc.split);
  const DualCoframe cof({sc.frame()});
  parts[0].extended = add_tensorial_leak(parts[0].extended, cof.covector(2), sc.field("H1"));
  const auto rep = check_parallel_projector(parts, 0, sc.frame(), kCfg);
  EXPECT_FALSE(rep.parallel.pass);
  EXPECT_FALSE(rep.closed.pass);
  EXPECT_TRUE(rep.agree);
}

TEST(CovDeriv, GlueRejectsIncompleteProjectors) {
  const Scenario sc = trivial_r3(kCfg);
  auto parts = split_parts(sc.split);
  parts.pop_back();
  EXPECT_THROW(glue(sc.space, parts, Provenance::Glued, "partial", kCfg), std::invalid_argument);
}

TEST(CovDeriv, SymmetrizedDerivativeIsTorsionFree) {
  const Scenario sc = affine_tangent(2, default_affine_gamma(), kCfg);
  const CovDeriv s = symmetrize(sc.nabla);
  EXPECT_EQ(s.provenance(), Provenance::Custom);
  const Frame f = sc.frame();
  const At a(sc.space, Point{{0.1, 0.2, 0.3, -0.4}}, 3);
  for (const auto& x : f.fields()) {
    for (const auto& y : f.fields()) EXPECT_LT(max_abs(torsion(s, x, y).values(a)), 1e-12);
  }
}

TEST(CovDeriv, NablaOfIdentityVanishes) {
  const Scenario sc = hopf(kCfg);
  const Endo11 id = Endo11::identity(sc.space);
  const At a(sc.space, sc.space->point({0.5, 0.5, 0.5, 0.5}), 3);
  const Frame f = sc.frame();
  EXPECT_LT(max_abs(nabla_of_endo(sc.nabla, id, f[0], f[1]).values(a)), 1e-14);
}
