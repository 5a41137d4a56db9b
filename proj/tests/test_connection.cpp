#include <gtest/gtest.h>

#include "ehrcov/connection.hpp"

using namespace ehrcov;

namespace {

struct Trivial {
  SpacePtr space = make_space("R3", {"x", "y", "th"}, SpaceOptions{{0, 1}, {}, {}, {}, false});
  VectorField h1 = VectorField::from_strings(space, "H1", {"1", "0", "cos(th)"});
  VectorField h2 = VectorField::from_strings(space, "H2", {"0", "1", "sin(th)"});
  VectorField v = VectorField::from_strings(space, "V", {"0", "0", "1"});
};

}  // namespace

TEST(Connection, ProjectorsSplitTangentVectors) {
  Trivial t;
  const auto conn = build_connection(t.space, Frame("V", {t.v}), Frame("H", {t.h1, t.h2}));
  const auto w = VectorField::from_strings(t.space, "W", {"x", "y^2", "th"});
  for (const auto& p : t.space->sample(5, 1)) {
    const At a(t.space, p, 2);
    EXPECT_LT(max_abs_diff((conn.pv(w) + conn.ph(w)).values(a), w.values(a)), 1e-14);
    EXPECT_LT(max_abs(conn.pv(t.h1).values(a)), 1e-14);
    EXPECT_LT(max_abs(conn.ph(t.v).values(a)), 1e-14);
  }
  for (const auto& r : validate_connection(conn, {})) EXPECT_TRUE(r.pass) << r.id;
}

TEST(Connection, RankMismatchIsRejected) {
  Trivial t;
  EXPECT_THROW(build_connection(t.space, Frame("V", {t.v}), Frame("H", {t.h1})), ConnectionError);
}

TEST(Connection, NonVerticalFrameIsRejected) {
  Trivial t;
  // The vertical frame must be killed by the base projection.
  EXPECT_THROW(build_connection(t.space, Frame("V", {t.h1}), Frame("H", {t.v, t.h2})), ConnectionError);
}

TEST(Connection, DependentFramesAreRejected) {
  Trivial t;
  const auto twice = (2.0 * t.h1).renamed("2H1");
  EXPECT_ANY_THROW(build_connection(t.space, Frame("V", {t.v}), Frame("H", {t.h1, twice})));
}

TEST(Connection, MultipleRankSplitIdentities) {
  Trivial t;
  const auto conn = build_connection(t.space, Frame("V", {t.v}), Frame("H", {t.h1, t.h2}));
  const auto s = canonical_endos(conn, {Frame("L1", {t.h1}), Frame("L2", {t.h2})}, Orientation::KVertical);
  EXPECT_EQ(s.n_blocks(), 2);
  EXPECT_EQ(s.rank(), 1);
  for (const auto& r : validate_split(s, {})) EXPECT_TRUE(r.pass) << r.id;
  const At a(t.space, Point{{0.1, 0.2, 0.7}}, 2);
  // to_k maps each block field onto V, from_k maps V back to the block.
  EXPECT_LT(max_abs_diff(s.to_k(0)(t.h1).values(a), t.v.values(a)), 1e-14);
  EXPECT_LT(max_abs_diff(s.from_k(1)(t.v).values(a), t.h2.values(a)), 1e-14);
  EXPECT_LT(max_abs(s.to_k(0)(t.h2).values(a)), 1e-14);
}

TEST(Connection, PairingRescalesTheIdentification) {
  Trivial t;
  const auto conn = build_connection(t.space, Frame("V", {t.v}), Frame("H", {t.h1, t.h2}));
  const Pairing pairing{{{2.0}}, {{-0.5}}};
  const auto s = canonical_endos(conn, {Frame("L1", {t.h1}), Frame("L2", {t.h2})}, Orientation::KVertical, pairing);
  for (const auto& r : validate_split(s, {})) EXPECT_TRUE(r.pass) << r.id;
  EXPECT_THROW(canonical_endos(conn, {Frame("L1", {t.h1}), Frame("L2", {t.h2})}, Orientation::KVertical,
                               Pairing{{{0.0}}, {{1.0}}}),
               ConnectionError);
}

TEST(Connection, BlocksMustMatchKRank) {
  Trivial t;
  const auto conn = build_connection(t.space, Frame("V", {t.v}), Frame("H", {t.h1, t.h2}));
  EXPECT_THROW(canonical_endos(conn, {Frame("L", {t.h1, t.h2})}, Orientation::KVertical), ConnectionError);
  EXPECT_THROW(canonical_endos(conn, {Frame("L1", {t.h1})}, Orientation::KVertical), ConnectionError);
}

TEST(Connection, HorizontalOrientationSwapsRoles) {
  // K = H (rank 1) over a 2-dimensional vertical side.
  const auto s = make_space("R3", {"x", "y", "z"}, SpaceOptions{{0}, {}, {}, {}, false});
  const auto h = VectorField::from_strings(s, "H", {"1", "y", "z"});
  const auto v1 = VectorField::coordinate(s, 1), v2 = VectorField::coordinate(s, 2);
  const auto conn = build_connection(s, Frame("V", {v1, v2}), Frame("H", {h}));
  const auto split = canonical_endos(conn, {Frame("W1", {v1}), Frame("W2", {v2})}, Orientation::KHorizontal);
  for (const auto& r : validate_split(split, {})) EXPECT_TRUE(r.pass) << r.id;
  const At a(s, Point{{0.3, 0.4, 0.5}}, 2);
  EXPECT_LT(max_abs_diff(split.to_k(1)(v2).values(a), h.values(a)), 1e-14);
}
