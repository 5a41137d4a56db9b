#pragma once

// Covariant derivatives assembled from derivations on sub-distributions.
//
// A derivation defined for arguments in Img(P) is first extended to
// arbitrary directions X:
//
//   D_X Y = d_{P X} Y + P([X - P X, Y])
//
// and extensions over a family of projectors summing to the identity are
// glued into a derivative on the whole tangent bundle:
//
//   nabla_X Y = sum_A D^A_X(P_A Y).
//
// The split-based derivatives use, for a split K + L_1 + ... + L_N,
//
//   d^K_X Y   = T([X, F(Y)])        (T, F: normalised aggregates into/out of K)
//   d^A_X Y   = F_A([X, T_A(Y)])    (per-block pair)
//
// which gives the four-term formula when N = 1 and the 2N + 2-term formula
// otherwise, for either orientation of K.

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ehrcov/checks.hpp"
#include "ehrcov/connection.hpp"
#include "ehrcov/geometry.hpp"

namespace ehrcov {

/// Raised when an argument is not in the distribution a derivation is defined on.
class MembershipError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kMembershipTolerance = 1e-9;

using DerivRule = std::function<VectorField(const VectorField& x, const VectorField& y)>;

struct SubmoduleDeriv {
  Endo11 projector;
  DerivRule rule;
  std::string name;
};

enum class Provenance { Extension, Glued, PairedEndomorphisms, NFoldSplit, EqualRankTotal, MultipleRankTotal, Custom };

std::string to_string(Provenance p);

class CovDeriv {
 public:
  CovDeriv() = default;
  CovDeriv(SpacePtr space, DerivRule rule, Provenance provenance, std::string name);

  /// nabla_X Y as a closure-backed field.
  VectorField operator()(const VectorField& x, const VectorField& y) const;

  const SpacePtr& space() const noexcept { return space_; }
  const DerivRule& rule() const noexcept { return rule_; }
  Provenance provenance() const noexcept { return provenance_; }
  const std::string& name() const noexcept { return name_; }

 private:
  SpacePtr space_;
  DerivRule rule_;
  Provenance provenance_ = Provenance::Custom;
  std::string name_;
};

/// Wraps y so that evaluating it throws MembershipError where |P y - y| exceeds
/// the membership tolerance.
VectorField require_member(const Endo11& p, const VectorField& y, const std::string& where);

/// D_X Y = d_{P X} Y + P([X - P X, Y]) for Y in Img(P), X arbitrary.
DerivRule extend_to_all_directions(const SubmoduleDeriv& d);

struct GluePart {
  Endo11 projector;
  DerivRule extended;
};

/// sum_A D^A_X(P_A Y). Checks at sampled points that the projectors sum to
/// the identity on tangent vectors; throws std::invalid_argument otherwise.
CovDeriv glue(SpacePtr space, std::vector<GluePart> parts, Provenance provenance, std::string name,
              const SampleConfig& cfg = {});

/// Derivations on K and on the single block (requires N = 1).
std::pair<SubmoduleDeriv, SubmoduleDeriv> pair_derivatives(const SplitStructure& s);

/// Derivation on K via the aggregate pair and one derivation per block.
std::pair<SubmoduleDeriv, std::vector<SubmoduleDeriv>> nfold_derivatives(const SplitStructure& s);

/// The extended, per-distribution parts of the split derivative, K first.
std::vector<GluePart> split_parts(const SplitStructure& s);

/// Total derivative for equal ranks (N = 1); throws ConnectionError otherwise.
CovDeriv total_equal_rank(const SplitStructure& s, const SampleConfig& cfg = {});

/// Total derivative for an N-fold split of either orientation.
CovDeriv total_multiple_rank(const SplitStructure& s, const SampleConfig& cfg = {});

/// T(X, Y) = nabla_X Y - nabla_Y X - [X, Y].
VectorField torsion(const CovDeriv& nabla, const VectorField& x, const VectorField& y);

/// R(X, Y) = P_V([P_H X, P_H Y]).
VectorField ehresmann_curvature(const EhresmannConnection& conn, const VectorField& x, const VectorField& y);

/// (nabla_X T)(Y) = nabla_X(T Y) - T(nabla_X Y).
VectorField nabla_of_endo(const CovDeriv& nabla, const Endo11& t, const VectorField& x, const VectorField& y);

/// A derivation with an added tensorial term omega(X) omega(Y) W, used as a
/// negative control: with W outside Img(P_B) both sides of the parallel
/// projector equivalence must fail.
DerivRule add_tensorial_leak(DerivRule rule, CovectorField omega, VectorField w);

struct ParallelProjectorReport {
  CheckRecord parallel;  // max |(nabla_X P_B)(Y)| over frame arguments
  CheckRecord closed;    // max distance of D^B_X Y from Img(P_B), X, Y in Img(P_B)
  bool agree = false;    // both pass or both fail
};

/// Evaluates both sides of "nabla P_B = 0 iff each D^B preserves Img(P_B)"
/// for the glued derivative of `parts` and block index `b`.
ParallelProjectorReport check_parallel_projector(const std::vector<GluePart>& parts, int b, const Frame& frame,
                                                 const SampleConfig& cfg, std::string id_prefix = "parallel");

/// Bilinearity over functions and additivity, for all frame pairs and the
/// given functions. Record ids are prefixed with `prefix`.
std::vector<CheckRecord> axiom_suite(const CovDeriv& nabla, const Frame& frame, const std::vector<ScalarField>& functions,
                                     const SampleConfig& cfg, const std::string& prefix = "axiom");

/// Torsion antisymmetry and function-linearity in both slots.
std::vector<CheckRecord> torsion_suite(const CovDeriv& nabla, const Frame& frame,
                                       const std::vector<ScalarField>& functions, const SampleConfig& cfg,
                                       const std::string& prefix = "torsion");

}  // namespace ehrcov
