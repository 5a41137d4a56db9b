#pragma once

// Worked example families packaged as verifiable scenarios, plus the
// tangent-bundle (SODE, spray) analyses and the frame-bundle decomposition.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ehrcov/checks.hpp"
#include "ehrcov/connection.hpp"
#include "ehrcov/covderiv.hpp"
#include "ehrcov/geometry.hpp"

namespace ehrcov {

// ---------------------------------------------------------------- metric

/// Symmetric bilinear form given by ambient component functions g_ij.
struct Metric {
  SpacePtr space;
  std::vector<std::vector<ScalarField>> g;
  std::string name;

  /// g(a, b) as a scalar field.
  ScalarField operator()(const VectorField& a, const VectorField& b) const;
};

Metric euclidean_metric(SpacePtr space);
Metric metric_from_strings(SpacePtr space, const std::vector<std::vector<std::string>>& components);

/// Symmetry and positive-definiteness on the frame (Gram matrix) at sampled points.
std::vector<CheckRecord> metric_checks(const Metric& g, const Frame& frame, const SampleConfig& cfg);

/// nabla'_X Y = nabla_X Y - T(X, Y) / 2.
CovDeriv symmetrize(const CovDeriv& nabla);

/// X(g(Y,Z)) - g(nabla_X Y, Z) - g(Y, nabla_X Z) as a scalar field.
ScalarField metric_compatibility_defect(const CovDeriv& nabla, const Metric& g, const VectorField& x,
                                        const VectorField& y, const VectorField& z);

// ---------------------------------------------------------------- scenario

enum class ExpectedOp { Nabla, Bracket, Torsion, Curvature, TorsionHorizontal, TorsionVertical, Coframe };

std::string to_string(ExpectedOp op);
/// Throws std::invalid_argument for unknown names.
ExpectedOp expected_op_from_string(const std::string& name);

struct ExpectedRow {
  ExpectedOp op = ExpectedOp::Nabla;
  std::vector<std::string> args;
  /// Coefficients keyed by frame field name (coordinate name for Coframe rows).
  std::vector<std::pair<std::string, ScalarField>> terms;
  std::string paper_ref;
  /// Tighter threshold for this row (0: use the run tolerance).
  double pinned = 0.0;
};

/// Base data of a tangent-bundle scenario: coordinates (x^a, u^a) and the
/// horizontal coefficients H_a = d/dx^a - gamma[b][a] d/du^b.
struct TangentData {
  int n = 0;
  std::vector<std::vector<ScalarField>> gamma;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string section;
  SpacePtr space;
  std::vector<std::pair<std::string, VectorField>> fields;
  std::vector<std::string> frame_names;
  SplitStructure split;
  CovDeriv nabla;
  std::vector<ExpectedRow> expected;
  std::vector<std::string> notes;
  std::optional<Metric> metric;
  std::optional<TangentData> tangent;
  std::vector<std::function<std::vector<CheckRecord>(const Scenario&, const SampleConfig&)>> extra_checks;

  /// Throws std::out_of_range listing the available names.
  const VectorField& field(const std::string& name) const;
  bool has_field(const std::string& name) const;
  std::vector<std::string> field_names() const;
  Frame frame() const;
  /// One block with K vertical: dim V = dim H.
  bool equal_rank() const { return split.n_blocks() == 1 && split.orientation == Orientation::KVertical; }
};

/// Declarative scenario description, shared by built-ins and scenario files.
struct ScenarioSpec {
  std::string name;
  std::string description;
  std::string section;
  std::vector<std::string> coords;
  SpaceOptions space;
  /// Fields in declaration order: name and ambient component expressions.
  std::vector<std::pair<std::string, std::vector<std::string>>> fields;
  std::vector<std::string> k;
  std::vector<std::vector<std::string>> blocks;
  Orientation orientation = Orientation::KVertical;
  std::optional<Pairing> pairing;
  struct Row {
    std::string op;
    std::vector<std::string> args;
    std::vector<std::pair<std::string, std::string>> value;
  };
  std::vector<Row> expected;
  std::optional<std::vector<std::vector<std::string>>> metric;
  std::vector<std::string> notes;
};

Scenario build_scenario(const ScenarioSpec& spec, const SampleConfig& cfg = {});

/// Adds the split, the total derivative and common bookkeeping to a scenario
/// whose space, fields, frame names and tables are already filled in.
void finish_scenario(Scenario& sc, const Frame& k, const std::vector<Frame>& blocks, Orientation orientation,
                     const std::optional<Pairing>& pairing, const SampleConfig& cfg);

// ---------------------------------------------------------------- built-ins

Scenario trivial_r3(const SampleConfig& cfg = {});
Scenario hopf(const SampleConfig& cfg = {});

/// gamma[c*n*n + a*n + b] = Gamma^c_{ab}, functions of x1..xn only.
Scenario affine_tangent(int n, const std::vector<std::string>& gamma, const SampleConfig& cfg = {});
/// gamma[b*n + a] = Gamma^b_a, functions of x and u.
Scenario nonlinear_tangent(int n, const std::vector<std::string>& gamma, const SampleConfig& cfg = {});
/// Same, with coefficients given as fields on `tangent_space(n)`.
Scenario nonlinear_tangent(const SpacePtr& space, int n, const std::vector<std::vector<ScalarField>>& gamma,
                           const SampleConfig& cfg = {});
Scenario sode_tangent(int n, const std::vector<std::string>& f, const SampleConfig& cfg = {});
/// gamma as for affine_tangent; cycle is a 1-based n-cycle.
Scenario frame_bundle(int n, const std::vector<int>& cycle, const std::vector<std::string>& gamma,
                      const SampleConfig& cfg = {});

std::vector<std::string> default_affine_gamma();
std::vector<std::string> default_nonlinear_gamma();
std::vector<std::string> default_sode_force();
std::vector<std::string> default_frame_gamma();

struct BuiltinInfo {
  std::string name;
  std::string description;
  std::string section;
  int dim;
};

std::vector<BuiltinInfo> builtin_scenarios();
/// Throws std::out_of_range for unknown names.
Scenario builtin_scenario(const std::string& name, const SampleConfig& cfg = {});

/// Three deterministic test functions on the space's coordinates.
std::vector<ScalarField> test_functions(const SpacePtr& space, std::uint64_t seed);

/// Runs every check of a scenario: connection and split identities, the
/// expected table, unlisted derivatives, axioms, torsion, vertical torsion
/// against curvature, parallel projectors (and S, Q when ranks are equal),
/// metric compatibility when a metric is present, and scenario extras.
std::vector<CheckRecord> verify_scenario(const Scenario& sc, const SampleConfig& cfg);

/// Actual field for an expected-row operation.
VectorField evaluate_op(const Scenario& sc, ExpectedOp op, const VectorField& x, const VectorField& y);

// ---------------------------------------------------------------- tangent bundle

/// Coordinates x1..xn, u1..un; base coordinates x.
SpacePtr tangent_space(int n, const std::string& name = "TM");

struct SodeConnection {
  VectorField gamma;     // u^a d/dx^a + f^a d/du^a
  VectorField dilation;  // u^a d/du^a
  Endo11 s;              // dx^a (x) d/du^a
  Endo11 ph;             // (I - L_gamma S) / 2
  Endo11 pv;
  std::vector<std::vector<ScalarField>> upsilon;  // upsilon[b][a] = -1/2 df^b/du^a
};

SodeConnection sode_projector(const SpacePtr& tm, int n, const std::vector<ScalarField>& f);

/// max |Delta(f^b) - 2 f^b| < tol at sampled points.
bool is_spray(const SpacePtr& tm, int n, const std::vector<ScalarField>& f, const SampleConfig& cfg);
/// max |Delta(Gamma^b_a) - Gamma^b_a| < tol at sampled points.
bool homogeneity_check(const SpacePtr& tm, int n, const std::vector<std::vector<ScalarField>>& gamma,
                       const SampleConfig& cfg);

struct SufficiencyReport {
  CheckRecord nabla_dilation;      // nabla_{H_a} Delta = 0
  CheckRecord horizontal_torsion;  // P_H T(H_a, H_b) = 0
  bool conditions_hold = false;
  std::optional<CheckRecord> coincide;  // SODE connection of u^a H_a equals the input
  std::optional<CheckRecord> spray;     // that SODE is a spray
  bool implication_holds = false;
};

SufficiencyReport sode_sufficiency_check(const Scenario& nonlinear, const SampleConfig& cfg);

// ---------------------------------------------------------------- frame bundle

struct SubspaceBasis {
  int n = 0;
  std::vector<int> cycle;
  /// bases[k][a] is an n x n row-major integer matrix in W^(k+1).
  std::vector<std::vector<std::vector<int>>> bases;
};

/// Throws std::invalid_argument unless `cycle` is a single n-cycle of 1..n.
SubspaceBasis cycle_decomposition(int n, const std::vector<int>& cycle);

struct DecompositionCheck {
  bool columns = false;    // each W^k supported in column k
  bool invariant = false;  // A W^k within W^k
  bool direct_sum = false; // rank n^2
  int rank = 0;
};

DecompositionCheck check_decomposition(const SubspaceBasis& basis);

}  // namespace ehrcov
