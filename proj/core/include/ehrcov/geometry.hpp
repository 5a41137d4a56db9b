#pragma once

// Charted spaces, vector fields, covector fields and (1,1)-tensors.
//
// Every geometric object is an immutable handle around an evaluation rule.
// Rules are evaluated at an `At` (a point plus a per-point memo) to a
// requested jet depth: asking a field for depth d returns its components as
// Jets of depth d in the space's coordinates. A Lie bracket evaluated at
// depth d asks its arguments for depth d + 1, so nesting of brackets is
// bounded by the At's depth budget; exceeding it raises DepthBudgetError
// naming the chain of objects that were being evaluated.
//
// Embedded spaces (the 3-sphere) are handled in ambient coordinates: fields
// carry ambient components and pointwise solves append the constraint
// normals as extra columns so the systems stay square.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ehrcov/expr.hpp"
#include "ehrcov/jet.hpp"

namespace ehrcov {

class DepthBudgetError : public std::runtime_error {
 public:
  DepthBudgetError(int budget, int requested);

  void push(const std::string& name);
  const char* what() const noexcept override { return message_.c_str(); }
  const std::vector<std::string>& chain() const noexcept { return chain_; }

 private:
  void rebuild();
  int budget_;
  int requested_;
  std::vector<std::string> chain_;
  std::string message_;
};

class SingularFrameError : public std::runtime_error {
 public:
  SingularFrameError(const std::string& what, std::vector<double> point, double ratio);
  const std::vector<double>& point() const noexcept { return point_; }
  /// Smallest over largest singular value of the offending matrix.
  double ratio() const noexcept { return ratio_; }

 private:
  std::vector<double> point_;
  double ratio_;
};

/// Smallest/largest singular value ratio below which frames count as degenerate.
inline constexpr double kFrameDegeneracyRatio = 1e-8;

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

struct Point {
  std::vector<double> coords;
};

class ChartedSpace;
using SpacePtr = std::shared_ptr<const ChartedSpace>;

struct SpaceOptions {
  /// Indices of coordinates that are base coordinates of a fibred chart.
  std::vector<int> base_coords;
  /// Per-coordinate sampling intervals; missing entries default to [-1, 1].
  std::vector<Interval> intervals;
  /// Embedded case: constraint expressions c_k(x) = 0 in ambient coordinates.
  std::vector<std::string> constraints;
  /// Optional gradients of the constraints, one component list per
  /// constraint. Derived by differentiation when omitted.
  std::vector<std::vector<std::string>> normals;
  /// Sample by normalising points of [-1,1]^m onto the unit sphere.
  bool unit_sphere = false;
};

class ChartedSpace {
 public:
  using Options = SpaceOptions;

  ChartedSpace(std::string name, std::vector<std::string> coords, Options options = {});

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& coords() const noexcept { return coords_; }
  int ambient_dim() const noexcept { return static_cast<int>(coords_.size()); }
  int dim() const noexcept { return ambient_dim() - static_cast<int>(constraints_.size()); }
  bool embedded() const noexcept { return !constraints_.empty(); }
  const std::vector<int>& base_coords() const noexcept { return options_.base_coords; }
  const Options& options() const noexcept { return options_; }

  /// Index of a coordinate name; throws std::out_of_range if absent.
  int coord_index(const std::string& name) const;

  /// Deterministic sample of `count` points for the given seed.
  std::vector<Point> sample(int count, std::uint64_t seed) const;

  /// Validates a user-supplied point. On embedded spaces the constraint
  /// residual must be below `tolerance`; the point is then projected exactly
  /// (normalised, for the unit sphere).
  Point point(std::vector<double> coords, double tolerance = 1e-8) const;

  /// Largest |c_k(p)| over the constraints.
  double constraint_residual(std::span<const double> coords) const;

  /// Constraint gradients at `at` as Jets of the given depth, row k holding
  /// the ambient components of grad c_k.
  std::vector<std::vector<Jet>> normals(const class At& at, int depth) const;

 private:
  std::string name_;
  std::vector<std::string> coords_;
  Options options_;
  std::vector<BoundExpr> constraints_;
  std::vector<std::vector<BoundExpr>> normals_;
};

SpacePtr make_space(std::string name, std::vector<std::string> coords, ChartedSpace::Options options = {});

using Components = std::vector<Jet>;

/// A point together with the jet-depth budget and a memo of everything
/// evaluated there. Not thread-safe; use one At per worker.
class At {
 public:
  At(SpacePtr space, Point point, int max_depth);

  const ChartedSpace& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  const Point& point() const noexcept { return point_; }
  int max_depth() const noexcept { return max_depth_; }

  /// Coordinate functions seeded as Jets of the given depth.
  const Components& coordinates(int depth) const;

  /// Cached evaluation of object `id` at `depth`.
  const Components& memo(std::uint64_t id, int depth, const std::function<Components()>& compute) const;

  void require_depth(int depth) const;

 private:
  SpacePtr space_;
  Point point_;
  int max_depth_;
  mutable std::unordered_map<std::uint64_t, Components> cache_;
};

std::uint64_t next_object_id();

class ScalarField {
 public:
  using Rule = std::function<Jet(const At&, int depth)>;

  ScalarField() = default;
  ScalarField(SpacePtr space, std::string name, Rule rule);

  static ScalarField from_expr(SpacePtr space, const Expr& e, std::string name = {});
  static ScalarField from_string(SpacePtr space, const std::string& text);
  static ScalarField constant(SpacePtr space, double value);

  const Jet& eval(const At& at, int depth) const;
  double value(const At& at) const { return eval(at, 0).value(); }

  const std::string& name() const;
  const SpacePtr& space() const;
  explicit operator bool() const noexcept { return static_cast<bool>(impl_); }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double c, const ScalarField& a);

/// Partial derivative of f with respect to coordinate i.
ScalarField partial(const ScalarField& f, int i);

class VectorField {
 public:
  using Rule = std::function<Components(const At&, int depth)>;

  VectorField() = default;
  VectorField(SpacePtr space, std::string name, Rule rule);

  static VectorField from_exprs(SpacePtr space, std::string name, const std::vector<Expr>& components);
  static VectorField from_strings(SpacePtr space, std::string name, const std::vector<std::string>& components);
  /// Components given by scalar fields.
  static VectorField from_scalars(SpacePtr space, std::string name, std::vector<ScalarField> components);
  /// The coordinate field d/dx^i.
  static VectorField coordinate(SpacePtr space, int i);
  static VectorField zero(SpacePtr space);

  const Components& eval(const At& at, int depth) const;
  std::vector<double> values(const At& at) const;

  /// Same components under another display name.
  VectorField renamed(std::string name) const;

  const std::string& name() const;
  const SpacePtr& space() const;
  std::uint64_t id() const;
  explicit operator bool() const noexcept { return static_cast<bool>(impl_); }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double c, const VectorField& a);
VectorField operator*(const ScalarField& f, const VectorField& a);

/// Directional derivative X(f).
ScalarField derivative_along(const VectorField& x, const ScalarField& f);

/// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i, evaluated with one extra jet level.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

class CovectorField {
 public:
  using Rule = std::function<Components(const At&, int depth)>;

  CovectorField() = default;
  CovectorField(SpacePtr space, std::string name, Rule rule);
  static CovectorField from_strings(SpacePtr space, std::string name, const std::vector<std::string>& components);

  const Components& eval(const At& at, int depth) const;
  std::vector<double> values(const At& at) const;
  const std::string& name() const;
  const SpacePtr& space() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// The function omega(X).
ScalarField pairing(const CovectorField& omega, const VectorField& x);

/// A (1,1)-tensor, evaluated pointwise to its row-major m x m matrix in
/// ambient coordinates.
class Endo11 {
 public:
  using Rule = std::function<Components(const At&, int depth)>;

  Endo11() = default;
  Endo11(SpacePtr space, std::string name, Rule rule);

  static Endo11 identity(SpacePtr space);
  static Endo11 zero(SpacePtr space);
  /// Sum of omega (x) X terms, acting as v -> sum omega(v) X.
  static Endo11 from_terms(SpacePtr space, std::string name,
                           std::vector<std::pair<CovectorField, VectorField>> terms);

  const Components& matrix(const At& at, int depth) const;
  /// Pointwise action on a vector of component Jets of the same depth.
  Components act(const At& at, int depth, const Components& v) const;
  /// T(X) as a vector field.
  VectorField operator()(const VectorField& x) const;

  Endo11 renamed(std::string name) const;
  const std::string& name() const;
  const SpacePtr& space() const;
  std::uint64_t id() const;
  explicit operator bool() const noexcept { return static_cast<bool>(impl_); }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

Endo11 operator+(const Endo11& a, const Endo11& b);
Endo11 operator-(const Endo11& a, const Endo11& b);
Endo11 operator*(double c, const Endo11& a);
/// a o b
Endo11 compose(const Endo11& a, const Endo11& b);

/// (L_G T)(X) = [G, T(X)] - T([G, X]), assembled in coordinates as
/// G^k d_k T^i_j - T^k_j d_k G^i + T^i_k d_j G^k. Charted spaces only.
Endo11 lie_derivative(const VectorField& g, const Endo11& t);

class Frame {
 public:
  Frame() = default;
  Frame(std::string name, std::vector<VectorField> fields);

  const std::string& name() const noexcept { return name_; }
  const std::vector<VectorField>& fields() const noexcept { return fields_; }
  const VectorField& operator[](std::size_t i) const { return fields_.at(i); }
  int rank() const noexcept { return static_cast<int>(fields_.size()); }

  /// Throws SingularFrameError if the evaluated vectors are numerically dependent.
  void check_independent(const At& at) const;

 private:
  std::string name_;
  std::vector<VectorField> fields_;
};

Frame concat(const std::vector<Frame>& frames, std::string name = {});

/// Pointwise inverse of the matrix whose columns are the fields of a
/// spanning frame (followed by constraint normals on embedded spaces).
/// Row i of the inverse is the i-th dual covector.
class DualCoframe {
 public:
  DualCoframe() = default;
  explicit DualCoframe(std::vector<Frame> frames);

  const Frame& frame() const;
  int rank() const;
  const Components& inverse(const At& at, int depth) const;
  CovectorField covector(int i) const;
  std::vector<CovectorField> covectors() const;
  /// Coefficients of a tangent vector in the frame.
  Components coefficients(const At& at, int depth, const Components& v) const;
  /// Projector onto span of fields [begin, end) along the remaining ones.
  Endo11 projector(int begin, int end, std::string name) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

std::vector<CovectorField> dual_coframe(const std::vector<Frame>& frames);

/// v = sum c_i e_i(p); throws if the residual exceeds 1e-10 |v|.
std::vector<double> frame_coefficients(const std::vector<Frame>& frames, const At& at, std::span<const double> v);

Endo11 projector_from_split(const Frame& target, const std::vector<Frame>& rest, std::string name = {});

// Component helpers shared by the derived modules.
Components add(const Components& a, const Components& b);
Components sub(const Components& a, const Components& b);
Components scaled(const Jet& c, const Components& a);
Components truncated(const Components& a, int depth);
std::vector<double> values_of(const Components& a);
double max_abs(std::span<const double> v);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// |v - P v| at value level, used for distribution membership checks.
double membership_defect(const Endo11& p, const VectorField& v, const At& at);

/// Euclidean ambient components of a normal-free tangency defect: max |grad c_k . X|.
double tangency_defect(const VectorField& x, const At& at);

}  // namespace ehrcov
