#include "ehrcov/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>

#include "ehrcov/linalg.hpp"

namespace ehrcov {

namespace {

constexpr std::size_t kMaxChainShown = 8;

std::string format_point(const std::vector<double>& p) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

// Promotes constant (depth-0) jets to the requested depth.
Jet at_depth(const Jet& j, int depth, int nvars) {
  if (j.depth() == depth && (depth == 0 || j.nvars() == nvars)) return j;
  if (j.depth() == 0) return Jet::constant(j.value(), depth, nvars);
  if (j.depth() > depth) return j.truncated(depth);
  throw std::logic_error("jet of depth " + std::to_string(j.depth()) + " where depth " + std::to_string(depth) +
                         " was requested");
}

void check_space(const SpacePtr& expected, const At& at, const std::string& what) {
  if (expected.get() != at.space_ptr().get()) {
    throw std::invalid_argument(what + " evaluated at a point of a different space ('" + at.space().name() + "')");
  }
}

void check_same_space(const SpacePtr& a, const SpacePtr& b, const std::string& op) {
  if (a.get() != b.get()) throw std::invalid_argument(op + ": arguments live on different spaces");
}

// Smallest over largest singular value of a rows x cols value matrix.
double singular_ratio(const std::vector<double>& m, int rows, int cols) {
  Eigen::MatrixXd a(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) a(r, c) = m[static_cast<std::size_t>(r) * cols + c];
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

template <class Fn>
decltype(auto) with_chain(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (DepthBudgetError& e) {
    e.push(name);
    throw;
  }
}

}  // namespace

// ---------------------------------------------------------------- errors

DepthBudgetError::DepthBudgetError(int budget, int requested)
    : std::runtime_error("jet depth budget exceeded"), budget_(budget), requested_(requested) {
  rebuild();
}

void DepthBudgetError::push(const std::string& name) {
  chain_.push_back(name.size() > 60 ? name.substr(0, 57) + "..." : name);
  rebuild();
}

void DepthBudgetError::rebuild() {
  message_ = "jet depth budget " + std::to_string(budget_) + " exceeded (depth " + std::to_string(requested_) +
             " requested)";
  if (!chain_.empty()) {
    message_ += " while evaluating ";
    const std::size_t shown = std::min(chain_.size(), kMaxChainShown);
    for (std::size_t i = 0; i < shown; ++i) message_ += (i ? " <- " : "") + chain_[i];
    if (chain_.size() > shown) message_ += " <- ... (" + std::to_string(chain_.size() - shown) + " more)";
  }
}

SingularFrameError::SingularFrameError(const std::string& what, std::vector<double> point, double ratio)
    : std::runtime_error(what + " at " + format_point(point) + " (singular value ratio " + std::to_string(ratio) +
                         ")"),
      point_(std::move(point)),
      ratio_(ratio) {}

// ---------------------------------------------------------------- spaces

ChartedSpace::ChartedSpace(std::string name, std::vector<std::string> coords, Options options)
    : name_(std::move(name)), coords_(std::move(coords)), options_(std::move(options)) {
  if (coords_.empty()) throw std::invalid_argument("space '" + name_ + "' has no coordinates");
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (coords_[i] == coords_[j]) throw std::invalid_argument("duplicate coordinate '" + coords_[i] + "'");
    }
  }
  for (int b : options_.base_coords) {
    if (b < 0 || b >= ambient_dim()) throw std::invalid_argument("base coordinate index out of range");
  }
  if (options_.intervals.size() > coords_.size()) throw std::invalid_argument("more sampling intervals than coordinates");
  options_.intervals.resize(coords_.size(), Interval{});
  for (const auto& c : options_.constraints) constraints_.emplace_back(parse(c), coords_);
  if (!options_.normals.empty() && options_.normals.size() != constraints_.size()) {
    throw std::invalid_argument("one normal is required per constraint");
  }
  for (const auto& n : options_.normals) {
    if (static_cast<int>(n.size()) != ambient_dim()) throw std::invalid_argument("normal has wrong component count");
    std::vector<BoundExpr> row;
    for (const auto& c : n) row.emplace_back(parse(c), coords_);
    normals_.push_back(std::move(row));
  }
}

SpacePtr make_space(std::string name, std::vector<std::string> coords, ChartedSpace::Options options) {
  return std::make_shared<const ChartedSpace>(std::move(name), std::move(coords), std::move(options));
}

int ChartedSpace::coord_index(const std::string& name) const {
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (coords_[i] == name) return static_cast<int>(i);
  }
  throw std::out_of_range("space '" + name_ + "' has no coordinate '" + name + "'");
}

std::vector<Point> ChartedSpace::sample(int count, std::uint64_t seed) const {
  std::mt19937_64 gen(seed);
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  const auto m = static_cast<std::size_t>(ambient_dim());
  while (static_cast<int>(out.size()) < count) {
    Point p{std::vector<double>(m)};
    if (options_.unit_sphere) {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      double norm2 = 0.0;
      for (auto& c : p.coords) {
        c = u(gen);
        norm2 += c * c;
      }
      const double norm = std::sqrt(norm2);
      if (norm < 0.1) continue;
      for (auto& c : p.coords) c /= norm;
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        std::uniform_real_distribution<double> u(options_.intervals[i].lo, options_.intervals[i].hi);
        p.coords[i] = u(gen);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

double ChartedSpace::constraint_residual(std::span<const double> coords) const {
  double worst = 0.0;
  for (const auto& c : constraints_) worst = std::max(worst, std::abs(c.eval<double>(coords)));
  return worst;
}

Point ChartedSpace::point(std::vector<double> coords, double tolerance) const {
  if (static_cast<int>(coords.size()) != ambient_dim()) {
    throw std::invalid_argument("point has " + std::to_string(coords.size()) + " coordinates, space '" + name_ +
                                "' needs " + std::to_string(ambient_dim()));
  }
  if (embedded()) {
    const double residual = constraint_residual(coords);
    if (!(residual < tolerance)) {
      throw std::invalid_argument("point " + format_point(coords) + " is off the constraint set of '" + name_ +
                                  "' (residual " + std::to_string(residual) + ")");
    }
    if (options_.unit_sphere) {
      double norm2 = 0.0;
      for (double c : coords) norm2 += c * c;
      const double norm = std::sqrt(norm2);
      for (double& c : coords) c /= norm;
    }
  }
  return Point{std::move(coords)};
}

std::vector<std::vector<Jet>> ChartedSpace::normals(const At& at, int depth) const {
  std::vector<std::vector<Jet>> out;
  const int m = ambient_dim();
  if (!normals_.empty()) {
    const Components& x = at.coordinates(depth);
    for (const auto& row : normals_) {
      std::vector<Jet> n;
      for (const auto& c : row) n.push_back(at_depth(c.eval<Jet>(x), depth, m));
      out.push_back(std::move(n));
    }
    return out;
  }
  at.require_depth(depth + 1);
  const Components& x = at.coordinates(depth + 1);
  for (const auto& c : constraints_) {
    const Jet value = at_depth(c.eval<Jet>(x), depth + 1, m);
    std::vector<Jet> n;
    for (int j = 0; j < m; ++j) n.push_back(value.derivative(j));
    out.push_back(std::move(n));
  }
  return out;
}

// ---------------------------------------------------------------- At

std::uint64_t next_object_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

At::At(SpacePtr space, Point point, int max_depth)
    : space_(std::move(space)), point_(std::move(point)), max_depth_(max_depth) {
  if (static_cast<int>(point_.coords.size()) != space_->ambient_dim()) {
    throw std::invalid_argument("point dimension does not match space '" + space_->name() + "'");
  }
  if (max_depth_ < 0) throw std::invalid_argument("depth budget must be non-negative");
}

void At::require_depth(int depth) const {
  if (depth > max_depth_) throw DepthBudgetError(max_depth_, depth);
}

const Components& At::coordinates(int depth) const {
  return memo(0, depth, [&] { return seed(point_.coords, depth); });
}

const Components& At::memo(std::uint64_t id, int depth, const std::function<Components()>& compute) const {
  require_depth(depth);
  const std::uint64_t key = (id << 4) | static_cast<std::uint64_t>(depth);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  Components value = compute();
  return cache_.emplace(key, std::move(value)).first->second;
}

// ---------------------------------------------------------------- scalar fields

struct ScalarField::Impl {
  std::uint64_t id;
  SpacePtr space;
  std::string name;
  Rule rule;
};

ScalarField::ScalarField(SpacePtr space, std::string name, Rule rule)
    : impl_(std::make_shared<const Impl>(Impl{next_object_id(), std::move(space), std::move(name), std::move(rule)})) {}

ScalarField ScalarField::from_expr(SpacePtr space, const Expr& e, std::string name) {
  BoundExpr bound(e, space->coords());
  const int m = space->ambient_dim();
  if (name.empty()) name = to_string(e);
  return ScalarField(std::move(space), std::move(name), [bound, m](const At& at, int depth) {
    return at_depth(bound.eval<Jet>(at.coordinates(depth)), depth, m);
  });
}

ScalarField ScalarField::from_string(SpacePtr space, const std::string& text) {
  return from_expr(std::move(space), parse(text), text);
}

ScalarField ScalarField::constant(SpacePtr space, double value) {
  const int m = space->ambient_dim();
  std::ostringstream os;
  os << value;
  return ScalarField(std::move(space), os.str(),
                     [value, m](const At&, int depth) { return Jet::constant(value, depth, m); });
}

const Jet& ScalarField::eval(const At& at, int depth) const {
  check_space(impl_->space, at, "scalar field '" + impl_->name + "'");
  return with_chain(impl_->name, [&]() -> const Jet& {
    return at.memo(impl_->id, depth, [&] { return Components{impl_->rule(at, depth)}; })[0];
  });
}

const std::string& ScalarField::name() const { return impl_->name; }
const SpacePtr& ScalarField::space() const { return impl_->space; }

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  check_same_space(a.space(), b.space(), "scalar +");
  return ScalarField(a.space(), "(" + a.name() + "+" + b.name() + ")",
                     [a, b](const At& at, int d) { return a.eval(at, d) + b.eval(at, d); });
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  check_same_space(a.space(), b.space(), "scalar -");
  return ScalarField(a.space(), "(" + a.name() + "-" + b.name() + ")",
                     [a, b](const At& at, int d) { return a.eval(at, d) - b.eval(at, d); });
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  check_same_space(a.space(), b.space(), "scalar *");
  return ScalarField(a.space(), "(" + a.name() + "*" + b.name() + ")",
                     [a, b](const At& at, int d) { return a.eval(at, d) * b.eval(at, d); });
}

ScalarField operator*(double c, const ScalarField& a) {
  std::ostringstream os;
  os << c << "*" << a.name();
  return ScalarField(a.space(), os.str(), [c, a](const At& at, int d) { return c * a.eval(at, d); });
}

ScalarField partial(const ScalarField& f, int i) {
  if (i < 0 || i >= f.space()->ambient_dim()) throw std::out_of_range("partial: coordinate index out of range");
  return ScalarField(f.space(), "d" + f.space()->coords()[i] + "(" + f.name() + ")",
                     [f, i](const At& at, int d) { return f.eval(at, d + 1).derivative(i); });
}

// ---------------------------------------------------------------- vector fields

struct VectorField::Impl {
  std::uint64_t id;
  SpacePtr space;
  std::string name;
  Rule rule;
};

VectorField::VectorField(SpacePtr space, std::string name, Rule rule)
    : impl_(std::make_shared<const Impl>(Impl{next_object_id(), std::move(space), std::move(name), std::move(rule)})) {}

VectorField VectorField::from_exprs(SpacePtr space, std::string name, const std::vector<Expr>& components) {
  const int m = space->ambient_dim();
  if (static_cast<int>(components.size()) != m) {
    throw std::invalid_argument("field '" + name + "' has " + std::to_string(components.size()) +
                                " components, space '" + space->name() + "' needs " + std::to_string(m));
  }
  std::vector<BoundExpr> bound;
  for (const auto& c : components) {
    try {
      bound.emplace_back(c, space->coords());
    } catch (const UnboundVariableError& e) {
      throw UnboundVariableError(e.name() + "' in field '" + name);
    }
  }
  return VectorField(std::move(space), std::move(name), [bound, m](const At& at, int depth) {
    const Components& x = at.coordinates(depth);
    Components out;
    out.reserve(bound.size());
    for (const auto& b : bound) out.push_back(at_depth(b.eval<Jet>(x), depth, m));
    return out;
  });
}

VectorField VectorField::from_strings(SpacePtr space, std::string name, const std::vector<std::string>& components) {
  std::vector<Expr> exprs;
  for (const auto& c : components) exprs.push_back(parse(c));
  return from_exprs(std::move(space), std::move(name), exprs);
}

VectorField VectorField::from_scalars(SpacePtr space, std::string name, std::vector<ScalarField> components) {
  if (static_cast<int>(components.size()) != space->ambient_dim()) {
    throw std::invalid_argument("field '" + name + "' has the wrong number of components");
  }
  return VectorField(std::move(space), std::move(name), [components](const At& at, int depth) {
    Components out;
    out.reserve(components.size());
    for (const auto& c : components) out.push_back(c.eval(at, depth));
    return out;
  });
}

VectorField VectorField::coordinate(SpacePtr space, int i) {
  const int m = space->ambient_dim();
  if (i < 0 || i >= m) throw std::out_of_range("coordinate field index out of range");
  std::string name = "d/d" + space->coords()[i];
  return VectorField(std::move(space), std::move(name), [i, m](const At&, int depth) {
    Components out(static_cast<std::size_t>(m), Jet::constant(0.0, depth, m));
    out[i] = Jet::constant(1.0, depth, m);
    return out;
  });
}

VectorField VectorField::zero(SpacePtr space) {
  const int m = space->ambient_dim();
  return VectorField(std::move(space), "0", [m](const At&, int depth) {
    return Components(static_cast<std::size_t>(m), Jet::constant(0.0, depth, m));
  });
}

const Components& VectorField::eval(const At& at, int depth) const {
  check_space(impl_->space, at, "vector field '" + impl_->name + "'");
  return with_chain(impl_->name,
                    [&]() -> const Components& { return at.memo(impl_->id, depth, [&] { return impl_->rule(at, depth); }); });
}

std::vector<double> VectorField::values(const At& at) const { return values_of(eval(at, 0)); }

VectorField VectorField::renamed(std::string name) const {
  const VectorField inner = *this;
  return VectorField(impl_->space, std::move(name), [inner](const At& at, int d) { return inner.eval(at, d); });
}

const std::string& VectorField::name() const { return impl_->name; }
const SpacePtr& VectorField::space() const { return impl_->space; }
std::uint64_t VectorField::id() const { return impl_->id; }

VectorField operator+(const VectorField& a, const VectorField& b) {
  check_same_space(a.space(), b.space(), "vector +");
  return VectorField(a.space(), "(" + a.name() + "+" + b.name() + ")",
                     [a, b](const At& at, int d) { return add(a.eval(at, d), b.eval(at, d)); });
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  check_same_space(a.space(), b.space(), "vector -");
  return VectorField(a.space(), "(" + a.name() + "-" + b.name() + ")",
                     [a, b](const At& at, int d) { return sub(a.eval(at, d), b.eval(at, d)); });
}

VectorField operator*(double c, const VectorField& a) {
  std::ostringstream os;
  os << c << "*" << a.name();
  return VectorField(a.space(), os.str(), [c, a](const At& at, int d) { return scaled(Jet(c), a.eval(at, d)); });
}

VectorField operator*(const ScalarField& f, const VectorField& a) {
  check_same_space(f.space(), a.space(), "function * vector");
  return VectorField(a.space(), f.name() + "*" + a.name(),
                     [f, a](const At& at, int d) { return scaled(f.eval(at, d), a.eval(at, d)); });
}

ScalarField derivative_along(const VectorField& x, const ScalarField& f) {
  check_same_space(x.space(), f.space(), "directional derivative");
  return ScalarField(x.space(), x.name() + "(" + f.name() + ")", [x, f](const At& at, int d) {
    const Components& xv = x.eval(at, d);
    const Jet& fv = f.eval(at, d + 1);
    Jet out = Jet::constant(0.0, d, at.space().ambient_dim());
    for (std::size_t j = 0; j < xv.size(); ++j) {
      if (is_zero(xv[j])) continue;
      out += xv[j] * fv.derivative(static_cast<int>(j));
    }
    return out;
  });
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  check_same_space(x.space(), y.space(), "lie bracket");
  return VectorField(x.space(), "[" + x.name() + "," + y.name() + "]", [x, y](const At& at, int d) {
    const Components& x1 = x.eval(at, d + 1);
    const Components& y1 = y.eval(at, d + 1);
    const int m = at.space().ambient_dim();
    const Components x0 = truncated(x1, d);
    const Components y0 = truncated(y1, d);
    Components out(static_cast<std::size_t>(m), Jet::constant(0.0, d, m));
    for (int j = 0; j < m; ++j) {
      const bool xj = !is_zero(x0[j]);
      const bool yj = !is_zero(y0[j]);
      if (!xj && !yj) continue;
      for (int i = 0; i < m; ++i) {
        if (xj && !is_zero(y1[i])) out[i] += x0[j] * y1[i].derivative(j);
        if (yj && !is_zero(x1[i])) out[i] -= y0[j] * x1[i].derivative(j);
      }
    }
    return out;
  });
}

// ---------------------------------------------------------------- covectors

struct CovectorField::Impl {
  std::uint64_t id;
  SpacePtr space;
  std::string name;
  Rule rule;
};

CovectorField::CovectorField(SpacePtr space, std::string name, Rule rule)
    : impl_(std::make_shared<const Impl>(Impl{next_object_id(), std::move(space), std::move(name), std::move(rule)})) {}

CovectorField CovectorField::from_strings(SpacePtr space, std::string name, const std::vector<std::string>& components) {
  const VectorField as_field = VectorField::from_strings(space, name, components);
  return CovectorField(std::move(space), std::move(name), [as_field](const At& at, int d) { return as_field.eval(at, d); });
}

const Components& CovectorField::eval(const At& at, int depth) const {
  check_space(impl_->space, at, "covector field '" + impl_->name + "'");
  return with_chain(impl_->name,
                    [&]() -> const Components& { return at.memo(impl_->id, depth, [&] { return impl_->rule(at, depth); }); });
}

std::vector<double> CovectorField::values(const At& at) const { return values_of(eval(at, 0)); }
const std::string& CovectorField::name() const { return impl_->name; }
const SpacePtr& CovectorField::space() const { return impl_->space; }

ScalarField pairing(const CovectorField& omega, const VectorField& x) {
  check_same_space(omega.space(), x.space(), "pairing");
  return ScalarField(x.space(), omega.name() + "(" + x.name() + ")", [omega, x](const At& at, int d) {
    const Components& w = omega.eval(at, d);
    const Components& v = x.eval(at, d);
    Jet out = Jet::constant(0.0, d, at.space().ambient_dim());
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (is_zero(w[i]) || is_zero(v[i])) continue;
      out += w[i] * v[i];
    }
    return out;
  });
}

// ---------------------------------------------------------------- endomorphisms

struct Endo11::Impl {
  std::uint64_t id;
  SpacePtr space;
  std::string name;
  Rule rule;
};

Endo11::Endo11(SpacePtr space, std::string name, Rule rule)
    : impl_(std::make_shared<const Impl>(Impl{next_object_id(), std::move(space), std::move(name), std::move(rule)})) {}

Endo11 Endo11::identity(SpacePtr space) {
  const int m = space->ambient_dim();
  return Endo11(std::move(space), "I", [m](const At&, int d) {
    Components out(static_cast<std::size_t>(m * m), Jet::constant(0.0, d, m));
    for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i * m + i)] = Jet::constant(1.0, d, m);
    return out;
  });
}

Endo11 Endo11::zero(SpacePtr space) {
  const int m = space->ambient_dim();
  return Endo11(std::move(space), "0",
                [m](const At&, int d) { return Components(static_cast<std::size_t>(m * m), Jet::constant(0.0, d, m)); });
}

Endo11 Endo11::from_terms(SpacePtr space, std::string name, std::vector<std::pair<CovectorField, VectorField>> terms) {
  const int m = space->ambient_dim();
  return Endo11(std::move(space), std::move(name), [terms, m](const At& at, int d) {
    Components out(static_cast<std::size_t>(m * m), Jet::constant(0.0, d, m));
    for (const auto& [omega, field] : terms) {
      const Components& w = omega.eval(at, d);
      const Components& v = field.eval(at, d);
      for (int i = 0; i < m; ++i) {
        if (is_zero(v[i])) continue;
        for (int j = 0; j < m; ++j) {
          if (is_zero(w[j])) continue;
          out[static_cast<std::size_t>(i * m + j)] += v[i] * w[j];
        }
      }
    }
    return out;
  });
}

const Components& Endo11::matrix(const At& at, int depth) const {
  check_space(impl_->space, at, "endomorphism '" + impl_->name + "'");
  return with_chain(impl_->name,
                    [&]() -> const Components& { return at.memo(impl_->id, depth, [&] { return impl_->rule(at, depth); }); });
}

Components Endo11::act(const At& at, int depth, const Components& v) const {
  const Components& mat = matrix(at, depth);
  const int m = at.space().ambient_dim();
  Components out(static_cast<std::size_t>(m), Jet::constant(0.0, depth, m));
  for (int j = 0; j < m; ++j) {
    if (is_zero(v[j])) continue;
    for (int i = 0; i < m; ++i) {
      const Jet& a = mat[static_cast<std::size_t>(i * m + j)];
      if (is_zero(a)) continue;
      out[i] += a * v[j];
    }
  }
  return out;
}

VectorField Endo11::operator()(const VectorField& x) const {
  check_same_space(impl_->space, x.space(), "endomorphism action");
  const Endo11 self = *this;
  return VectorField(x.space(), impl_->name + "(" + x.name() + ")",
                     [self, x](const At& at, int d) { return self.act(at, d, x.eval(at, d)); });
}

Endo11 Endo11::renamed(std::string name) const {
  const Endo11 inner = *this;
  return Endo11(impl_->space, std::move(name), [inner](const At& at, int d) { return inner.matrix(at, d); });
}

const std::string& Endo11::name() const { return impl_->name; }
const SpacePtr& Endo11::space() const { return impl_->space; }
std::uint64_t Endo11::id() const { return impl_->id; }

Endo11 operator+(const Endo11& a, const Endo11& b) {
  check_same_space(a.space(), b.space(), "endomorphism +");
  return Endo11(a.space(), "(" + a.name() + "+" + b.name() + ")",
                [a, b](const At& at, int d) { return add(a.matrix(at, d), b.matrix(at, d)); });
}

Endo11 operator-(const Endo11& a, const Endo11& b) {
  check_same_space(a.space(), b.space(), "endomorphism -");
  return Endo11(a.space(), "(" + a.name() + "-" + b.name() + ")",
                [a, b](const At& at, int d) { return sub(a.matrix(at, d), b.matrix(at, d)); });
}

Endo11 operator*(double c, const Endo11& a) {
  std::ostringstream os;
  os << c << "*" << a.name();
  return Endo11(a.space(), os.str(), [c, a](const At& at, int d) { return scaled(Jet(c), a.matrix(at, d)); });
}

Endo11 compose(const Endo11& a, const Endo11& b) {
  check_same_space(a.space(), b.space(), "endomorphism composition");
  return Endo11(a.space(), a.name() + "o" + b.name(), [a, b](const At& at, int d) {
    const Components& ma = a.matrix(at, d);
    const Components& mb = b.matrix(at, d);
    const int m = at.space().ambient_dim();
    Components out(static_cast<std::size_t>(m * m), Jet::constant(0.0, d, m));
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        const Jet& aik = ma[static_cast<std::size_t>(i * m + k)];
        if (is_zero(aik)) continue;
        for (int j = 0; j < m; ++j) {
          const Jet& bkj = mb[static_cast<std::size_t>(k * m + j)];
          if (is_zero(bkj)) continue;
          out[static_cast<std::size_t>(i * m + j)] += aik * bkj;
        }
      }
    }
    return out;
  });
}

Endo11 lie_derivative(const VectorField& g, const Endo11& t) {
  check_same_space(g.space(), t.space(), "lie derivative");
  if (g.space()->embedded()) {
    throw std::invalid_argument("lie derivative of an endomorphism requires a charted (non-embedded) space");
  }
  return Endo11(g.space(), "L_" + g.name() + "(" + t.name() + ")", [g, t](const At& at, int d) {
    const int m = at.space().ambient_dim();
    const Components& g1 = g.eval(at, d + 1);
    const Components& t1 = t.matrix(at, d + 1);
    const Components g0 = truncated(g1, d);
    const Components t0 = truncated(t1, d);
    const auto idx = [m](int r, int c) { return static_cast<std::size_t>(r * m + c); };
    Components out(static_cast<std::size_t>(m * m), Jet::constant(0.0, d, m));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        Jet& o = out[idx(i, j)];
        for (int k = 0; k < m; ++k) {
          if (!is_zero(g0[k]) && !is_zero(t1[idx(i, j)])) o += g0[k] * t1[idx(i, j)].derivative(k);
          if (!is_zero(t0[idx(k, j)]) && !is_zero(g1[i])) o -= t0[idx(k, j)] * g1[i].derivative(k);
          if (!is_zero(t0[idx(i, k)]) && !is_zero(g1[k])) o += t0[idx(i, k)] * g1[k].derivative(j);
        }
      }
    }
    return out;
  });
}

// ---------------------------------------------------------------- frames

Frame::Frame(std::string name, std::vector<VectorField> fields) : name_(std::move(name)), fields_(std::move(fields)) {
  for (std::size_t i = 1; i < fields_.size(); ++i) check_same_space(fields_[0].space(), fields_[i].space(), "frame");
}

void Frame::check_independent(const At& at) const {
  const int m = at.space().ambient_dim();
  const int r = rank();
  if (r == 0) return;
  std::vector<double> mat(static_cast<std::size_t>(m * r));
  for (int c = 0; c < r; ++c) {
    const auto v = fields_[c].values(at);
    for (int i = 0; i < m; ++i) mat[static_cast<std::size_t>(i * r + c)] = v[i];
  }
  const double ratio = singular_ratio(mat, m, r);
  if (!(ratio > kFrameDegeneracyRatio)) {
    throw SingularFrameError("frame '" + name_ + "' is degenerate", at.point().coords, ratio);
  }
}

Frame concat(const std::vector<Frame>& frames, std::string name) {
  std::vector<VectorField> all;
  std::string joined;
  for (const auto& f : frames) {
    all.insert(all.end(), f.fields().begin(), f.fields().end());
    joined += (joined.empty() ? "" : "+") + f.name();
  }
  return Frame(name.empty() ? joined : std::move(name), std::move(all));
}

struct DualCoframe::Impl {
  std::uint64_t id;
  SpacePtr space;
  Frame frame;
};

DualCoframe::DualCoframe(std::vector<Frame> frames) {
  Frame all = concat(frames);
  if (all.rank() == 0) throw std::invalid_argument("dual coframe of an empty frame");
  SpacePtr space = all[0].space();
  if (all.rank() != space->dim()) {
    throw std::invalid_argument("frames '" + all.name() + "' have total rank " + std::to_string(all.rank()) +
                                " but space '" + space->name() + "' has dimension " + std::to_string(space->dim()));
  }
  impl_ = std::make_shared<const Impl>(Impl{next_object_id(), std::move(space), std::move(all)});
}

const Frame& DualCoframe::frame() const { return impl_->frame; }
int DualCoframe::rank() const { return impl_->frame.rank(); }

const Components& DualCoframe::inverse(const At& at, int depth) const {
  check_space(impl_->space, at, "coframe of '" + impl_->frame.name() + "'");
  return with_chain("coframe(" + impl_->frame.name() + ")", [&]() -> const Components& {
    return at.memo(impl_->id, depth, [&] {
      const int m = at.space().ambient_dim();
      const int r = rank();
      Components e(static_cast<std::size_t>(m * m));
      std::vector<double> values(static_cast<std::size_t>(m * m));
      for (int c = 0; c < r; ++c) {
        const Components& v = impl_->frame[c].eval(at, depth);
        for (int i = 0; i < m; ++i) e[static_cast<std::size_t>(i * m + c)] = v[i];
      }
      if (r < m) {
        const auto normals = at.space().normals(at, depth);
        for (int k = 0; k < m - r; ++k) {
          for (int i = 0; i < m; ++i) e[static_cast<std::size_t>(i * m + r + k)] = normals[k][i];
        }
      }
      for (std::size_t k = 0; k < e.size(); ++k) values[k] = e[k].value();
      const double ratio = singular_ratio(values, m, m);
      if (!(ratio > kFrameDegeneracyRatio)) {
        throw SingularFrameError("frame '" + impl_->frame.name() + "' is degenerate", at.point().coords, ratio);
      }
      Components inv = invert(std::move(e), m);
      for (auto& j : inv) j = at_depth(j, depth, m);
      return inv;
    });
  });
}

CovectorField DualCoframe::covector(int i) const {
  if (i < 0 || i >= rank()) throw std::out_of_range("coframe index out of range");
  const DualCoframe self = *this;
  return CovectorField(impl_->space, "w^" + impl_->frame[i].name(), [self, i](const At& at, int d) {
    const Components& inv = self.inverse(at, d);
    const auto m = static_cast<std::size_t>(at.space().ambient_dim());
    return Components(inv.begin() + static_cast<std::ptrdiff_t>(i * m),
                      inv.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
  });
}

std::vector<CovectorField> DualCoframe::covectors() const {
  std::vector<CovectorField> out;
  for (int i = 0; i < rank(); ++i) out.push_back(covector(i));
  return out;
}

Components DualCoframe::coefficients(const At& at, int depth, const Components& v) const {
  const Components& inv = inverse(at, depth);
  const int m = at.space().ambient_dim();
  Components c(static_cast<std::size_t>(rank()), Jet::constant(0.0, depth, m));
  for (int i = 0; i < rank(); ++i) {
    for (int j = 0; j < m; ++j) {
      if (is_zero(v[j])) continue;
      c[i] += inv[static_cast<std::size_t>(i * m + j)] * v[j];
    }
  }
  return c;
}

Endo11 DualCoframe::projector(int begin, int end, std::string name) const {
  if (begin < 0 || end > rank() || begin > end) throw std::out_of_range("projector range out of bounds");
  const DualCoframe self = *this;
  return Endo11(impl_->space, std::move(name), [self, begin, end](const At& at, int d) {
    const Components& inv = self.inverse(at, d);
    const int m = at.space().ambient_dim();
    Components out(static_cast<std::size_t>(m * m), Jet::constant(0.0, d, m));
    for (int k = begin; k < end; ++k) {
      const Components& e = self.frame()[k].eval(at, d);
      for (int i = 0; i < m; ++i) {
        if (is_zero(e[i])) continue;
        for (int j = 0; j < m; ++j) {
          const Jet& w = inv[static_cast<std::size_t>(k * m + j)];
          if (is_zero(w)) continue;
          out[static_cast<std::size_t>(i * m + j)] += e[i] * w;
        }
      }
    }
    return out;
  });
}

std::vector<CovectorField> dual_coframe(const std::vector<Frame>& frames) { return DualCoframe(frames).covectors(); }

std::vector<double> frame_coefficients(const std::vector<Frame>& frames, const At& at, std::span<const double> v) {
  const DualCoframe coframe(frames);
  const int m = at.space().ambient_dim();
  if (static_cast<int>(v.size()) != m) throw std::invalid_argument("frame_coefficients: vector has wrong dimension");
  Components vj;
  for (double x : v) vj.push_back(Jet::constant(x, 0, m));
  const auto c = values_of(coframe.coefficients(at, 0, vj));
  std::vector<double> rebuilt(static_cast<std::size_t>(m), 0.0);
  for (int k = 0; k < coframe.rank(); ++k) {
    const auto e = coframe.frame()[k].values(at);
    for (int i = 0; i < m; ++i) rebuilt[i] += c[k] * e[i];
  }
  const double residual = max_abs_diff(rebuilt, v);
  if (residual > 1e-10 * std::max(max_abs(v), 1e-300) && residual > 0.0) {
    throw std::invalid_argument("vector is not tangent to the frame span (residual " + std::to_string(residual) + ")");
  }
  return c;
}

Endo11 projector_from_split(const Frame& target, const std::vector<Frame>& rest, std::string name) {
  std::vector<Frame> all{target};
  all.insert(all.end(), rest.begin(), rest.end());
  return DualCoframe(all).projector(0, target.rank(), name.empty() ? "P_" + target.name() : std::move(name));
}

// ---------------------------------------------------------------- helpers

Components add(const Components& a, const Components& b) {
  Components out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Components sub(const Components& a, const Components& b) {
  Components out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Components scaled(const Jet& c, const Components& a) {
  Components out;
  out.reserve(a.size());
  for (const auto& x : a) out.push_back(c * x);
  return out;
}

Components truncated(const Components& a, int depth) {
  Components out;
  out.reserve(a.size());
  for (const auto& x : a) out.push_back(x.depth() > depth ? x.truncated(depth) : x);
  return out;
}

std::vector<double> values_of(const Components& a) {
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& x : a) out.push_back(x.value());
  return out;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double membership_defect(const Endo11& p, const VectorField& v, const At& at) {
  const auto pv = values_of(p.act(at, 0, v.eval(at, 0)));
  return max_abs_diff(pv, v.values(at));
}

double tangency_defect(const VectorField& x, const At& at) {
  if (!at.space().embedded()) return 0.0;
  const auto v = x.values(at);
  double worst = 0.0;
  for (const auto& n : at.space().normals(at, 0)) {
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += n[i].value() * v[i];
    worst = std::max(worst, std::abs(dot));
  }
  return worst;
}

}  // namespace ehrcov
