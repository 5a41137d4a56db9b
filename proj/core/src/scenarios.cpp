#include "ehrcov/scenarios.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace ehrcov {

namespace {

double pinned_threshold(double pinned, double tol) { return pinned > 0.0 ? std::min(pinned, tol) : tol; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::string row_id(const ExpectedRow& row) {
  std::string id = "expected." + to_string(row.op) + "(";
  for (std::size_t i = 0; i < row.args.size(); ++i) id += (i ? "," : "") + row.args[i];
  return id + ")";
}

}  // namespace

// ---------------------------------------------------------------- metric

ScalarField Metric::operator()(const VectorField& a, const VectorField& b) const {
  const auto comps = g;
  return ScalarField(space, name + "(" + a.name() + "," + b.name() + ")", [comps, a, b](const At& at, int d) {
    const Components& va = a.eval(at, d);
    const Components& vb = b.eval(at, d);
    Jet out = Jet::constant(0.0, d, at.space().ambient_dim());
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (is_zero(va[i])) continue;
      for (std::size_t j = 0; j < comps[i].size(); ++j) {
        if (is_zero(vb[j])) continue;
        const Jet& gij = comps[i][j].eval(at, d);
        if (is_zero(gij)) continue;
        out += gij * va[i] * vb[j];
      }
    }
    return out;
  });
}

Metric euclidean_metric(SpacePtr space) {
  const int m = space->ambient_dim();
  Metric g{space, {}, "g"};
  for (int i = 0; i < m; ++i) {
    std::vector<ScalarField> row;
    for (int j = 0; j < m; ++j) row.push_back(ScalarField::constant(space, i == j ? 1.0 : 0.0));
    g.g.push_back(std::move(row));
  }
  return g;
}

Metric metric_from_strings(SpacePtr space, const std::vector<std::vector<std::string>>& components) {
  const auto m = static_cast<std::size_t>(space->ambient_dim());
  if (components.size() != m) throw std::invalid_argument("metric needs one row per coordinate");
  Metric g{space, {}, "g"};
  for (const auto& row : components) {
    if (row.size() != m) throw std::invalid_argument("metric row has the wrong length");
    std::vector<ScalarField> out;
    for (const auto& c : row) out.push_back(ScalarField::from_string(space, c));
    g.g.push_back(std::move(out));
  }
  return g;
}

std::vector<CheckRecord> metric_checks(const Metric& g, const Frame& frame, const SampleConfig& cfg) {
  const auto points = g.space->sample(cfg.samples, cfg.seed);
  const int r = frame.rank();
  std::vector<std::vector<ScalarField>> gram(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) gram[i].push_back(g(frame[i], frame[j]));
  }
  const std::vector<CheckSpec> specs{
      {"metric.symmetric", "metric: symmetric", cfg.tolerance},
      {"metric.positive", "metric: positive definite on the frame", cfg.tolerance},
  };
  return run_checks(specs, g.space, points, cfg.depth, [&](const At& at) {
    Eigen::MatrixXd m(r, r);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) m(i, j) = gram[i][j].value(at);
    }
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    const double lmin = es.eigenvalues().minCoeff();
    return std::vector<double>{asym, lmin > 0.0 ? 0.0 : 1.0 - lmin};
  });
}

CovDeriv symmetrize(const CovDeriv& nabla) {
  return CovDeriv(
      nabla.space(),
      [nabla](const VectorField& x, const VectorField& y) { return nabla(x, y) - 0.5 * torsion(nabla, x, y); },
      Provenance::Custom, "sym(" + nabla.name() + ")");
}

ScalarField metric_compatibility_defect(const CovDeriv& nabla, const Metric& g, const VectorField& x,
                                        const VectorField& y, const VectorField& z) {
  return derivative_along(x, g(y, z)) - g(nabla(x, y), z) - g(y, nabla(x, z));
}

// ---------------------------------------------------------------- scenario

std::string to_string(ExpectedOp op) {
  switch (op) {
    case ExpectedOp::Nabla:
      return "nabla";
    case ExpectedOp::Bracket:
      return "bracket";
    case ExpectedOp::Torsion:
      return "torsion";
    case ExpectedOp::Curvature:
      return "curvature";
    case ExpectedOp::TorsionHorizontal:
      return "torsion-horizontal";
    case ExpectedOp::TorsionVertical:
      return "torsion-vertical";
    case ExpectedOp::Coframe:
      return "coframe";
  }
  return "?";
}

ExpectedOp expected_op_from_string(const std::string& name) {
  for (auto op : {ExpectedOp::Nabla, ExpectedOp::Bracket, ExpectedOp::Torsion, ExpectedOp::Curvature,
                  ExpectedOp::TorsionHorizontal, ExpectedOp::TorsionVertical, ExpectedOp::Coframe}) {
    if (to_string(op) == name) return op;
  }
  throw std::invalid_argument("unknown operation '" + name +
                              "' (expected nabla, bracket, torsion, curvature, torsion-horizontal, torsion-vertical "
                              "or coframe)");
}

const VectorField& Scenario::field(const std::string& name) const {
  for (const auto& [n, f] : fields) {
    if (n == name) return f;
  }
  std::string names;
  for (const auto& [n, f] : fields) names += (names.empty() ? "" : ", ") + n;
  throw std::out_of_range("scenario '" + this->name + "' has no field '" + name + "' (available: " + names + ")");
}

bool Scenario::has_field(const std::string& name) const {
  return std::any_of(fields.begin(), fields.end(), [&](const auto& p) { return p.first == name; });
}

std::vector<std::string> Scenario::field_names() const {
  std::vector<std::string> out;
  for (const auto& [n, f] : fields) out.push_back(n);
  return out;
}

Frame Scenario::frame() const {
  std::vector<VectorField> out;
  for (const auto& n : frame_names) out.push_back(field(n));
  return Frame(name, std::move(out));
}

void finish_scenario(Scenario& sc, const Frame& k, const std::vector<Frame>& blocks, Orientation orientation,
                     const std::optional<Pairing>& pairing, const SampleConfig& cfg) {
  const Frame rest = concat(blocks);
  const bool kv = orientation == Orientation::KVertical;
  const EhresmannConnection conn = build_connection(sc.space, kv ? k : rest, kv ? rest : k, cfg);
  sc.split = canonical_endos(conn, blocks, orientation, pairing, cfg);
  sc.nabla = (blocks.size() == 1 && kv) ? total_equal_rank(sc.split, cfg) : total_multiple_rank(sc.split, cfg);
}

Scenario build_scenario(const ScenarioSpec& spec, const SampleConfig& cfg) {
  Scenario sc;
  sc.name = spec.name;
  sc.description = spec.description;
  sc.section = spec.section;
  sc.notes = spec.notes;
  sc.space = make_space(spec.name, spec.coords, spec.space);
  for (const auto& [name, comps] : spec.fields) {
    if (sc.has_field(name)) throw std::invalid_argument("duplicate field '" + name + "'");
    try {
      sc.fields.emplace_back(name, VectorField::from_strings(sc.space, name, comps));
    } catch (const ParseError& e) {
      throw std::invalid_argument("field '" + name + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("field '" + name + "': " + e.what());
    } catch (const EvalError& e) {
      throw std::invalid_argument("field '" + name + "': " + e.what());
    }
  }
  const auto frame_of = [&](const std::vector<std::string>& names, const std::string& fallback) {
    std::vector<VectorField> out;
    for (const auto& n : names) out.push_back(sc.field(n));
    return Frame(names.size() == 1 ? names[0] : fallback, std::move(out));
  };
  if (spec.k.empty()) throw std::invalid_argument("split: K is empty");
  if (spec.blocks.empty()) throw std::invalid_argument("split: no blocks");
  const Frame k = frame_of(spec.k, "K");
  std::vector<Frame> blocks;
  for (std::size_t a = 0; a < spec.blocks.size(); ++a) {
    blocks.push_back(frame_of(spec.blocks[a], "L" + std::to_string(a + 1)));
  }
  // Display order: horizontal fields first, then vertical.
  std::vector<std::string> flat;
  for (const auto& b : spec.blocks) flat.insert(flat.end(), b.begin(), b.end());
  if (spec.orientation == Orientation::KVertical) {
    sc.frame_names = flat;
    sc.frame_names.insert(sc.frame_names.end(), spec.k.begin(), spec.k.end());
  } else {
    sc.frame_names = spec.k;
    sc.frame_names.insert(sc.frame_names.end(), flat.begin(), flat.end());
  }
  for (const auto& row : spec.expected) {
    ExpectedRow out;
    out.op = expected_op_from_string(row.op);
    const std::size_t nargs = out.op == ExpectedOp::Coframe ? 1 : 2;
    if (row.args.size() != nargs) {
      throw std::invalid_argument("expected row '" + row.op + "' needs " + std::to_string(nargs) + " argument(s)");
    }
    for (const auto& a : row.args) sc.field(a);
    out.args = row.args;
    for (const auto& [key, expr] : row.value) {
      if (out.op == ExpectedOp::Coframe) {
        sc.space->coord_index(key);
      } else {
        sc.field(key);
      }
      try {
        out.terms.emplace_back(key, ScalarField::from_string(sc.space, expr));
      } catch (const std::exception& e) {
        throw std::invalid_argument("expected " + row.op + " value '" + key + "': " + e.what());
      }
    }
    out.paper_ref = sc.name + ": " + row.op + " table";
    if (out.op == ExpectedOp::Bracket) out.pinned = kIdentityTolerance;
    sc.expected.push_back(std::move(out));
  }
  if (spec.metric) sc.metric = metric_from_strings(sc.space, *spec.metric);
  finish_scenario(sc, k, blocks, spec.orientation, spec.pairing, cfg);
  return sc;
}

// ---------------------------------------------------------------- built-ins

Scenario trivial_r3(const SampleConfig& cfg) {
  ScenarioSpec spec;
  spec.name = "trivial-r3";
  spec.description = "trivial bundle R^3 -> R^2 with a rotating horizontal distribution";
  spec.section = "general";
  spec.coords = {"x", "y", "th"};
  spec.space.base_coords = {0, 1};
  spec.fields = {
      {"H1", {"1", "0", "cos(th)"}},
      {"H2", {"0", "1", "sin(th)"}},
      {"V", {"0", "0", "1"}},
  };
  spec.k = {"V"};
  spec.blocks = {{"H1"}, {"H2"}};
  spec.orientation = Orientation::KVertical;
  spec.expected = {
      {"nabla", {"H1", "H1"}, {{"H1", "sin(th)"}}},
      {"nabla", {"H2", "H2"}, {{"H2", "-cos(th)"}}},
      {"nabla", {"H1", "V"}, {{"V", "sin(th)"}}},
      {"nabla", {"H2", "V"}, {{"V", "-cos(th)"}}},
      {"coframe", {"V"}, {{"x", "-cos(th)"}, {"y", "-sin(th)"}, {"th", "1"}}},
  };
  spec.notes = {
      "The covector dual to V in the frame (H1, H2, V) is dth - cos(th) dx - sin(th) dy. "
      "The form dth - cos(th) dx + sin(th) dy does not vanish on H2, so the computed coframe is used.",
  };
  return build_scenario(spec, cfg);
}

Scenario hopf(const SampleConfig& cfg) {
  ScenarioSpec spec;
  spec.name = "hopf";
  spec.description = "Hopf bundle S^3 -> S^2 in ambient coordinates of R^4";
  spec.section = "general";
  spec.coords = {"x", "y", "z", "w"};
  spec.space.constraints = {"x^2 + y^2 + z^2 + w^2 - 1"};
  spec.space.normals = {{"2*x", "2*y", "2*z", "2*w"}};
  spec.space.unit_sphere = true;
  // Rotations in the six coordinate planes.
  spec.fields = {
      {"theta", {"y", "-x", "0", "0"}}, {"phi", {"z", "0", "-x", "0"}}, {"psi", {"w", "0", "0", "-x"}},
      {"xi", {"0", "0", "w", "-z"}},    {"eta", {"0", "-w", "0", "y"}}, {"zeta", {"0", "z", "-y", "0"}},
      // V = theta - xi, Lambda = phi - eta, Sigma = psi - zeta
      {"V", {"y", "-x", "-w", "z"}},    {"Lambda", {"z", "w", "-x", "-y"}},
      {"Sigma", {"w", "-z", "y", "-x"}},
  };
  spec.k = {"V"};
  spec.blocks = {{"Lambda"}, {"Sigma"}};
  spec.orientation = Orientation::KVertical;
  spec.expected = {
      {"bracket", {"Sigma", "Lambda"}, {{"V", "2"}}},
      {"bracket", {"Lambda", "V"}, {{"Sigma", "2"}}},
      {"bracket", {"V", "Sigma"}, {{"Lambda", "2"}}},
      {"curvature", {"Lambda", "Sigma"}, {{"V", "-2"}}},
  };
  spec.metric = std::vector<std::vector<std::string>>{
      {"1", "0", "0", "0"}, {"0", "1", "0", "0"}, {"0", "0", "1", "0"}, {"0", "0", "0", "1"}};
  Scenario sc = build_scenario(spec, cfg);
  for (auto& row : sc.expected) {
    if (row.op == ExpectedOp::Bracket) row.paper_ref = "Hopf bundle: bracket table";
    if (row.op == ExpectedOp::Curvature) row.paper_ref = "Hopf bundle: curvature from the bracket table";
  }
  sc.extra_checks.push_back([](const Scenario& s, const SampleConfig& c) {
    const std::vector<std::string> pi = {"x^2 + y^2 - z^2 - w^2", "2*(x*w + y*z)", "2*(y*w - x*z)"};
    std::vector<ScalarField> dpi;
    for (const auto& p : pi) dpi.push_back(derivative_along(s.field("V"), ScalarField::from_string(s.space, p)));
    const auto points = s.space->sample(c.samples, c.seed);
    std::vector<CheckRecord> out;
    out.push_back(run_check("hopf.projection-vertical", "Hopf bundle: V is vertical for the projection map",
                            std::min(1e-9, c.tolerance), s.space, points, c.depth, [&](const At& at) {
                              double worst = 0.0;
                              for (const auto& f : dpi) worst = std::max(worst, std::abs(f.value(at)));
                              return worst;
                            }));
    out.push_back(run_check("hopf.rotations", "Hopf bundle: V, Lambda, Sigma as rotation differences",
                            kIdentityTolerance, s.space, points, c.depth, [&](const At& at) {
                              double worst = 0.0;
                              const std::vector<std::array<const char*, 3>> defs{
                                  {"V", "theta", "xi"}, {"Lambda", "phi", "eta"}, {"Sigma", "psi", "zeta"}};
                              for (const auto& d : defs) {
                                const VectorField diff = s.field(d[1]) - s.field(d[2]);
                                worst = std::max(worst, max_abs_diff(s.field(d[0]).values(at), diff.values(at)));
                              }
                              return worst;
                            }));
    return out;
  });
  return sc;
}

std::vector<BuiltinInfo> builtin_scenarios() {
  return {
      {"trivial-r3", "trivial bundle R^3 -> R^2, two-fold horizontal split", "general", 3},
      {"hopf", "Hopf bundle S^3 -> S^2, absolute parallelism", "general", 3},
      {"affine-tangent", "tangent bundle of an affine connection with torsion (n=2)", "tangent bundle", 4},
      {"nonlinear-tangent", "nonlinear connection on the tangent bundle (n=2)", "tangent bundle", 4},
      {"sode-tangent", "connection of a second-order equation field (n=2)", "tangent bundle", 4},
      {"frame-bundle", "frame bundle with an n-fold vertical split (n=2)", "frame bundle", 6},
  };
}

Scenario builtin_scenario(const std::string& name, const SampleConfig& cfg) {
  if (name == "trivial-r3") return trivial_r3(cfg);
  if (name == "hopf") return hopf(cfg);
  if (name == "affine-tangent") return affine_tangent(2, default_affine_gamma(), cfg);
  if (name == "nonlinear-tangent") return nonlinear_tangent(2, default_nonlinear_gamma(), cfg);
  if (name == "sode-tangent") return sode_tangent(2, default_sode_force(), cfg);
  if (name == "frame-bundle") return frame_bundle(2, {1, 2}, default_frame_gamma(), cfg);
  std::string names;
  for (const auto& b : builtin_scenarios()) names += (names.empty() ? "" : ", ") + b.name;
  throw std::out_of_range("unknown scenario '" + name + "' (available: " + names + ")");
}

std::vector<ScalarField> test_functions(const SpacePtr& space, std::uint64_t seed) {
  std::mt19937_64 gen(seed ^ 0x5eedf00dULL);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  const auto& c = space->coords();
  const std::size_t m = c.size();
  const auto num = [&] { return fmt(u(gen)); };
  return {
      ScalarField::from_string(space, "1 + " + num() + "*" + c[0] + "*" + c[1 % m]),
      ScalarField::from_string(space, "sin(" + num() + "*" + c[m - 1] + ") + 2"),
      ScalarField::from_string(space, "exp(" + num() + "*" + c[0] + ")*(1 + " + c[m / 2] + "^2)"),
  };
}

VectorField evaluate_op(const Scenario& sc, ExpectedOp op, const VectorField& x, const VectorField& y) {
  const auto& conn = sc.split.conn;
  switch (op) {
    case ExpectedOp::Nabla:
      return sc.nabla(x, y);
    case ExpectedOp::Bracket:
      return lie_bracket(x, y);
    case ExpectedOp::Torsion:
      return torsion(sc.nabla, x, y);
    case ExpectedOp::Curvature:
      return ehresmann_curvature(conn, x, y);
    case ExpectedOp::TorsionHorizontal:
      return conn.ph(torsion(sc.nabla, x, y));
    case ExpectedOp::TorsionVertical:
      return conn.pv(torsion(sc.nabla, x, y));
    case ExpectedOp::Coframe:
      break;
  }
  throw std::invalid_argument("operation '" + to_string(op) + "' does not produce a vector field");
}

std::vector<CheckRecord> verify_scenario(const Scenario& sc, const SampleConfig& cfg) {
  cfg.validate();
  const double pinned = std::min(kIdentityTolerance, cfg.tolerance);
  const double tol = cfg.tolerance;
  const auto points = sc.space->sample(cfg.samples, cfg.seed);
  const Frame frame = sc.frame();
  const DualCoframe coframe({frame});
  const auto& conn = sc.split.conn;
  std::vector<CheckRecord> out;
  const auto append = [&](std::vector<CheckRecord> recs) {
    for (auto& r : recs) out.push_back(std::move(r));
  };

  append(validate_connection(conn, cfg, pinned));
  append(validate_split(sc.split, cfg, pinned));
  if (sc.metric) append(metric_checks(*sc.metric, frame, cfg));

  // Expected table, compared through frame coefficients.
  std::vector<std::pair<std::string, std::string>> listed;
  for (const auto& row : sc.expected) {
    const double threshold = pinned_threshold(row.pinned, tol);
    if (row.op == ExpectedOp::Coframe) {
      int idx = -1;
      for (int i = 0; i < frame.rank(); ++i) {
        if (sc.frame_names[i] == row.args[0]) idx = i;
      }
      if (idx < 0) {
        out.push_back(make_record(row_id(row), row.paper_ref, std::numeric_limits<double>::infinity(), threshold));
        out.back().error = "'" + row.args[0] + "' is not a frame field";
        continue;
      }
      const CovectorField actual = coframe.covector(idx);
      out.push_back(run_check(row_id(row), row.paper_ref, threshold, sc.space, points, cfg.depth, [&](const At& at) {
        const auto a = actual.values(at);
        std::vector<double> e(a.size(), 0.0);
        for (const auto& [coord, f] : row.terms) e[sc.space->coord_index(coord)] = f.value(at);
        return max_abs_diff(a, e);
      }));
      continue;
    }
    const VectorField x = sc.field(row.args[0]);
    const VectorField y = sc.field(row.args[1]);
    if (row.op == ExpectedOp::Nabla) listed.emplace_back(row.args[0], row.args[1]);
    const VectorField actual = evaluate_op(sc, row.op, x, y);
    std::vector<VectorField> parts;
    for (const auto& [name, coeff] : row.terms) parts.push_back(coeff * sc.field(name));
    VectorField expected = VectorField::zero(sc.space);
    for (const auto& p : parts) expected = expected + p;
    const VectorField diff = actual - expected;
    out.push_back(run_check(row_id(row), row.paper_ref, threshold, sc.space, points, cfg.depth, [&](const At& at) {
      return max_abs(values_of(coframe.coefficients(at, 0, diff.eval(at, 0))));
    }));
  }

  std::vector<VectorField> unlisted;
  for (const auto& a : sc.frame_names) {
    for (const auto& b : sc.frame_names) {
      if (std::find(listed.begin(), listed.end(), std::make_pair(a, b)) != listed.end()) continue;
      unlisted.push_back(sc.nabla(sc.field(a), sc.field(b)));
    }
  }
  out.push_back(run_check("nabla.unlisted-zero", sc.name + ": derivatives not in the table vanish", tol, sc.space,
                          points, cfg.depth, [&](const At& at) {
                            double worst = 0.0;
                            for (const auto& f : unlisted) {
                              worst = std::max(worst, max_abs(values_of(coframe.coefficients(at, 0, f.eval(at, 0)))));
                            }
                            return worst;
                          }));

  const auto functions = test_functions(sc.space, cfg.seed);
  append(axiom_suite(sc.nabla, frame, functions, cfg));
  append(torsion_suite(sc.nabla, frame, functions, cfg));

  // For horizontal arguments nabla_X Y is horizontal, so the vertical part of
  // the torsion is -P_V[X, Y] = -R(X, Y).
  {
    std::vector<VectorField> sums;
    for (const auto& x : frame.fields()) {
      for (const auto& y : frame.fields()) {
        sums.push_back(conn.pv(torsion(sc.nabla, conn.ph(x), conn.ph(y))) + ehresmann_curvature(conn, x, y));
      }
    }
    out.push_back(run_check("torsion.vertical-vs-curvature", "vertical torsion on horizontal pairs equals -R", tol,
                            sc.space, points, cfg.depth, [&](const At& at) {
                              double worst = 0.0;
                              for (const auto& f : sums) worst = std::max(worst, max_abs(f.values(at)));
                              return worst;
                            }));
  }

  // Parallel projectors, with the equivalence between both formulations.
  const auto parts = split_parts(sc.split);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string prefix = "parallel." + parts[i].projector.name();
    const auto rep = check_parallel_projector(parts, static_cast<int>(i), frame, cfg, prefix);
    out.push_back(rep.parallel);
    out.push_back(rep.closed);
    out.push_back(make_record(prefix + ".equivalence", "parallel projector: both formulations agree",
                              rep.agree ? 0.0 : 1.0, 0.5));
  }
  const auto endo_check = [&](const std::string& id, const std::string& ref, const Endo11& t) {
    std::vector<VectorField> fs;
    for (const auto& x : frame.fields()) {
      for (const auto& y : frame.fields()) fs.push_back(nabla_of_endo(sc.nabla, t, x, y));
    }
    return run_check(id, ref, tol, sc.space, points, cfg.depth, [&](const At& at) {
      double worst = 0.0;
      for (const auto& f : fs) worst = std::max(worst, max_abs(f.values(at)));
      return worst;
    });
  };
  out.push_back(endo_check("parallel.P_V", "parallel projector: nabla P_V = 0", conn.pv));
  out.push_back(endo_check("parallel.P_H", "parallel projector: nabla P_H = 0", conn.ph));
  if (sc.equal_rank()) {
    out.push_back(endo_check("parallel.S", "equal ranks: nabla S = 0", sc.split.s_total));
    out.push_back(endo_check("parallel.Q", "equal ranks: nabla Q = 0", sc.split.q_total));
  }

  if (sc.metric) {
    const CovDeriv sym = symmetrize(sc.nabla);
    std::vector<VectorField> tors;
    std::vector<ScalarField> defects;
    for (const auto& x : frame.fields()) {
      for (const auto& y : frame.fields()) {
        tors.push_back(torsion(sym, x, y));
        for (const auto& z : frame.fields()) defects.push_back(metric_compatibility_defect(sym, *sc.metric, x, y, z));
      }
    }
    out.push_back(run_check("levi-civita-torsion-free", "symmetrised derivative is torsion free", tol, sc.space,
                            points, cfg.depth, [&](const At& at) {
                              double worst = 0.0;
                              for (const auto& f : tors) worst = std::max(worst, max_abs(f.values(at)));
                              return worst;
                            }));
    out.push_back(run_check("levi-civita-compatibility", "symmetrised derivative is metric compatible", tol,
                            sc.space, points, cfg.depth, [&](const At& at) {
                              double worst = 0.0;
                              for (const auto& f : defects) worst = std::max(worst, std::abs(f.value(at)));
                              return worst;
                            }));
  }

  for (const auto& extra : sc.extra_checks) append(extra(sc, cfg));
  return out;
}

}  // namespace ehrcov
