#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ehrcov/scenarios.hpp"

namespace ehrcov {

namespace {

std::string xn(int a) { return "x" + std::to_string(a + 1); }
std::string un(int a) { return "u" + std::to_string(a + 1); }
std::string hn(int a) { return "H" + std::to_string(a + 1); }
std::string vn(int a) { return "V" + std::to_string(a + 1); }

void require_vars(const std::string& text, const std::set<std::string>& allowed, const std::string& what) {
  const Expr e = parse(text);
  for (const auto& v : free_vars(e)) {
    if (!allowed.count(v)) throw std::invalid_argument(what + " '" + text + "' uses '" + v + "'");
  }
}

std::set<std::string> coord_set(int n, bool with_u) {
  std::set<std::string> out;
  for (int a = 0; a < n; ++a) {
    out.insert(xn(a));
    if (with_u) out.insert(un(a));
  }
  return out;
}

VectorField dilation_field(const SpacePtr& tm, int n) {
  std::vector<ScalarField> comps;
  for (int a = 0; a < n; ++a) comps.push_back(ScalarField::constant(tm, 0.0));
  for (int a = 0; a < n; ++a) comps.push_back(ScalarField::from_string(tm, un(a)));
  return VectorField::from_scalars(tm, "Delta", std::move(comps));
}

// Largest |Delta(g) - k g| over the given functions at sampled points.
CheckRecord homogeneity_record(std::string id, std::string ref, const SpacePtr& tm, int n,
                               const std::vector<ScalarField>& fs, double degree, const SampleConfig& cfg) {
  const VectorField delta = dilation_field(tm, n);
  std::vector<ScalarField> defects;
  for (const auto& f : fs) defects.push_back(derivative_along(delta, f) - degree * f);
  return run_check(std::move(id), std::move(ref), cfg.tolerance, tm, tm->sample(cfg.samples, cfg.seed), cfg.depth,
                   [&](const At& at) {
                     double worst = 0.0;
                     for (const auto& d : defects) worst = std::max(worst, std::abs(d.value(at)));
                     return worst;
                   });
}

// Shared construction for all tangent-bundle scenarios: H_a = d/dx^a -
// gamma[c][a] d/du^c, V_a = d/du^a, K vertical with a single block.
// `coeff(c, a, b)` is the expected coefficient of nabla_{H_a} H_b on H_c.
Scenario tangent_scenario(const SpacePtr& tm, int n, const std::vector<std::vector<ScalarField>>& gamma,
                          const std::function<ScalarField(int, int, int)>& coeff, std::string name,
                          std::string description, const SampleConfig& cfg) {
  if (static_cast<int>(gamma.size()) != n) throw std::invalid_argument("gamma needs n rows");
  Scenario sc;
  sc.name = std::move(name);
  sc.description = std::move(description);
  sc.section = "tangent bundle";
  sc.space = tm;
  sc.tangent = TangentData{n, gamma};

  std::vector<VectorField> hs, vs;
  for (int a = 0; a < n; ++a) {
    std::vector<ScalarField> comps;
    for (int i = 0; i < n; ++i) comps.push_back(ScalarField::constant(tm, i == a ? 1.0 : 0.0));
    for (int c = 0; c < n; ++c) comps.push_back(-1.0 * gamma[c][a]);
    hs.push_back(VectorField::from_scalars(tm, hn(a), std::move(comps)));
    vs.push_back(VectorField::coordinate(tm, n + a).renamed(vn(a)));
  }
  for (int a = 0; a < n; ++a) sc.fields.emplace_back(hn(a), hs[a]);
  for (int a = 0; a < n; ++a) sc.fields.emplace_back(vn(a), vs[a]);
  for (int a = 0; a < n; ++a) sc.frame_names.push_back(hn(a));
  for (int a = 0; a < n; ++a) sc.frame_names.push_back(vn(a));

  const std::string tag = sc.name + ": ";
  const auto du = [&](const ScalarField& f, int b) { return partial(f, n + b); };
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      ExpectedRow hh{ExpectedOp::Nabla, {hn(a), hn(b)}, {}, tag + "horizontal derivative of horizontal fields"};
      ExpectedRow hv{ExpectedOp::Nabla, {hn(a), vn(b)}, {}, tag + "horizontal derivative of vertical fields"};
      for (int c = 0; c < n; ++c) {
        hh.terms.emplace_back(hn(c), coeff(c, a, b));
        hv.terms.emplace_back(vn(c), coeff(c, a, b));
      }
      sc.expected.push_back(std::move(hh));
      sc.expected.push_back(std::move(hv));
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      ExpectedRow tor{ExpectedOp::TorsionHorizontal, {hn(a), hn(b)}, {}, tag + "horizontal torsion"};
      ExpectedRow cur{ExpectedOp::Curvature, {hn(a), hn(b)}, {}, tag + "curvature of the horizontal distribution"};
      for (int c = 0; c < n; ++c) {
        tor.terms.emplace_back(hn(c), coeff(c, a, b) - coeff(c, b, a));
        // [H_a, H_b] on d/du^c
        ScalarField r = partial(gamma[c][a], b) - partial(gamma[c][b], a);
        for (int e = 0; e < n; ++e) r = r - gamma[e][b] * du(gamma[c][a], e) + gamma[e][a] * du(gamma[c][b], e);
        cur.terms.emplace_back(vn(c), r);
      }
      sc.expected.push_back(std::move(tor));
      sc.expected.push_back(std::move(cur));
    }
  }
  for (int a = 0; a < n; ++a) {
    sc.expected.push_back({ExpectedOp::Coframe, {hn(a)}, {{xn(a), ScalarField::constant(tm, 1.0)}},
                           tag + "dual coframe, horizontal part"});
    ExpectedRow v{ExpectedOp::Coframe, {vn(a)}, {{un(a), ScalarField::constant(tm, 1.0)}},
                  tag + "dual coframe, connection forms"};
    for (int b = 0; b < n; ++b) v.terms.emplace_back(xn(b), gamma[a][b]);
    sc.expected.push_back(std::move(v));
  }

  finish_scenario(sc, Frame("V", vs), {Frame("H", hs)}, Orientation::KVertical, std::nullopt, cfg);
  return sc;
}

}  // namespace

SpacePtr tangent_space(int n, const std::string& name) {
  if (n < 1) throw std::invalid_argument("tangent bundle dimension must be at least 1");
  std::vector<std::string> coords;
  for (int a = 0; a < n; ++a) coords.push_back(xn(a));
  for (int a = 0; a < n; ++a) coords.push_back(un(a));
  SpaceOptions opts;
  for (int a = 0; a < n; ++a) opts.base_coords.push_back(a);
  return make_space(name, coords, opts);
}

std::vector<std::string> default_affine_gamma() {
  // Gamma^c_{ab} at index c*4 + a*2 + b
  std::vector<std::string> g(8, "0");
  g[0 * 4 + 0 * 2 + 1] = "x1";
  g[1 * 4 + 0 * 2 + 0] = "x2^2";
  g[1 * 4 + 1 * 2 + 0] = "0.3*x1*x2";
  g[0 * 4 + 1 * 2 + 1] = "cos(x1)";
  return g;
}

std::vector<std::string> default_nonlinear_gamma() { return {"u1^2", "sin(u2)", "x1*u1*u2", "u1*u2 + x2"}; }

std::vector<std::string> default_sode_force() { return {"-u1^2 - x1*u1*u2", "-x2*u2^2 + u1*u2"}; }

Scenario affine_tangent(int n, const std::vector<std::string>& gamma, const SampleConfig& cfg) {
  const SpacePtr tm = tangent_space(n, "affine-tangent");
  if (gamma.size() != static_cast<std::size_t>(n * n * n)) {
    throw std::invalid_argument("affine connection needs n^3 = " + std::to_string(n * n * n) + " coefficients");
  }
  const auto base = coord_set(n, false);
  std::vector<std::vector<ScalarField>> christoffel(n * n);  // [c*n + a][b]
  for (int c = 0; c < n; ++c) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const std::string& g = gamma[c * n * n + a * n + b];
        require_vars(g, base, "affine coefficient");
        christoffel[c * n + a].push_back(ScalarField::from_string(tm, g));
      }
    }
  }
  // Gamma^c_a(x, u) = Gamma^c_{ab}(x) u^b
  std::vector<std::vector<ScalarField>> nonlinear(n);
  for (int c = 0; c < n; ++c) {
    for (int a = 0; a < n; ++a) {
      ScalarField s = ScalarField::constant(tm, 0.0);
      for (int b = 0; b < n; ++b) s = s + christoffel[c * n + a][b] * ScalarField::from_string(tm, un(b));
      nonlinear[c].push_back(s);
    }
  }
  Scenario sc = tangent_scenario(
      tm, n, nonlinear, [&](int c, int a, int b) { return christoffel[c * n + a][b]; }, "affine-tangent",
      "tangent bundle of an affine connection with torsion", cfg);
  return sc;
}

Scenario nonlinear_tangent(const SpacePtr& space, int n, const std::vector<std::vector<ScalarField>>& gamma,
                           const SampleConfig& cfg) {
  Scenario sc = tangent_scenario(
      space, n, gamma, [&](int c, int a, int b) { return partial(gamma[c][a], n + b); }, "nonlinear-tangent",
      "nonlinear connection on the tangent bundle", cfg);
  sc.extra_checks.push_back([](const Scenario& s, const SampleConfig& c) {
    const SufficiencyReport rep = sode_sufficiency_check(s, c);
    std::vector<CheckRecord> out;
    out.push_back(make_record("sufficiency.implication",
                              "parallel dilation and symmetric horizontal torsion imply a spray connection",
                              rep.implication_holds ? 0.0 : 1.0, 0.5));
    return out;
  });
  return sc;
}

Scenario nonlinear_tangent(int n, const std::vector<std::string>& gamma, const SampleConfig& cfg) {
  const SpacePtr tm = tangent_space(n, "nonlinear-tangent");
  if (gamma.size() != static_cast<std::size_t>(n * n)) {
    throw std::invalid_argument("nonlinear connection needs n^2 = " + std::to_string(n * n) + " coefficients");
  }
  const auto vars = coord_set(n, true);
  std::vector<std::vector<ScalarField>> g(n);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      require_vars(gamma[b * n + a], vars, "connection coefficient");
      g[b].push_back(ScalarField::from_string(tm, gamma[b * n + a]));
    }
  }
  return nonlinear_tangent(tm, n, g, cfg);
}

SodeConnection sode_projector(const SpacePtr& tm, int n, const std::vector<ScalarField>& f) {
  if (static_cast<int>(f.size()) != n) throw std::invalid_argument("second-order field needs n force terms");
  SodeConnection out;
  std::vector<ScalarField> comps;
  for (int a = 0; a < n; ++a) comps.push_back(ScalarField::from_string(tm, un(a)));
  for (int a = 0; a < n; ++a) comps.push_back(f[a]);
  out.gamma = VectorField::from_scalars(tm, "Gamma", std::move(comps));
  out.dilation = dilation_field(tm, n);
  std::vector<std::pair<CovectorField, VectorField>> terms;
  for (int a = 0; a < n; ++a) {
    std::vector<std::string> dx(2 * n, "0");
    dx[a] = "1";
    terms.emplace_back(CovectorField::from_strings(tm, "d" + xn(a), dx), VectorField::coordinate(tm, n + a));
  }
  out.s = Endo11::from_terms(tm, "S", std::move(terms));
  const Endo11 id = Endo11::identity(tm);
  out.ph = (0.5 * (id - lie_derivative(out.gamma, out.s))).renamed("P_H");
  out.pv = (id - out.ph).renamed("P_V");
  out.upsilon.resize(n);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) out.upsilon[b].push_back(-0.5 * partial(f[b], n + a));
  }
  return out;
}

bool is_spray(const SpacePtr& tm, int n, const std::vector<ScalarField>& f, const SampleConfig& cfg) {
  return homogeneity_record("spray", "", tm, n, f, 2.0, cfg).pass;
}

bool homogeneity_check(const SpacePtr& tm, int n, const std::vector<std::vector<ScalarField>>& gamma,
                       const SampleConfig& cfg) {
  std::vector<ScalarField> flat;
  for (const auto& row : gamma) flat.insert(flat.end(), row.begin(), row.end());
  return homogeneity_record("homogeneous", "", tm, n, flat, 1.0, cfg).pass;
}

Scenario sode_tangent(int n, const std::vector<std::string>& f, const SampleConfig& cfg) {
  const SpacePtr tm = tangent_space(n, "sode-tangent");
  if (f.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("second-order field needs n force terms");
  const auto vars = coord_set(n, true);
  std::vector<ScalarField> force;
  for (const auto& s : f) {
    require_vars(s, vars, "force term");
    force.push_back(ScalarField::from_string(tm, s));
  }
  const SodeConnection sode = sode_projector(tm, n, force);
  Scenario sc = tangent_scenario(
      tm, n, sode.upsilon, [&](int c, int a, int b) { return partial(sode.upsilon[c][a], n + b); }, "sode-tangent",
      "connection of a second-order equation field", cfg);

  sc.extra_checks.push_back([sode, force, n](const Scenario& s, const SampleConfig& c) {
    const auto points = s.space->sample(c.samples, c.seed);
    const double pinned = std::min(kIdentityTolerance, c.tolerance);
    std::vector<CheckRecord> out;
    const VectorField sg = sode.s(sode.gamma);
    out.push_back(run_check("sode.semispray", "S(Gamma) is the dilation field", pinned, s.space, points, c.depth,
                            [&](const At& at) { return max_abs_diff(sg.values(at), sode.dilation.values(at)); }));
    // Projector built from the Lie derivative against the closed form.
    std::vector<std::pair<VectorField, VectorField>> pairs;
    for (int a = 0; a < n; ++a) {
      pairs.emplace_back(sode.ph(VectorField::coordinate(s.space, a)), s.field(hn(a)));
      pairs.emplace_back(sode.ph(VectorField::coordinate(s.space, n + a)), VectorField::zero(s.space));
    }
    out.push_back(run_check("sode.projector-coefficients", "horizontal projector of a second-order field", pinned,
                            s.space, points, c.depth, [&](const At& at) {
                              double worst = 0.0;
                              for (const auto& [lhs, rhs] : pairs) {
                                worst = std::max(worst, max_abs_diff(lhs.values(at), rhs.values(at)));
                              }
                              return worst;
                            }));
    out.push_back(run_check("sode.projector-agrees", "projector of the field equals the scenario P_H", pinned,
                            s.space, points, c.depth, [&](const At& at) {
                              return max_abs_diff(values_of(sode.ph.matrix(at, 0)),
                                                  values_of(s.split.conn.ph.matrix(at, 0)));
                            }));
    out.push_back(homogeneity_record("sode.spray", "force terms are homogeneous of degree two", s.space, n, force,
                                     2.0, c));
    return out;
  });
  return sc;
}

SufficiencyReport sode_sufficiency_check(const Scenario& sc, const SampleConfig& cfg) {
  if (!sc.tangent) throw std::invalid_argument("scenario '" + sc.name + "' is not a tangent-bundle scenario");
  const int n = sc.tangent->n;
  const auto& gamma = sc.tangent->gamma;
  const SpacePtr& tm = sc.space;
  const auto points = tm->sample(cfg.samples, cfg.seed);
  const VectorField delta = dilation_field(tm, n);
  const auto& ph = sc.split.conn.ph;

  std::vector<VectorField> nd, tor;
  for (int a = 0; a < n; ++a) {
    nd.push_back(sc.nabla(sc.field(hn(a)), delta));
    for (int b = 0; b < n; ++b) tor.push_back(ph(torsion(sc.nabla, sc.field(hn(a)), sc.field(hn(b)))));
  }
  const auto worst_of = [](const std::vector<VectorField>& fs) {
    return [&fs](const At& at) {
      double worst = 0.0;
      for (const auto& f : fs) worst = std::max(worst, max_abs(f.values(at)));
      return worst;
    };
  };
  SufficiencyReport rep;
  rep.nabla_dilation = run_check("sufficiency.nabla-dilation", "horizontal derivatives of the dilation field vanish",
                                 cfg.tolerance, tm, points, cfg.depth, worst_of(nd));
  rep.horizontal_torsion = run_check("sufficiency.horizontal-torsion", "horizontal torsion vanishes", cfg.tolerance,
                                     tm, points, cfg.depth, worst_of(tor));
  rep.conditions_hold = rep.nabla_dilation.pass && rep.horizontal_torsion.pass;
  if (!rep.conditions_hold) {
    rep.implication_holds = true;
    return rep;
  }
  // Second-order field u^a H_a: f^b = -Gamma^b_a u^a.
  std::vector<ScalarField> f;
  for (int b = 0; b < n; ++b) {
    ScalarField s = ScalarField::constant(tm, 0.0);
    for (int a = 0; a < n; ++a) s = s - gamma[b][a] * ScalarField::from_string(tm, un(a));
    f.push_back(s);
  }
  const SodeConnection sode = sode_projector(tm, n, f);
  std::vector<ScalarField> diffs;
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) diffs.push_back(sode.upsilon[b][a] - gamma[b][a]);
  }
  rep.coincide = run_check("sufficiency.coincide", "connection of the induced second-order field", cfg.tolerance, tm,
                           points, cfg.depth, [&](const At& at) {
                             double worst = 0.0;
                             for (const auto& d : diffs) worst = std::max(worst, std::abs(d.value(at)));
                             return worst;
                           });
  rep.spray = homogeneity_record("sufficiency.spray", "induced second-order field is a spray", tm, n, f, 2.0, cfg);
  rep.implication_holds = rep.coincide->pass && rep.spray->pass;
  return rep;
}

}  // namespace ehrcov
