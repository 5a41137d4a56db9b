#include "ehrcov/covderiv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ehrcov {

namespace {

double defect_of(const Endo11& p, const Components& y, const At& at) {
  const auto py = values_of(p.act(at, 0, truncated(y, 0)));
  return max_abs_diff(py, values_of(y));
}

VectorField sum_fields(const std::vector<VectorField>& fields, const SpacePtr& space) {
  if (fields.empty()) return VectorField::zero(space);
  VectorField out = fields[0];
  for (std::size_t i = 1; i < fields.size(); ++i) out = out + fields[i];
  return out;
}

DerivRule glued_rule(std::vector<GluePart> parts, SpacePtr space) {
  return [parts = std::move(parts), space](const VectorField& x, const VectorField& y) {
    std::vector<VectorField> terms;
    terms.reserve(parts.size());
    for (const auto& p : parts) terms.push_back(p.extended(x, p.projector(y)));
    return sum_fields(terms, space);
  };
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Extension:
      return "extension";
    case Provenance::Glued:
      return "glued";
    case Provenance::PairedEndomorphisms:
      return "paired-endomorphisms";
    case Provenance::NFoldSplit:
      return "n-fold-split";
    case Provenance::EqualRankTotal:
      return "equal-rank-total";
    case Provenance::MultipleRankTotal:
      return "multiple-rank-total";
    case Provenance::Custom:
      return "custom";
  }
  return "?";
}

CovDeriv::CovDeriv(SpacePtr space, DerivRule rule, Provenance provenance, std::string name)
    : space_(std::move(space)), rule_(std::move(rule)), provenance_(provenance), name_(std::move(name)) {}

VectorField CovDeriv::operator()(const VectorField& x, const VectorField& y) const {
  const VectorField out = rule_(x, y);
  return VectorField(space_, "nabla_" + x.name() + "(" + y.name() + ")",
                     [out](const At& at, int d) { return out.eval(at, d); });
}

VectorField require_member(const Endo11& p, const VectorField& y, const std::string& where) {
  return VectorField(y.space(), y.name(), [p, y, where](const At& at, int d) {
    const Components& v = y.eval(at, d);
    const double defect = defect_of(p, v, at);
    if (!(defect < kMembershipTolerance)) {
      std::ostringstream os;
      os << where << ": '" << y.name() << "' is not in the image of " << p.name() << " (defect " << defect << ")";
      throw MembershipError(os.str());
    }
    return v;
  });
}

DerivRule extend_to_all_directions(const SubmoduleDeriv& d) {
  return [d](const VectorField& x, const VectorField& y) {
    const VectorField ym = require_member(d.projector, y, d.name);
    const VectorField px = d.projector(x);
    return d.rule(px, ym) + d.projector(lie_bracket(x - px, ym));
  };
}

CovDeriv glue(SpacePtr space, std::vector<GluePart> parts, Provenance provenance, std::string name,
              const SampleConfig& cfg) {
  if (parts.empty()) throw std::invalid_argument("glue: no parts");
  const int m = space->ambient_dim();
  for (const auto& pt : space->sample(cfg.samples, cfg.seed)) {
    const At at(space, pt, cfg.depth);
    std::vector<std::vector<double>> mats;
    std::vector<double> sum(static_cast<std::size_t>(m * m), 0.0);
    for (const auto& p : parts) {
      mats.push_back(values_of(p.projector.matrix(at, 0)));
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += mats.back()[k];
    }
    double worst = 0.0;
    if (!space->embedded()) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          worst = std::max(worst, std::abs(sum[static_cast<std::size_t>(i * m + j)] - (i == j ? 1.0 : 0.0)));
        }
      }
    } else {
      // Identity on the tangent space: the sum fixes every image and has trace dim.
      double trace = 0.0;
      for (int i = 0; i < m; ++i) trace += sum[static_cast<std::size_t>(i * m + i)];
      worst = std::abs(trace - space->dim());
      for (const auto& pb : mats) {
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) {
            double v = 0.0;
            for (int k = 0; k < m; ++k) v += sum[static_cast<std::size_t>(i * m + k)] * pb[static_cast<std::size_t>(k * m + j)];
            worst = std::max(worst, std::abs(v - pb[static_cast<std::size_t>(i * m + j)]));
          }
        }
      }
    }
    if (!(worst < kIdentityTolerance)) {
      std::ostringstream os;
      os << "glue: projectors do not sum to the identity (deviation " << worst << ")";
      throw std::invalid_argument(os.str());
    }
  }
  return CovDeriv(space, glued_rule(std::move(parts), space), provenance, std::move(name));
}

std::pair<SubmoduleDeriv, std::vector<SubmoduleDeriv>> nfold_derivatives(const SplitStructure& s) {
  const Endo11 t = s.to_k_total();
  const Endo11 f = s.from_k_total();
  const Endo11 pk = s.p_k;
  SubmoduleDeriv k{pk,
                   [t, f, pk](const VectorField& x, const VectorField& y) {
                     const VectorField xm = require_member(pk, x, "K derivation");
                     const VectorField ym = require_member(pk, y, "K derivation");
                     return t(lie_bracket(xm, f(ym)));
                   },
                   "K"};
  std::vector<SubmoduleDeriv> blocks;
  for (int a = 0; a < s.n_blocks(); ++a) {
    const Endo11 ta = s.to_k(a);
    const Endo11 fa = s.from_k(a);
    const Endo11 pa = s.p_blocks[a];
    const std::string name = s.blocks[a].name();
    blocks.push_back(SubmoduleDeriv{pa,
                                    [ta, fa, pa, name](const VectorField& x, const VectorField& y) {
                                      const VectorField xm = require_member(pa, x, name + " derivation");
                                      const VectorField ym = require_member(pa, y, name + " derivation");
                                      return fa(lie_bracket(xm, ta(ym)));
                                    },
                                    name});
  }
  return {k, blocks};
}

std::pair<SubmoduleDeriv, SubmoduleDeriv> pair_derivatives(const SplitStructure& s) {
  if (s.n_blocks() != 1) {
    throw ConnectionError("pair_derivatives needs a single block, got " + std::to_string(s.n_blocks()));
  }
  auto [k, blocks] = nfold_derivatives(s);
  return {k, blocks[0]};
}

std::vector<GluePart> split_parts(const SplitStructure& s) {
  auto [k, blocks] = nfold_derivatives(s);
  std::vector<GluePart> parts;
  parts.push_back(GluePart{k.projector, extend_to_all_directions(k)});
  for (const auto& b : blocks) parts.push_back(GluePart{b.projector, extend_to_all_directions(b)});
  return parts;
}

CovDeriv total_equal_rank(const SplitStructure& s, const SampleConfig& cfg) {
  if (s.n_blocks() != 1) {
    throw ConnectionError("equal-rank derivative needs dim V = dim H (one block), got " +
                          std::to_string(s.n_blocks()) + " blocks");
  }
  return glue(s.conn.space, split_parts(s), Provenance::EqualRankTotal, "nabla", cfg);
}

CovDeriv total_multiple_rank(const SplitStructure& s, const SampleConfig& cfg) {
  return glue(s.conn.space, split_parts(s), Provenance::MultipleRankTotal, "nabla", cfg);
}

VectorField torsion(const CovDeriv& nabla, const VectorField& x, const VectorField& y) {
  return (nabla(x, y) - nabla(y, x) - lie_bracket(x, y)).renamed("T(" + x.name() + "," + y.name() + ")");
}

VectorField ehresmann_curvature(const EhresmannConnection& conn, const VectorField& x, const VectorField& y) {
  return conn.pv(lie_bracket(conn.ph(x), conn.ph(y))).renamed("R(" + x.name() + "," + y.name() + ")");
}

VectorField nabla_of_endo(const CovDeriv& nabla, const Endo11& t, const VectorField& x, const VectorField& y) {
  return (nabla(x, t(y)) - t(nabla(x, y))).renamed("(nabla_" + x.name() + " " + t.name() + ")(" + y.name() + ")");
}

DerivRule add_tensorial_leak(DerivRule rule, CovectorField omega, VectorField w) {
  return [rule = std::move(rule), omega = std::move(omega), w = std::move(w)](const VectorField& x,
                                                                               const VectorField& y) {
    return rule(x, y) + (pairing(omega, x) * pairing(omega, y)) * w;
  };
}

ParallelProjectorReport check_parallel_projector(const std::vector<GluePart>& parts, int b, const Frame& frame,
                                                 const SampleConfig& cfg, std::string id_prefix) {
  if (b < 0 || b >= static_cast<int>(parts.size())) throw std::out_of_range("check_parallel_projector: bad block index");
  const SpacePtr space = frame[0].space();
  const auto points = space->sample(cfg.samples, cfg.seed);
  const DerivRule nabla = glued_rule(parts, space);
  const Endo11& pb = parts[b].projector;
  std::vector<VectorField> parallel;
  std::vector<std::pair<VectorField, VectorField>> closed;  // (value, its projection)
  for (const auto& x : frame.fields()) {
    for (const auto& y : frame.fields()) {
      parallel.push_back(nabla(x, pb(y)) - pb(nabla(x, y)));
      const VectorField z = parts[b].extended(pb(x), pb(y));
      closed.emplace_back(z, pb(z));
    }
  }
  ParallelProjectorReport rep;
  rep.parallel = run_check(id_prefix + ".parallel", "parallel projector: (nabla_X P)(Y) = 0", cfg.tolerance, space,
                           points, cfg.depth, [&](const At& at) {
                             double worst = 0.0;
                             for (const auto& f : parallel) worst = std::max(worst, max_abs(f.values(at)));
                             return worst;
                           });
  rep.closed = run_check(id_prefix + ".closed", "parallel projector: derivation preserves its distribution",
                         cfg.tolerance, space, points, cfg.depth, [&](const At& at) {
                           double worst = 0.0;
                           for (const auto& [z, pz] : closed) {
                             worst = std::max(worst, max_abs_diff(z.values(at), pz.values(at)));
                           }
                           return worst;
                         });
  rep.agree = rep.parallel.pass == rep.closed.pass;
  return rep;
}

std::vector<CheckRecord> axiom_suite(const CovDeriv& nabla, const Frame& frame, const std::vector<ScalarField>& functions,
                                     const SampleConfig& cfg, const std::string& prefix) {
  const SpacePtr space = nabla.space();
  const auto points = space->sample(cfg.samples, cfg.seed);
  const int r = frame.rank();
  std::vector<VectorField> linear, leibniz, add_dir, add_arg;
  for (int i = 0; i < r; ++i) {
    const VectorField& x = frame[i];
    const VectorField& x2 = frame[(i + 1) % r];
    for (int j = 0; j < r; ++j) {
      const VectorField& y = frame[j];
      const VectorField& y2 = frame[(j + 1) % r];
      const VectorField nxy = nabla(x, y);
      for (const auto& f : functions) {
        linear.push_back(nabla(f * x, y) - f * nxy);
        leibniz.push_back(nabla(x, f * y) - derivative_along(x, f) * y - f * nxy);
      }
      add_dir.push_back(nabla(x + x2, y) - nxy - nabla(x2, y));
      add_arg.push_back(nabla(x, y + y2) - nxy - nabla(x, y2));
    }
  }
  const std::vector<CheckSpec> specs{
      {prefix + ".function-linear", "covariant derivative: nabla_{fX}Y = f nabla_X Y", cfg.tolerance},
      {prefix + ".leibniz", "covariant derivative: nabla_X(fY) = X(f)Y + f nabla_X Y", cfg.tolerance},
      {prefix + ".additive-direction", "covariant derivative: additive in X", cfg.tolerance},
      {prefix + ".additive-argument", "covariant derivative: additive in Y", cfg.tolerance},
  };
  return run_checks(specs, space, points, cfg.depth, [&](const At& at) {
    std::vector<double> worst(4, 0.0);
    const std::vector<const std::vector<VectorField>*> groups{&linear, &leibniz, &add_dir, &add_arg};
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (const auto& f : *groups[g]) worst[g] = std::max(worst[g], max_abs(f.values(at)));
    }
    return worst;
  });
}

std::vector<CheckRecord> torsion_suite(const CovDeriv& nabla, const Frame& frame,
                                       const std::vector<ScalarField>& functions, const SampleConfig& cfg,
                                       const std::string& prefix) {
  const SpacePtr space = nabla.space();
  const auto points = space->sample(cfg.samples, cfg.seed);
  std::vector<VectorField> antisym, linear;
  for (const auto& x : frame.fields()) {
    for (const auto& y : frame.fields()) {
      const VectorField txy = torsion(nabla, x, y);
      antisym.push_back(txy + torsion(nabla, y, x));
      for (const auto& f : functions) {
        linear.push_back(torsion(nabla, f * x, y) - f * txy);
        linear.push_back(torsion(nabla, x, f * y) - f * txy);
      }
    }
  }
  const std::vector<CheckSpec> specs{
      {prefix + ".antisymmetric", "torsion: T(X,Y) = -T(Y,X)", cfg.tolerance},
      {prefix + ".function-linear", "torsion: tensorial in both slots", cfg.tolerance},
  };
  return run_checks(specs, space, points, cfg.depth, [&](const At& at) {
    std::vector<double> worst(2, 0.0);
    for (const auto& f : antisym) worst[0] = std::max(worst[0], max_abs(f.values(at)));
    for (const auto& f : linear) worst[1] = std::max(worst[1], max_abs(f.values(at)));
    return worst;
  });
}

}  // namespace ehrcov
