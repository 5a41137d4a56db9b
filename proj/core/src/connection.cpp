#include "ehrcov/connection.hpp"

#include <algorithm>
#include <cmath>

#include "ehrcov/linalg.hpp"

namespace ehrcov {

namespace {

constexpr double kMembershipTolerance = 1e-9;

using Mat = std::vector<double>;
using Vec = std::vector<double>;

Mat value_matrix(const Endo11& t, const At& at) { return values_of(t.matrix(at, 0)); }

Vec mat_vec(const Mat& a, const Vec& v) {
  const std::size_t m = v.size();
  Vec out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i] += a[i * m + j] * v[j];
  }
  return out;
}

double norm_inf(const Vec& v) { return max_abs(v); }

Vec diff(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

std::vector<Vec> frame_values(const Frame& f, const At& at) {
  std::vector<Vec> out;
  for (const auto& v : f.fields()) out.push_back(v.values(at));
  return out;
}

}  // namespace

EhresmannConnection build_connection(SpacePtr space, Frame vertical, Frame horizontal, const SampleConfig& cfg) {
  if (vertical.rank() + horizontal.rank() != space->dim()) {
    throw ConnectionError("rank mismatch: vertical rank " + std::to_string(vertical.rank()) + " + horizontal rank " +
                          std::to_string(horizontal.rank()) + " != dimension " + std::to_string(space->dim()) +
                          " of '" + space->name() + "'");
  }
  if (vertical.rank() == 0 || horizontal.rank() == 0) throw ConnectionError("vertical and horizontal frames must be nonempty");
  for (const auto* f : {&vertical, &horizontal}) {
    for (const auto& v : f->fields()) {
      if (v.space().get() != space.get()) throw ConnectionError("field '" + v.name() + "' lives on another space");
    }
  }
  DualCoframe coframe({vertical, horizontal});
  const int v = vertical.rank();
  EhresmannConnection conn{space,
                           vertical,
                           horizontal,
                           coframe,
                           coframe.projector(0, v, "P_V"),
                           coframe.projector(v, coframe.rank(), "P_H")};
  // Degenerate frames surface as SingularFrameError with the point.
  for (const auto& p : space->sample(cfg.samples, cfg.seed)) {
    const At at(space, p, cfg.depth);
    coframe.inverse(at, 0);
  }
  for (const auto& rec : validate_connection(conn, cfg)) {
    if (!rec.pass) {
      throw ConnectionError("connection check '" + rec.id + "' failed (max deviation " + std::to_string(rec.max_dev) +
                            (rec.error.empty() ? "" : ": " + rec.error) + ")");
    }
  }
  return conn;
}

std::vector<CheckRecord> validate_connection(const EhresmannConnection& conn, const SampleConfig& cfg,
                                             double threshold) {
  const auto points = conn.space->sample(cfg.samples, cfg.seed);
  const auto& space = conn.space;
  const int m = space->ambient_dim();
  std::vector<CheckRecord> out;

  const auto over_frame = [&](const At& at, const std::function<double(const Vec&)>& fn) {
    double worst = 0.0;
    for (const auto* f : {&conn.vertical, &conn.horizontal}) {
      for (const auto& e : frame_values(*f, at)) worst = std::max(worst, fn(e));
    }
    return worst;
  };

  out.push_back(run_check("connection.projector-sum", "Ehresmann connection: P_V + P_H = I", threshold, space, points,
                          cfg.depth, [&](const At& at) {
                            const Mat pv = value_matrix(conn.pv, at);
                            const Mat ph = value_matrix(conn.ph, at);
                            double worst = 0.0;
                            for (int i = 0; i < m; ++i) {
                              for (int j = 0; j < m; ++j) {
                                const std::size_t k = static_cast<std::size_t>(i * m + j);
                                worst = std::max(worst, std::abs(pv[k] + ph[k] - (i == j ? 1.0 : 0.0)));
                              }
                            }
                            // On embedded spaces the identity holds on tangent vectors only.
                            if (space->embedded()) {
                              worst = over_frame(at, [&](const Vec& e) {
                                Vec s = mat_vec(pv, e);
                                const Vec h = mat_vec(ph, e);
                                for (std::size_t i = 0; i < s.size(); ++i) s[i] += h[i];
                                return norm_inf(diff(s, e));
                              });
                            }
                            return worst;
                          }));

  out.push_back(run_check("connection.idempotent", "Ehresmann connection: projectors are idempotent", threshold, space,
                          points, cfg.depth, [&](const At& at) {
                            const Mat pv = value_matrix(conn.pv, at);
                            const Mat ph = value_matrix(conn.ph, at);
                            return over_frame(at, [&](const Vec& e) {
                              return std::max(norm_inf(diff(mat_vec(pv, mat_vec(pv, e)), mat_vec(pv, e))),
                                              norm_inf(diff(mat_vec(ph, mat_vec(ph, e)), mat_vec(ph, e))));
                            });
                          }));

  out.push_back(run_check("connection.complementary", "Ehresmann connection: P_V P_H = 0", threshold, space, points,
                          cfg.depth, [&](const At& at) {
                            const Mat pv = value_matrix(conn.pv, at);
                            const Mat ph = value_matrix(conn.ph, at);
                            return over_frame(at, [&](const Vec& e) {
                              return std::max(norm_inf(mat_vec(pv, mat_vec(ph, e))), norm_inf(mat_vec(ph, mat_vec(pv, e))));
                            });
                          }));

  out.push_back(run_check("connection.vertical-base", "Ehresmann connection: vertical fields project to zero",
                          threshold, space, points, cfg.depth, [&](const At& at) {
                            double worst = 0.0;
                            for (const auto& e : frame_values(conn.vertical, at)) {
                              for (int b : space->base_coords()) worst = std::max(worst, std::abs(e[b]));
                            }
                            return worst;
                          }));

  if (space->embedded()) {
    out.push_back(run_check("connection.tangent", "embedded frames are tangent", threshold, space, points, cfg.depth,
                            [&](const At& at) {
                              double worst = 0.0;
                              for (const auto* f : {&conn.vertical, &conn.horizontal}) {
                                for (const auto& v : f->fields()) worst = std::max(worst, tangency_defect(v, at));
                              }
                              return worst;
                            }));
  }
  return out;
}

std::string to_string(Orientation o) { return o == Orientation::KVertical ? "k-vertical" : "k-horizontal"; }

Frame SplitStructure::combined() const {
  std::vector<Frame> all{k};
  all.insert(all.end(), blocks.begin(), blocks.end());
  return concat(all, "split");
}

SplitStructure canonical_endos(const EhresmannConnection& conn, std::vector<Frame> blocks, Orientation orientation,
                               const std::optional<Pairing>& pairing, const SampleConfig& cfg) {
  const bool kv = orientation == Orientation::KVertical;
  const Frame& k = kv ? conn.vertical : conn.horizontal;
  const Frame& other = kv ? conn.horizontal : conn.vertical;
  const Endo11& p_other = kv ? conn.ph : conn.pv;
  const int r = k.rank();
  const int n = static_cast<int>(blocks.size());
  if (n == 0) throw ConnectionError("a split needs at least one block");
  int total = 0;
  for (const auto& b : blocks) {
    if (b.rank() != r) {
      throw ConnectionError("block '" + b.name() + "' has rank " + std::to_string(b.rank()) + " but K has rank " +
                            std::to_string(r));
    }
    total += b.rank();
  }
  if (total != other.rank()) {
    throw ConnectionError("blocks have total rank " + std::to_string(total) + " but the " +
                          (kv ? std::string("horizontal") : std::string("vertical")) + " side has rank " +
                          std::to_string(other.rank()));
  }

  const auto points = conn.space->sample(cfg.samples, cfg.seed);
  for (const auto& p : points) {
    const At at(conn.space, p, cfg.depth);
    for (const auto& b : blocks) {
      for (const auto& f : b.fields()) {
        const double d = membership_defect(p_other, f, at);
        if (!(d < kMembershipTolerance)) {
          throw ConnectionError("block field '" + f.name() + "' is not in the " +
                                (kv ? std::string("horizontal") : std::string("vertical")) + " distribution (defect " +
                                std::to_string(d) + ")");
        }
      }
    }
  }

  std::vector<Mat> m(static_cast<std::size_t>(n));
  std::vector<Mat> minv(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    Mat id(static_cast<std::size_t>(r * r), 0.0);
    for (int i = 0; i < r; ++i) id[static_cast<std::size_t>(i * r + i)] = 1.0;
    if (pairing) {
      if (static_cast<int>(pairing->size()) != n) throw ConnectionError("pairing needs one matrix per block");
      const auto& rows = (*pairing)[a];
      if (static_cast<int>(rows.size()) != r) throw ConnectionError("pairing matrix has the wrong number of rows");
      Mat mm;
      for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != r) throw ConnectionError("pairing matrix has the wrong number of columns");
        mm.insert(mm.end(), row.begin(), row.end());
      }
      m[a] = mm;
      try {
        minv[a] = invert(mm, r);
      } catch (const SingularMatrixError&) {
        throw ConnectionError("pairing matrix of block " + std::to_string(a + 1) + " is singular");
      }
    } else {
      m[a] = id;
      minv[a] = id;
    }
  }

  std::vector<Frame> frames{k};
  frames.insert(frames.end(), blocks.begin(), blocks.end());
  const DualCoframe coframe(frames);

  SplitStructure out;
  out.conn = conn;
  out.orientation = orientation;
  out.k = k;
  out.blocks = blocks;
  out.p_k = coframe.projector(0, r, "P_K");
  std::vector<Endo11> to_k;
  std::vector<Endo11> from_k;
  for (int a = 0; a < n; ++a) {
    const int base = r * (a + 1);
    out.p_blocks.push_back(coframe.projector(base, base + r, "P_" + blocks[a].name()));
    std::vector<std::pair<CovectorField, VectorField>> into;
    std::vector<std::pair<CovectorField, VectorField>> outof;
    for (int b = 0; b < r; ++b) {
      for (int c = 0; c < r; ++c) {
        const double mbc = m[a][static_cast<std::size_t>(b * r + c)];
        if (mbc != 0.0) into.emplace_back(coframe.covector(base + c), mbc == 1.0 ? k[b] : mbc * k[b]);
        const double icb = minv[a][static_cast<std::size_t>(c * r + b)];
        if (icb != 0.0) outof.emplace_back(coframe.covector(b), icb == 1.0 ? blocks[a][c] : icb * blocks[a][c]);
      }
    }
    const std::string label = std::to_string(a + 1);
    Endo11 t = Endo11::from_terms(conn.space, kv ? "S_" + label : "Q_" + label, std::move(into));
    Endo11 f = Endo11::from_terms(conn.space, kv ? "Q_" + label : "S_" + label, std::move(outof));
    to_k.push_back(t);
    from_k.push_back(f);
  }
  out.s = kv ? to_k : from_k;
  out.q = kv ? from_k : to_k;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Endo11 s_sum = out.s[0];
  Endo11 q_sum = out.q[0];
  for (int a = 1; a < n; ++a) {
    s_sum = s_sum + out.s[a];
    q_sum = q_sum + out.q[a];
  }
  out.s_total = n == 1 ? s_sum.renamed("S") : (scale * s_sum).renamed("S");
  out.q_total = n == 1 ? q_sum.renamed("Q") : (scale * q_sum).renamed("Q");

  for (const auto& rec : validate_split(out, cfg)) {
    if (!rec.pass) {
      throw ConnectionError("split check '" + rec.id + "' failed (max deviation " + std::to_string(rec.max_dev) +
                            (rec.error.empty() ? "" : ": " + rec.error) + ")");
    }
  }
  return out;
}

std::vector<CheckRecord> validate_split(const SplitStructure& s, const SampleConfig& cfg, double threshold) {
  const auto& space = s.conn.space;
  const auto points = space->sample(cfg.samples, cfg.seed);
  const int n = s.n_blocks();
  const int r = s.rank();
  const Frame all = s.combined();
  std::vector<CheckRecord> out;

  struct Values {
    std::vector<Vec> frame;
    Mat pk;
    std::vector<Mat> pa, to, from;
    Mat to_total, from_total;
  };
  const auto load = [&](const At& at) {
    Values v;
    v.frame = frame_values(all, at);
    v.pk = value_matrix(s.p_k, at);
    for (int a = 0; a < n; ++a) {
      v.pa.push_back(value_matrix(s.p_blocks[a], at));
      v.to.push_back(value_matrix(s.to_k(a), at));
      v.from.push_back(value_matrix(s.from_k(a), at));
    }
    v.to_total = value_matrix(s.to_k_total(), at);
    v.from_total = value_matrix(s.from_k_total(), at);
    return v;
  };
  // Index range of block a inside the combined frame; block -1 is K.
  const auto in_block = [r](int idx, int a) { return idx >= r * (a + 1) && idx < r * (a + 2); };

  out.push_back(run_check("split.kernel", "endomorphism kernels contain the other distributions", threshold, space,
                          points, cfg.depth, [&](const At& at) {
                            const Values v = load(at);
                            double worst = 0.0;
                            for (int a = 0; a < n; ++a) {
                              for (int i = 0; i < all.rank(); ++i) {
                                if (!in_block(i, a)) worst = std::max(worst, norm_inf(mat_vec(v.to[a], v.frame[i])));
                                if (i >= r) worst = std::max(worst, norm_inf(mat_vec(v.from[a], v.frame[i])));
                              }
                            }
                            return worst;
                          }));

  out.push_back(run_check("split.image", "endomorphism images lie in K and L_A", threshold, space, points, cfg.depth,
                          [&](const At& at) {
                            const Values v = load(at);
                            double worst = 0.0;
                            for (int a = 0; a < n; ++a) {
                              for (const auto& e : v.frame) {
                                const Vec t = mat_vec(v.to[a], e);
                                const Vec f = mat_vec(v.from[a], e);
                                worst = std::max(worst, norm_inf(diff(mat_vec(v.pk, t), t)));
                                worst = std::max(worst, norm_inf(diff(mat_vec(v.pa[a], f), f)));
                              }
                            }
                            return worst;
                          }));

  out.push_back(run_check("split.to-from", "endomorphism pair composes to P_K", threshold, space, points, cfg.depth,
                          [&](const At& at) {
                            const Values v = load(at);
                            double worst = 0.0;
                            for (int a = 0; a < n; ++a) {
                              for (const auto& e : v.frame) {
                                worst = std::max(worst,
                                                 norm_inf(diff(mat_vec(v.to[a], mat_vec(v.from[a], e)), mat_vec(v.pk, e))));
                              }
                            }
                            return worst;
                          }));

  out.push_back(run_check("split.from-to", "endomorphism pair composes to P_L", threshold, space, points, cfg.depth,
                          [&](const At& at) {
                            const Values v = load(at);
                            double worst = 0.0;
                            for (int a = 0; a < n; ++a) {
                              for (const auto& e : v.frame) {
                                worst = std::max(
                                    worst, norm_inf(diff(mat_vec(v.from[a], mat_vec(v.to[a], e)), mat_vec(v.pa[a], e))));
                              }
                            }
                            return worst;
                          }));

  out.push_back(run_check("split.cross", "pairs of different blocks compose to zero", threshold, space, points,
                          cfg.depth, [&](const At& at) {
                            const Values v = load(at);
                            double worst = 0.0;
                            for (int a = 0; a < n; ++a) {
                              for (int b = 0; b < n; ++b) {
                                if (a == b) continue;
                                for (const auto& e : v.frame) {
                                  worst = std::max(worst, norm_inf(mat_vec(v.to[a], mat_vec(v.from[b], e))));
                                }
                              }
                            }
                            return worst;
                          }));

  out.push_back(run_check("split.aggregate", "normalised aggregate pair composes to P_K", threshold, space, points,
                          cfg.depth, [&](const At& at) {
                            const Values v = load(at);
                            double worst = 0.0;
                            for (const auto& e : v.frame) {
                              worst = std::max(worst,
                                               norm_inf(diff(mat_vec(v.to_total, mat_vec(v.from_total, e)), mat_vec(v.pk, e))));
                            }
                            return worst;
                          }));
  return out;
}

}  // namespace ehrcov
