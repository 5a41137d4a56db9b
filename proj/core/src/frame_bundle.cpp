#include <algorithm>
#include <cstdlib>
#include <set>
#include <string>

#include "ehrcov/scenarios.hpp"

namespace ehrcov {

namespace {

using IntMatrix = std::vector<std::vector<int>>;

// sigma[j] = image of j (0-based) under the cycle.
std::vector<int> cycle_map(int n, const std::vector<int>& cycle) {
  if (n < 1) throw std::invalid_argument("frame bundle dimension must be at least 1");
  if (static_cast<int>(cycle.size()) != n) {
    throw std::invalid_argument("cycle must list all of 1.." + std::to_string(n) + " exactly once");
  }
  std::set<int> seen(cycle.begin(), cycle.end());
  if (static_cast<int>(seen.size()) != n || *seen.begin() != 1 || *seen.rbegin() != n) {
    throw std::invalid_argument("cycle must list all of 1.." + std::to_string(n) + " exactly once");
  }
  std::vector<int> sigma(n);
  for (int i = 0; i < n; ++i) sigma[cycle[i] - 1] = cycle[(i + 1) % n] - 1;
  return sigma;
}

// A e_j = e_sigma(j)
IntMatrix permutation_matrix(const std::vector<int>& sigma) {
  const int n = static_cast<int>(sigma.size());
  IntMatrix a(n, std::vector<int>(n, 0));
  for (int j = 0; j < n; ++j) a[sigma[j]][j] = 1;
  return a;
}

IntMatrix multiply(const IntMatrix& a, const IntMatrix& b) {
  const std::size_t n = a.size();
  IntMatrix c(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

std::vector<long long> flatten(const IntMatrix& m) {
  std::vector<long long> out;
  for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
  return out;
}

IntMatrix unflatten(const std::vector<int>& flat, int n) {
  IntMatrix m(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m[i][j] = flat.at(static_cast<std::size_t>(i * n + j));
  }
  return m;
}

// Exact rank by fraction-free (Bareiss) elimination.
int integer_rank(std::vector<std::vector<long long>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  std::size_t rank = 0;
  long long prev = 1;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t p = rank;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      for (std::size_t k = c + 1; k < cols; ++k) {
        rows[r][k] = (rows[rank][c] * rows[r][k] - rows[r][c] * rows[rank][k]) / prev;
      }
      rows[r][c] = 0;
    }
    prev = rows[rank][c];
    ++rank;
  }
  return static_cast<int>(rank);
}

std::string xn(int a) { return "x" + std::to_string(a + 1); }
// w^a_B: component a of the B-th frame vector.
std::string wn(int a, int b) { return "w" + std::to_string(a + 1) + "_" + std::to_string(b + 1); }
std::string hn(int a) { return "H" + std::to_string(a + 1); }
std::string vn(int block, int b) { return "V" + std::to_string(block + 1) + "_" + std::to_string(b + 1); }

}  // namespace

SubspaceBasis cycle_decomposition(int n, const std::vector<int>& cycle) {
  const auto sigma = cycle_map(n, cycle);
  // A single n-cycle: the orbit of 0 must visit every index.
  int j = 0;
  for (int step = 1; step < n; ++step) {
    j = sigma[j];
    if (j == 0) throw std::invalid_argument("permutation is not a single " + std::to_string(n) + "-cycle");
  }
  const IntMatrix a = permutation_matrix(sigma);
  SubspaceBasis out{n, cycle, {}};
  for (int k = 0; k < n; ++k) {
    // Orbit of E_{1k} under powers of A, sorted by the row of its entry.
    IntMatrix m(n, std::vector<int>(n, 0));
    m[0][k] = 1;
    std::vector<IntMatrix> orbit;
    for (int p = 0; p < n; ++p) {
      orbit.push_back(m);
      m = multiply(a, m);
    }
    std::sort(orbit.begin(), orbit.end(), [k](const IntMatrix& l, const IntMatrix& r) {
      const auto row = [k](const IntMatrix& x) {
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (x[i][k] != 0) return i;
        }
        return x.size();
      };
      return row(l) < row(r);
    });
    std::vector<std::vector<int>> flat;
    for (const auto& o : orbit) {
      std::vector<int> f;
      for (const auto& row : o) f.insert(f.end(), row.begin(), row.end());
      flat.push_back(std::move(f));
    }
    out.bases.push_back(std::move(flat));
  }
  return out;
}

DecompositionCheck check_decomposition(const SubspaceBasis& basis) {
  const int n = basis.n;
  const IntMatrix a = permutation_matrix(cycle_map(n, basis.cycle));
  DecompositionCheck out;
  out.columns = true;
  out.invariant = true;
  std::vector<std::vector<long long>> all;
  for (int k = 0; k < n; ++k) {
    std::vector<std::vector<long long>> rows;
    for (const auto& m : basis.bases[k]) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (j != k && m[i * n + j] != 0) out.columns = false;
        }
      }
      rows.push_back(flatten(unflatten(m, n)));
      all.push_back(rows.back());
    }
    const int r = integer_rank(rows);
    for (const auto& m : basis.bases[k]) {
      auto extended = rows;
      extended.push_back(flatten(multiply(a, unflatten(m, n))));
      if (integer_rank(extended) != r) out.invariant = false;
    }
  }
  out.rank = integer_rank(all);
  out.direct_sum = out.rank == n * n;
  return out;
}

std::vector<std::string> default_frame_gamma() {
  // Gamma^k_{ij} at index k*4 + i*2 + j
  std::vector<std::string> g(8, "0");
  g[0 * 4 + 0 * 2 + 0] = "0.5*x2";
  g[0 * 4 + 1 * 2 + 0] = "x1*x2";
  g[1 * 4 + 0 * 2 + 1] = "x1";
  g[1 * 4 + 1 * 2 + 1] = "sin(x1)";
  return g;
}

Scenario frame_bundle(int n, const std::vector<int>& cycle, const std::vector<std::string>& gamma,
                      const SampleConfig& cfg) {
  const SubspaceBasis basis = cycle_decomposition(n, cycle);
  if (gamma.size() != static_cast<std::size_t>(n * n * n)) {
    throw std::invalid_argument("linear connection needs n^3 = " + std::to_string(n * n * n) + " coefficients");
  }
  std::vector<std::string> coords;
  for (int i = 0; i < n; ++i) coords.push_back(xn(i));
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) coords.push_back(wn(a, b));
  }
  SpaceOptions opts;
  for (int i = 0; i < n; ++i) opts.base_coords.push_back(i);
  // Frame components away from zero keep the sampled frames nondegenerate.
  opts.intervals.assign(n, Interval{-1.0, 1.0});
  opts.intervals.resize(n + n * n, Interval{0.5, 1.5});
  const SpacePtr space = make_space("frame-bundle", coords, opts);
  const auto w_index = [n](int a, int b) { return n + b * n + a; };
  const auto w = [&](int a, int b) { return ScalarField::from_string(space, wn(a, b)); };

  const std::set<std::string> base(coords.begin(), coords.begin() + n);
  std::vector<ScalarField> g;  // g[k*n*n + i*n + j] = Gamma^k_{ij}
  for (const auto& text : gamma) {
    for (const auto& v : free_vars(parse(text))) {
      if (!base.count(v)) throw std::invalid_argument("connection coefficient '" + text + "' uses '" + v + "'");
    }
    g.push_back(ScalarField::from_string(space, text));
  }
  const auto G = [&](int k, int i, int j) { return g[k * n * n + i * n + j]; };

  Scenario sc;
  sc.name = "frame-bundle";
  sc.description = "frame bundle of a linear connection with an n-fold vertical split";
  sc.section = "frame bundle";
  sc.space = space;

  // H_i = d/dx^i - Gamma^k_{ij} w^j_B d/dw^k_B
  std::vector<VectorField> hs;
  for (int i = 0; i < n; ++i) {
    std::vector<ScalarField> comps(n + n * n, ScalarField::constant(space, 0.0));
    comps[i] = ScalarField::constant(space, 1.0);
    for (int b = 0; b < n; ++b) {
      for (int k = 0; k < n; ++k) {
        ScalarField c = ScalarField::constant(space, 0.0);
        for (int j = 0; j < n; ++j) c = c - G(k, i, j) * w(j, b);
        comps[w_index(k, b)] = c;
      }
    }
    hs.push_back(VectorField::from_scalars(space, hn(i), std::move(comps)));
  }
  // Vertical block A from the subspace basis: a matrix M gives sum M[a][B] d/dw^a_B.
  std::vector<Frame> blocks;
  std::vector<std::vector<VectorField>> vs(n);
  for (int block = 0; block < n; ++block) {
    for (std::size_t e = 0; e < basis.bases[block].size(); ++e) {
      const auto& m = basis.bases[block][e];
      std::vector<ScalarField> comps(n + n * n, ScalarField::constant(space, 0.0));
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (m[a * n + b] != 0) comps[w_index(a, b)] = ScalarField::constant(space, m[a * n + b]);
        }
      }
      vs[block].push_back(VectorField::from_scalars(space, vn(block, static_cast<int>(e)), std::move(comps)));
    }
    blocks.emplace_back("L" + std::to_string(block + 1), vs[block]);
  }
  for (int i = 0; i < n; ++i) sc.fields.emplace_back(hn(i), hs[i]);
  for (int block = 0; block < n; ++block) {
    for (int b = 0; b < n; ++b) sc.fields.emplace_back(vn(block, b), vs[block][b]);
  }
  sc.frame_names = sc.field_names();

  const std::string tag = "frame bundle: ";
  for (int i = 0; i < n; ++i) {
    for (int b = 0; b < n; ++b) {
      ExpectedRow hh{ExpectedOp::Nabla, {hn(i), hn(b)}, {}, tag + "horizontal derivative of horizontal fields"};
      for (int k = 0; k < n; ++k) hh.terms.emplace_back(hn(k), G(k, i, b));
      sc.expected.push_back(std::move(hh));
      for (int block = 0; block < n; ++block) {
        ExpectedRow hv{ExpectedOp::Nabla, {hn(i), vn(block, b)}, {}, tag + "horizontal derivative of vertical fields"};
        for (int k = 0; k < n; ++k) hv.terms.emplace_back(vn(block, k), G(k, i, b));
        sc.expected.push_back(std::move(hv));
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      ExpectedRow tor{ExpectedOp::TorsionHorizontal, {hn(i), hn(j)}, {}, tag + "horizontal torsion"};
      for (int k = 0; k < n; ++k) tor.terms.emplace_back(hn(k), G(k, i, j) - G(k, j, i));
      sc.expected.push_back(std::move(tor));
      ExpectedRow cur{ExpectedOp::Curvature, {hn(i), hn(j)}, {}, tag + "curvature of the horizontal distribution"};
      for (int block = 0; block < n; ++block) {
        for (int k = 0; k < n; ++k) {
          ScalarField r = ScalarField::constant(space, 0.0);
          for (int l = 0; l < n; ++l) {
            r = r + (partial(G(k, i, l), j) - partial(G(k, j, l), i)) * w(l, block);
            for (int m = 0; m < n; ++m) {
              r = r + (G(k, j, l) * G(l, i, m) - G(k, i, l) * G(l, j, m)) * w(m, block);
            }
          }
          cur.terms.emplace_back(vn(block, k), r);
        }
      }
      sc.expected.push_back(std::move(cur));
    }
  }
  for (int i = 0; i < n; ++i) {
    sc.expected.push_back(
        {ExpectedOp::Coframe, {hn(i)}, {{xn(i), ScalarField::constant(space, 1.0)}}, tag + "dual coframe"});
  }
  for (int block = 0; block < n; ++block) {
    for (int k = 0; k < n; ++k) {
      ExpectedRow v{ExpectedOp::Coframe, {vn(block, k)}, {{wn(k, block), ScalarField::constant(space, 1.0)}},
                    tag + "dual coframe, connection forms"};
      for (int i = 0; i < n; ++i) {
        ScalarField c = ScalarField::constant(space, 0.0);
        for (int j = 0; j < n; ++j) c = c + G(k, i, j) * w(j, block);
        v.terms.emplace_back(xn(i), c);
      }
      sc.expected.push_back(std::move(v));
    }
  }

  sc.extra_checks.push_back([basis](const Scenario&, const SampleConfig&) {
    const DecompositionCheck d = check_decomposition(basis);
    return std::vector<CheckRecord>{
        make_record("frame.subspace-columns", "cycle subspaces are column spaces", d.columns ? 0.0 : 1.0, 0.5),
        make_record("frame.subspace-invariant", "cycle subspaces are invariant", d.invariant ? 0.0 : 1.0, 0.5),
        make_record("frame.direct-sum", "cycle subspaces span all matrices", d.direct_sum ? 0.0 : 1.0, 0.5),
    };
  });

  finish_scenario(sc, Frame("H", hs), blocks, Orientation::KHorizontal, std::nullopt, cfg);
  return sc;
}

}  // namespace ehrcov
