#pragma once

// Polynomials with analytic derivatives, used as oracles that do not go
// through the jet kernel or the expression evaluator.

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ehrcov::testing {

class Poly {
 public:
  using Term = std::pair<double, std::vector<int>>;

  Poly() = default;
  Poly(std::vector<std::string> vars, std::vector<Term> terms) : vars_(std::move(vars)), terms_(std::move(terms)) {}

  static Poly zero(std::vector<std::string> vars) { return Poly(std::move(vars), {}); }

  double operator()(const std::vector<double>& p) const {
    double s = 0.0;
    for (const auto& [c, e] : terms_) {
      double t = c;
      for (std::size_t i = 0; i < e.size(); ++i) t *= std::pow(p[i], e[i]);
      s += t;
    }
    return s;
  }

  Poly d(int i) const {
    std::vector<Term> out;
    for (const auto& [c, e] : terms_) {
      if (e[i] == 0) continue;
      auto f = e;
      f[i] -= 1;
      out.emplace_back(c * e[i], f);
    }
    return Poly(vars_, out);
  }

  Poly operator*(double k) const {
    auto t = terms_;
    for (auto& [c, e] : t) c *= k;
    return Poly(vars_, t);
  }

  Poly operator+(const Poly& o) const {
    auto t = terms_;
    t.insert(t.end(), o.terms_.begin(), o.terms_.end());
    return Poly(vars_.empty() ? o.vars_ : vars_, t);
  }

  /// Multiplies by the monomial var_i.
  Poly times_var(int i) const {
    auto t = terms_;
    for (auto& [c, e] : t) e[i] += 1;
    return Poly(vars_, t);
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const auto& [c, e] = terms_[k];
      os << (k ? " + " : "") << "(" << c << ")";
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 1) os << "*" << vars_[i];
        if (e[i] > 1) os << "*" << vars_[i] << "^" << e[i];
      }
    }
    return os.str();
  }

  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<std::string> vars_;
  std::vector<Term> terms_;
};

/// Random polynomial over `vars` using only the variables flagged in `use`,
/// with every monomial of total degree in [min_deg, max_deg].
inline Poly random_poly(const std::vector<std::string>& vars, const std::vector<bool>& use, int min_deg,
                        int max_deg, std::mt19937_64& gen, int nterms = 4) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<int> active;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (use[i]) active.push_back(static_cast<int>(i));
  }
  std::uniform_int_distribution<int> deg(min_deg, max_deg);
  std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
  std::vector<Poly::Term> terms;
  for (int k = 0; k < nterms; ++k) {
    std::vector<int> e(vars.size(), 0);
    const int d = deg(gen);
    for (int j = 0; j < d; ++j) e[active[pick(gen)]] += 1;
    terms.emplace_back(coef(gen), e);
  }
  return Poly(vars, terms);
}

}  // namespace ehrcov::testing
