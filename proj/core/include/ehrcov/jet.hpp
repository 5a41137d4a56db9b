#pragma once

// Nested truncated-derivative scalars.
//
// A Jet of depth d over n active variables stores a value and, for d > 0,
// one Jet of depth d-1 per variable holding the first partial derivative.
// Storage is a single flat array:
//
//   [ value | d/dx_0 (depth d-1) | d/dx_1 (depth d-1) | ... ]
//
// so a Jet of depth d holds 1 + n + n^2 + ... + n^d doubles.
//
// Mixed partials: the slot reached by d/dx_i d/dx_j and the one reached by
// d/dx_j d/dx_i are computed along different arithmetic paths and can
// differ in the last bit. extract() sorts its multi-index before walking
// the layout, so both orders read the same slot and agree exactly.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehrcov {

/// Raised by Jet functions (and expression evaluation) outside their domain.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& op, const std::string& detail)
      : std::domain_error(op + ": " + detail), op_(op), detail_(detail) {}
  const std::string& op() const noexcept { return op_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string op_;
  std::string detail_;
};

struct JetConfig {
  int depth = 3;
  std::vector<std::string> variables;

  /// Throws std::invalid_argument on negative depth or repeated names.
  void validate() const;
};

class Jet {
 public:
  Jet() = default;
  /// Plain scalar: depth 0, no active variables.
  Jet(double value);  // NOLINT(google-explicit-constructor)

  static Jet constant(double value, int depth, int nvars);
  static Jet variable(double value, int index, int depth, int nvars);

  int depth() const noexcept { return depth_; }
  int nvars() const noexcept { return nvars_; }
  double value() const noexcept { return data_[0]; }

  /// First partial derivative with respect to variable i, a Jet of depth-1.
  Jet derivative(int i) const;
  /// Drops all derivative levels above `depth`.
  Jet truncated(int depth) const;

  /// Raw mixed partial (not a Taylor coefficient). Entries of the
  /// multi-index are variable indices; order is irrelevant.
  double extract(std::span<const int> multi_index) const;
  double extract(std::initializer_list<int> multi_index) const {
    return extract(std::span<const int>(multi_index.begin(), multi_index.size()));
  }

  std::span<const double> data() const noexcept { return data_; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);

  friend Jet operator-(const Jet& a);
  friend Jet operator+(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a, const Jet& b);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

  friend Jet sin(const Jet& a);
  friend Jet cos(const Jet& a);
  friend Jet tan(const Jet& a);
  friend Jet exp(const Jet& a);
  friend Jet log(const Jet& a);
  friend Jet sqrt(const Jet& a);
  friend Jet abs(const Jet& a);
  friend Jet pow(const Jet& a, int k);
  friend Jet recip(const Jet& a);

  static std::size_t storage_size(int depth, int nvars);

 private:
  Jet(int depth, int nvars);

  double* block(int i) { return data_.data() + 1 + static_cast<std::size_t>(i) * sub_size(); }
  const double* block(int i) const {
    return data_.data() + 1 + static_cast<std::size_t>(i) * sub_size();
  }
  std::size_t sub_size() const { return storage_size(depth_ - 1, nvars_); }
  void set_derivative(int i, const Jet& d);
  // Value `value`, derivative blocks slope * d/dx_i(a).
  static Jet compose(const Jet& a, double value, const Jet& slope);

  int depth_ = 0;
  int nvars_ = 0;
  std::vector<double> data_{0.0};
};

inline Jet operator+(const Jet& a, double b) { return a + Jet(b); }
inline Jet operator+(double a, const Jet& b) { return Jet(a) + b; }
inline Jet operator-(const Jet& a, double b) { return a - Jet(b); }
inline Jet operator-(double a, const Jet& b) { return Jet(a) - b; }
inline Jet operator*(const Jet& a, double b) { return a * Jet(b); }
inline Jet operator*(double a, const Jet& b) { return Jet(a) * b; }
inline Jet operator/(const Jet& a, double b) { return a / Jet(b); }
inline Jet operator/(double a, const Jet& b) { return Jet(a) / b; }

/// Seeds one Jet per configured variable at `point`.
std::vector<Jet> seed(const JetConfig& config, std::span<const double> point);
/// Seeds at an explicit depth over point.size() variables.
std::vector<Jet> seed(std::span<const double> point, int depth);

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

inline bool is_zero(double x) { return x == 0.0; }
/// True when the value and every stored derivative are exactly zero.
bool is_zero(const Jet& x);

}  // namespace ehrcov
