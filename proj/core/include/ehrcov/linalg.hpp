#pragma once

// Dense square solves generic over the scalar type, so that derivatives
// flow through matrix inverses when the scalar is a Jet. Pivot choice looks
// at value magnitudes only.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ehrcov/jet.hpp"

namespace ehrcov {

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse of the n x n row-major matrix `a` by Gauss-Jordan elimination
/// with partial pivoting.
template <class T>
std::vector<T> invert(std::vector<T> a, int n) {
  if (a.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("invert: matrix is not " + std::to_string(n) + "x" + std::to_string(n));
  }
  const auto at = [n](int r, int c) { return static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c); };
  std::vector<T> inv(a.size(), T(0.0));
  for (int i = 0; i < n; ++i) inv[at(i, i)] = T(1.0);

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(value_of(a[at(col, col)]));
    for (int r = col + 1; r < n; ++r) {
      const double mag = std::abs(value_of(a[at(r, col)]));
      if (mag > best) {
        best = mag;
        pivot = r;
      }
    }
    if (best == 0.0) throw SingularMatrixError("invert: matrix is singular at column " + std::to_string(col));
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a[at(pivot, c)], a[at(col, c)]);
        std::swap(inv[at(pivot, c)], inv[at(col, c)]);
      }
    }
    const T p = a[at(col, col)];
    for (int c = 0; c < n; ++c) {
      a[at(col, c)] = a[at(col, c)] / p;
      inv[at(col, c)] = inv[at(col, c)] / p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const T f = a[at(r, col)];
      if (is_zero(f)) continue;
      for (int c = 0; c < n; ++c) {
        a[at(r, c)] = a[at(r, c)] - f * a[at(col, c)];
        inv[at(r, c)] = inv[at(r, c)] - f * inv[at(col, c)];
      }
    }
  }
  return inv;
}

/// Solves a x = b for a single right-hand side.
template <class T>
std::vector<T> solve(const std::vector<T>& a, const std::vector<T>& b, int n) {
  const std::vector<T> inv = invert(a, n);
  std::vector<T> x(static_cast<std::size_t>(n), T(0.0));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) x[r] = x[r] + inv[static_cast<std::size_t>(r) * n + c] * b[c];
  }
  return x;
}

}  // namespace ehrcov
