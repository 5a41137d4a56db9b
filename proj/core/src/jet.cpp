#include "ehrcov/jet.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ehrcov {

namespace {

// Product of x (depth dx) and y (depth dy) truncated to depth k <= min(dx, dy),
// written into out. scratch must hold storage_size(k - 1) + scratch for the
// recursion, i.e. sum_{j<k} storage_size(j).
void mul_into(const double* x, int dx, const double* y, int dy, double* out, int k, int n,
              double* scratch) {
  out[0] = x[0] * y[0];
  if (k == 0) return;
  const std::size_t sk = Jet::storage_size(k - 1, n);
  const std::size_t sx = Jet::storage_size(dx - 1, n);
  const std::size_t sy = Jet::storage_size(dy - 1, n);
  double* next = scratch + sk;
  for (int i = 0; i < n; ++i) {
    double* oi = out + 1 + static_cast<std::size_t>(i) * sk;
    mul_into(x + 1 + static_cast<std::size_t>(i) * sx, dx - 1, y, dy, oi, k - 1, n, next);
    mul_into(x, dx, y + 1 + static_cast<std::size_t>(i) * sy, dy - 1, scratch, k - 1, n, next);
    for (std::size_t j = 0; j < sk; ++j) oi[j] += scratch[j];
  }
}

std::size_t scratch_size(int depth, int n) {
  std::size_t total = 0;
  for (int j = 0; j < depth; ++j) total += Jet::storage_size(j, n);
  return total + 1;
}

// Copies a depth-`from` layout into a depth-`to` layout (to <= from).
void truncate_into(const double* src, int from, double* dst, int to, int n) {
  dst[0] = src[0];
  if (to == 0) return;
  const std::size_t ss = Jet::storage_size(from - 1, n);
  const std::size_t ds = Jet::storage_size(to - 1, n);
  for (int i = 0; i < n; ++i) {
    truncate_into(src + 1 + static_cast<std::size_t>(i) * ss, from - 1,
                  dst + 1 + static_cast<std::size_t>(i) * ds, to - 1, n);
  }
}

void check_compatible(const Jet& a, const Jet& b, const char* op) {
  if (a.depth() != b.depth() || a.nvars() != b.nvars()) {
    throw std::invalid_argument(std::string("jet ") + op + ": operands differ in depth or variable count (" +
                                std::to_string(a.depth()) + "/" + std::to_string(a.nvars()) + " vs " +
                                std::to_string(b.depth()) + "/" + std::to_string(b.nvars()) + ")");
  }
}

}  // namespace

void JetConfig::validate() const {
  if (depth < 0) throw std::invalid_argument("jet depth must be non-negative");
  std::set<std::string> seen;
  for (const auto& v : variables) {
    if (!seen.insert(v).second) throw std::invalid_argument("duplicate jet variable '" + v + "'");
  }
}

std::size_t Jet::storage_size(int depth, int nvars) {
  std::size_t size = 1;
  for (int d = 0; d < depth; ++d) size = 1 + static_cast<std::size_t>(nvars) * size;
  return size;
}

Jet::Jet(double value) : data_{value} {}

Jet::Jet(int depth, int nvars)
    : depth_(depth), nvars_(nvars), data_(storage_size(depth, nvars), 0.0) {}

Jet Jet::constant(double value, int depth, int nvars) {
  Jet j(depth, nvars);
  j.data_[0] = value;
  return j;
}

Jet Jet::variable(double value, int index, int depth, int nvars) {
  if (index < 0 || index >= nvars) throw std::out_of_range("jet variable index out of range");
  Jet j(depth, nvars);
  j.data_[0] = value;
  if (depth > 0) j.block(index)[0] = 1.0;
  return j;
}

Jet Jet::derivative(int i) const {
  if (depth_ == 0) throw std::out_of_range("derivative requested from a depth-0 jet");
  if (i < 0 || i >= nvars_) throw std::out_of_range("jet variable index out of range");
  Jet d(depth_ - 1, nvars_);
  std::copy_n(block(i), sub_size(), d.data_.begin());
  return d;
}

Jet Jet::truncated(int depth) const {
  if (depth > depth_) throw std::out_of_range("cannot truncate a jet to a greater depth");
  if (depth == depth_) return *this;
  Jet t(depth, nvars_);
  truncate_into(data_.data(), depth_, t.data_.data(), depth, nvars_);
  return t;
}

void Jet::set_derivative(int i, const Jet& d) { std::copy(d.data_.begin(), d.data_.end(), block(i)); }

double Jet::extract(std::span<const int> multi_index) const {
  if (static_cast<int>(multi_index.size()) > depth_) {
    throw std::out_of_range("derivative order " + std::to_string(multi_index.size()) +
                            " exceeds jet depth " + std::to_string(depth_));
  }
  std::vector<int> idx(multi_index.begin(), multi_index.end());
  std::sort(idx.begin(), idx.end());
  const double* p = data_.data();
  int d = depth_;
  for (int i : idx) {
    if (i < 0 || i >= nvars_) throw std::out_of_range("jet variable index out of range");
    p = p + 1 + static_cast<std::size_t>(i) * storage_size(d - 1, nvars_);
    --d;
  }
  return p[0];
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.depth_ == 0) {
    data_[0] += o.data_[0];
  } else if (depth_ == 0) {
    const double v = data_[0];
    *this = o;
    data_[0] += v;
  } else {
    check_compatible(*this, o, "+");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& o) { return *this += -o; }

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }
Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

Jet operator-(const Jet& a) {
  Jet r = a;
  for (auto& x : r.data_) x = -x;
  return r;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r = a;
  r += b;
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a;
  r -= b;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.depth_ == 0) {
    Jet r = b;
    for (auto& x : r.data_) x *= a.data_[0];
    return r;
  }
  if (b.depth_ == 0) {
    Jet r = a;
    for (auto& x : r.data_) x *= b.data_[0];
    return r;
  }
  check_compatible(a, b, "*");
  Jet r(a.depth_, a.nvars_);
  std::vector<double> scratch(scratch_size(a.depth_, a.nvars_));
  mul_into(a.data_.data(), a.depth_, b.data_.data(), b.depth_, r.data_.data(), a.depth_, a.nvars_,
           scratch.data());
  return r;
}

Jet recip(const Jet& a) {
  if (a.value() == 0.0) throw DomainError("division", "divisor is zero");
  Jet r(a.depth_, a.nvars_);
  r.data_[0] = 1.0 / a.value();
  if (a.depth_ == 0) return r;
  const Jet inv = recip(a.truncated(a.depth_ - 1));
  const Jet slope = -(inv * inv);
  for (int i = 0; i < a.nvars_; ++i) r.set_derivative(i, slope * a.derivative(i));
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.depth_ == 0) {
    if (b.value() == 0.0) throw DomainError("division", "divisor is zero");
    Jet r = a;
    for (auto& x : r.data_) x /= b.data_[0];
    return r;
  }
  return a * recip(b);
}

Jet Jet::compose(const Jet& a, double value, const Jet& slope) {
  Jet r(a.depth_, a.nvars_);
  r.data_[0] = value;
  for (int i = 0; i < a.nvars_ && a.depth_ > 0; ++i) r.set_derivative(i, slope * a.derivative(i));
  return r;
}

Jet sin(const Jet& a) {
  if (a.depth_ == 0) return Jet(std::sin(a.value()));
  return Jet::compose(a, std::sin(a.value()), cos(a.truncated(a.depth_ - 1)));
}

Jet cos(const Jet& a) {
  if (a.depth_ == 0) return Jet(std::cos(a.value()));
  return Jet::compose(a, std::cos(a.value()), -sin(a.truncated(a.depth_ - 1)));
}

Jet tan(const Jet& a) {
  if (std::cos(a.value()) == 0.0) throw DomainError("tan", "argument is a pole");
  if (a.depth_ == 0) return Jet(std::tan(a.value()));
  const Jet t = tan(a.truncated(a.depth_ - 1));
  return Jet::compose(a, std::tan(a.value()), 1.0 + t * t);
}

Jet exp(const Jet& a) {
  if (a.depth_ == 0) return Jet(std::exp(a.value()));
  return Jet::compose(a, std::exp(a.value()), exp(a.truncated(a.depth_ - 1)));
}

Jet log(const Jet& a) {
  if (!(a.value() > 0.0)) throw DomainError("ln", "argument is not positive");
  if (a.depth_ == 0) return Jet(std::log(a.value()));
  return Jet::compose(a, std::log(a.value()), recip(a.truncated(a.depth_ - 1)));
}

Jet sqrt(const Jet& a) {
  if (a.value() < 0.0 || (a.depth_ > 0 && a.value() == 0.0)) {
    throw DomainError("sqrt", "argument is not positive");
  }
  if (a.depth_ == 0) return Jet(std::sqrt(a.value()));
  return Jet::compose(a, std::sqrt(a.value()), 0.5 * recip(sqrt(a.truncated(a.depth_ - 1))));
}

Jet abs(const Jet& a) {
  if (a.depth_ == 0) return Jet(std::abs(a.value()));
  if (a.value() == 0.0) throw DomainError("abs", "not differentiable at zero");
  return a.value() > 0.0 ? a : -a;
}

Jet pow(const Jet& a, int k) {
  if (k < 0) return recip(pow(a, -k));
  Jet result = Jet::constant(1.0, a.depth_, a.nvars_);
  Jet base = a;
  bool first = true;
  while (k > 0) {
    if (k & 1) {
      result = first ? base : result * base;
      first = false;
    }
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

bool is_zero(const Jet& x) {
  for (double v : x.data()) {
    if (v != 0.0) return false;
  }
  return true;
}

std::vector<Jet> seed(const JetConfig& config, std::span<const double> point) {
  config.validate();
  if (point.size() != config.variables.size()) {
    throw std::invalid_argument("seed: point has " + std::to_string(point.size()) + " coordinates, expected " +
                                std::to_string(config.variables.size()));
  }
  return seed(point, config.depth);
}

std::vector<Jet> seed(std::span<const double> point, int depth) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet> out;
  out.reserve(point.size());
  for (int i = 0; i < n; ++i) out.push_back(Jet::variable(point[i], i, depth, n));
  return out;
}

}  // namespace ehrcov
