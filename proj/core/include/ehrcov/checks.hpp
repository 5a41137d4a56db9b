#pragma once

// Sampled-point verification records.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ehrcov/geometry.hpp"

namespace ehrcov {

struct SampleConfig {
  int samples = 20;
  std::uint64_t seed = 42;
  int depth = 3;
  double tolerance = 1e-8;

  /// Throws std::invalid_argument unless samples >= 1, tolerance > 0, depth >= 1.
  void validate() const;
};

struct CheckRecord {
  std::string id;
  std::string paper_ref;
  double max_dev = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::vector<double> worst_point;
  /// Set when the check could not be evaluated (the exception text).
  std::string error;
};

using Residual = std::function<double(const At&)>;

/// Evaluates `residual` at every point (a fresh At per point, budget `depth`)
/// and records the largest value. NaN counts as +inf; an exception turns the
/// record into a failure carrying the message.
CheckRecord run_check(std::string id, std::string paper_ref, double threshold, const SpacePtr& space,
                      const std::vector<Point>& points, int depth, const Residual& residual);

struct CheckSpec {
  std::string id;
  std::string paper_ref;
  double threshold = 0.0;
};

/// Several checks sharing one At per point; `residuals` returns one value per spec.
std::vector<CheckRecord> run_checks(const std::vector<CheckSpec>& specs, const SpacePtr& space,
                                    const std::vector<Point>& points, int depth,
                                    const std::function<std::vector<double>(const At&)>& residuals);

/// Record for a check that was evaluated elsewhere.
CheckRecord make_record(std::string id, std::string paper_ref, double max_dev, double threshold,
                        std::vector<double> worst_point = {});

bool all_pass(const std::vector<CheckRecord>& records);
int count_failed(const std::vector<CheckRecord>& records);

/// Max over the frame of |v - w| for component vectors at value level.
double value_diff(const Components& a, const Components& b);
double value_norm(const Components& a);

}  // namespace ehrcov
