#include "ehrcov/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ehrcov {

void SampleConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (depth < 1) throw std::invalid_argument("jet depth must be at least 1");
}

CheckRecord run_check(std::string id, std::string paper_ref, double threshold, const SpacePtr& space,
                      const std::vector<Point>& points, int depth, const Residual& residual) {
  CheckRecord rec;
  rec.id = std::move(id);
  rec.paper_ref = std::move(paper_ref);
  rec.threshold = threshold;
  double worst = -1.0;
  for (const auto& p : points) {
    double r = 0.0;
    try {
      const At at(space, p, depth);
      r = residual(at);
    } catch (const std::exception& e) {
      rec.max_dev = std::numeric_limits<double>::infinity();
      rec.worst_point = p.coords;
      rec.error = e.what();
      rec.pass = false;
      return rec;
    }
    if (std::isnan(r)) r = std::numeric_limits<double>::infinity();
    if (r > worst) {
      worst = r;
      rec.worst_point = p.coords;
    }
  }
  rec.max_dev = std::max(worst, 0.0);
  rec.pass = rec.max_dev < threshold;
  return rec;
}

std::vector<CheckRecord> run_checks(const std::vector<CheckSpec>& specs, const SpacePtr& space,
                                    const std::vector<Point>& points, int depth,
                                    const std::function<std::vector<double>(const At&)>& residuals) {
  std::vector<CheckRecord> recs;
  for (const auto& s : specs) {
    CheckRecord r;
    r.id = s.id;
    r.paper_ref = s.paper_ref;
    r.threshold = s.threshold;
    recs.push_back(std::move(r));
  }
  std::vector<double> worst(specs.size(), -1.0);
  for (const auto& p : points) {
    std::vector<double> values;
    try {
      const At at(space, p, depth);
      values = residuals(at);
      if (values.size() != specs.size()) throw std::logic_error("run_checks: residual count mismatch");
    } catch (const std::exception& e) {
      for (auto& r : recs) {
        r.max_dev = std::numeric_limits<double>::infinity();
        r.worst_point = p.coords;
        r.error = e.what();
        r.pass = false;
      }
      return recs;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = std::isnan(values[i]) ? std::numeric_limits<double>::infinity() : values[i];
      if (v > worst[i]) {
        worst[i] = v;
        recs[i].worst_point = p.coords;
      }
    }
  }
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].max_dev = std::max(worst[i], 0.0);
    recs[i].pass = recs[i].max_dev < recs[i].threshold;
  }
  return recs;
}

CheckRecord make_record(std::string id, std::string paper_ref, double max_dev, double threshold,
                        std::vector<double> worst_point) {
  CheckRecord rec;
  rec.id = std::move(id);
  rec.paper_ref = std::move(paper_ref);
  rec.max_dev = std::isnan(max_dev) ? std::numeric_limits<double>::infinity() : max_dev;
  rec.threshold = threshold;
  rec.pass = rec.max_dev < threshold;
  rec.worst_point = std::move(worst_point);
  return rec;
}

bool all_pass(const std::vector<CheckRecord>& records) {
  return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
}

int count_failed(const std::vector<CheckRecord>& records) {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return !r.pass; }));
}

double value_diff(const Components& a, const Components& b) {
  if (a.size() != b.size()) throw std::invalid_argument("value_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i].value() - b[i].value()));
  return m;
}

double value_norm(const Components& a) {
  double m = 0.0;
  for (const auto& x : a) m = std::max(m, std::abs(x.value()));
  return m;
}

}  // namespace ehrcov
