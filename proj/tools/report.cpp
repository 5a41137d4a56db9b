#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ehrcov::cli {

Format format_from_string(const std::string& s) {
  if (s == "table") return Format::Table;
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  throw std::invalid_argument("unknown format '" + s + "' (expected table, json or csv)");
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  // Shortest representation that reads back to the same value.
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    if (std::stod(os.str()) == v) return os.str();
  }
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

namespace {

std::string point_text(const std::vector<double>& p, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) out += (i ? sep : "") + format_double(p[i]);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_json(std::ostream& out, const Report& r) {
  nlohmann::ordered_json doc;
  doc["scenario"] = r.scenario;
  doc["config"] = {{"seed", r.config.seed},
                   {"samples", r.config.samples},
                   {"tolerance", r.config.tolerance},
                   {"depth", r.config.depth}};
  doc["summary"] = {{"total", r.total()}, {"passed", r.passed()}, {"failed", r.failed()}};
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : r.records) {
    nlohmann::ordered_json j;
    j["check_id"] = c.id;
    j["paper_ref"] = c.paper_ref;
    j["max_dev"] = std::isfinite(c.max_dev) ? nlohmann::ordered_json(c.max_dev) : nlohmann::ordered_json(nullptr);
    j["threshold"] = c.threshold;
    j["pass"] = c.pass;
    j["worst_point"] = c.worst_point;
    if (!c.error.empty()) j["error"] = c.error;
    checks.push_back(std::move(j));
  }
  doc["checks"] = std::move(checks);
  out << doc.dump(2) << "\n";
}

void write_csv(std::ostream& out, const Report& r) {
  out << "check_id,paper_ref,max_dev,threshold,pass,worst_point\n";
  for (const auto& c : r.records) {
    out << csv_field(c.id) << ',' << csv_field(c.paper_ref) << ',' << format_double(c.max_dev) << ','
        << format_double(c.threshold) << ',' << (c.pass ? "true" : "false") << ','
        << csv_field(point_text(c.worst_point, ";")) << "\n";
  }
}

void write_table(std::ostream& out, const Report& r) {
  out << "scenario " << r.scenario << " (seed " << r.config.seed << ", " << r.config.samples << " samples, tolerance "
      << format_double(r.config.tolerance) << ", depth " << r.config.depth << ")\n";
  std::size_t width = 0;
  for (const auto& c : r.records) width = std::max(width, c.id.size());
  for (const auto& c : r.records) {
    std::ostringstream dev;
    dev << std::setprecision(3) << c.max_dev;
    std::ostringstream thr;
    thr << std::setprecision(3) << c.threshold;
    out << "  " << c.id << ": " << (c.pass ? "pass" : "FAIL") << std::string(width - c.id.size() + 1, ' ')
        << "max_dev " << std::left << std::setw(10) << dev.str() << std::right << " threshold " << std::left
        << std::setw(7) << thr.str() << std::right << "  " << c.paper_ref << "\n";
    if (!c.error.empty()) out << "      error: " << c.error << "\n";
    if (!c.pass && !c.worst_point.empty()) out << "      worst point: (" << point_text(c.worst_point, ", ") << ")\n";
  }
  out << r.total() << " checks, " << r.passed() << " passed, " << r.failed() << " failed\n";
}

}  // namespace

void write_report(std::ostream& out, const Report& report, Format format) {
  switch (format) {
    case Format::Table:
      write_table(out, report);
      break;
    case Format::Json:
      write_json(out, report);
      break;
    case Format::Csv:
      write_csv(out, report);
      break;
  }
}

}  // namespace ehrcov::cli
