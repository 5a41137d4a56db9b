#pragma once

// Verification reports and their table/json/csv renderings.

#include <ostream>
#include <string>
#include <vector>

#include "ehrcov/checks.hpp"

namespace ehrcov::cli {

enum class Format { Table, Json, Csv };

/// Throws std::invalid_argument for anything but table, json, csv.
Format format_from_string(const std::string& s);

struct Report {
  std::string scenario;
  SampleConfig config;
  std::vector<CheckRecord> records;

  int total() const { return static_cast<int>(records.size()); }
  int failed() const { return count_failed(records); }
  int passed() const { return total() - failed(); }
};

void write_report(std::ostream& out, const Report& report, Format format);

/// Shortest round-trip text for a double ("inf" for infinity).
std::string format_double(double v);

}  // namespace ehrcov::cli
