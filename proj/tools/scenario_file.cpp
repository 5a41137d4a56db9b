#include "scenario_file.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ehrcov::cli {

namespace {

using Json = nlohmann::ordered_json;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ScenarioFileError(source_ + ": " + (path.empty() ? "" : path + ": ") + what);
  }

  const Json& member(const Json& obj, const std::string& path, const std::string& key) const {
    if (!obj.contains(key)) fail(path, "missing required key '" + key + "'");
    return obj.at(key);
  }

  std::string string(const Json& v, const std::string& path) const {
    if (v.is_number()) {
      std::ostringstream os;
      os.precision(17);
      os << v.get<double>();
      return os.str();
    }
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  std::vector<std::string> strings(const Json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(string(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  double number(const Json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  void object(const Json& v, const std::string& path) const {
    if (!v.is_object()) fail(path, "expected an object");
  }

  void known_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : obj.items()) {
      bool ok = false;
      for (const char* key : keys) ok = ok || k == key;
      if (!ok) fail(path, "unknown key '" + k + "'");
    }
  }

 private:
  std::string source_;
};

void check_expr(const Reader& r, const std::string& text, const std::string& path) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    r.fail(path, e.what());
  }
}

}  // namespace

ScenarioSpec parse_scenario_spec(const std::string& text, const std::string& source) {
  const Reader r(source);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    r.fail("", std::string("invalid JSON: ") + e.what());
  }
  r.object(doc, "$");
  r.known_keys(doc, "$", {"name", "description", "section", "space", "fields", "split", "expected", "metric", "notes"});

  ScenarioSpec spec;
  spec.name = r.string(r.member(doc, "$", "name"), "name");
  if (doc.contains("description")) spec.description = r.string(doc["description"], "description");
  spec.section = doc.contains("section") ? r.string(doc["section"], "section") : "file";

  const Json& space = r.member(doc, "$", "space");
  r.object(space, "space");
  r.known_keys(space, "space", {"coordinates", "base", "intervals", "constraints", "normals", "unit_sphere"});
  spec.coords = r.strings(r.member(space, "space", "coordinates"), "space.coordinates");
  if (spec.coords.empty()) r.fail("space.coordinates", "no coordinates");
  const auto coord_index = [&](const std::string& name, const std::string& path) {
    for (std::size_t i = 0; i < spec.coords.size(); ++i) {
      if (spec.coords[i] == name) return static_cast<int>(i);
    }
    r.fail(path, "unknown coordinate '" + name + "'");
  };
  if (space.contains("base")) {
    const auto base = r.strings(space["base"], "space.base");
    for (std::size_t i = 0; i < base.size(); ++i) {
      spec.space.base_coords.push_back(coord_index(base[i], "space.base[" + std::to_string(i) + "]"));
    }
  }
  spec.space.intervals.assign(spec.coords.size(), Interval{});
  if (space.contains("intervals")) {
    const Json& iv = space["intervals"];
    r.object(iv, "space.intervals");
    for (const auto& [name, range] : iv.items()) {
      const std::string path = "space.intervals." + name;
      if (!range.is_array() || range.size() != 2) r.fail(path, "expected [lo, hi]");
      const Interval in{r.number(range[0], path + "[0]"), r.number(range[1], path + "[1]")};
      if (!(in.lo < in.hi)) r.fail(path, "empty interval");
      spec.space.intervals[coord_index(name, path)] = in;
    }
  }
  if (space.contains("constraints")) {
    spec.space.constraints = r.strings(space["constraints"], "space.constraints");
    for (std::size_t i = 0; i < spec.space.constraints.size(); ++i) {
      check_expr(r, spec.space.constraints[i], "space.constraints[" + std::to_string(i) + "]");
    }
  }
  if (space.contains("normals")) {
    const Json& ns = space["normals"];
    if (!ns.is_array()) r.fail("space.normals", "expected an array of component lists");
    for (std::size_t i = 0; i < ns.size(); ++i) {
      spec.space.normals.push_back(r.strings(ns[i], "space.normals[" + std::to_string(i) + "]"));
    }
  }
  if (space.contains("unit_sphere")) {
    if (!space["unit_sphere"].is_boolean()) r.fail("space.unit_sphere", "expected true or false");
    spec.space.unit_sphere = space["unit_sphere"].get<bool>();
  }

  const Json& fields = r.member(doc, "$", "fields");
  r.object(fields, "fields");
  for (const auto& [name, comps] : fields.items()) {
    const std::string path = "fields." + name;
    auto c = r.strings(comps, path);
    if (c.size() != spec.coords.size()) {
      r.fail(path, "has " + std::to_string(c.size()) + " components, expected " + std::to_string(spec.coords.size()));
    }
    for (std::size_t i = 0; i < c.size(); ++i) check_expr(r, c[i], path + "[" + std::to_string(i) + "]");
    spec.fields.emplace_back(name, std::move(c));
  }
  const auto field_ref = [&](const std::string& name, const std::string& path) {
    if (!fields.contains(name)) r.fail(path, "unknown field '" + name + "'");
    return name;
  };

  const Json& split = r.member(doc, "$", "split");
  r.object(split, "split");
  r.known_keys(split, "split", {"K", "blocks", "orientation", "pairing"});
  const auto k = r.strings(r.member(split, "split", "K"), "split.K");
  for (std::size_t i = 0; i < k.size(); ++i) spec.k.push_back(field_ref(k[i], "split.K[" + std::to_string(i) + "]"));
  const Json& blocks = r.member(split, "split", "blocks");
  if (!blocks.is_array()) r.fail("split.blocks", "expected an array of field-name arrays");
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    const std::string path = "split.blocks[" + std::to_string(a) + "]";
    std::vector<std::string> block;
    const auto names = r.strings(blocks[a], path);
    for (std::size_t i = 0; i < names.size(); ++i) block.push_back(field_ref(names[i], path + "[" + std::to_string(i) + "]"));
    spec.blocks.push_back(std::move(block));
  }
  if (split.contains("orientation")) {
    const std::string o = r.string(split["orientation"], "split.orientation");
    if (o == "k-vertical") {
      spec.orientation = Orientation::KVertical;
    } else if (o == "k-horizontal") {
      spec.orientation = Orientation::KHorizontal;
    } else {
      r.fail("split.orientation", "expected \"k-vertical\" or \"k-horizontal\", got \"" + o + "\"");
    }
  }
  if (split.contains("pairing")) {
    const Json& p = split["pairing"];
    if (!p.is_array()) r.fail("split.pairing", "expected one matrix per block");
    Pairing pairing;
    for (std::size_t a = 0; a < p.size(); ++a) {
      const std::string path = "split.pairing[" + std::to_string(a) + "]";
      if (!p[a].is_array()) r.fail(path, "expected a matrix");
      std::vector<std::vector<double>> m;
      for (std::size_t i = 0; i < p[a].size(); ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        if (!p[a][i].is_array()) r.fail(rp, "expected a row of numbers");
        std::vector<double> row;
        for (std::size_t j = 0; j < p[a][i].size(); ++j) row.push_back(r.number(p[a][i][j], rp + "[" + std::to_string(j) + "]"));
        m.push_back(std::move(row));
      }
      pairing.push_back(std::move(m));
    }
    spec.pairing = std::move(pairing);
  }

  if (doc.contains("expected")) {
    const Json& rows = doc["expected"];
    if (!rows.is_array()) r.fail("expected", "expected an array of rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string path = "expected[" + std::to_string(i) + "]";
      r.object(rows[i], path);
      r.known_keys(rows[i], path, {"op", "args", "value"});
      ScenarioSpec::Row row;
      row.op = r.string(r.member(rows[i], path, "op"), path + ".op");
      try {
        expected_op_from_string(row.op);
      } catch (const std::invalid_argument& e) {
        r.fail(path + ".op", e.what());
      }
      const auto args = r.strings(r.member(rows[i], path, "args"), path + ".args");
      for (std::size_t j = 0; j < args.size(); ++j) row.args.push_back(field_ref(args[j], path + ".args[" + std::to_string(j) + "]"));
      const Json& value = r.member(rows[i], path, "value");
      r.object(value, path + ".value");
      for (const auto& [key, expr] : value.items()) {
        const std::string vp = path + ".value." + key;
        const std::string e = r.string(expr, vp);
        check_expr(r, e, vp);
        if (row.op == "coframe") {
          coord_index(key, vp);
        } else {
          field_ref(key, vp);
        }
        row.value.emplace_back(key, e);
      }
      spec.expected.push_back(std::move(row));
    }
  }

  if (doc.contains("metric")) {
    const Json& g = doc["metric"];
    if (!g.is_array() || g.size() != spec.coords.size()) r.fail("metric", "expected one row per coordinate");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string path = "metric[" + std::to_string(i) + "]";
      auto row = r.strings(g[i], path);
      if (row.size() != spec.coords.size()) r.fail(path, "expected one entry per coordinate");
      for (std::size_t j = 0; j < row.size(); ++j) check_expr(r, row[j], path + "[" + std::to_string(j) + "]");
      rows.push_back(std::move(row));
    }
    spec.metric = std::move(rows);
  }
  if (doc.contains("notes")) spec.notes = r.strings(doc["notes"], "notes");
  return spec;
}

Scenario load_scenario_file(const std::string& path, const SampleConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ScenarioFileError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const ScenarioSpec spec = parse_scenario_spec(buf.str(), path);
  try {
    return build_scenario(spec, cfg);
  } catch (const ScenarioFileError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioFileError(path + ": " + e.what());
  }
}

Scenario resolve_scenario(const std::string& name_or_path, const SampleConfig& cfg) {
  for (const auto& b : builtin_scenarios()) {
    if (b.name == name_or_path) return builtin_scenario(name_or_path, cfg);
  }
  std::error_code ec;
  if (std::filesystem::is_regular_file(name_or_path, ec)) return load_scenario_file(name_or_path, cfg);
  return builtin_scenario(name_or_path, cfg);
}

}  // namespace ehrcov::cli
