#include "cli.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "report.hpp"
#include "scenario_file.hpp"

namespace ehrcov::cli {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
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

int cmd_list(std::ostream& out, Format format) {
  const auto all = builtin_scenarios();
  if (format == Format::Json) {
    Json arr = Json::array();
    for (const auto& b : all) arr.push_back({{"name", b.name}, {"section", b.section}, {"dim", b.dim}});
    out << arr.dump(2) << "\n";
  } else if (format == Format::Csv) {
    out << "name,section,dim,description\n";
    for (const auto& b : all) {
      out << b.name << ',' << csv_field(b.section) << ',' << b.dim << ',' << csv_field(b.description) << "\n";
    }
  } else {
    for (const auto& b : all) {
      out << std::left << std::setw(19) << b.name << std::setw(16) << b.section << "dim " << b.dim << "  "
          << b.description << "\n";
    }
  }
  return kExitPass;
}

int cmd_describe(std::ostream& out, const std::string& name, Format format) {
  const Scenario sc = resolve_scenario(name);
  std::vector<std::string> k_names, block_names;
  for (const auto& f : sc.split.k.fields()) k_names.push_back(f.name());
  std::vector<std::vector<std::string>> blocks;
  for (const auto& b : sc.split.blocks) {
    std::vector<std::string> names;
    for (const auto& f : b.fields()) names.push_back(f.name());
    blocks.push_back(names);
    block_names.push_back("{" + join(names, ", ") + "}");
  }
  std::vector<std::string> rows;
  for (const auto& r : sc.expected) rows.push_back(to_string(r.op) + "(" + join(r.args, ", ") + ")");
  const auto& opts = sc.space->options();
  if (format == Format::Json) {
    Json j;
    j["name"] = sc.name;
    j["description"] = sc.description;
    j["section"] = sc.section;
    j["dim"] = sc.space->dim();
    j["coordinates"] = sc.space->coords();
    j["constraints"] = opts.constraints;
    j["frame"] = sc.frame_names;
    j["orientation"] = to_string(sc.split.orientation);
    j["K"] = k_names;
    j["blocks"] = blocks;
    j["derivative"] = to_string(sc.nabla.provenance());
    j["expected"] = rows;
    j["notes"] = sc.notes;
    out << j.dump(2) << "\n";
    return kExitPass;
  }
  out << sc.name << ": " << sc.description << "\n";
  out << "  section:      " << sc.section << "\n";
  out << "  dimension:    " << sc.space->dim() << "\n";
  out << "  coordinates:  " << join(sc.space->coords(), ", ") << "\n";
  if (!opts.constraints.empty()) out << "  constraints:  " << join(opts.constraints, ", ") << " = 0\n";
  out << "  frame:        " << join(sc.frame_names, ", ") << "\n";
  out << "  split:        K = {" << join(k_names, ", ") << "} (" << to_string(sc.split.orientation)
      << "), blocks " << join(block_names, " ") << "\n";
  out << "  derivative:   " << to_string(sc.nabla.provenance()) << "\n";
  out << "  expected:     " << rows.size() << " rows";
  if (!rows.empty()) out << " (" << join(rows, ", ") << ")";
  out << "\n";
  if (sc.metric) out << "  metric:       present\n";
  for (const auto& n : sc.notes) out << "  note: " << n << "\n";
  return kExitPass;
}

int cmd_eval(std::ostream& out, const std::string& name, const std::string& op_name,
             const std::vector<std::string>& args, const std::string& at_text, Format format) {
  ExpectedOp op;
  try {
    op = expected_op_from_string(op_name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::size_t nargs = op == ExpectedOp::Coframe ? 1 : 2;
  if (args.size() != nargs) {
    throw UsageError("operation '" + op_name + "' takes " + std::to_string(nargs) + " field argument(s), got " +
                     std::to_string(args.size()));
  }
  const Scenario sc = resolve_scenario(name);
  for (const auto& a : args) sc.field(a);
  const Point p = sc.space->point(parse_point(at_text));
  const At at(sc.space, p, SampleConfig{}.depth);
  const auto& coords = sc.space->coords();

  std::vector<std::pair<std::string, double>> frame_part, coord_part;
  std::string label;
  if (op == ExpectedOp::Coframe) {
    const Frame frame = sc.frame();
    int idx = -1;
    for (int i = 0; i < frame.rank(); ++i) {
      if (sc.frame_names[i] == args[0]) idx = i;
    }
    if (idx < 0) throw UsageError("'" + args[0] + "' is not a frame field of '" + sc.name + "'");
    const auto v = DualCoframe({frame}).covector(idx).values(at);
    for (std::size_t i = 0; i < v.size(); ++i) coord_part.emplace_back("d" + coords[i], v[i]);
    for (int i = 0; i < frame.rank(); ++i) {
      frame_part.emplace_back(sc.frame_names[i], pairing(DualCoframe({frame}).covector(idx), frame[i]).value(at));
    }
    label = "dual of " + args[0];
  } else {
    const VectorField f = evaluate_op(sc, op, sc.field(args[0]), sc.field(args[1]));
    const DualCoframe coframe({sc.frame()});
    const auto c = values_of(coframe.coefficients(at, 0, f.eval(at, 0)));
    for (std::size_t i = 0; i < sc.frame_names.size(); ++i) frame_part.emplace_back(sc.frame_names[i], c[i]);
    const auto v = f.values(at);
    for (std::size_t i = 0; i < v.size(); ++i) coord_part.emplace_back("d/d" + coords[i], v[i]);
    label = op_name + "(" + join(args, ", ") + ")";
  }

  if (format == Format::Json) {
    Json j;
    j["scenario"] = sc.name;
    j["op"] = op_name;
    j["args"] = args;
    j["point"] = p.coords;
    Json fr = Json::object(), co = Json::object();
    for (const auto& [k, v] : frame_part) fr[k] = v;
    for (const auto& [k, v] : coord_part) co[k] = v;
    j["frame"] = fr;
    j["coordinates"] = co;
    out << j.dump(2) << "\n";
  } else if (format == Format::Csv) {
    out << "part,name,value\n";
    for (const auto& [k, v] : frame_part) out << "frame," << k << ',' << format_double(v) << "\n";
    for (const auto& [k, v] : coord_part) out << "coordinates," << k << ',' << format_double(v) << "\n";
  } else {
    std::vector<std::string> pt;
    for (double x : p.coords) pt.push_back(format_double(x));
    out << label << " at (" << join(pt, ", ") << ")\n";
    out << (op == ExpectedOp::Coframe ? "  on the frame:\n" : "  frame coefficients:\n");
    for (const auto& [k, v] : frame_part) out << "    " << std::left << std::setw(10) << k << format_double(v) << "\n";
    out << "  coordinate components:\n";
    for (const auto& [k, v] : coord_part) out << "    " << std::left << std::setw(10) << k << format_double(v) << "\n";
  }
  return kExitPass;
}

int cmd_verify(std::ostream& out, const std::string& name, const SampleConfig& cfg, Format format) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Scenario sc = resolve_scenario(name, cfg);
  Report report{sc.name, cfg, verify_scenario(sc, cfg)};
  write_report(out, report, format);
  return report.failed() == 0 ? kExitPass : kExitVerificationFailed;
}

}  // namespace

std::vector<double> parse_point(const std::string& text) {
  std::string s = text;
  const auto strip = [](std::string& x) {
    while (!x.empty() && std::isspace(static_cast<unsigned char>(x.front()))) x.erase(x.begin());
    while (!x.empty() && std::isspace(static_cast<unsigned char>(x.back()))) x.pop_back();
  };
  strip(s);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  const std::map<std::string, double> env{{"pi", std::numbers::pi}};
  std::vector<double> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    strip(part);
    if (part.empty()) throw std::invalid_argument("empty coordinate in point '" + text + "'");
    out.push_back(eval<double>(parse(part), env));
  }
  if (out.empty()) throw std::invalid_argument("point '" + text + "' has no coordinates");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariant derivatives from Ehresmann connection data", "ehrcov"};
  app.require_subcommand(1);

  std::string format_name = "table";
  std::string scenario;

  auto* list = app.add_subcommand("list", "List the built-in scenarios");
  list->add_option("--format", format_name, "table, json or csv");

  auto* describe = app.add_subcommand("describe", "Describe a scenario");
  describe->add_option("scenario", scenario, "built-in name or scenario file")->required();
  describe->add_option("--format", format_name, "table or json");

  std::string op;
  std::vector<std::string> fields;
  std::string at_text;
  auto* evalc = app.add_subcommand("eval", "Evaluate an operator at a point");
  evalc->add_option("scenario", scenario, "built-in name or scenario file")->required();
  evalc->add_option("op", op, "nabla, bracket, torsion, curvature, torsion-horizontal, torsion-vertical or coframe")
      ->required();
  evalc->add_option("fields", fields, "field names")->required();
  evalc->add_option("--at", at_text, "point, e.g. 0,0,pi/2")->required();
  evalc->add_option("--format", format_name, "table, json or csv");

  SampleConfig cfg;
  auto* verify = app.add_subcommand("verify", "Run the verification suite of a scenario");
  verify->add_option("scenario", scenario, "built-in name or scenario file")->required();
  verify->add_option("--seed", cfg.seed, "sampling seed")->capture_default_str();
  verify->add_option("--samples", cfg.samples, "number of sample points")->capture_default_str();
  verify->add_option("--tol", cfg.tolerance, "tolerance")->capture_default_str();
  verify->add_option("--depth", cfg.depth, "jet depth budget")->capture_default_str();
  verify->add_option("--format", format_name, "table, json or csv");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    if (app.get_subcommands().empty()) err << app.help();
    return kExitUsage;
  }

  try {
    const Format format = format_from_string(format_name);
    if (list->parsed()) return cmd_list(out, format);
    if (describe->parsed()) return cmd_describe(out, scenario, format);
    if (evalc->parsed()) return cmd_eval(out, scenario, op, fields, at_text, format);
    if (verify->parsed()) return cmd_verify(out, scenario, cfg, format);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ehrcov::cli
