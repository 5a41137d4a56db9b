#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "scenario_file.hpp"

#include "json.hpp"

namespace cli = ehrcov::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ehrcov");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scenario_file(const std::string& name) { return std::string(EHRCOV_SCENARIO_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(invoke({}).code, cli::kExitUsage); }

TEST(Cli, ListsAllBuiltins) {
  const auto r = invoke({"list"});
  EXPECT_EQ(r.code, cli::kExitPass);
  for (const char* name : {"trivial-r3", "hopf", "affine-tangent", "nonlinear-tangent", "sode-tangent", "frame-bundle"}) {
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
  }
  const auto j = nlohmann::json::parse(invoke({"list", "--format", "json"}).out);
  EXPECT_EQ(j.size(), 6u);
}

TEST(Cli, EvalTrivialNabla) {
  const auto r = invoke({"eval", "trivial-r3", "nabla", "H1", "H1", "--at", "0,0,pi/2", "--format", "json"});
  ASSERT_EQ(r.code, cli::kExitPass) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["frame"]["H1"].get<double>(), 1.0, 1e-15);
  EXPECT_NEAR(j["frame"]["V"].get<double>(), 0.0, 1e-15);
}

TEST(Cli, EvalHopfBracket) {
  const auto r = invoke({"eval", "hopf", "bracket", "Sigma", "Lambda", "--at", "(1,0,0,0)", "--format", "json"});
  ASSERT_EQ(r.code, cli::kExitPass) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["frame"]["V"].get<double>(), 2.0, 1e-15);
}

TEST(Cli, EvalUnknownFieldListsNames) {
  const auto r = invoke({"eval", "hopf", "nabla", "Omega", "V", "--at", "1,0,0,0"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("Lambda"), std::string::npos);
}

TEST(Cli, EvalPointOffTheSphere) {
  EXPECT_EQ(invoke({"eval", "hopf", "nabla", "V", "V", "--at", "1,1,0,0"}).code, cli::kExitUsage);
}

TEST(Cli, UnknownScenario) {
  const auto r = invoke({"verify", "no-such-scenario"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("trivial-r3"), std::string::npos);
}

TEST(Cli, VerifyPassesAndIsDeterministic) {
  const auto a = invoke({"verify", "hopf", "--format", "json"});
  const auto b = invoke({"verify", "hopf", "--format", "json"});
  EXPECT_EQ(a.code, cli::kExitPass) << a.out;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["summary"]["failed"].get<int>(), 0);
  EXPECT_EQ(j["config"]["seed"].get<int>(), 42);
  for (const auto& c : j["checks"]) {
    EXPECT_TRUE(c.contains("check_id"));
    EXPECT_TRUE(c.contains("paper_ref"));
    EXPECT_TRUE(c.contains("worst_point"));
  }
}

TEST(Cli, TinyToleranceFailsVerification) {
  const auto r = invoke({"verify", "hopf", "--tol", "1e-15"});
  EXPECT_EQ(r.code, cli::kExitVerificationFailed);
}

TEST(Cli, InvalidOptionsAreUsageErrors) {
  EXPECT_EQ(invoke({"verify", "hopf", "--samples", "0"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"verify", "hopf", "--tol", "-1"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"verify", "hopf", "--format", "xml"}).code, cli::kExitUsage);
}

TEST(Cli, CsvReportHasHeader) {
  const auto r = invoke({"verify", "trivial-r3", "--format", "csv"});
  EXPECT_EQ(r.out.rfind("check_id,paper_ref,max_dev,threshold,pass,worst_point\n", 0), 0u);
}

TEST(ScenarioFile, TrivialFileMatchesBuiltin) {
  const auto builtin = invoke({"verify", "trivial-r3", "--format", "json"});
  const auto file = invoke({"verify", scenario_file("trivial-r3.json"), "--format", "json"});
  EXPECT_EQ(file.code, cli::kExitPass) << file.err;
  EXPECT_EQ(builtin.out, file.out);
}

TEST(ScenarioFile, ShippedFilesVerify) {
  for (const char* f : {"nonlinear-n1.json", "hopf.json"}) {
    const auto r = invoke({"verify", scenario_file(f)});
    EXPECT_EQ(r.code, cli::kExitPass) << f << "\n" << r.out << r.err;
  }
}

TEST(ScenarioFile, RankMismatchNamesTheFile) {
  const std::string path = temp_file("rank.json", R"({
    "name": "bad-rank",
    "space": {"coordinates": ["x", "y", "z"], "base": ["x"]},
    "fields": {"H": ["1", "0", "0"], "V": ["0", "1", "0"]},
    "split": {"K": ["V"], "blocks": [["H"]]}
  })");
  const auto r = invoke({"verify", path});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("rank.json"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("rank"), std::string::npos);
}

TEST(ScenarioFile, SchemaErrorsCarryPaths) {
  try {
    cli::parse_scenario_spec(R"({"name": "x", "space": {"coordinates": ["y"]}, "fields": {"A": [true]}, "split": {"K": ["A"], "blocks": [["A"]]}})", "doc.json");
    FAIL();
  } catch (const cli::ScenarioFileError& e) {
    EXPECT_NE(std::string(e.what()).find("doc.json"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("fields"), std::string::npos);
  }
  EXPECT_THROW(cli::parse_scenario_spec(R"({"name": "x", "colour": 1})"), cli::ScenarioFileError);
  EXPECT_THROW(cli::parse_scenario_spec(R"({"name": "x", "fields": {"A": ["1 +"]}})"), cli::ScenarioFileError);
  EXPECT_THROW(cli::parse_scenario_spec("not json"), cli::ScenarioFileError);
}

TEST(Cli, ParsePoint) {
  EXPECT_EQ(cli::parse_point("(1, 2, 3)"), (std::vector<double>{1, 2, 3}));
  EXPECT_NEAR(cli::parse_point("pi/2")[0], 1.5707963267948966, 1e-16);
  EXPECT_ANY_THROW(cli::parse_point("1,,2"));
  EXPECT_ANY_THROW(cli::parse_point("x"));
}
