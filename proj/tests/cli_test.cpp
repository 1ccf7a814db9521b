// End-to-end checks of the command-line tool: each case runs the real binary
// in a subprocess and inspects exit code, stdout and stderr.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "causal/json_io.hpp"
#include "causal/longitudinal.hpp"
#include "test_support.hpp"

namespace causal {
namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string temp_path(const std::string& name) {
  static int counter = 0;
  return ::testing::TempDir() + "causal_cli_" + std::to_string(counter++) + "_" + name;
}

RunResult run_cli(const std::string& args) {
  std::string out_path = temp_path("stdout.txt");
  std::string err_path = temp_path("stderr.txt");
  std::string cmd = std::string(CAUSAL_CLI_PATH) + " " + args + " > \"" + out_path +
                    "\" 2> \"" + err_path + "\"";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = temp_path(name);
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

// simulate once and reuse the CSV for the estimation cases
std::string simulate_csv(const std::string& model, std::size_t n, std::uint64_t seed) {
  std::string csv = temp_path("sample.csv");
  RunResult r = run_cli("simulate --model \"" + test::data_file(model) + "\" --n " +
                        std::to_string(n) + " --seed " + std::to_string(seed) + " --out \"" +
                        csv + "\"");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  return csv;
}

TEST(Cli, VersionAndUsage) {
  RunResult v = run_cli("--version");
  EXPECT_EQ(v.exit_code, 0);
  EXPECT_NE(v.out.find("causal 0.1.0"), std::string::npos);

  EXPECT_EQ(run_cli("").exit_code, 1);
  EXPECT_EQ(run_cli("frobnicate").exit_code, 1);
  EXPECT_EQ(run_cli("dsep --x A --y B").exit_code, 1);  // missing --graph
}

TEST(Cli, DsepPrintsAVerdict) {
  std::string g = "dsep --graph \"" + test::data_file("fig4.json") + "\"";
  RunResult connected = run_cli(g + " --x A --y D");
  EXPECT_EQ(connected.exit_code, 0);
  EXPECT_EQ(connected.out, "d-connected\n");

  RunResult separated = run_cli(g + " --x A --y D --given C");
  EXPECT_EQ(separated.exit_code, 0);
  EXPECT_EQ(separated.out, "d-separated\n");
}

TEST(Cli, BadInputExitsTwo) {
  RunResult missing = run_cli("dsep --graph /nonexistent.json --x A --y B");
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_NE(missing.err.find("error [parse_error]"), std::string::npos);

  std::string bad = write_temp("bad.json", "{ not json");
  RunResult malformed = run_cli("dsep --graph \"" + bad + "\" --x A --y B");
  EXPECT_EQ(malformed.exit_code, 2);

  std::string g = write_temp("g.json", graph_to_json(test::chain_graph()).dump());
  RunResult unknown = run_cli("dsep --graph \"" + g + "\" --x A --y Q");
  EXPECT_EQ(unknown.exit_code, 2);
  EXPECT_NE(unknown.err.find("error ["), std::string::npos);
}

TEST(Cli, SwigDescribesTheSplitGraph) {
  RunResult r = run_cli("swig --graph \"" + test::data_file("fig5a.json") + "\" --do A=a");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  Json doc = Json::parse(r.out);
  bool saw_fixed = false, saw_labelled_outcome = false;
  for (const auto& node : doc["nodes"]) {
    if (node["role"] == "fixed") {
      saw_fixed = true;
      EXPECT_EQ(node["name"], "a");
    }
    if (node["name"] == "Y") {
      EXPECT_EQ(node["label"], "Y(a)");
      saw_labelled_outcome = true;
    }
  }
  EXPECT_TRUE(saw_fixed);
  EXPECT_TRUE(saw_labelled_outcome);
}

TEST(Cli, IdentifyPrintsTheEstimand) {
  RunResult ok = run_cli("identify --graph \"" + test::data_file("fig5a.json") +
                         "\" --treatment A --outcome Y");
  EXPECT_EQ(ok.exit_code, 0);
  EXPECT_EQ(ok.out, "sum_{C} p(Y|A=a,C) p(C)\n");

  RunResult blocked = run_cli("identify --graph \"" + test::data_file("bowarc.json") +
                              "\" --treatment A --outcome Y");
  EXPECT_EQ(blocked.exit_code, 3);
  EXPECT_NE(blocked.out.find("not identified"), std::string::npos);
}

TEST(Cli, SimulateIsByteDeterministic) {
  std::string base = "simulate --model \"" + test::data_file("s1.json") + "\" --n 200";
  RunResult a = run_cli(base + " --seed 7");
  RunResult b = run_cli(base + " --seed 7");
  RunResult c = run_cli(base + " --seed 8");
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(a.out.substr(0, 6), "C,A,Y\n");
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 201);
}

TEST(Cli, SimulateAppliesInterventions) {
  RunResult r = run_cli("simulate --model \"" + test::data_file("s1.json") +
                        "\" --n 100 --seed 7 --intervene A=1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "C,A,Y");
  while (std::getline(lines, line)) {
    auto first = line.find(',');
    auto second = line.find(',', first + 1);
    EXPECT_EQ(line.substr(first + 1, second - first - 1), "1") << line;
  }
}

TEST(Cli, EstimateRecoversTheAdjustedMean) {
  std::string csv = simulate_csv("s1.json", 20000, 3);
  std::string common = "estimate --graph \"" + test::data_file("fig5a.json") + "\" --data \"" +
                       csv + "\" --schema \"" + test::data_file("s1_schema.json") +
                       "\" --treatment A --outcome Y";

  RunResult gf = run_cli(common + " --method gformula --a 1");
  ASSERT_EQ(gf.exit_code, 0) << gf.err;
  Json jgf = Json::parse(gf.out);
  EXPECT_NEAR(jgf["point"].get<double>(), 0.74, 0.02);
  EXPECT_EQ(jgf["method"], "gformula");
  EXPECT_EQ(jgf["estimand"], "sum_{C} p(Y|A=a,C) p(C)");
  EXPECT_EQ(jgf["n"], 20000);

  RunResult ipw = run_cli(common + " --method ipw --a 1");
  ASSERT_EQ(ipw.exit_code, 0) << ipw.err;
  Json jipw = Json::parse(ipw.out);
  EXPECT_NEAR(jipw["point"].get<double>(), 0.74, 0.02);
  ASSERT_TRUE(jipw["diagnostics"].contains("weights"));

  RunResult ace = run_cli(common + " --method gformula --ace");
  RunResult naive = run_cli(common + " --method diff --ace");
  Json jace = Json::parse(ace.out);
  Json jnaive = Json::parse(naive.out);
  EXPECT_NEAR(jace["point"].get<double>(), 0.30, 0.03);
  EXPECT_NEAR(jnaive["point"].get<double>(), 0.5338, 0.03);
  EXPECT_GT(jnaive["point"].get<double>() - jace["point"].get<double>(), 0.1);
}

TEST(Cli, EstimateBootstrapIsDeterministic) {
  std::string csv = simulate_csv("s1.json", 2000, 3);
  std::string cmd = "estimate --graph \"" + test::data_file("fig5a.json") + "\" --data \"" + csv +
                    "\" --schema \"" + test::data_file("s1_schema.json") +
                    "\" --treatment A --outcome Y --method gformula --a 1 "
                    "--bootstrap 100 --seed 5";
  RunResult a = run_cli(cmd);
  RunResult b = run_cli(cmd);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  Json j = Json::parse(a.out);
  ASSERT_TRUE(j.contains("ci"));
  EXPECT_LT(j["ci"][0].get<double>(), j["point"].get<double>());
  EXPECT_GT(j["ci"][1].get<double>(), j["point"].get<double>());
}

TEST(Cli, PositivityViolationExitsFour) {
  RunResult r = run_cli("estimate --graph \"" + test::data_file("fig5a.json") + "\" --data \"" +
                        test::data_file("pos_violation.csv") + "\" --schema \"" +
                        test::data_file("s1_schema.json") +
                        "\" --treatment A --outcome Y --method gformula --a 0");
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_NE(r.err.find("error [positivity]"), std::string::npos);
}

TEST(Cli, TransportReweightsToTheTarget) {
  std::string src = simulate_csv("s1.json", 20000, 3);
  std::string tgt = simulate_csv("s1_prime.json", 20000, 4);
  RunResult r = run_cli("transport --graph \"" + test::data_file("fig5a.json") + "\" --source \"" +
                        src + "\" --target \"" + tgt + "\" --schema \"" +
                        test::data_file("s1_schema.json") + "\" --treatment A --outcome Y --a 1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_NEAR(j["point"].get<double>(), 0.58, 0.03);
  EXPECT_EQ(j["estimand"], "sum_{C} p(Y|A=a,C) p*(C)");
}

TEST(Cli, MeasureCorrectUndoesTheProxyError) {
  std::string csv = simulate_csv("s2.json", 20000, 11);
  RunResult r = run_cli("measure-correct --data \"" + csv + "\" --schema \"" +
                        test::data_file("s2_schema.json") +
                        "\" --treatment A --outcome Y --proxy C_star --matrix \"" +
                        test::data_file("mis_flip01.json") + "\" --ace");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_NEAR(j["point"].get<double>(), 0.2, 0.05);
  EXPECT_NEAR(j["condition"].get<double>(), 1.25, 1e-9);
  EXPECT_TRUE(j.contains("clip"));
}

TEST(Cli, PolicyValueHandlesRegimesAndPolicies) {
  std::string graph = write_temp("s4_graph.json",
                                 graph_to_json(test::make_s4().graph()).dump(2));
  std::string csv = simulate_csv("s4.json", 20000, 6);
  std::string common = "policy-value --graph \"" + graph + "\" --data \"" + csv +
                       "\" --schema \"" + test::data_file("s4_schema.json") +
                       "\" --outcome Y --treatments A_0,A_1 --blocks \";L_1\"";

  RunResult regime = run_cli(common + " --regime 1,1");
  ASSERT_EQ(regime.exit_code, 0) << regime.err;
  EXPECT_NEAR(Json::parse(regime.out)["point"].get<double>(), 0.475, 0.02);

  std::vector<Phase> phases{{"A_0", {}}, {"A_1", {"L_1"}}};
  PolicySpec spec = parse_policy(slurp(test::data_file("policy_s4.json")));
  double truth = policy_functional(test::make_s4().observed_joint(), phases, spec, "Y");
  RunResult pol = run_cli(common + " --policy \"" + test::data_file("policy_s4.json") + "\"");
  RunResult again = run_cli(common + " --policy \"" + test::data_file("policy_s4.json") + "\"");
  ASSERT_EQ(pol.exit_code, 0) << pol.err;
  EXPECT_EQ(pol.out, again.out);
  EXPECT_NEAR(Json::parse(pol.out)["point"].get<double>(), truth, 0.02);

  RunResult both = run_cli(common + " --regime 1,1 --policy \"" +
                           test::data_file("policy_s4.json") + "\"");
  EXPECT_EQ(both.exit_code, 2);

  RunResult unblocked = run_cli("policy-value --graph \"" + graph + "\" --data \"" + csv +
                                "\" --schema \"" + test::data_file("s4_schema.json") +
                                "\" --outcome Y --treatments A_0,A_1 --regime 1,1");
  EXPECT_EQ(unblocked.exit_code, 3);
  EXPECT_NE(unblocked.err.find("sequential_ignorability"), std::string::npos);
}

TEST(Cli, DiscoverFromAnOracleGraph) {
  RunResult r = run_cli("discover --oracle-graph \"" + test::data_file("collider.json") + "\"");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  Json j = Json::parse(r.out);
  ASSERT_EQ(j["edges"].size(), 2u);
  for (const auto& e : j["edges"]) {
    EXPECT_EQ(e["kind"], "directed");
    EXPECT_EQ(e["to"], "Z");
  }
  EXPECT_NE(r.err.find("queries:"), std::string::npos);
}

TEST(Cli, DiscoverFromData) {
  std::string csv = simulate_csv("s1.json", 5000, 2);
  RunResult r = run_cli("discover --data \"" + csv + "\" --schema \"" +
                        test::data_file("s1_schema.json") + "\"");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  Json j = Json::parse(r.out);
  // the generating graph is a complete triangle: no independencies, no colliders
  ASSERT_EQ(j["edges"].size(), 3u);
  for (const auto& e : j["edges"]) EXPECT_EQ(e["kind"], "undirected");
  EXPECT_EQ(run_cli("discover --alpha 0.05").exit_code, 2);
}

TEST(Cli, OutFlagWritesTheFileInstead) {
  std::string out = temp_path("verdict.txt");
  RunResult r = run_cli("dsep --graph \"" + test::data_file("fig4.json") +
                        "\" --x A --y D --given C --out \"" + out + "\"");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(slurp(out), "d-separated\n");
}

}  // namespace
}  // namespace causal
