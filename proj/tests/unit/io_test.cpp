#include <gtest/gtest.h>

#include <fstream>

#include "downgrade/report.hpp"
#include "downgrade/scenario_io.hpp"

using namespace downgrade;
using nlohmann::json;

namespace {

std::string canonical(const AttackSpec& a) { return attack_to_json(a).dump(); }

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(ScenarioIo, AttackJsonRoundTrips) {
  for (const auto& a : attack_registry()) {
    const auto back = attack_from_json(json::parse(canonical(a)));
    EXPECT_EQ(canonical(back), canonical(a)) << a.id;
  }
}

TEST(ScenarioIo, BundledDataEqualsRegistry) {
  const auto loaded = load_attack_dir(default_data_dir() / "attacks");
  ASSERT_EQ(loaded.size(), attack_registry().size());
  for (std::size_t i = 0; i < loaded.size(); ++i) EXPECT_EQ(canonical(loaded[i]), canonical(attack_registry()[i]));
}

TEST(ScenarioIo, BundledTableEqualsGroundTruth) {
  std::ifstream in(default_data_dir() / "ground_truth.json");
  const auto table = json::parse(in);
  ASSERT_EQ(table.size(), 15u);
  for (const auto& row : table) {
    const auto v = ground_truth_vector(row.at("id").get<int>());
    EXPECT_EQ(row.at("element"), to_string(v.element));
    EXPECT_EQ(row.at("vulnerability"), to_string(v.vulnerability));
    EXPECT_EQ(row.at("method"), to_string(v.method));
    EXPECT_EQ(row.at("damage"), to_string(v.damage));
  }
}

TEST(ScenarioIo, LoadedScenarioRunsLikeBuiltIn) {
  const auto path = temp_file("downgrade-io-scenario.json", scenario_to_json(vulnerable_scenario(7)).dump(2));
  const auto loaded = load_scenario(path);
  EXPECT_EQ(trace_digest(run_session(loaded).trace), trace_digest(run_session(vulnerable_scenario(7)).trace));
  std::filesystem::remove(path);
}

TEST(ScenarioIo, MalformedInputIsConfigError) {
  auto j = json::parse(scenario_to_json(vulnerable_scenario(1)).dump());
  EXPECT_THROW(scenario_from_json(json::object()), ConfigError);

  auto bad = j;
  bad["schema"] = "downgrade-scenario/99";
  EXPECT_THROW(scenario_from_json(bad), ConfigError);

  bad = j;
  bad["client"]["suites"] = {"NOT_A_SUITE"};
  EXPECT_THROW(prepare(scenario_from_json(bad)), ConfigError);

  bad = j;
  bad["client"]["min_version"] = "TLS99";
  EXPECT_THROW(scenario_from_json(bad), ConfigError);

  bad = j;
  bad["adversary"]["rules"][0]["edits"][0]["path"] = "bogus";
  EXPECT_THROW(scenario_from_json(bad), ConfigError);

  bad = j;
  bad["client"]["role"] = "middlebox";
  EXPECT_THROW(scenario_from_json(bad), ConfigError);

  const auto path = temp_file("downgrade-io-broken.json", "{ not json");
  EXPECT_THROW(load_scenario(path), ConfigError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST(ScenarioIo, EmptyListsKeepTheirType) {
  AdversaryScript s;
  Rule r;
  r.trigger = {Direction::ClientToServer, MessageType::CH, {}};
  r.action = ActionKind::Modify;
  r.edits = {{"compressions", std::vector<std::int64_t>{}}, {"suites", std::vector<std::string>{}}};
  s.rules.push_back(r);
  const auto back = script_from_json(json::parse(script_to_json(s).dump()));
  ASSERT_EQ(back.rules.front().edits.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<std::vector<std::int64_t>>(back.rules.front().edits[0].value));
  EXPECT_TRUE(std::holds_alternative<std::vector<std::string>>(back.rules.front().edits[1].value));
}

TEST(Report, JsonRoundTrips) {
  const auto report = run_matrix(7);
  const auto text = emit_report(report, ReportFormat::Json);
  EXPECT_EQ(report_from_json(text), report);
  EXPECT_EQ(emit_report(report_from_json(text), ReportFormat::Json), text);
}

TEST(Report, MatrixSummary) {
  const auto report = run_matrix();
  EXPECT_EQ(report.summary.rows, 15);
  EXPECT_EQ(report.summary.damage_matches, 15);
  EXPECT_EQ(report.summary.broken, 13);
  EXPECT_EQ(report.summary.weakened, 2);
  EXPECT_EQ(report.summary.patched_broken, 0);
  EXPECT_TRUE(report.summary.all_match);
  for (const auto& r : report.rows) EXPECT_EQ(r.trace_digest.size(), 64u);
}

TEST(Report, MarkdownHasHeaderAndFifteenRows) {
  const auto md = emit_report(run_matrix(), ReportFormat::Markdown);
  std::istringstream in(md);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "| No. | Attack | Element | Vuln. | Method | Damage | observed |");
  int rows = 0;
  while (std::getline(in, line)) rows += line.rfind("| ", 0) == 0;
  EXPECT_EQ(rows, 15);
}

TEST(Report, SeedChangesDigestsNotVerdicts) {
  const auto a = run_matrix(1), b = run_matrix(2);
  EXPECT_NE(a.rows.front().trace_digest, b.rows.front().trace_digest);
  EXPECT_EQ(a.summary, b.summary);
}

TEST(Report, FormatErrors) {
  EXPECT_THROW(report_format_from_string("xml"), FormatError);
  EXPECT_THROW(report_from_json("{}"), FormatError);
  EXPECT_THROW(report_from_json("not json"), FormatError);
}

TEST(ScenarioIo, BundledExamples) {
  const auto benign = run_session(load_scenario(default_data_dir() / "scenarios" / "tls12-benign.json"));
  EXPECT_TRUE(benign.completed);
  EXPECT_EQ(evaluate_damage(benign), Damage::None);
  const auto rollback = run_session(load_scenario(default_data_dir() / "scenarios" / "tls12-null-rollback.json"));
  ASSERT_TRUE(rollback.aborted);
  EXPECT_EQ(rollback.aborted->reason, AbortReason::FinishedMismatch);
  EXPECT_EQ(evaluate_damage(rollback), Damage::None);
}
