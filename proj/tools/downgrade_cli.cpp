// Command-line entry point: list, run, matrix, session, export.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "downgrade/report.hpp"
#include "downgrade/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace downgrade;

namespace {

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kConfig = 2;

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::vector<AttackSpec> attack_source(const std::string& data_dir, bool builtin) {
  if (builtin) return attack_registry();
  const fs::path dir = data_dir.empty() ? default_data_dir() / "attacks" : fs::path(data_dir);
  return load_attack_dir(dir);
}

std::string outcome_json(const Scenario& scenario, const SessionOutcome& o) {
  nlohmann::ordered_json j;
  j["scenario"] = scenario.name;
  j["seed"] = scenario.seed;
  j["completed"] = o.completed;
  j["version"] = o.negotiated.version ? nlohmann::ordered_json(to_string(*o.negotiated.version)) : nullptr;
  j["suite"] = o.negotiated.suite;
  j["group"] = o.negotiated.group;
  j["layer_present"] = o.negotiated.layer_present;
  if (o.aborted) {
    j["abort"] = {{"reason", to_string(o.aborted->reason)}, {"detail", o.aborted->detail}};
  } else {
    j["abort"] = nullptr;
  }
  j["damage"] = to_string(evaluate_damage(o));
  j["goals"] = {{"secrecy", o.goals.secrecy.broken ? o.goals.secrecy.witness : ""},
                {"integrity", o.goals.integrity.broken ? o.goals.integrity.witness : ""},
                {"authentication", o.goals.authentication.broken ? o.goals.authentication.witness : ""}};
  j["knowledge"] = o.knowledge_summary;
  j["trace_digest"] = trace_digest(o.trace);
  return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Downgrade attack harness"};
  app.require_subcommand(1);

  std::string data_dir;
  bool builtin = false;
  auto add_source = [&](CLI::App* sub) {
    sub->add_option("--data", data_dir, "Directory of attack files (default: bundled data)");
    sub->add_flag("--builtin", builtin, "Use the compiled-in registry instead of attack files");
  };

  auto* list = app.add_subcommand("list", "List attack ids and classification vectors");
  add_source(list);

  int attack_id = 0;
  bool patched = false;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "json";
  auto* run = app.add_subcommand("run", "Run one attack and its patched variant");
  run->add_option("--attack", attack_id, "Attack id (1-15)")->required();
  run->add_flag("--patched", patched, "Report on the patched scenario");
  run->add_option("--seed", seed, "Seed overriding the scenario's own");
  run->add_option("--out", out_path, "Write the report to FILE");
  run->add_option("--format", format, "json or md");
  add_source(run);

  auto* matrix = app.add_subcommand("matrix", "Run all attacks and emit the classification matrix");
  matrix->add_option("--seed", seed, "Seed overriding each scenario's own");
  matrix->add_option("--out", out_path, "Write the report to FILE");
  matrix->add_option("--format", format, "json or md");
  add_source(matrix);

  std::string scenario_path;
  bool show_trace = false;
  auto* session = app.add_subcommand("session", "Run a single scenario file");
  session->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  session->add_flag("--trace", show_trace, "Print the rendered trace");

  std::string export_dir;
  auto* exporter = app.add_subcommand("export", "Write the built-in registry as data files");
  exporter->add_option("--dir", export_dir, "Output data directory (attacks/ and ground_truth.json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*list) {
      for (const auto& a : attack_source(data_dir, builtin)) {
        std::cout << (a.id < 10 ? "0" : "") << a.id << "  " << a.name << (a.theoretical ? "*" : "") << "  "
                  << to_string(a.declared) << "\n";
      }
      return kOk;
    }

    if (*run) {
      const auto fmt = report_format_from_string(format);
      const auto attacks = attack_source(data_dir, builtin);
      auto it = std::find_if(attacks.begin(), attacks.end(), [&](const auto& a) { return a.id == attack_id; });
      if (it == attacks.end()) throw ConfigError("no attack with id " + std::to_string(attack_id));
      const auto result = run_attack(*it, seed);
      ExperimentReport report;
      report.seed = seed;
      report.rows.push_back(make_row(*it, result));
      report.summary = summarize(report.rows);
      std::string text = emit_report(report, fmt);
      if (fmt == ReportFormat::Markdown) {
        text += "\n```\n" + render_trace(patched ? result.patched.trace : result.vulnerable.trace) + "```\n";
      }
      write_out(out_path, text);
      const auto& row = report.rows.front();
      return (patched ? row.patch_holds() : row.ok()) ? kOk : kMismatch;
    }

    if (*matrix) {
      const auto fmt = report_format_from_string(format);
      const auto report = run_matrix(attack_source(data_dir, builtin), seed);
      write_out(out_path, emit_report(report, fmt));
      return report.summary.all_match ? kOk : kMismatch;
    }

    if (*session) {
      const auto scenario = load_scenario(scenario_path);
      const auto outcome = run_session(scenario);
      std::cout << outcome_json(scenario, outcome);
      if (show_trace) std::cout << render_trace(outcome.trace);
      return kOk;
    }

    if (*exporter) {
      const fs::path root(export_dir);
      fs::create_directories(root / "attacks");
      nlohmann::ordered_json table = nlohmann::ordered_json::array();
      for (const auto& a : attack_registry()) {
        char name[16];
        std::snprintf(name, sizeof name, "%02d.json", a.id);
        write_out((root / "attacks" / name).string(), attack_to_json(a).dump(2) + "\n");
        table.push_back({{"id", a.id},
                         {"name", a.name},
                         {"theoretical", a.theoretical},
                         {"element", to_string(a.declared.element)},
                         {"vulnerability", to_string(a.declared.vulnerability)},
                         {"method", to_string(a.declared.method)},
                         {"damage", to_string(a.declared.damage)}});
      }
      write_out((root / "ground_truth.json").string(), table.dump(2) + "\n");
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kConfig;
  } catch (const NotFound& e) {
    std::cerr << "not found: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
