#include "downgrade/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace downgrade {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

namespace {

std::optional<std::string> render_abort(const std::optional<Abort>& a) {
  if (!a) return std::nullopt;
  std::string s(to_string(a->reason));
  if (!a->detail.empty()) s += ": " + a->detail;
  return s;
}

ojson optional_string(const std::optional<std::string>& s) { return s ? ojson(*s) : ojson(nullptr); }

std::optional<std::string> optional_string(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

ojson vector_to_json(const TaxonomyVector& v) {
  return {{"element", to_string(v.element)},
          {"vulnerability", to_string(v.vulnerability)},
          {"method", to_string(v.method)},
          {"damage", to_string(v.damage)}};
}

TaxonomyVector vector_from_json(const json& j) {
  return {element_from_string(j.at("element").get<std::string>()),
          vulnerability_from_string(j.at("vulnerability").get<std::string>()),
          method_from_string(j.at("method").get<std::string>()), damage_from_string(j.at("damage").get<std::string>())};
}

ojson row_to_json(const AttackRow& r) {
  ojson j;
  j["id"] = r.id;
  j["name"] = r.name;
  j["theoretical"] = r.theoretical;
  j["declared"] = vector_to_json(r.declared);
  j["observed_damage"] = to_string(r.observed_damage);
  j["observed_methods"] = r.observed_methods;
  j["damage_match"] = r.damage_match;
  j["method_match"] = r.method_match;
  j["element_note"] = r.element_note;
  j["completed"] = r.completed;
  j["abort"] = optional_string(r.abort);
  j["broken_goals"] = r.broken_goals;
  j["trace_digest"] = r.trace_digest;
  j["patched_damage"] = to_string(r.patched_damage);
  j["patched_abort"] = optional_string(r.patched_abort);
  j["patched_trace_digest"] = r.patched_trace_digest;
  j["patch"] = r.patch;
  j["notes"] = r.notes;
  return j;
}

AttackRow row_from_json(const json& j) {
  AttackRow r;
  r.id = j.at("id").get<int>();
  r.name = j.at("name").get<std::string>();
  r.theoretical = j.at("theoretical").get<bool>();
  r.declared = vector_from_json(j.at("declared"));
  r.observed_damage = damage_from_string(j.at("observed_damage").get<std::string>());
  r.observed_methods = j.at("observed_methods").get<std::vector<std::string>>();
  r.damage_match = j.at("damage_match").get<bool>();
  r.method_match = j.at("method_match").get<bool>();
  r.element_note = j.at("element_note").get<std::string>();
  r.completed = j.at("completed").get<bool>();
  r.abort = optional_string(j.at("abort"));
  r.broken_goals = j.at("broken_goals").get<std::vector<std::string>>();
  r.trace_digest = j.at("trace_digest").get<std::string>();
  r.patched_damage = damage_from_string(j.at("patched_damage").get<std::string>());
  r.patched_abort = optional_string(j.at("patched_abort"));
  r.patched_trace_digest = j.at("patched_trace_digest").get<std::string>();
  r.patch = j.at("patch").get<std::string>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

std::string emit_json(const ExperimentReport& report) {
  ojson j;
  j["schema"] = kReportSchema;
  j["seed"] = report.seed ? ojson(*report.seed) : ojson(nullptr);
  const auto& s = report.summary;
  j["summary"] = {{"rows", s.rows},
                  {"damage_matches", s.damage_matches},
                  {"method_matches", s.method_matches},
                  {"broken", s.broken},
                  {"weakened", s.weakened},
                  {"patched_broken", s.patched_broken},
                  {"patched_weakened", s.patched_weakened},
                  {"all_match", s.all_match}};
  ojson rows = ojson::array();
  for (const auto& r : report.rows) rows.push_back(row_to_json(r));
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string emit_markdown(const ExperimentReport& report) {
  std::ostringstream out;
  out << "| No. | Attack | Element | Vuln. | Method | Damage | observed |\n";
  out << "|-----|--------|---------|-------|--------|--------|----------|\n";
  for (const auto& r : report.rows) {
    std::string observed(to_string(r.observed_damage));
    observed += r.damage_match && r.method_match ? " (match)" : " (MISMATCH)";
    if (!r.patch_holds()) observed += ", patch fails";
    out << "| " << std::setw(2) << std::setfill('0') << r.id << " | " << r.name << (r.theoretical ? "*" : "") << " | "
        << to_string(r.declared.element) << " | " << to_string(r.declared.vulnerability) << " | "
        << to_string(r.declared.method) << " | " << to_string(r.declared.damage) << " | " << observed << " |\n";
  }
  const auto& s = report.summary;
  out << "\n" << s.damage_matches << "/" << s.rows << " damage matches, " << s.method_matches << "/" << s.rows
      << " method matches; " << s.broken << " Broken, " << s.weakened << " Weakened; patched: " << s.patched_broken
      << " Broken, " << s.patched_weakened << " Weakened.\n";
  return out.str();
}

}  // namespace

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "md" || s == "markdown") return ReportFormat::Markdown;
  throw FormatError("unknown report format '" + std::string(s) + "'");
}

bool AttackRow::patch_holds() const {
  return patched_damage == Damage::None || (patched_damage != Damage::Broken && patched_abort.has_value());
}

bool AttackRow::ok() const { return damage_match && method_match && patch_holds(); }

AttackRow make_row(const AttackSpec& spec, const AttackRun& run) {
  AttackRow r;
  r.id = spec.id;
  r.name = spec.name;
  r.theoretical = spec.theoretical;
  r.declared = spec.declared;
  r.observed_damage = run.report.observed_damage;
  for (auto a : trace_methods(run.vulnerable.trace)) r.observed_methods.emplace_back(to_string(a));
  r.damage_match = run.report.damage_match;
  r.method_match = run.report.method_match;
  r.element_note = run.report.element_note;
  r.completed = run.vulnerable.completed;
  r.abort = render_abort(run.vulnerable.aborted);
  const auto& g = run.vulnerable.goals;
  if (g.secrecy.broken) r.broken_goals.push_back("secrecy: " + g.secrecy.witness);
  if (g.integrity.broken) r.broken_goals.push_back("integrity: " + g.integrity.witness);
  if (g.authentication.broken) r.broken_goals.push_back("authentication: " + g.authentication.witness);
  r.trace_digest = trace_digest(run.vulnerable.trace);
  r.patched_damage = run.patched_damage;
  r.patched_abort = render_abort(run.patched.aborted);
  r.patched_trace_digest = trace_digest(run.patched.trace);
  r.patch = spec.patch;
  r.notes = spec.notes;
  return r;
}

ReportSummary summarize(const std::vector<AttackRow>& rows) {
  ReportSummary s;
  s.rows = static_cast<int>(rows.size());
  bool all = !rows.empty();
  for (const auto& r : rows) {
    s.damage_matches += r.damage_match;
    s.method_matches += r.method_match;
    s.broken += r.observed_damage == Damage::Broken;
    s.weakened += r.observed_damage == Damage::Weakened;
    s.patched_broken += r.patched_damage == Damage::Broken;
    s.patched_weakened += r.patched_damage == Damage::Weakened;
    all = all && r.ok();
  }
  s.all_match = all;
  return s;
}

ExperimentReport run_matrix(const std::vector<AttackSpec>& attacks, std::optional<std::uint64_t> seed) {
  ExperimentReport report;
  report.seed = seed;
  for (const auto& spec : attacks) report.rows.push_back(make_row(spec, run_attack(spec, seed)));
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  report.summary = summarize(report.rows);
  return report;
}

ExperimentReport run_matrix(std::optional<std::uint64_t> seed) { return run_matrix(attack_registry(), seed); }

std::string emit_report(const ExperimentReport& report, ReportFormat format) {
  return format == ReportFormat::Json ? emit_json(report) : emit_markdown(report);
}

ExperimentReport report_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    if (j.at("schema").get<std::string>() != kReportSchema) throw FormatError("unexpected report schema");
    ExperimentReport report;
    if (!j.at("seed").is_null()) report.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& r : j.at("rows")) report.rows.push_back(row_from_json(r));
    const auto& s = j.at("summary");
    report.summary.rows = s.at("rows").get<int>();
    report.summary.damage_matches = s.at("damage_matches").get<int>();
    report.summary.method_matches = s.at("method_matches").get<int>();
    report.summary.broken = s.at("broken").get<int>();
    report.summary.weakened = s.at("weakened").get<int>();
    report.summary.patched_broken = s.at("patched_broken").get<int>();
    report.summary.patched_weakened = s.at("patched_weakened").get<int>();
    report.summary.all_match = s.at("all_match").get<bool>();
    return report;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  } catch (const NotFound& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace downgrade
