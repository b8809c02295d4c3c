#pragma once

// Matrix runs and their JSON / markdown reports.

#include <optional>
#include <string>
#include <vector>

#include "downgrade/attacks.hpp"

namespace downgrade {

inline constexpr std::string_view kReportSchema = "downgrade-report/1";

enum class ReportFormat { Json, Markdown };
/// "json" or "md"; anything else throws FormatError.
ReportFormat report_format_from_string(std::string_view s);

struct AttackRow {
  int id = 0;
  std::string name;
  bool theoretical = false;
  TaxonomyVector declared;
  Damage observed_damage = Damage::None;
  std::vector<std::string> observed_methods;
  bool damage_match = false;
  bool method_match = false;
  std::string element_note;
  bool completed = false;
  std::optional<std::string> abort;  // "Reason: detail"
  std::vector<std::string> broken_goals;
  std::string trace_digest;
  Damage patched_damage = Damage::None;
  std::optional<std::string> patched_abort;
  std::string patched_trace_digest;
  std::string patch;
  std::vector<std::string> notes;

  bool patch_holds() const;
  bool ok() const;
  bool operator==(const AttackRow&) const = default;
};

struct ReportSummary {
  int rows = 0;
  int damage_matches = 0;
  int method_matches = 0;
  int broken = 0;
  int weakened = 0;
  int patched_broken = 0;
  int patched_weakened = 0;
  bool all_match = false;
  bool operator==(const ReportSummary&) const = default;
};

struct ExperimentReport {
  std::optional<std::uint64_t> seed;
  std::vector<AttackRow> rows;  // sorted by id
  ReportSummary summary;
  bool operator==(const ExperimentReport&) const = default;
};

AttackRow make_row(const AttackSpec& spec, const AttackRun& run);
ReportSummary summarize(const std::vector<AttackRow>& rows);

/// Runs every attack; a seed, when given, overrides each scenario's own.
ExperimentReport run_matrix(const std::vector<AttackSpec>& attacks, std::optional<std::uint64_t> seed = std::nullopt);
ExperimentReport run_matrix(std::optional<std::uint64_t> seed = std::nullopt);

std::string emit_report(const ExperimentReport& report, ReportFormat format);
/// Inverse of the JSON emitter; throws FormatError on malformed input.
ExperimentReport report_from_json(std::string_view text);

}  // namespace downgrade
