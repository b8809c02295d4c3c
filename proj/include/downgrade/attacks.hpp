#pragma once

// The fifteen surveyed downgrade attacks as runnable scenarios.

#include <optional>
#include <string>
#include <vector>

#include "downgrade/harness.hpp"
#include "downgrade/taxonomy.hpp"

namespace downgrade {

struct AttackSpec {
  int id = 0;
  std::string name;
  TaxonomyVector declared;
  Scenario vulnerable;  // carries the adversary script
  Scenario patched;     // same script against the minimally fixed endpoints
  std::string patch;    // the fields the patch changes
  bool theoretical = false;        // no public implementation; realized under worst-case assumptions
  std::vector<std::string> notes;  // modeling assumptions

  const AdversaryScript& script() const;
};

/// Built-in registry, ids 1..15.
const std::vector<AttackSpec>& attack_registry();
/// Throws NotFound for ids outside 1..15.
const AttackSpec& get_attack(int id);
Scenario vulnerable_scenario(int id);
Scenario patched_scenario(int id);

struct AttackRun {
  int id = 0;
  std::string name;
  SessionOutcome vulnerable;
  SessionOutcome patched;
  ClassificationReport report;
  Damage patched_damage = Damage::None;
  std::vector<std::string> notes;

  /// Declared damage and method observed, and the patch holds.
  bool ok() const;
};

/// Runs both scenarios. A seed, when given, replaces the scenarios' own.
AttackRun run_attack(const AttackSpec& spec, std::optional<std::uint64_t> seed = std::nullopt);
AttackRun run_attack(int id, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace downgrade
