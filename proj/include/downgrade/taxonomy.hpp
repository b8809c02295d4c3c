#pragma once

// Downgrade-attack classification: the four-vector model, ground truth for
// the fifteen surveyed attacks, and damage evaluation of executed sessions.

#include <optional>
#include <string>
#include <vector>

#include "downgrade/handshake.hpp"
#include "downgrade/trace.hpp"

namespace downgrade {

enum class Element { Algorithm, Version, Layer };
enum class Vulnerability { Implementation, Design, TrustModel };
enum class Method { Modification, Dropping, Injection };
enum class Damage { None, Weakened, Broken };

std::string_view to_string(Element e);
std::string_view to_string(Vulnerability v);
std::string_view to_string(Method m);
std::string_view to_string(Damage d);
Element element_from_string(std::string_view s);
Vulnerability vulnerability_from_string(std::string_view s);
Method method_from_string(std::string_view s);
Damage damage_from_string(std::string_view s);

struct TaxonomyVector {
  Element element = Element::Algorithm;
  Vulnerability vulnerability = Vulnerability::Implementation;
  Method method = Method::Modification;
  Damage damage = Damage::Broken;  // never None in a declared vector

  bool operator==(const TaxonomyVector&) const = default;
};

std::string to_string(const TaxonomyVector& v);

/// A broken goal carries the evidence that breaks it.
struct GoalFinding {
  bool broken = false;
  std::string witness;
};

struct SecurityGoalsRecord {
  GoalFinding secrecy;
  GoalFinding integrity;
  GoalFinding authentication;

  bool any_broken() const { return secrecy.broken || integrity.broken || authentication.broken; }
};

/// What the session settled on; absent fields were never agreed.
struct NegotiatedMode {
  std::optional<Version> version;
  std::string suite;
  std::string group;
  bool layer_present = true;  // false when application data went out in the clear
};

struct SessionOutcome {
  bool completed = false;
  NegotiatedMode negotiated;
  NegotiatedMode honest;  // what the same endpoints agree on without an adversary
  std::vector<std::string> client_suite_preference;
  std::vector<std::string> server_suite_preference;
  std::vector<std::string> client_group_preference;
  std::vector<std::string> server_group_preference;
  std::optional<Abort> aborted;  // first abort of the final connection
  SecurityGoalsRecord goals;
  std::vector<std::string> knowledge_summary;
  std::vector<TraceEvent> trace;
};

/// Broken iff a goal is broken; Weakened iff the session completed in a mode
/// both endpoints rank below their honest agreement; otherwise None.
Damage evaluate_damage(const SessionOutcome& outcome);

/// Strict ordering of negotiated modes used by evaluate_damage.
bool weaker_than_honest(const SessionOutcome& outcome);

/// Ground-truth classification of the surveyed attacks, ids 1..15.
TaxonomyVector ground_truth_vector(int id);
const std::vector<std::pair<int, TaxonomyVector>>& ground_truth();

/// Interception kinds the trace used, other than Forward.
std::vector<ActionKind> trace_methods(const std::vector<TraceEvent>& trace);
/// True when the trace uses only the declared method and uses it at least once.
bool method_consistent(Method declared, const std::vector<TraceEvent>& trace);

struct ClassificationReport {
  int id = 0;
  TaxonomyVector declared;
  Damage observed_damage = Damage::None;
  bool damage_match = false;
  bool method_match = false;
  std::string element_note;
};

ClassificationReport verify_classification(int id, const SessionOutcome& outcome);
/// Against a vector supplied by an attack file instead of the ground truth.
ClassificationReport verify_classification(int id, const TaxonomyVector& declared, const SessionOutcome& outcome);

}  // namespace downgrade
