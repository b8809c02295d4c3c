#include "downgrade/taxonomy.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace downgrade {

namespace {

constexpr std::array<std::string_view, 3> kElements = {"Algorithm", "Version", "Layer"};
constexpr std::array<std::string_view, 3> kVulns = {"Implementation", "Design", "Trust-model"};
constexpr std::array<std::string_view, 3> kMethods = {"Modification", "Dropping", "Injection"};
constexpr std::array<std::string_view, 3> kDamages = {"None", "Weakened", "Broken"};

template <typename E, std::size_t N>
E lookup(const std::array<std::string_view, N>& names, std::string_view s, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw NotFound("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

// Position in a preference list; unlisted entries rank last.
std::size_t rank(const std::vector<std::string>& prefs, const std::string& name) {
  auto it = std::find(prefs.begin(), prefs.end(), name);
  return static_cast<std::size_t>(it - prefs.begin());
}

bool ranked_lower_by_both(const std::vector<std::string>& a, const std::vector<std::string>& b,
                          const std::string& got, const std::string& honest) {
  if (got.empty() || honest.empty() || got == honest) return false;
  return rank(a, got) > rank(a, honest) && rank(b, got) > rank(b, honest);
}

}  // namespace

std::string_view to_string(Element e) { return kElements.at(static_cast<std::size_t>(e)); }
std::string_view to_string(Vulnerability v) { return kVulns.at(static_cast<std::size_t>(v)); }
std::string_view to_string(Method m) { return kMethods.at(static_cast<std::size_t>(m)); }
std::string_view to_string(Damage d) { return kDamages.at(static_cast<std::size_t>(d)); }
Element element_from_string(std::string_view s) { return lookup<Element>(kElements, s, "element"); }
Vulnerability vulnerability_from_string(std::string_view s) {
  return lookup<Vulnerability>(kVulns, s, "vulnerability");
}
Method method_from_string(std::string_view s) { return lookup<Method>(kMethods, s, "method"); }
Damage damage_from_string(std::string_view s) { return lookup<Damage>(kDamages, s, "damage"); }

std::string to_string(const TaxonomyVector& v) {
  return "(" + std::string(to_string(v.element)) + ", " + std::string(to_string(v.vulnerability)) + ", " +
         std::string(to_string(v.method)) + ", " + std::string(to_string(v.damage)) + ")";
}

bool weaker_than_honest(const SessionOutcome& o) {
  const auto& got = o.negotiated;
  const auto& honest = o.honest;
  if (honest.layer_present && !got.layer_present) return true;
  if (got.version && honest.version && *got.version < *honest.version) return true;
  if (ranked_lower_by_both(o.client_suite_preference, o.server_suite_preference, got.suite, honest.suite))
    return true;
  return ranked_lower_by_both(o.client_group_preference, o.server_group_preference, got.group, honest.group);
}

Damage evaluate_damage(const SessionOutcome& outcome) {
  if (outcome.goals.any_broken()) return Damage::Broken;
  if (outcome.completed && weaker_than_honest(outcome)) return Damage::Weakened;
  return Damage::None;
}

const std::vector<std::pair<int, TaxonomyVector>>& ground_truth() {
  using E = Element;
  using V = Vulnerability;
  using M = Method;
  using D = Damage;
  static const std::vector<std::pair<int, TaxonomyVector>> rows = {
      {1, {E::Algorithm, V::Design, M::Modification, D::Broken}},
      {2, {E::Version, V::Design, M::Modification, D::Broken}},
      {3, {E::Algorithm, V::Design, M::Modification, D::Broken}},
      {4, {E::Algorithm, V::Design, M::Modification, D::Broken}},
      {5, {E::Version, V::Design, M::Modification, D::Broken}},
      {6, {E::Version, V::Implementation, M::Dropping, D::Broken}},
      {7, {E::Algorithm, V::Implementation, M::Modification, D::Broken}},
      {8, {E::Algorithm, V::TrustModel, M::Modification, D::Broken}},
      {9, {E::Algorithm, V::Implementation, M::Dropping, D::Weakened}},
      {10, {E::Algorithm, V::Design, M::Modification, D::Broken}},
      {11, {E::Layer, V::Design, M::Modification, D::Broken}},
      {12, {E::Layer, V::TrustModel, M::Injection, D::Broken}},
      {13, {E::Version, V::Design, M::Modification, D::Broken}},
      {14, {E::Version, V::Implementation, M::Dropping, D::Broken}},
      {15, {E::Algorithm, V::Design, M::Injection, D::Weakened}},
  };
  return rows;
}

TaxonomyVector ground_truth_vector(int id) {
  for (const auto& [row, v] : ground_truth()) {
    if (row == id) return v;
  }
  throw NotFound("no attack with id " + std::to_string(id));
}

std::vector<ActionKind> trace_methods(const std::vector<TraceEvent>& trace) {
  std::set<ActionKind> seen;
  for (const auto& e : trace) {
    if (e.kind == EventKind::Message && e.action != ActionKind::Forward) seen.insert(e.action);
  }
  return {seen.begin(), seen.end()};
}

bool method_consistent(Method declared, const std::vector<TraceEvent>& trace) {
  ActionKind want = ActionKind::Modify;
  if (declared == Method::Dropping) want = ActionKind::Drop;
  if (declared == Method::Injection) want = ActionKind::Inject;
  auto kinds = trace_methods(trace);
  return kinds.size() == 1 && kinds.front() == want;
}

ClassificationReport verify_classification(int id, const SessionOutcome& outcome) {
  return verify_classification(id, ground_truth_vector(id), outcome);
}

ClassificationReport verify_classification(int id, const TaxonomyVector& declared, const SessionOutcome& outcome) {
  ClassificationReport r;
  r.id = id;
  r.declared = declared;
  r.observed_damage = evaluate_damage(outcome);
  r.damage_match = r.observed_damage == r.declared.damage;
  r.method_match = method_consistent(r.declared.method, outcome.trace);
  r.element_note = "element " + std::string(to_string(r.declared.element)) + " and vulnerability " +
                   std::string(to_string(r.declared.vulnerability)) + " are declared, not inferred";
  return r;
}

}  // namespace downgrade
