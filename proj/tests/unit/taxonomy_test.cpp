#include <gtest/gtest.h>

#include "downgrade/taxonomy.hpp"

using namespace downgrade;

namespace {

using E = Element;
using V = Vulnerability;
using M = Method;
using D = Damage;

// Ground truth transcribed by hand, row by row.
const TaxonomyVector kExpected[15] = {
    {E::Algorithm, V::Design, M::Modification, D::Broken},
    {E::Version, V::Design, M::Modification, D::Broken},
    {E::Algorithm, V::Design, M::Modification, D::Broken},
    {E::Algorithm, V::Design, M::Modification, D::Broken},
    {E::Version, V::Design, M::Modification, D::Broken},
    {E::Version, V::Implementation, M::Dropping, D::Broken},
    {E::Algorithm, V::Implementation, M::Modification, D::Broken},
    {E::Algorithm, V::TrustModel, M::Modification, D::Broken},
    {E::Algorithm, V::Implementation, M::Dropping, D::Weakened},
    {E::Algorithm, V::Design, M::Modification, D::Broken},
    {E::Layer, V::Design, M::Modification, D::Broken},
    {E::Layer, V::TrustModel, M::Injection, D::Broken},
    {E::Version, V::Design, M::Modification, D::Broken},
    {E::Version, V::Implementation, M::Dropping, D::Broken},
    {E::Algorithm, V::Design, M::Injection, D::Weakened},
};

SessionOutcome completed_outcome() {
  SessionOutcome o;
  o.completed = true;
  o.negotiated = {Version::Tls12, "ECDHE_RSA_WITH_AES_128_GCM_SHA256", "ec-strong", true};
  o.honest = o.negotiated;
  o.client_suite_preference = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256", "RSA_WITH_AES_128_GCM_SHA256"};
  o.server_suite_preference = o.client_suite_preference;
  o.client_group_preference = {"ec-strong", "ec-strong-b"};
  o.server_group_preference = o.client_group_preference;
  return o;
}

TraceEvent event(ActionKind a) {
  TraceEvent e;
  e.kind = EventKind::Message;
  e.action = a;
  return e;
}

}  // namespace

TEST(Table, MatchesTranscription) {
  ASSERT_EQ(ground_truth().size(), 15u);
  for (int id = 1; id <= 15; ++id) EXPECT_EQ(ground_truth_vector(id), kExpected[id - 1]) << "row " << id;
  EXPECT_THROW(ground_truth_vector(0), NotFound);
  EXPECT_THROW(ground_truth_vector(16), NotFound);
}

TEST(Table, TwoWeakenedRows) {
  int weakened = 0;
  for (const auto& [id, v] : ground_truth()) weakened += v.damage == D::Weakened;
  EXPECT_EQ(weakened, 2);
}

TEST(Names, RoundTrip) {
  for (auto e : {E::Algorithm, E::Version, E::Layer}) EXPECT_EQ(element_from_string(to_string(e)), e);
  for (auto v : {V::Implementation, V::Design, V::TrustModel}) EXPECT_EQ(vulnerability_from_string(to_string(v)), v);
  for (auto m : {M::Modification, M::Dropping, M::Injection}) EXPECT_EQ(method_from_string(to_string(m)), m);
  for (auto d : {D::None, D::Weakened, D::Broken}) EXPECT_EQ(damage_from_string(to_string(d)), d);
  EXPECT_EQ(to_string(V::TrustModel), "Trust-model");
  EXPECT_THROW(damage_from_string("Catastrophic"), NotFound);
}

TEST(Damage, HonestCompletionIsNone) { EXPECT_EQ(evaluate_damage(completed_outcome()), D::None); }

TEST(Damage, BrokenGoalWins) {
  auto o = completed_outcome();
  o.goals.secrecy = {true, "plaintext"};
  EXPECT_EQ(evaluate_damage(o), D::Broken);
}

TEST(Damage, LowerVersionWeakens) {
  auto o = completed_outcome();
  o.negotiated.version = Version::Tls11;
  EXPECT_EQ(evaluate_damage(o), D::Weakened);
}

TEST(Damage, SuiteRankedLowerByBothWeakens) {
  auto o = completed_outcome();
  o.negotiated.suite = "RSA_WITH_AES_128_GCM_SHA256";
  EXPECT_EQ(evaluate_damage(o), D::Weakened);
  // Ranked lower by only one side is not a downgrade.
  o.server_suite_preference = {"RSA_WITH_AES_128_GCM_SHA256", "ECDHE_RSA_WITH_AES_128_GCM_SHA256"};
  EXPECT_EQ(evaluate_damage(o), D::None);
}

TEST(Damage, GroupRankedLowerWeakens) {
  auto o = completed_outcome();
  o.negotiated.group = "ec-strong-b";
  EXPECT_EQ(evaluate_damage(o), D::Weakened);
}

TEST(Damage, LostLayerWeakens) {
  auto o = completed_outcome();
  o.negotiated.layer_present = false;
  EXPECT_TRUE(weaker_than_honest(o));
}

TEST(Damage, AbortWithoutLeakIsNone) {
  auto o = completed_outcome();
  o.completed = false;
  o.aborted = Abort{AbortReason::FinishedMismatch, ""};
  EXPECT_EQ(evaluate_damage(o), D::None);
}

TEST(Methods, ConsistencyRequiresExactlyDeclaredKind) {
  std::vector<TraceEvent> trace = {event(ActionKind::Forward), event(ActionKind::Modify)};
  EXPECT_TRUE(method_consistent(M::Modification, trace));
  EXPECT_FALSE(method_consistent(M::Dropping, trace));
  trace.push_back(event(ActionKind::Drop));
  EXPECT_FALSE(method_consistent(M::Modification, trace));
  EXPECT_FALSE(method_consistent(M::Modification, {event(ActionKind::Forward)}));
  EXPECT_EQ(trace_methods(trace).size(), 2u);
}

TEST(Classification, ReportsMismatch) {
  auto o = completed_outcome();
  o.trace = {event(ActionKind::Drop)};
  const auto r = verify_classification(9, o);
  EXPECT_FALSE(r.damage_match);
  EXPECT_TRUE(r.method_match);
  EXPECT_EQ(r.declared, kExpected[8]);
}
