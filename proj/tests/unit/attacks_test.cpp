#include <gtest/gtest.h>

#include "downgrade/attacks.hpp"

using namespace downgrade;

class EachAttack : public ::testing::TestWithParam<int> {};

TEST_P(EachAttack, ReproducesDeclaredVector) {
  const auto run = run_attack(GetParam());
  EXPECT_TRUE(run.report.damage_match) << to_string(run.report.observed_damage);
  EXPECT_TRUE(run.report.method_match);
  EXPECT_EQ(run.report.observed_damage, ground_truth_vector(GetParam()).damage);
}

TEST_P(EachAttack, PatchDefeatsIt) {
  const auto run = run_attack(GetParam());
  EXPECT_NE(run.patched_damage, Damage::Broken);
  EXPECT_TRUE(run.patched_damage == Damage::None || run.patched.aborted.has_value());
  EXPECT_TRUE(run.ok());
}

TEST_P(EachAttack, BrokenMeansReplayableWitness) {
  const auto run = run_attack(GetParam());
  if (run.report.observed_damage != Damage::Broken) {
    EXPECT_FALSE(run.vulnerable.goals.any_broken());
    return;
  }
  const auto& g = run.vulnerable.goals;
  const std::string witness = g.secrecy.broken ? g.secrecy.witness : g.authentication.witness;
  EXPECT_FALSE(witness.empty());
}

TEST_P(EachAttack, OtherSeedsAgree) {
  for (std::uint64_t seed : {2u, 99u, 12345u}) {
    EXPECT_TRUE(run_attack(GetParam(), seed).ok()) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Registry, EachAttack, ::testing::Range(1, 16));

TEST(Registry, FifteenEntriesInOrder) {
  const auto& reg = attack_registry();
  ASSERT_EQ(reg.size(), 15u);
  for (std::size_t i = 0; i < reg.size(); ++i) {
    EXPECT_EQ(reg[i].id, static_cast<int>(i + 1));
    EXPECT_EQ(reg[i].declared, ground_truth_vector(reg[i].id));
    EXPECT_FALSE(reg[i].patch.empty());
  }
  EXPECT_THROW(get_attack(16), NotFound);
}

TEST(Registry, TheoreticalMarkers) {
  for (int id : {1, 2, 3, 5, 11, 12, 13, 14, 15}) {
    EXPECT_TRUE(get_attack(id).theoretical) << id;
    EXPECT_FALSE(get_attack(id).notes.empty()) << id;
  }
  for (int id : {4, 6, 7, 8, 9, 10}) EXPECT_FALSE(get_attack(id).theoretical) << id;
}

TEST(Logjam, ExportGroupIsWhatBreaks) {
  // Same scenario with only strong groups on the server: nothing to recover.
  auto s = vulnerable_scenario(10);
  s.server.groups = {"ffdhe-strong"};
  EXPECT_NE(evaluate_damage(run_session(s)), Damage::Broken);
}

TEST(Drown, BudgetBelowOracleCostDefeatsIt) {
  auto s = vulnerable_scenario(8);
  s.adversary->budget = s.adversary->costs.bleichenbacher - 1;
  EXPECT_NE(evaluate_damage(run_session(s)), Damage::Broken);
}

TEST(Sloth, StrongTranscriptHashAborts) {
  auto s = vulnerable_scenario(5);
  s.client.strong_transcript_hash = true;
  s.server.strong_transcript_hash = true;
  const auto out = run_session(s);
  ASSERT_TRUE(out.aborted);
  EXPECT_EQ(out.aborted->reason, AbortReason::FinishedMismatch);
}
