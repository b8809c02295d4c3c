#include <gtest/gtest.h>

#include "downgrade/harness.hpp"

using namespace downgrade;

namespace {

EndpointConfig endpoint(Role role, Version min, Version max, std::vector<std::string> suites,
                        std::vector<std::string> groups = {"ec-strong", "ffdhe-strong"}) {
  EndpointConfig c;
  c.role = role;
  c.min_version = min;
  c.max_version = max;
  c.suites = std::move(suites);
  c.groups = std::move(groups);
  return c;
}

Scenario pair(EndpointConfig client, EndpointConfig server, std::uint64_t seed = 3) {
  Scenario s;
  s.name = "unit";
  s.client = std::move(client);
  s.server = std::move(server);
  s.seed = seed;
  return s;
}

const std::vector<std::string> kGcm = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256", "RSA_WITH_AES_128_GCM_SHA256"};

}  // namespace

TEST(Handshake, Tls12CompletesWithAgreedSecrets) {
  const auto run = run_session_detailed(pair(endpoint(Role::Client, Version::Tls10, Version::Tls12, kGcm),
                                             endpoint(Role::Server, Version::Tls10, Version::Tls12, kGcm)));
  ASSERT_TRUE(run.client.complete());
  ASSERT_TRUE(run.server.complete());
  EXPECT_EQ(*run.client.secrets, *run.server.secrets);
  EXPECT_EQ(run.client.chosen->version, Version::Tls12);
  EXPECT_EQ(run.client.chosen->suite, kGcm.front());
  EXPECT_EQ(run.server.received_app, run.client.sent_app);
  EXPECT_EQ(evaluate_damage(run.outcome), Damage::None);
}

TEST(Handshake, ServerPreferenceWins) {
  auto server = endpoint(Role::Server, Version::Tls12, Version::Tls12, {kGcm[1], kGcm[0]});
  const auto run = run_session_detailed(pair(endpoint(Role::Client, Version::Tls12, Version::Tls12, kGcm), server));
  ASSERT_TRUE(run.client.complete());
  EXPECT_EQ(run.client.chosen->suite, kGcm[1]);
}

TEST(Handshake, Tls13CompletesAndSignsTranscript) {
  const std::vector<std::string> suites = {"TLS_AES_128_GCM_SHA256"};
  const auto run = run_session_detailed(
      pair(endpoint(Role::Client, Version::Tls12, Version::Tls13Final, suites, {"ec-strong"}),
           endpoint(Role::Server, Version::Tls12, Version::Tls13Final, suites, {"ec-strong"})));
  ASSERT_TRUE(run.client.complete());
  EXPECT_EQ(run.client.chosen->version, Version::Tls13Final);
  EXPECT_EQ(run.client.chosen->group, "ec-strong");
}

TEST(Handshake, HelloRetryWhenKeyShareUnacceptable) {
  const std::vector<std::string> suites = {"TLS_AES_128_GCM_SHA256"};
  const auto run = run_session_detailed(
      pair(endpoint(Role::Client, Version::Tls13Final, Version::Tls13Final, suites, {"ec-strong", "ec-strong-b"}),
           endpoint(Role::Server, Version::Tls13Final, Version::Tls13Final, suites, {"ec-strong-b"})));
  ASSERT_TRUE(run.client.complete());
  EXPECT_TRUE(run.client.hrr_seen);
  EXPECT_EQ(run.client.chosen->group, "ec-strong-b");
}

TEST(Handshake, NoCommonVersion) {
  const auto out = run_session(pair(endpoint(Role::Client, Version::Ssl30, Version::Tls10, kGcm),
                                    endpoint(Role::Server, Version::Tls12, Version::Tls12, kGcm)));
  ASSERT_TRUE(out.aborted);
  EXPECT_FALSE(out.completed);
}

TEST(Handshake, NoCommonSuite) {
  const auto out = run_session(pair(endpoint(Role::Client, Version::Tls12, Version::Tls12, {kGcm[0]}),
                                    endpoint(Role::Server, Version::Tls12, Version::Tls12, {kGcm[1]})));
  ASSERT_TRUE(out.aborted);
}

TEST(Handshake, UntrustedCertificateRejected) {
  auto client = endpoint(Role::Client, Version::Tls12, Version::Tls12, kGcm);
  client.trust_store = {"SomeOtherCA"};
  const auto out = run_session(pair(client, endpoint(Role::Server, Version::Tls12, Version::Tls12, kGcm)));
  ASSERT_TRUE(out.aborted);
  EXPECT_EQ(out.aborted->reason, AbortReason::CertRejected);
}

TEST(Handshake, SameSeedSameTrace) {
  const auto s = pair(endpoint(Role::Client, Version::Tls12, Version::Tls12, kGcm),
                      endpoint(Role::Server, Version::Tls12, Version::Tls12, kGcm), 17);
  EXPECT_EQ(trace_digest(run_session(s).trace), trace_digest(run_session(s).trace));
  auto other = s;
  other.seed = 18;
  EXPECT_NE(trace_digest(run_session(s).trace), trace_digest(run_session(other).trace));
}

TEST(Config, ValidationRejectsBadEndpoints) {
  auto c = endpoint(Role::Client, Version::Tls12, Version::Tls10, kGcm);
  EXPECT_THROW(c.validate(), ConfigError);
  c = endpoint(Role::Client, Version::Tls12, Version::Tls12, {});
  EXPECT_THROW(c.validate(), ConfigError);
  c = endpoint(Role::Client, Version::Tls12, Version::Tls12, {"NOT_A_SUITE"});
  EXPECT_THROW(c.validate(), ConfigError);
  c = endpoint(Role::Client, Version::Tls12, Version::Tls12, kGcm, {"no-such-group"});
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, PrepareRejectsSwappedRoles) {
  auto s = pair(endpoint(Role::Server, Version::Tls12, Version::Tls12, kGcm),
                endpoint(Role::Server, Version::Tls12, Version::Tls12, kGcm));
  EXPECT_THROW(prepare(s), ConfigError);
}

TEST(Sentinel, EncodesNegotiatedVersion) {
  Bytes nonce(24, 0x11);
  const auto tail = sentinel_tail(Version::Tls12);
  nonce.insert(nonce.end(), tail.begin(), tail.end());
  EXPECT_EQ(read_sentinel(nonce), Version::Tls12);
  EXPECT_FALSE(check_sentinel(nonce, Version::Tls13Final));
  EXPECT_TRUE(check_sentinel(nonce, Version::Tls12));
  EXPECT_TRUE(check_sentinel(Bytes(32, 0x11), Version::Tls13Final));
}

TEST(HelloRetry, PolicyByVersion) {
  EXPECT_TRUE(HelloRetryPolicy::for_version(Version::Tls13Draft10).restart_transcript_on_hrr);
  EXPECT_FALSE(HelloRetryPolicy::for_version(Version::Tls13Final).restart_transcript_on_hrr);
  const std::vector<Bytes> log = {Bytes{1}, Bytes{2}};
  EXPECT_TRUE(apply_hrr_policy(log, {true}).empty());
  EXPECT_EQ(apply_hrr_policy(log, {false}), log);
}

TEST(HelloRetry, GroupDecision) {
  ClientHello ch;
  ch.extensions.key_share = {{"ec-strong", 5}};
  ch.extensions.supported_groups = {"ec-strong", "ec-strong-b"};
  auto server = endpoint(Role::Server, Version::Tls13Final, Version::Tls13Final, {"TLS_AES_128_GCM_SHA256"},
                         {"ec-strong-b"});
  auto d = negotiate_group_with_hrr(ch, server);
  ASSERT_TRUE(d);
  EXPECT_TRUE(d->needs_hrr);
  EXPECT_EQ(d->group, "ec-strong-b");
  server.groups = {"ec-strong"};
  d = negotiate_group_with_hrr(ch, server);
  ASSERT_TRUE(d);
  EXPECT_FALSE(d->needs_hrr);
  server.groups = {"ffdhe-strong"};
  EXPECT_FALSE(negotiate_group_with_hrr(ch, server));
}

TEST(KeyParams, ReadUnderReceiverLabel) {
  const auto params = encode_params({8388287, 9, 1234});
  const auto dh = interpret_key_params(params, KeyLabel::FiniteFieldDh, KeyLabel::FiniteFieldDh);
  ASSERT_TRUE(std::holds_alternative<crypto::DhPublicKey>(dh));
  EXPECT_EQ(std::get<crypto::DhPublicKey>(dh).value, 1234u);
  EXPECT_THROW(interpret_key_params(Bytes{0xff}, KeyLabel::FiniteFieldDh, KeyLabel::FiniteFieldDh), KeyParamError);
}

TEST(FinishedHash, StrongFromTls12) {
  EndpointConfig c;
  EXPECT_EQ(finished_hash(Version::Tls12, c), crypto::HashAlgo::Strong);
  EXPECT_EQ(finished_hash(Version::Tls11, c), crypto::HashAlgo::WeakMd5Sha1);
  c.strong_transcript_hash = true;
  EXPECT_EQ(finished_hash(Version::Tls11, c), crypto::HashAlgo::Strong);
}
