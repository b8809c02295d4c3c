#include <gtest/gtest.h>

#include "downgrade/app_layer.hpp"

using namespace downgrade;

namespace {

struct SmtpPair {
  SmtpConfig client_cfg{Role::Client};
  SmtpConfig server_cfg{Role::Server};
  SmtpState client = smtp_initial_state(Role::Client);
  SmtpState server = smtp_initial_state(Role::Server);

  // Drives the exchange; `filter` may rewrite server->client messages.
  void run(const std::function<void(Message&)>& filter = {}) {
    auto out = smtp_step(client, client_cfg, Start{});
    client = out.state;
    std::vector<Message> to_server = out.outgoing;
    for (int round = 0; round < 10 && !to_server.empty(); ++round) {
      std::vector<Message> to_client;
      for (const auto& m : to_server) {
        auto r = smtp_step(server, server_cfg, m);
        server = r.state;
        to_client.insert(to_client.end(), r.outgoing.begin(), r.outgoing.end());
      }
      to_server.clear();
      for (auto m : to_client) {
        if (filter) filter(m);
        auto r = smtp_step(client, client_cfg, m);
        client = r.state;
        to_server.insert(to_server.end(), r.outgoing.begin(), r.outgoing.end());
      }
    }
  }
};

void strip_starttls(Message& m) {
  if (auto* caps = std::get_if<SmtpCapabilities>(&m)) {
    std::erase(caps->capabilities, std::string(kStartTls));
  }
}

}  // namespace

TEST(Smtp, HonestUpgradeReachesTunnel) {
  SmtpPair p;
  p.run();
  EXPECT_TRUE(p.client.in_tunnel());
  EXPECT_TRUE(p.server.in_tunnel());
}

TEST(Smtp, StrippedCapabilityFailOpenSendsPlain) {
  SmtpPair p;
  p.client_cfg.policy = PolicyMode::FailOpen;
  p.run(strip_starttls);
  EXPECT_EQ(p.client.phase, SmtpPhase::Plain);
  EXPECT_FALSE(p.client.aborted);
}

TEST(Smtp, StrippedCapabilityFailClosedAborts) {
  SmtpPair p;
  p.client_cfg.policy = PolicyMode::FailClosed;
  p.run(strip_starttls);
  ASSERT_TRUE(p.client.aborted);
  EXPECT_EQ(p.client.aborted->reason, AbortReason::UpgradeRefused);
}

TEST(Smtp, ServerWithoutStartTlsUnderFailClosed) {
  SmtpPair p;
  p.server_cfg.offers_starttls = false;
  p.run();
  EXPECT_TRUE(p.client.aborted);
}

TEST(Smtp, MessageClassification) {
  EXPECT_TRUE(is_smtp_message(SmtpEhlo{"x"}));
  EXPECT_FALSE(is_smtp_message(ClientHello{}));
  EXPECT_EQ(policy_mode_from_string(to_string(PolicyMode::FailOpen)), PolicyMode::FailOpen);
}

TEST(Proxy, ForwardPlaintextLeaksPayload) {
  ProxyScenario s;
  s.client.role = Role::Client;
  s.client.suites = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256"};
  s.client.groups = {"ec-strong"};
  s.client.trust_store = {"RootCA", "CorpProxyCA"};
  s.server = s.client;
  s.server.role = Role::Server;
  s.server.rsa_key = crypto::rsa_keygen(crypto::Strength::Strong, 1);
  s.payload = "GET / sid=1";
  s.seed = 4;
  const auto out = run_proxy_session(s);
  EXPECT_TRUE(out.client.complete());
  ASSERT_FALSE(out.proxy_reads.empty());
  EXPECT_EQ(out.proxy_reads.front().plaintext, "GET / sid=1");
  EXPECT_EQ(out.server_plaintext, std::vector<std::string>{"GET / sid=1"});
  EXPECT_FALSE(out.server_has_tls());
}

TEST(Proxy, UntrustedProxyRejected) {
  ProxyScenario s;
  s.client.role = Role::Client;
  s.client.suites = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256"};
  s.client.groups = {"ec-strong"};
  s.server = s.client;
  s.server.role = Role::Server;
  s.server.rsa_key = crypto::rsa_keygen(crypto::Strength::Strong, 1);
  s.payload = "GET / sid=1";
  const auto out = run_proxy_session(s);
  ASSERT_TRUE(out.client.aborted);
  EXPECT_EQ(out.client.aborted->reason, AbortReason::CertRejected);
  EXPECT_TRUE(out.proxy_reads.empty());
}

TEST(Proxy, ReencryptChoosesWeakestServerSuite) {
  EndpointConfig server;
  server.role = Role::Server;
  server.min_version = Version::Tls10;
  server.suites = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256", "RSA_WITH_NULL_SHA"};
  EXPECT_EQ(weakest_suite(server), "RSA_WITH_NULL_SHA");
}
