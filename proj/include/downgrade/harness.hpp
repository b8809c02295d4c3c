#pragma once

// Experiment runner: drives two endpoints and an optional adversary over an
// in-order simulated network and turns the run into a SessionOutcome.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "downgrade/adversary.hpp"
#include "downgrade/app_layer.hpp"
#include "downgrade/taxonomy.hpp"

namespace downgrade {

enum class AppKind { Tls, Smtp, Proxy };

std::string_view to_string(AppKind k);
AppKind app_kind_from_string(std::string_view s);

/// How the server's long-term RSA key is generated from the run seed.
struct KeySpec {
  crypto::Strength strength = crypto::Strength::Strong;
  bool shared_with_sslv2 = false;

  bool operator==(const KeySpec&) const = default;
};

struct SmtpContext {
  PolicyMode policy = PolicyMode::FailClosed;
  bool offers_starttls = true;
};

struct ProxyContext {
  std::string issuer = "CorpProxyCA";
  ProxyBehavior behavior = ProxyBehavior::ForwardPlaintext;
};

struct Scenario {
  std::string name;
  EndpointConfig client;
  EndpointConfig server;  // rsa_key is replaced by one generated from server_key and seed
  KeySpec server_key;
  AppKind app = AppKind::Tls;
  SmtpContext smtp;
  ProxyContext proxy;
  std::string payload = "GET /account HTTP/1.1\r\nCookie: sid=7f3a9c21e4";
  std::string response = "HTTP/1.1 200 OK";
  std::string secret_marker = "sid=";
  std::optional<AdversaryScript> adversary;
  std::uint64_t seed = 1;
};

/// Scenario with both configs validated and the server key materialized.
/// Throws ConfigError.
Scenario prepare(Scenario scenario);

struct SessionRun {
  SessionOutcome outcome;
  EndpointState client;
  EndpointState server;
  KnowledgeSet knowledge;
  std::uint64_t budget_spent = 0;
  std::uint64_t connections = 1;
};

/// Full run, endpoint states included. Throws ConfigError for malformed scenarios.
SessionRun run_session_detailed(const Scenario& scenario);
SessionOutcome run_session(const Scenario& scenario);

}  // namespace downgrade
