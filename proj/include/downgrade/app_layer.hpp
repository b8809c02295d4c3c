#pragma once

// SMTP with STARTTLS, and HTTPS through an intercepting proxy.

#include <optional>
#include <string>
#include <vector>

#include "downgrade/handshake.hpp"
#include "downgrade/trace.hpp"

namespace downgrade {

enum class PolicyMode { FailOpen, FailClosed };

std::string_view to_string(PolicyMode p);
PolicyMode policy_mode_from_string(std::string_view s);

enum class SmtpPhase { Idle, WaitCapabilities, WaitReady, WaitEhlo, WaitCommand, Tunnel, Plain, Aborted };

std::string_view to_string(SmtpPhase p);

inline constexpr std::string_view kStartTls = "STARTTLS";

struct SmtpConfig {
  Role role = Role::Client;
  PolicyMode policy = PolicyMode::FailClosed;  // client: what to do when the upgrade fails
  bool offers_starttls = true;                  // server: advertises STARTTLS
  std::string domain = "mail.example";
};

struct SmtpState {
  Role role = Role::Client;
  SmtpPhase phase = SmtpPhase::Idle;
  std::optional<Abort> aborted;
  std::vector<std::string> mail_sent;      // client: mail sent without TLS
  std::vector<std::string> mail_received;  // server: mail received without TLS

  bool in_tunnel() const { return phase == SmtpPhase::Tunnel; }
};

struct SmtpStepResult {
  SmtpState state;
  std::vector<Message> outgoing;
};

SmtpState smtp_initial_state(Role role);

/// Client inputs: Start, Timeout, SMTP messages, SendApp (mail, only in the
/// plaintext phase). Server inputs: SMTP messages and PlaintextData.
SmtpStepResult smtp_step(SmtpState state, const SmtpConfig& config, const Input& input);

bool is_smtp_message(const Message& m);

// ---------------------------------------------------------------------------
// Intercepting proxy

enum class ProxyBehavior { ReencryptWeak, ForwardPlaintext };

std::string_view to_string(ProxyBehavior b);
ProxyBehavior proxy_behavior_from_string(std::string_view s);

struct ProxyScenario {
  EndpointConfig client;
  EndpointConfig server;
  std::string proxy_issuer = "CorpProxyCA";
  ProxyBehavior behavior = ProxyBehavior::ForwardPlaintext;
  std::string payload;
  std::uint64_t seed = 0;
};

/// One application record the proxy decrypted as the client's TLS peer.
struct ProxyRead {
  std::string plaintext;
  Bytes key;
  Bytes ciphertext;
  std::uint64_t seq = 0;
  bool null_cipher = false;
};

struct ProxyOutcome {
  EndpointState client;
  EndpointState proxy_front;                 // proxy endpoint facing the client
  std::optional<EndpointState> proxy_back;   // proxy endpoint facing the server (REENCRYPT_WEAK)
  std::optional<EndpointState> server;       // real server TLS endpoint (REENCRYPT_WEAK)
  std::vector<std::string> server_plaintext;  // cleartext the server received (FORWARD_PLAINTEXT)
  std::vector<ProxyRead> proxy_reads;
  std::vector<TraceEvent> trace;

  bool server_has_tls() const { return server.has_value() && server->complete(); }
};

/// The proxy terminates the client's TLS with a certificate from its own
/// issuer; it reads the payload iff the client accepted that certificate.
ProxyOutcome run_proxy_session(const ProxyScenario& scenario);

/// Weakest suite in the server's list: NULL, then export, then CBC, then AEAD.
std::string weakest_suite(const EndpointConfig& server);

}  // namespace downgrade
