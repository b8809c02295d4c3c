#include "downgrade/app_layer.hpp"

#include <algorithm>
#include <deque>

namespace downgrade {

std::string_view to_string(PolicyMode p) { return p == PolicyMode::FailOpen ? "FAIL_OPEN" : "FAIL_CLOSED"; }

PolicyMode policy_mode_from_string(std::string_view s) {
  if (s == "FAIL_OPEN") return PolicyMode::FailOpen;
  if (s == "FAIL_CLOSED") return PolicyMode::FailClosed;
  throw NotFound("unknown policy '" + std::string(s) + "'");
}

std::string_view to_string(SmtpPhase p) {
  switch (p) {
    case SmtpPhase::Idle: return "Idle";
    case SmtpPhase::WaitCapabilities: return "WaitCapabilities";
    case SmtpPhase::WaitReady: return "WaitReady";
    case SmtpPhase::WaitEhlo: return "WaitEhlo";
    case SmtpPhase::WaitCommand: return "WaitCommand";
    case SmtpPhase::Tunnel: return "Tunnel";
    case SmtpPhase::Plain: return "Plain";
    case SmtpPhase::Aborted: return "Aborted";
  }
  return "?";
}

std::string_view to_string(ProxyBehavior b) {
  return b == ProxyBehavior::ReencryptWeak ? "REENCRYPT_WEAK" : "FORWARD_PLAINTEXT";
}

ProxyBehavior proxy_behavior_from_string(std::string_view s) {
  if (s == "REENCRYPT_WEAK") return ProxyBehavior::ReencryptWeak;
  if (s == "FORWARD_PLAINTEXT") return ProxyBehavior::ForwardPlaintext;
  throw NotFound("unknown proxy behavior '" + std::string(s) + "'");
}

bool is_smtp_message(const Message& m) {
  switch (type_of(m)) {
    case MessageType::Ehlo:
    case MessageType::Capabilities:
    case MessageType::StartTls:
    case MessageType::Ready:
    case MessageType::Reject:
    case MessageType::Plaintext:
      return true;
    default:
      return false;
  }
}

SmtpState smtp_initial_state(Role role) {
  SmtpState s;
  s.role = role;
  s.phase = role == Role::Client ? SmtpPhase::Idle : SmtpPhase::WaitEhlo;
  return s;
}

namespace {

SmtpStepResult smtp_abort(SmtpState s, AbortReason reason, std::string detail) {
  s.phase = SmtpPhase::Aborted;
  s.aborted = Abort{reason, std::move(detail)};
  return {std::move(s), {}};
}

// The upgrade did not happen: continue in plaintext or give up.
SmtpStepResult upgrade_failed(SmtpState s, const SmtpConfig& config, const std::string& why) {
  if (config.policy == PolicyMode::FailClosed) return smtp_abort(std::move(s), AbortReason::UpgradeRefused, why);
  s.phase = SmtpPhase::Plain;
  return {std::move(s), {}};
}

SmtpStepResult smtp_client(SmtpState s, const SmtpConfig& config, const Input& input) {
  if (std::holds_alternative<Start>(input)) {
    if (s.phase != SmtpPhase::Idle) return smtp_abort(std::move(s), AbortReason::ProtocolError, "start twice");
    s.phase = SmtpPhase::WaitCapabilities;
    return {std::move(s), {SmtpEhlo{config.domain}}};
  }
  if (std::holds_alternative<Timeout>(input)) {
    if (s.phase == SmtpPhase::WaitCapabilities || s.phase == SmtpPhase::WaitReady)
      return upgrade_failed(std::move(s), config, "no reply during STARTTLS negotiation");
    return {std::move(s), {}};
  }
  if (const auto* app = std::get_if<SendApp>(&input)) {
    if (s.phase != SmtpPhase::Plain) return {std::move(s), {}};
    s.mail_sent.push_back(app->payload);
    return {std::move(s), {PlaintextData{app->payload}}};
  }
  const auto& m = std::get<Message>(input);
  if (s.phase == SmtpPhase::WaitCapabilities) {
    if (const auto* caps = std::get_if<SmtpCapabilities>(&m)) {
      const auto& list = caps->capabilities;
      if (std::find(list.begin(), list.end(), kStartTls) == list.end())
        return upgrade_failed(std::move(s), config, "server does not offer STARTTLS");
      s.phase = SmtpPhase::WaitReady;
      return {std::move(s), {SmtpStartTls{}}};
    }
  }
  if (s.phase == SmtpPhase::WaitReady) {
    if (std::holds_alternative<SmtpReady>(m)) {
      s.phase = SmtpPhase::Tunnel;
      return {std::move(s), {}};
    }
    if (const auto* rej = std::get_if<SmtpReject>(&m))
      return upgrade_failed(std::move(s), config, "STARTTLS rejected: " + rej->reason);
  }
  return smtp_abort(std::move(s), AbortReason::ProtocolError,
                    "unexpected " + std::string(to_string(type_of(m))) + " in " + std::string(to_string(s.phase)));
}

SmtpStepResult smtp_server(SmtpState s, const SmtpConfig& config, const Input& input) {
  const auto* m = std::get_if<Message>(&input);
  if (!m) return {std::move(s), {}};
  if (s.phase == SmtpPhase::WaitEhlo && std::holds_alternative<SmtpEhlo>(*m)) {
    SmtpCapabilities caps{{"PIPELINING", "8BITMIME"}};
    if (config.offers_starttls) caps.capabilities.emplace_back(kStartTls);
    s.phase = SmtpPhase::WaitCommand;
    return {std::move(s), {std::move(caps)}};
  }
  if (s.phase == SmtpPhase::WaitCommand) {
    if (const auto* cmd = std::get_if<SmtpStartTls>(m)) {
      if (cmd->verb != kStartTls || !config.offers_starttls) return {std::move(s), {SmtpReject{"command unrecognized"}}};
      s.phase = SmtpPhase::Tunnel;
      return {std::move(s), {SmtpReady{}}};
    }
    if (const auto* mail = std::get_if<PlaintextData>(m)) {
      s.mail_received.push_back(mail->payload);
      return {std::move(s), {}};
    }
  }
  return smtp_abort(std::move(s), AbortReason::ProtocolError,
                    "unexpected " + std::string(to_string(type_of(*m))) + " in " + std::string(to_string(s.phase)));
}

}  // namespace

SmtpStepResult smtp_step(SmtpState state, const SmtpConfig& config, const Input& input) {
  if (state.phase == SmtpPhase::Aborted) return {std::move(state), {}};
  return state.role == Role::Client ? smtp_client(std::move(state), config, input)
                                    : smtp_server(std::move(state), config, input);
}

std::string weakest_suite(const EndpointConfig& server) {
  auto weakness = [](const CipherSuite& cs) {
    int enc = 0;
    switch (cs.enc) {
      case BulkCipher::Null: enc = 0; break;
      case BulkCipher::ExportCipher: enc = 1; break;
      case BulkCipher::CbcBlock: enc = 2; break;
      case BulkCipher::StrongAead: enc = 3; break;
    }
    return enc * 4 + (cs.export_kx() ? 0 : 2) + (cs.forward_secret() ? 1 : 0);
  };
  std::string best;
  int best_score = 1 << 20;
  for (const auto& name : server.suites) {
    const auto& cs = suite_by_name(name);
    if (is_tls13(cs.min_version)) continue;
    if (int w = weakness(cs); w < best_score) {
      best_score = w;
      best = name;
    }
  }
  return best.empty() ? server.suites.front() : best;
}

namespace {

struct Peer {
  EndpointState* state;
  const EndpointConfig* config;
  bool proxy;  // messages from this side are the proxy's own
};

// Runs a direct connection between two endpoints until neither has anything
// to say. Every message involving the proxy is recorded as an injection.
void pump(Peer client, Peer server, std::uint64_t connection, std::vector<TraceEvent>& trace) {
  const crypto::CollisionTable none;
  std::deque<std::pair<Direction, Message>> queue;
  auto enqueue = [&](Direction d, std::vector<Message>& out) {
    for (auto& m : out) queue.emplace_back(d, std::move(m));
  };
  auto r = client_step(std::move(*client.state), *client.config, Start{}, none);
  *client.state = std::move(r.state);
  enqueue(Direction::ClientToServer, r.outgoing);
  bool timed_out = false;
  for (int guard = 0; guard < 256; ++guard) {
    if (queue.empty()) {
      if (client.state->complete() || client.state->is_aborted() || timed_out) break;
      r = client_step(std::move(*client.state), *client.config, Timeout{}, none);
      *client.state = std::move(r.state);
      timed_out = true;
      continue;
    }
    auto [dir, m] = std::move(queue.front());
    queue.pop_front();
    trace.push_back(message_event(connection, dir, ActionKind::Inject, m, &m,
                                  dir == Direction::ClientToServer && server.proxy ? "terminated by proxy"
                                                                                   : "sent by proxy"));
    if (dir == Direction::ClientToServer) {
      auto sr = server_step(std::move(*server.state), *server.config, m, none);
      *server.state = std::move(sr.state);
      enqueue(Direction::ServerToClient, sr.outgoing);
    } else {
      r = client_step(std::move(*client.state), *client.config, m, none);
      *client.state = std::move(r.state);
      enqueue(Direction::ClientToServer, r.outgoing);
    }
  }
}

}  // namespace

ProxyOutcome run_proxy_session(const ProxyScenario& sc) {
  EndpointConfig front = sc.server;
  front.role = Role::Server;
  front.cert_issuer = sc.proxy_issuer;
  front.rsa_key = crypto::rsa_keygen(crypto::Strength::Strong, sc.seed ^ 0x9e3779b97f4a7c15ULL);

  ProxyOutcome out{initial_state(Role::Client, sc.seed), initial_state(Role::Server, sc.seed + 1),
                   std::nullopt, std::nullopt, {}, {}, {}};
  pump({&out.client, &sc.client, false}, {&out.proxy_front, &front, true}, 0, out.trace);
  if (!out.client.complete() || !out.proxy_front.complete()) return out;

  const crypto::CollisionTable none;
  auto sent = client_step(std::move(out.client), sc.client, SendApp{sc.payload}, none);
  out.client = std::move(sent.state);
  for (const auto& m : sent.outgoing) {
    const auto& rec = std::get<ApplicationData>(m);
    out.trace.push_back(message_event(0, Direction::ClientToServer, ActionKind::Inject, m, &m, "terminated by proxy"));
    auto pr = server_step(std::move(out.proxy_front), front, m, none);
    out.proxy_front = std::move(pr.state);
    const auto& suite = suite_by_name(out.proxy_front.chosen->suite);
    out.proxy_reads.push_back({out.proxy_front.received_app.back(), out.proxy_front.secrets->k_client, rec.ciphertext,
                               rec.seq, suite.enc == BulkCipher::Null});
  }

  if (sc.behavior == ProxyBehavior::ForwardPlaintext) {
    for (const auto& read : out.proxy_reads) {
      Message clear = PlaintextData{read.plaintext};
      out.trace.push_back(message_event(1, Direction::ClientToServer, ActionKind::Inject, clear, &clear,
                                        "forwarded without TLS"));
      out.server_plaintext.push_back(read.plaintext);
    }
    return out;
  }

  EndpointConfig back;
  back.role = Role::Client;
  back.min_version = sc.server.min_version;
  back.max_version = std::min(sc.server.max_version, Version::Tls12);
  back.suites = {weakest_suite(sc.server)};
  back.groups = sc.server.groups;
  back.trust_store = {sc.server.cert_issuer};
  back.bugs = {BugFlag::AcceptsArbitraryGroups};
  out.proxy_back = initial_state(Role::Client, sc.seed + 2);
  out.server = initial_state(Role::Server, sc.seed + 3);
  pump({&*out.proxy_back, &back, true}, {&*out.server, &sc.server, false}, 1, out.trace);
  if (!out.proxy_back->complete() || !out.server->complete()) return out;
  for (const auto& read : out.proxy_reads) {
    auto r = client_step(std::move(*out.proxy_back), back, SendApp{read.plaintext}, none);
    *out.proxy_back = std::move(r.state);
    for (const auto& m : r.outgoing) {
      out.trace.push_back(message_event(1, Direction::ClientToServer, ActionKind::Inject, m, &m, "sent by proxy"));
      auto sr = server_step(std::move(*out.server), sc.server, m, none);
      *out.server = std::move(sr.state);
    }
  }
  return out;
}

}  // namespace downgrade
