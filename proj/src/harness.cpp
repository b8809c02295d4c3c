#include "downgrade/harness.hpp"

#include <deque>
#include <memory>

namespace downgrade {

std::string_view to_string(AppKind k) {
  switch (k) {
    case AppKind::Tls: return "tls";
    case AppKind::Smtp: return "smtp";
    case AppKind::Proxy: return "proxy";
  }
  return "?";
}

AppKind app_kind_from_string(std::string_view s) {
  if (s == "tls") return AppKind::Tls;
  if (s == "smtp") return AppKind::Smtp;
  if (s == "proxy") return AppKind::Proxy;
  throw NotFound("unknown application kind '" + std::string(s) + "'");
}

Scenario prepare(Scenario sc) {
  if (sc.client.role != Role::Client) throw ConfigError("client config must have role Client");
  if (sc.server.role != Role::Server) throw ConfigError("server config must have role Server");
  sc.server.rsa_key =
      crypto::rsa_keygen(sc.server_key.strength, sc.seed * 0x100000001b3ULL + 17, sc.server_key.shared_with_sslv2);
  sc.client.validate();
  sc.server.validate();
  if (sc.payload.empty()) throw ConfigError("payload must not be empty");
  if (sc.adversary) validate_script(*sc.adversary);
  return sc;
}

namespace {

constexpr int kMaxTimeouts = 10;
constexpr int kMaxSteps = 10'000;

TraceEvent event(EventKind kind, std::uint64_t connection, Direction dir, std::string summary,
                 std::string detail = {}) {
  TraceEvent e;
  e.kind = kind;
  e.connection = connection;
  e.direction = dir;
  e.summary = std::move(summary);
  e.detail = std::move(detail);
  return e;
}

std::string abort_text(const Abort& a) { return std::string(to_string(a.reason)) + ": " + a.detail; }

// Only plaintext the adversary can re-derive counts as a secrecy witness.
GoalFinding secrecy_finding(const KnowledgeSet& knowledge, const std::vector<std::string>& sent) {
  for (const auto& e : knowledge.entries()) {
    if (e.kind != KnowledgeKind::Plaintext || e.value.empty() || !replay(e)) continue;
    const auto text = downgrade::to_string(e.value);
    for (const auto& p : sent) {
      if (p.find(text) != std::string::npos)
        return {true, "adversary holds \"" + text + "\" via " + e.derivation.method};
    }
  }
  return {};
}

GoalFinding integrity_finding(const std::vector<std::string>& sent, const std::vector<std::string>& received,
                              const char* who) {
  for (std::size_t i = 0; i < received.size(); ++i) {
    if (i >= sent.size() || sent[i] != received[i])
      return {true, std::string(who) + " accepted record " + std::to_string(i) + " its peer never sent"};
  }
  return {};
}

GoalFinding transcript_finding(const EndpointState& client, const EndpointState& server) {
  if (!client.complete() && !server.complete()) return {};
  if (client.transcript == server.transcript) return {};
  const auto* who = client.complete() ? "client" : "server";
  return {true, std::string(who) + " completed although the transcripts differ (client " +
                    to_hex(crypto::sha256(client.transcript_log())).substr(0, 16) + ", server " +
                    to_hex(crypto::sha256(server.transcript_log())).substr(0, 16) + ")"};
}

NegotiatedMode mode_of(const EndpointState& s) {
  NegotiatedMode m;
  if (s.chosen) {
    m.version = s.chosen->version;
    m.suite = s.chosen->suite;
    m.group = s.chosen->group;
  }
  return m;
}

void fill_preferences(SessionOutcome& o, const Scenario& sc) {
  o.client_suite_preference = sc.client.suites;
  o.server_suite_preference = sc.server.suites;
  o.client_group_preference = sc.client.groups;
  o.server_group_preference = sc.server.groups;
}

class Driver {
 public:
  explicit Driver(const Scenario& sc) : sc_(sc), smtp_(sc.app == AppKind::Smtp) {
    client_ = initial_state(Role::Client, sc.seed);
    server_ = initial_state(Role::Server, sc.seed + 1);
    smtp_client_ = smtp_initial_state(Role::Client);
    smtp_server_ = smtp_initial_state(Role::Server);
    if (sc.adversary) {
      AdversaryContext ctx;
      ctx.client = &sc_.client;
      ctx.server = &sc_.server;
      ctx.padding_oracle_key = [this](Direction d) -> std::optional<Bytes> {
        const auto& receiver = d == Direction::ClientToServer ? server_ : client_;
        if (!receiver.secrets) return std::nullopt;
        return d == Direction::ClientToServer ? receiver.secrets->k_client : receiver.secrets->k_server;
      };
      ctx.sslv2_endpoint = sc.server.rsa_key;
      ctx.secret_marker = sc.secret_marker;
      adversary_ = std::make_unique<Adversary>(*sc.adversary, std::move(ctx), sc.seed ^ 0xad0e5a7ULL);
    }
  }

  SessionRun run();

 private:
  const crypto::CollisionTable& collisions() const { return adversary_ ? adversary_->collisions() : no_collisions_; }

  void apply_client(StepResult r);
  void apply_server(StepResult r);
  void apply_smtp_client(SmtpStepResult r);
  void apply_smtp_server(SmtpStepResult r);
  void start_tls();
  void deliver(Direction dir, const Message& m);
  bool idle_step();
  void record_abort(const Abort& a, Direction from, const char* who);

  const Scenario& sc_;
  bool smtp_;
  bool tls_started_ = false;
  bool app_sent_ = false;
  bool response_sent_ = false;
  bool mail_sent_ = false;
  int timeouts_ = 0;
  std::uint64_t connection_ = 0;
  EndpointState client_;
  EndpointState server_;
  SmtpState smtp_client_;
  SmtpState smtp_server_;
  std::unique_ptr<Adversary> adversary_;
  const crypto::CollisionTable no_collisions_;
  std::deque<std::pair<Direction, Message>> queue_;
  std::vector<TraceEvent> trace_;
  std::optional<Abort> first_abort_;
};

void Driver::record_abort(const Abort& a, Direction from, const char* who) {
  trace_.push_back(event(EventKind::Abort, connection_, from, std::string(who) + " aborted", abort_text(a)));
  if (!first_abort_) first_abort_ = a;
}

void Driver::apply_client(StepResult r) {
  const bool was_aborted = client_.is_aborted(), was_complete = client_.complete();
  client_ = std::move(r.state);
  if (r.new_connection) {
    ++connection_;
    queue_.clear();
    server_ = initial_state(Role::Server, sc_.seed + 1 + 1000 * connection_);
    first_abort_.reset();
    if (adversary_) adversary_->new_connection();
    trace_.push_back(event(EventKind::NewConnection, connection_, Direction::ClientToServer,
                           "client opened connection " + std::to_string(connection_)));
  }
  if (!was_aborted && client_.is_aborted()) record_abort(*client_.aborted, Direction::ClientToServer, "client");
  if (!was_complete && client_.complete())
    trace_.push_back(event(EventKind::Complete, connection_, Direction::ClientToServer, "client handshake complete"));
  for (auto& m : r.outgoing) queue_.emplace_back(Direction::ClientToServer, std::move(m));
}

void Driver::apply_server(StepResult r) {
  const bool was_aborted = server_.is_aborted(), was_complete = server_.complete();
  server_ = std::move(r.state);
  if (!was_aborted && server_.is_aborted()) record_abort(*server_.aborted, Direction::ServerToClient, "server");
  if (!was_complete && server_.complete())
    trace_.push_back(event(EventKind::Complete, connection_, Direction::ServerToClient, "server handshake complete"));
  for (auto& m : r.outgoing) queue_.emplace_back(Direction::ServerToClient, std::move(m));
}

void Driver::start_tls() {
  tls_started_ = true;
  apply_client(client_step(std::move(client_), sc_.client, Start{}, collisions()));
}

void Driver::apply_smtp_client(SmtpStepResult r) {
  const bool was_aborted = smtp_client_.aborted.has_value();
  smtp_client_ = std::move(r.state);
  if (!was_aborted && smtp_client_.aborted) record_abort(*smtp_client_.aborted, Direction::ClientToServer, "smtp client");
  for (auto& m : r.outgoing) queue_.emplace_back(Direction::ClientToServer, std::move(m));
  if (smtp_client_.in_tunnel() && !tls_started_) start_tls();
  if (smtp_client_.phase == SmtpPhase::Plain && !mail_sent_) {
    mail_sent_ = true;
    trace_.push_back(event(EventKind::AppSend, connection_, Direction::ClientToServer, "mail sent without TLS"));
    apply_smtp_client(smtp_step(std::move(smtp_client_), SmtpConfig{Role::Client, sc_.smtp.policy, true, "mail.example"},
                                SendApp{sc_.payload}));
  }
}

void Driver::apply_smtp_server(SmtpStepResult r) {
  const bool was_aborted = smtp_server_.aborted.has_value();
  smtp_server_ = std::move(r.state);
  if (!was_aborted && smtp_server_.aborted) record_abort(*smtp_server_.aborted, Direction::ServerToClient, "smtp server");
  for (auto& m : r.outgoing) queue_.emplace_back(Direction::ServerToClient, std::move(m));
}

void Driver::deliver(Direction dir, const Message& m) {
  if (is_smtp_message(m)) {
    if (dir == Direction::ClientToServer) {
      SmtpConfig cfg{Role::Server, sc_.smtp.policy, sc_.smtp.offers_starttls, "mx.example"};
      apply_smtp_server(smtp_step(std::move(smtp_server_), cfg, m));
    } else {
      SmtpConfig cfg{Role::Client, sc_.smtp.policy, true, "mail.example"};
      apply_smtp_client(smtp_step(std::move(smtp_client_), cfg, m));
    }
    return;
  }
  if (dir == Direction::ClientToServer) {
    if (!server_.is_aborted()) apply_server(server_step(std::move(server_), sc_.server, m, collisions()));
  } else {
    if (!client_.is_aborted()) apply_client(client_step(std::move(client_), sc_.client, m, collisions()));
  }
}

// Runs when nothing is in flight. False ends the session.
bool Driver::idle_step() {
  if (tls_started_ && client_.complete() && !app_sent_) {
    app_sent_ = true;
    trace_.push_back(event(EventKind::AppSend, connection_, Direction::ClientToServer, "client sends payload"));
    apply_client(client_step(std::move(client_), sc_.client, SendApp{sc_.payload}, collisions()));
    return true;
  }
  if (server_.complete() && !server_.received_app.empty() && !response_sent_) {
    response_sent_ = true;
    trace_.push_back(event(EventKind::AppSend, connection_, Direction::ServerToClient, "server sends response"));
    apply_server(server_step(std::move(server_), sc_.server, SendApp{sc_.response}, collisions()));
    return true;
  }
  if (timeouts_ >= kMaxTimeouts) return false;
  if (smtp_ && !tls_started_) {
    if (smtp_client_.phase != SmtpPhase::WaitCapabilities && smtp_client_.phase != SmtpPhase::WaitReady) return false;
    ++timeouts_;
    trace_.push_back(event(EventKind::Timeout, connection_, Direction::ServerToClient, "smtp client timed out"));
    apply_smtp_client(smtp_step(std::move(smtp_client_), SmtpConfig{Role::Client, sc_.smtp.policy, true, "mail.example"},
                                Timeout{}));
    return true;
  }
  if (tls_started_ && !client_.complete() && !client_.is_aborted()) {
    ++timeouts_;
    trace_.push_back(event(EventKind::Timeout, connection_, Direction::ServerToClient, "client timed out"));
    apply_client(client_step(std::move(client_), sc_.client, Timeout{}, collisions()));
    return true;
  }
  return false;
}

SessionRun Driver::run() {
  if (smtp_) {
    apply_smtp_client(smtp_step(std::move(smtp_client_), SmtpConfig{Role::Client, sc_.smtp.policy, true, "mail.example"},
                                Start{}));
  } else {
    start_tls();
  }
  for (int steps = 0; steps < kMaxSteps; ++steps) {
    if (queue_.empty()) {
      if (!idle_step()) break;
      continue;
    }
    auto [dir, m] = std::move(queue_.front());
    queue_.pop_front();
    if (!adversary_) {
      trace_.push_back(message_event(connection_, dir, ActionKind::Forward, m, &m));
      deliver(dir, m);
      continue;
    }
    auto result = adversary_->intercept(m, dir);
    for (auto& e : result.events) trace_.push_back(std::move(e));
    for (const auto& d : result.deliveries) deliver(d.direction, d.message);
  }

  SessionRun out;
  auto& o = out.outcome;
  fill_preferences(o, sc_);
  const bool plain_mail = smtp_ && !smtp_server_.mail_received.empty();
  o.completed = plain_mail || (client_.complete() && server_.complete());
  o.negotiated = plain_mail ? NegotiatedMode{std::nullopt, "", "", false} : mode_of(client_);
  o.aborted = first_abort_;
  if (adversary_) out.knowledge = adversary_->knowledge();

  std::vector<std::string> sent = client_.sent_app;
  sent.insert(sent.end(), server_.sent_app.begin(), server_.sent_app.end());
  sent.insert(sent.end(), smtp_client_.mail_sent.begin(), smtp_client_.mail_sent.end());
  o.goals.secrecy = secrecy_finding(out.knowledge, sent);
  o.goals.integrity = integrity_finding(client_.sent_app, server_.received_app, "server");
  if (!o.goals.integrity.broken) o.goals.integrity = integrity_finding(server_.sent_app, client_.received_app, "client");
  if (!o.goals.integrity.broken)
    o.goals.integrity = integrity_finding(smtp_client_.mail_sent, smtp_server_.mail_received, "mail server");
  if (tls_started_) o.goals.authentication = transcript_finding(client_, server_);

  o.knowledge_summary = out.knowledge.summary();
  o.trace = std::move(trace_);
  out.client = std::move(client_);
  out.server = std::move(server_);
  out.budget_spent = adversary_ ? adversary_->budget().spent() : 0;
  out.connections = connection_ + 1;
  return out;
}

SessionRun run_proxy(const Scenario& sc) {
  ProxyScenario ps{sc.client, sc.server, sc.proxy.issuer, sc.proxy.behavior, sc.payload, sc.seed};
  auto p = run_proxy_session(ps);

  SessionRun out;
  auto& o = out.outcome;
  fill_preferences(o, sc);
  const bool forwarded = !p.server_plaintext.empty();
  o.completed = p.client.complete() && (forwarded || p.server_has_tls());
  o.negotiated = mode_of(p.server_has_tls() ? *p.proxy_back : p.client);
  o.negotiated.layer_present = !forwarded;
  if (p.client.aborted) o.aborted = p.client.aborted;
  for (const auto& r : p.proxy_reads) {
    auto value = to_bytes(r.plaintext);
    auto how = r.null_cipher ? Derivation{"null-cipher", {}, {r.ciphertext}}
                             : Derivation{"decrypt", {r.seq}, {r.key, r.ciphertext}};
    out.knowledge.add({KnowledgeKind::Plaintext, "c2s", value, how});
  }
  o.goals.secrecy = secrecy_finding(out.knowledge, p.client.sent_app);
  if (p.client.complete() && p.client.peer_certificate &&
      p.client.peer_certificate->issuer != sc.server.cert_issuer)
    o.goals.authentication = {true, "client accepted a certificate for " + p.client.peer_certificate->subject +
                                        " issued by " + p.client.peer_certificate->issuer};
  if (p.server) o.goals.integrity = integrity_finding(p.client.sent_app, p.server->received_app, "server");

  o.knowledge_summary = out.knowledge.summary();
  o.trace = std::move(p.trace);
  if (o.aborted)
    o.trace.push_back(event(EventKind::Abort, 0, Direction::ClientToServer, "client aborted", abort_text(*o.aborted)));
  out.client = std::move(p.client);
  if (p.server) out.server = std::move(*p.server);
  return out;
}

SessionRun run_prepared(const Scenario& sc) {
  if (sc.app == AppKind::Proxy) return run_proxy(sc);
  Driver driver(sc);
  return driver.run();
}

}  // namespace

SessionRun run_session_detailed(const Scenario& input) {
  const auto sc = prepare(input);
  auto run = run_prepared(sc);

  // The honest baseline: the same endpoints talking directly.
  Scenario honest = sc;
  honest.adversary.reset();
  if (honest.app == AppKind::Proxy) honest.app = AppKind::Tls;
  if (sc.adversary || sc.app == AppKind::Proxy) {
    run.outcome.honest = run_prepared(honest).outcome.negotiated;
  } else {
    run.outcome.honest = run.outcome.negotiated;
  }
  return run;
}

SessionOutcome run_session(const Scenario& scenario) { return run_session_detailed(scenario).outcome; }

}  // namespace downgrade
