#include <algorithm>

#include "downgrade/handshake.hpp"
#include "handshake_internal.hpp"

namespace downgrade {

namespace {

using detail::abort_with;
using detail::append;

bool contains(const std::vector<std::string>& list, const std::string& item) {
  return std::find(list.begin(), list.end(), item) != list.end();
}

/// Highest first; a 1.3 maximum is offered alongside the legacy versions below it.
std::vector<Version> offered_versions(const EndpointConfig& config, Version max) {
  std::vector<Version> out;
  if (is_tls13(max)) out.push_back(max);
  auto top = std::min(max, Version::Tls12);
  for (int v = static_cast<int>(top); v >= static_cast<int>(config.min_version); --v) {
    out.push_back(static_cast<Version>(v));
  }
  return out;
}

std::optional<Version> fallback_version(Version current, Version min) {
  if (current == Version::Ssl20) return std::nullopt;
  auto next = is_tls13(current) ? Version::Tls12 : static_cast<Version>(static_cast<int>(current) - 1);
  if (next < min) return std::nullopt;
  return next;
}

class Client {
 public:
  Client(EndpointState state, const EndpointConfig& config, const crypto::CollisionTable& collisions)
      : s_(std::move(state)), c_(config), collisions_(collisions) {}

  StepResult run(const Input& input) {
    if (s_.is_aborted()) return done();
    if (std::holds_alternative<Start>(input)) return start();
    if (std::holds_alternative<Timeout>(input)) return timeout();
    if (const auto* app = std::get_if<SendApp>(&input)) return send_app(app->payload);
    return receive(std::get<Message>(input));
  }

 private:
  StepResult done() { return StepResult{std::move(s_), std::move(out_), new_connection_}; }
  StepResult fail(AbortReason r, std::string detail) { return abort_with(std::move(s_), r, std::move(detail)); }

  const CipherSuite& suite() const { return suite_by_name(s_.chosen->suite); }

  StepResult start() {
    if (s_.phase != Phase::Idle) return fail(AbortReason::ProtocolError, "start in " + std::string(to_string(s_.phase)));
    s_.offered_max = c_.max_version;
    return open_connection();
  }

  // Fresh connection: all per-connection state is dropped, the RNG carries on.
  StepResult open_connection() {
    EndpointState next = initial_state(Role::Client, 0);
    next.rng = s_.rng;
    next.connection = s_.phase == Phase::Idle ? 0 : s_.connection + 1;
    next.offered_max = s_.offered_max;
    next.fs_fallback = s_.fs_fallback;
    new_connection_ = s_.phase != Phase::Idle;
    s_ = std::move(next);

    const auto versions = offered_versions(c_, s_.offered_max);
    ClientHello ch;
    ch.vmax = std::min(s_.offered_max, Version::Tls12);
    s_.client_nonce = detail::random_nonce(s_.rng);
    ch.nonce = s_.client_nonce;
    for (const auto& name : c_.suites) {
      const auto& cs = suite_by_name(name);
      if (s_.fs_fallback && cs.forward_secret()) continue;
      if (std::any_of(versions.begin(), versions.end(), [&](Version v) { return cs.available_in(v); })) {
        ch.suites.push_back(name);
      }
    }
    if (ch.suites.empty()) return fail(AbortReason::NoCommonSuite, "no suite to offer");
    if (is_tls13(s_.offered_max)) {
      for (auto v : versions) ch.extensions.supported_versions.emplace_back(to_string(v));
      for (const auto& g : c_.groups) {
        if (named_group(g).strength == crypto::Strength::Strong) ch.extensions.supported_groups.push_back(g);
      }
      if (ch.extensions.supported_groups.empty()) return fail(AbortReason::NoCommonGroup, "no TLS 1.3 group");
      const auto& first = named_group(ch.extensions.supported_groups.front());
      s_.own_dh = crypto::dh_keygen(first, s_.rng());
      ch.extensions.key_share.push_back(KeyShareEntry{first.label, s_.own_dh->public_value});
    } else {
      for (const auto& g : c_.groups) {
        if (named_group(g).family == crypto::GroupFamily::Elliptic) ch.extensions.supported_groups.push_back(g);
      }
    }
    s_.client_hello = ch;
    append(s_, ch);
    s_.phase = Phase::WaitServerHello;
    out_.push_back(std::move(ch));
    return done();
  }

  StepResult timeout() {
    if (s_.complete()) return done();
    if (!c_.has(BugFlag::DowngradeDance)) return fail(AbortReason::HandshakeTimeout, "no response from server");
    auto lower = fallback_version(s_.offered_max, c_.min_version);
    if (!lower) return fail(AbortReason::HandshakeTimeout, "no lower version to fall back to");
    s_.offered_max = *lower;
    return open_connection();
  }

  StepResult send_app(const std::string& payload) {
    if (!s_.complete()) return done();
    ApplicationData rec;
    rec.seq = s_.send_seq++;
    rec.ciphertext = protect_record(suite(), s_.secrets->k_client, rec.seq, to_bytes(payload));
    s_.sent_app.push_back(payload);
    out_.push_back(std::move(rec));
    return done();
  }

  StepResult receive(const Message& m) {
    switch (type_of(m)) {
      case MessageType::SH:
        if (s_.phase == Phase::WaitServerHello) return on_server_hello(std::get<ServerHello>(m));
        break;
      case MessageType::HRR:
        if (s_.phase == Phase::WaitServerHello && is_tls13(s_.offered_max) && !s_.hrr_seen)
          return on_hello_retry(std::get<HelloRetryRequest>(m));
        break;
      case MessageType::SC:
        if (s_.phase == Phase::WaitCertificate) return on_certificate(std::get<ServerCertificate>(m));
        break;
      case MessageType::SKE:
        if (s_.phase == Phase::WaitKeyExchange && !s_.peer_key) return on_key_exchange(std::get<ServerKeyExchange>(m));
        break;
      case MessageType::SHD:
        if (s_.phase == Phase::WaitKeyExchange) return on_hello_done(m);
        break;
      case MessageType::CCS:
        if (s_.phase == Phase::WaitServerFinished && !is_tls13(s_.chosen->version)) return done();
        break;
      case MessageType::SF:
        if (s_.phase == Phase::WaitServerFinished) return on_server_finished(std::get<ServerFinished>(m));
        break;
      case MessageType::AppData:
        if (s_.complete()) return on_app_data(std::get<ApplicationData>(m));
        break;
      default:
        break;
    }
    return fail(AbortReason::ProtocolError, detail::unexpected(m, s_.phase));
  }

  StepResult on_server_hello(const ServerHello& sh) {
    const auto versions = offered_versions(c_, s_.offered_max);
    if (std::find(versions.begin(), versions.end(), sh.version) == versions.end())
      return fail(AbortReason::ProtocolError, "server chose unoffered version " + std::string(to_string(sh.version)));
    const auto& ch = *s_.client_hello;
    if (!contains(ch.suites, sh.suite)) return fail(AbortReason::ProtocolError, "server chose unoffered suite " + sh.suite);
    const auto& cs = suite_by_name(sh.suite);
    if (!cs.available_in(sh.version))
      return fail(AbortReason::ProtocolError, sh.suite + " is not defined for " + std::string(to_string(sh.version)));
    // SSL 2.0 has no compression negotiation.
    if (sh.version != Version::Ssl20 &&
        std::find(ch.compressions.begin(), ch.compressions.end(), sh.compression) == ch.compressions.end())
      return fail(AbortReason::ProtocolError, "server chose unoffered compression");
    if (c_.max_version == Version::Tls13Final && !is_tls13(sh.version) && !check_sentinel(sh.nonce, s_.offered_max))
      return fail(AbortReason::DowngradeDetected, "server nonce carries a downgrade sentinel");

    s_.server_nonce = sh.nonce;
    s_.chosen = Negotiated{sh.version, sh.suite, ""};
    append(s_, sh);
    if (is_tls13(sh.version)) {
      if (!sh.key_share || sh.key_share->group != s_.own_dh->group.label)
        return fail(AbortReason::ProtocolError, "server key share does not match the offered group");
      s_.chosen->group = sh.key_share->group;
      try {
        auto pms = crypto::dh_shared_secret(*s_.own_dh, sh.key_share->public_value);
        s_.secrets = crypto::derive_secrets(pms, s_.client_nonce, s_.server_nonce);
      } catch (const KeyParamError& e) {
        return fail(AbortReason::KeyParamError, e.what());
      }
    }
    s_.phase = Phase::WaitCertificate;
    return done();
  }

  StepResult on_hello_retry(const HelloRetryRequest& hrr) {
    auto& ch = *s_.client_hello;
    if (!is_tls13(hrr.version) || !contains(ch.suites, hrr.suite))
      return fail(AbortReason::ProtocolError, "malformed HelloRetryRequest");
    if (!contains(ch.extensions.supported_groups, hrr.group) || hrr.group == ch.extensions.key_share.front().group)
      return fail(AbortReason::NoCommonGroup, "retry requested for group " + hrr.group);
    s_.hrr_seen = true;
    append(s_, hrr);
    s_.transcript = apply_hrr_policy(s_.transcript, HelloRetryPolicy::for_version(s_.offered_max));
    s_.own_dh = crypto::dh_keygen(named_group(hrr.group), s_.rng());
    ch.extensions.key_share = {{hrr.group, s_.own_dh->public_value}};
    append(s_, ch);
    out_.push_back(ch);
    return done();
  }

  StepResult on_certificate(const ServerCertificate& sc) {
    if (!c_.trust_store.count(sc.cert.issuer))
      return fail(AbortReason::CertRejected, "untrusted issuer " + sc.cert.issuer);
    s_.peer_certificate = sc.cert;
    append(s_, sc);
    s_.phase = is_tls13(s_.chosen->version) ? Phase::WaitServerFinished : Phase::WaitKeyExchange;
    return done();
  }

  StepResult on_key_exchange(const ServerKeyExchange& ske) {
    const auto& cs = suite();
    if (s_.chosen->version == Version::Ssl20 ||
        (cs.kx == KeyExchange::Rsa && !c_.has(BugFlag::AcceptsSkeInRsa)))
      return fail(AbortReason::ProtocolError, "unexpected ServerKeyExchange");
    if (!crypto::rsa_verify(s_.peer_certificate->key, ske_signed_data(s_.client_nonce, s_.server_nonce, ske.params),
                            ske.signature))
      return fail(AbortReason::BadSignature, "ServerKeyExchange signature does not verify");
    EffectiveKey key;
    try {
      key = interpret_key_params(ske.params, key_label(cs.kx), ske.label);
    } catch (const KeyParamError& e) {
      return fail(AbortReason::KeyParamError, e.what());
    }
    if (const auto* dh = std::get_if<crypto::DhPublicKey>(&key)) {
      const bool listed = std::any_of(c_.groups.begin(), c_.groups.end(), [&](const std::string& g) {
        const auto& known = named_group(g);
        return known.family == dh->group.family && known.same_parameters(dh->group);
      });
      if (!listed && !c_.has(BugFlag::AcceptsArbitraryGroups))
        return fail(AbortReason::UnsupportedGroup, "server group is not among the configured groups");
      s_.chosen->group = dh->group.label;
    }
    s_.peer_key = key;
    append(s_, ske);
    return done();
  }

  StepResult on_hello_done(const Message& shd) {
    const auto& cs = suite();
    if (!s_.peer_key && cs.sends_server_key_exchange()) {
      if (cs.forward_secret() && c_.has(BugFlag::FsFallbackOnMissingSke)) {
        s_.fs_fallback = true;
        return open_connection();
      }
      return fail(AbortReason::ProtocolError, "missing ServerKeyExchange");
    }
    append(s_, shd);

    ClientKeyExchange cke;
    Bytes pms;
    try {
      if (cs.kx == KeyExchange::Rsa || cs.kx == KeyExchange::RsaExport) {
        auto key = s_.peer_key ? std::get<crypto::RsaPublicKey>(*s_.peer_key) : s_.peer_certificate->key;
        pms = encode_u64(2 + s_.rng() % (key.modulus - 3));
        cke.params = crypto::rsa_wrap_pms(pms, key);
      } else {
        const auto& peer = std::get<crypto::DhPublicKey>(*s_.peer_key);
        s_.own_dh = crypto::dh_keygen(peer.group, s_.rng());
        pms = crypto::dh_shared_secret(*s_.own_dh, peer.value);
        cke.params = encode_params({s_.own_dh->public_value});
      }
    } catch (const Error& e) {
      return fail(AbortReason::KeyParamError, e.what());
    }
    s_.secrets = crypto::derive_secrets(pms, s_.client_nonce, s_.server_nonce);
    append(s_, cke);
    out_.push_back(std::move(cke));
    if (s_.chosen->version == Version::Ssl20) {
      s_.phase = Phase::Complete;
      return done();
    }
    ClientFinished cf{finished_tag(s_.transcript_log(), s_.secrets->ms, hash(), collisions_)};
    append(s_, cf);
    out_.push_back(ChangeCipherSpec{});
    out_.push_back(std::move(cf));
    s_.phase = Phase::WaitServerFinished;
    return done();
  }

  StepResult on_server_finished(const ServerFinished& sf) {
    const auto log = s_.transcript_log();
    if (!verify_finished(log, sf.mac, s_.secrets->ms, hash(), collisions_))
      return fail(AbortReason::FinishedMismatch, "server Finished does not match the local transcript");
    if (is_tls13(s_.chosen->version)) {
      const auto digest = crypto::transcript_hash(log, crypto::HashAlgo::Strong, collisions_);
      if (!crypto::rsa_verify(s_.peer_certificate->key, digest, sf.transcript_signature))
        return fail(AbortReason::FinishedMismatch, "transcript signature does not verify");
    }
    append(s_, sf);
    if (is_tls13(s_.chosen->version)) {
      ClientFinished cf{finished_tag(s_.transcript_log(), s_.secrets->ms, hash(), collisions_)};
      append(s_, cf);
      out_.push_back(std::move(cf));
    }
    s_.phase = Phase::Complete;
    return done();
  }

  StepResult on_app_data(const ApplicationData& rec) {
    auto plain = protect_record(suite(), s_.secrets->k_server, rec.seq, rec.ciphertext);
    s_.received_app.push_back(to_string(plain));
    return done();
  }

  crypto::HashAlgo hash() const { return finished_hash(s_.chosen->version, c_); }

  EndpointState s_;
  const EndpointConfig& c_;
  const crypto::CollisionTable& collisions_;
  std::vector<Message> out_;
  bool new_connection_ = false;
};

}  // namespace

StepResult client_step(EndpointState state, const EndpointConfig& config, const Input& input,
                       const crypto::CollisionTable& collisions) {
  return Client(std::move(state), config, collisions).run(input);
}

}  // namespace downgrade
