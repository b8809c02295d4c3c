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

class Server {
 public:
  Server(EndpointState state, const EndpointConfig& config, const crypto::CollisionTable& collisions)
      : s_(std::move(state)), c_(config), collisions_(collisions) {}

  StepResult run(const Input& input) {
    if (s_.is_aborted()) return done();
    if (const auto* app = std::get_if<SendApp>(&input)) return send_app(app->payload);
    const auto* m = std::get_if<Message>(&input);
    if (!m) return done();
    switch (type_of(*m)) {
      case MessageType::CH:
        if (s_.phase == Phase::WaitClientHello) return on_client_hello(std::get<ClientHello>(*m));
        break;
      case MessageType::CKE:
        if (s_.phase == Phase::WaitClientKeyExchange) return on_key_exchange(std::get<ClientKeyExchange>(*m));
        break;
      case MessageType::CCS:
        if (s_.phase == Phase::WaitClientFinished && !is_tls13(s_.chosen->version)) return done();
        break;
      case MessageType::CF:
        if (s_.phase == Phase::WaitClientFinished) return on_client_finished(std::get<ClientFinished>(*m));
        break;
      case MessageType::AppData:
        if (s_.complete()) return on_app_data(std::get<ApplicationData>(*m));
        break;
      default:
        break;
    }
    return fail(AbortReason::ProtocolError, detail::unexpected(*m, s_.phase));
  }

 private:
  StepResult done() { return StepResult{std::move(s_), std::move(out_), false}; }
  StepResult fail(AbortReason r, std::string detail) { return abort_with(std::move(s_), r, std::move(detail)); }

  const CipherSuite& suite() const { return suite_by_name(s_.chosen->suite); }
  crypto::HashAlgo hash() const { return finished_hash(s_.chosen->version, c_); }

  std::optional<Version> choose_version(const ClientHello& ch) const {
    const auto& listed = ch.extensions.supported_versions;
    if (is_tls13(c_.max_version) && !listed.empty()) {
      std::optional<Version> best;
      for (const auto& name : listed) {
        Version v;
        try {
          v = version_from_string(name);
        } catch (const NotFound&) {
          continue;
        }
        if (c_.supports(v) && (!best || v > *best)) best = v;
      }
      return best;
    }
    auto v = std::min({ch.vmax, c_.max_version, Version::Tls12});
    if (v < c_.min_version) return std::nullopt;
    return v;
  }

  /// Server group for a TLS <= 1.2 key exchange; empty when none fits.
  std::string legacy_group(const CipherSuite& cs, const ClientHello& ch) const {
    using crypto::GroupFamily;
    for (const auto& g : c_.groups) {
      const auto& grp = named_group(g);
      switch (cs.kx) {
        case KeyExchange::Dhe:
          if (grp.family == GroupFamily::FiniteField) return g;
          break;
        case KeyExchange::DheExport:
          if (grp.family == GroupFamily::FiniteField && grp.strength == crypto::Strength::Export) return g;
          break;
        case KeyExchange::Ecdhe:
          if (grp.family == GroupFamily::Elliptic &&
              (ch.extensions.supported_groups.empty() || contains(ch.extensions.supported_groups, g)))
            return g;
          break;
        default:
          return "";
      }
    }
    return "";
  }

  StepResult on_client_hello(const ClientHello& ch) {
    auto version = choose_version(ch);
    if (!version) return fail(AbortReason::NoCommonVersion, "no version in common with the client");
    const auto v = *version;

    std::optional<std::string> chosen_suite;
    std::string group;
    for (const auto& name : c_.suites) {
      const auto& cs = suite_by_name(name);
      if (!contains(ch.suites, name) || !cs.available_in(v)) continue;
      if (!is_tls13(v) && cs.kx != KeyExchange::Rsa && cs.kx != KeyExchange::RsaExport) {
        group = legacy_group(cs, ch);
        if (group.empty()) continue;
      }
      chosen_suite = name;
      break;
    }
    if (!chosen_suite) return fail(AbortReason::NoCommonSuite, "no suite in common with the client");
    if (v != Version::Ssl20 && std::find(ch.compressions.begin(), ch.compressions.end(), 0) == ch.compressions.end())
      return fail(AbortReason::ProtocolError, "client does not offer null compression");

    if (is_tls13(v)) {
      auto decision = negotiate_group_with_hrr(ch, c_);
      if (!decision) return fail(AbortReason::NoCommonGroup, "no acceptable TLS 1.3 group");
      if (decision->needs_hrr) {
        if (s_.hrr_seen) return fail(AbortReason::NoCommonGroup, "second ClientHello still lacks an acceptable share");
        HelloRetryRequest hrr{v, *chosen_suite, decision->group};
        s_.hrr_seen = true;
        append(s_, ch);
        append(s_, hrr);
        s_.transcript = apply_hrr_policy(s_.transcript, HelloRetryPolicy::for_version(v));
        out_.push_back(std::move(hrr));
        return done();
      }
      group = decision->group;
    }

    s_.client_hello = ch;
    s_.client_nonce = ch.nonce;
    s_.chosen = Negotiated{v, *chosen_suite, group};
    s_.server_nonce = detail::random_nonce(s_.rng);
    if (c_.max_version == Version::Tls13Final && !is_tls13(v)) {
      auto tail = sentinel_tail(v);
      std::copy(tail.begin(), tail.end(), s_.server_nonce.end() - static_cast<std::ptrdiff_t>(tail.size()));
    }
    append(s_, ch);

    ServerHello sh;
    sh.version = v;
    sh.nonce = s_.server_nonce;
    sh.suite = *chosen_suite;
    sh.compression = 0;
    if (!group.empty()) s_.own_dh = crypto::dh_keygen(named_group(group), s_.rng());

    if (is_tls13(v)) {
      const auto& share = ch.extensions.key_share;
      auto it = std::find_if(share.begin(), share.end(), [&](const KeyShareEntry& e) { return e.group == group; });
      try {
        auto pms = crypto::dh_shared_secret(*s_.own_dh, it->public_value);
        s_.secrets = crypto::derive_secrets(pms, s_.client_nonce, s_.server_nonce);
      } catch (const KeyParamError& e) {
        return fail(AbortReason::KeyParamError, e.what());
      }
      sh.key_share = KeyShareEntry{group, s_.own_dh->public_value};
      ServerCertificate sc{c_.certificate()};
      append(s_, sh);
      append(s_, sc);
      const auto log = s_.transcript_log();
      ServerFinished sf;
      sf.mac = finished_tag(log, s_.secrets->ms, hash(), collisions_);
      sf.transcript_signature =
          crypto::rsa_sign(c_.rsa_key, crypto::transcript_hash(log, crypto::HashAlgo::Strong, collisions_));
      append(s_, sf);
      out_.push_back(std::move(sh));
      out_.push_back(std::move(sc));
      out_.push_back(std::move(sf));
      s_.phase = Phase::WaitClientFinished;
      return done();
    }

    ServerCertificate sc{c_.certificate()};
    append(s_, sh);
    append(s_, sc);
    out_.push_back(std::move(sh));
    out_.push_back(std::move(sc));
    const auto& cs = suite();
    if (v != Version::Ssl20 && cs.sends_server_key_exchange()) {
      ServerKeyExchange ske;
      if (cs.kx == KeyExchange::RsaExport) {
        s_.export_rsa = crypto::rsa_keygen(crypto::Strength::Export, s_.rng());
        ske.params = encode_params({s_.export_rsa->modulus, s_.export_rsa->public_exp});
      } else {
        const auto& grp = s_.own_dh->group;
        ske.params = encode_params({grp.prime, grp.generator, s_.own_dh->public_value});
      }
      ske.label = key_label(cs.kx);
      ske.signature = crypto::rsa_sign(c_.rsa_key, ske_signed_data(s_.client_nonce, s_.server_nonce, ske.params));
      append(s_, ske);
      out_.push_back(std::move(ske));
    }
    append(s_, ServerHelloDone{});
    out_.push_back(ServerHelloDone{});
    s_.phase = Phase::WaitClientKeyExchange;
    return done();
  }

  StepResult on_key_exchange(const ClientKeyExchange& cke) {
    const auto& cs = suite();
    Bytes pms;
    try {
      if (cs.kx == KeyExchange::Rsa) {
        pms = crypto::rsa_unwrap_pms(cke.params, c_.rsa_key.modulus, c_.rsa_key.private_exp);
      } else if (cs.kx == KeyExchange::RsaExport) {
        pms = crypto::rsa_unwrap_pms(cke.params, s_.export_rsa->modulus, s_.export_rsa->private_exp);
      } else {
        auto fields = decode_params(cke.params);
        if (fields.empty()) throw KeyParamError("empty client key share");
        pms = crypto::dh_shared_secret(*s_.own_dh, fields[0]);
      }
    } catch (const Error& e) {
      return fail(AbortReason::KeyParamError, e.what());
    }
    s_.secrets = crypto::derive_secrets(pms, s_.client_nonce, s_.server_nonce);
    append(s_, cke);
    s_.phase = s_.chosen->version == Version::Ssl20 ? Phase::Complete : Phase::WaitClientFinished;
    return done();
  }

  StepResult on_client_finished(const ClientFinished& cf) {
    if (!verify_finished(s_.transcript_log(), cf.mac, s_.secrets->ms, hash(), collisions_))
      return fail(AbortReason::FinishedMismatch, "client Finished does not match the local transcript");
    append(s_, cf);
    if (!is_tls13(s_.chosen->version)) {
      ServerFinished sf;
      sf.mac = finished_tag(s_.transcript_log(), s_.secrets->ms, hash(), collisions_);
      append(s_, sf);
      out_.push_back(ChangeCipherSpec{});
      out_.push_back(std::move(sf));
    }
    s_.phase = Phase::Complete;
    return done();
  }

  StepResult send_app(const std::string& payload) {
    if (!s_.complete()) return done();
    ApplicationData rec;
    rec.seq = s_.send_seq++;
    rec.ciphertext = protect_record(suite(), s_.secrets->k_server, rec.seq, to_bytes(payload));
    s_.sent_app.push_back(payload);
    out_.push_back(std::move(rec));
    return done();
  }

  StepResult on_app_data(const ApplicationData& rec) {
    auto plain = protect_record(suite(), s_.secrets->k_client, rec.seq, rec.ciphertext);
    s_.received_app.push_back(to_string(plain));
    return done();
  }

  EndpointState s_;
  const EndpointConfig& c_;
  const crypto::CollisionTable& collisions_;
  std::vector<Message> out_;
};

}  // namespace

StepResult server_step(EndpointState state, const EndpointConfig& config, const Input& input,
                       const crypto::CollisionTable& collisions) {
  return Server(std::move(state), config, collisions).run(input);
}

}  // namespace downgrade
