#include "downgrade/adversary.hpp"

#include <algorithm>

namespace downgrade {

namespace {

bool is_handshake(const Message& m) {
  switch (type_of(m)) {
    case MessageType::CCS:
    case MessageType::AppData:
      return false;
    default:
      return !(type_of(m) >= MessageType::Ehlo);
  }
}

Role sender_of(Direction d) { return d == Direction::ClientToServer ? Role::Client : Role::Server; }
Role receiver_of(Direction d) { return d == Direction::ClientToServer ? Role::Server : Role::Client; }
const char* side_name(Role r) { return r == Role::Client ? "client" : "server"; }

bool matches(const Trigger& t, const Message& m, Direction dir) {
  return type_of(m) == t.type && (!t.direction || *t.direction == dir);
}

bool occurrence_hit(const Trigger& t, int count) {
  return t.occurrences.empty() || std::find(t.occurrences.begin(), t.occurrences.end(), count) != t.occurrences.end();
}

Bytes log_of(const std::vector<Bytes>& transcript) {
  Bytes out;
  for (const auto& m : transcript) out.insert(out.end(), m.begin(), m.end());
  return out;
}

Bytes key_material(const crypto::SecretBundle& s) { return concat(concat(s.ms, s.k_client), s.k_server); }

}  // namespace

Adversary::Adversary(AdversaryScript script, AdversaryContext context, std::uint64_t seed)
    : script_(std::move(script)), ctx_(std::move(context)), rng_(seed), budget_(script_.budget) {
  validate_script(script_);
  if (!ctx_.client || !ctx_.server) throw ConfigError("adversary needs both endpoint configurations");
  client_.role = Role::Client;
  server_.role = Role::Server;
  rule_counts_.assign(script_.rules.size(), 0);
  hook_counts_.assign(script_.hooks.size(), 0);
}

void Adversary::new_connection() {
  ++connection_;
  client_ = SideView{};
  server_ = SideView{};
  client_.role = Role::Client;
  server_.role = Role::Server;
}

std::optional<CipherSuite> Adversary::suite_of(const SideView& v) const {
  if (!v.sh) return std::nullopt;
  if (const auto* cs = find_suite(v.sh->suite)) return *cs;
  return std::nullopt;
}

crypto::HashAlgo Adversary::hash_of(const SideView& v) const {
  auto version = v.sh ? v.sh->version : Version::Tls12;
  return finished_hash(version, config(v.role));
}

// Every handshake message an endpoint sends or accepts lands in its view,
// mirroring the endpoint's own transcript rules.
void Adversary::observe(SideView& v, const Message& m) {
  if (!is_handshake(m)) return;
  v.transcript.push_back(serialize(m));
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, ClientHello>) v.ch = msg;
        else if constexpr (std::is_same_v<T, ServerHello>) v.sh = msg;
        else if constexpr (std::is_same_v<T, ServerCertificate>) v.sc = msg;
        else if constexpr (std::is_same_v<T, ServerKeyExchange>) v.ske = msg;
        else if constexpr (std::is_same_v<T, ClientKeyExchange>) v.cke = msg;
        else if constexpr (std::is_same_v<T, HelloRetryRequest>) {
          Version policy_version = msg.version;
          if (v.role == Role::Client && v.ch && !v.ch->extensions.supported_versions.empty()) {
            try {
              policy_version = version_from_string(v.ch->extensions.supported_versions.front());
            } catch (const NotFound&) {
            }
          }
          v.transcript = apply_hrr_policy(v.transcript, HelloRetryPolicy::for_version(policy_version));
        }
      },
      m);
}

std::optional<EffectiveKey> Adversary::client_view_key() const {
  auto cs = suite_of(client_);
  if (!cs) return std::nullopt;
  if (client_.ske) {
    try {
      return interpret_key_params(client_.ske->params, key_label(cs->kx), client_.ske->label);
    } catch (const KeyParamError&) {
      return std::nullopt;
    }
  }
  if (client_.sc) return EffectiveKey{client_.sc->cert.key};
  return std::nullopt;
}

void Adversary::run_hook(OracleKind oracle, const Message& m, Direction dir, std::vector<std::string>& notes) {
  const std::string name(to_string(oracle));
  switch (oracle) {
    case OracleKind::RecoverKey: {
      auto key = client_view_key();
      if (!key || !client_.cke || !client_.ch || !client_.sh) {
        notes.push_back(name + ": no key exchange observed");
        return;
      }
      const auto before = budget_.spent();
      KeyObservation obs{"client", *key, client_.cke->params, client_.ch->nonce, client_.sh->nonce};
      if (attempt_key_recovery(knowledge_, obs, budget_)) {
        client_.pms = knowledge_.latest(KnowledgeKind::PreMasterSecret, "client")->value;
        client_.secrets = crypto::derive_secrets(*client_.pms, client_.ch->nonce, client_.sh->nonce);
        notes.push_back(name + ": recovered client pms, cost " + std::to_string(budget_.spent() - before));
      } else {
        notes.push_back(name + ": infeasible");
      }
      return;
    }
    case OracleKind::Bleichenbacher: {
      const bool has_parallel = std::find(script_.parallel_connections.begin(), script_.parallel_connections.end(),
                                          "sslv2") != script_.parallel_connections.end();
      if (!has_parallel || !ctx_.sslv2_endpoint || !client_.cke || !client_.sc) {
        notes.push_back(name + ": no SSLv2 endpoint or ciphertext");
        return;
      }
      std::optional<Bytes> pms;
      try {
        pms = crypto::bleichenbacher_decrypt(client_.cke->params, *ctx_.sslv2_endpoint, budget_, script_.costs);
      } catch (const Error&) {
      }
      if (!pms) {
        notes.push_back(name + ": oracle gave no plaintext");
        return;
      }
      const auto& key = client_.sc->cert.key;
      knowledge_.add({KnowledgeKind::PreMasterSecret, "client", *pms,
                      {"bleichenbacher", {key.modulus, key.public_exp, decode_u64(client_.cke->params)}, {}}});
      client_.pms = *pms;
      notes.push_back(name + ": decrypted client pms via SSLv2 endpoint");
      return;
    }
    case OracleKind::RegisterCollision: {
      if (!client_.ch || !server_.ch) {
        notes.push_back(name + ": ClientHello not observed on both sides");
        return;
      }
      auto original = serialize(*client_.ch);
      auto forged = serialize(*server_.ch);
      if (original == forged) {
        notes.push_back(name + ": nothing to hide");
        return;
      }
      try {
        if (crypto::register_collision(collisions_, original, forged, hash_of(server_), budget_, script_.costs)) {
          knowledge_.add({KnowledgeKind::Collision, "ClientHello", forged, {"collision-oracle", {}, {original, forged}}});
          notes.push_back(name + ": registered ClientHello collision");
        } else {
          notes.push_back(name + ": infeasible within budget");
        }
      } catch (const OracleUnavailable& e) {
        notes.push_back(name + ": " + e.what());
      }
      return;
    }
    case OracleKind::CbcRecover: {
      const auto* rec = std::get_if<ApplicationData>(&m);
      auto& receiver = view(receiver_of(dir));
      auto cs = suite_of(receiver);
      if (!rec || !cs || receiver.sh->version != Version::Ssl30 || cs->enc != BulkCipher::CbcBlock) {
        notes.push_back(name + ": needs an SSL 3.0 CBC record");
        return;
      }
      auto key = ctx_.padding_oracle_key ? ctx_.padding_oracle_key(dir) : std::nullopt;
      if (!key) {
        notes.push_back(name + ": no endpoint answers padding queries");
        return;
      }
      auto token = crypto::cbc_padding_oracle_recover(rec->ciphertext, rec->seq, *key, ctx_.secret_marker, budget_,
                                                      script_.costs);
      if (!token) {
        notes.push_back(name + ": no secret recovered");
        return;
      }
      knowledge_.add({KnowledgeKind::Plaintext, "token", to_bytes(*token),
                      {"cbc-oracle", {rec->seq}, {rec->ciphertext, *key, to_bytes(ctx_.secret_marker)}}});
      notes.push_back(name + ": recovered \"" + *token + "\"");
      return;
    }
    case OracleKind::DecryptAppData: {
      const auto* rec = std::get_if<ApplicationData>(&m);
      auto& sender = view(sender_of(dir));
      auto cs = suite_of(sender);
      if (!rec || !cs) {
        notes.push_back(name + ": no record");
        return;
      }
      const char* label = dir == Direction::ClientToServer ? "c2s" : "s2c";
      if (cs->enc == BulkCipher::Null) {
        knowledge_.add({KnowledgeKind::Plaintext, label, rec->ciphertext, {"null-cipher", {}, {rec->ciphertext}}});
        notes.push_back(name + ": NULL cipher, read in clear");
        return;
      }
      if (!sender.secrets) {
        notes.push_back(name + ": keys unknown");
        return;
      }
      const auto& key = dir == Direction::ClientToServer ? sender.secrets->k_client : sender.secrets->k_server;
      auto plain = crypto::record_xor(key, rec->seq, rec->ciphertext);
      knowledge_.add({KnowledgeKind::Plaintext, label, plain, {"decrypt", {rec->seq}, {key, rec->ciphertext}}});
      notes.push_back(name + ": decrypted \"" + downgrade::to_string(plain) + "\"");
      return;
    }
  }
}

// Fills one computed field. Returns a note on failure.
std::optional<std::string> Adversary::compute(ComputedValue what, Message& m, Direction dir) {
  auto& target = view(receiver_of(dir));
  auto& source = view(sender_of(dir));
  switch (what) {
    case ComputedValue::ForgedFinished: {
      Bytes* mac = nullptr;
      if (auto* cf = std::get_if<ClientFinished>(&m)) mac = &cf->mac;
      if (auto* sf = std::get_if<ServerFinished>(&m)) {
        if (target.sh && is_tls13(target.sh->version)) return "transcript signature cannot be forged";
        mac = &sf->mac;
      }
      if (!mac) return "not a Finished message";
      const auto target_log = log_of(target.transcript);
      // The sender's view already holds its own Finished; drop it to get the signed log.
      auto honest = source.transcript;
      if (!honest.empty()) honest.pop_back();
      const Bytes* ms = target.secrets ? &target.secrets->ms : nullptr;
      auto tag = forge_finished(ms, target_log, hash_of(target), collisions_, mac, log_of(honest));
      if (!tag) return "cannot forge Finished for the " + std::string(side_name(target.role));
      if (ms) {
        auto digest = crypto::transcript_hash(target_log, hash_of(target), collisions_);
        knowledge_.add({KnowledgeKind::Forged, side_name(target.role), *tag, {"forge", {}, {*ms, digest}}});
      }
      *mac = *tag;
      return std::nullopt;
    }
    case ComputedValue::AdversaryKeyShare: {
      auto* cke = std::get_if<ClientKeyExchange>(&m);
      if (!cke || dir != Direction::ClientToServer) return "not a ClientKeyExchange";
      auto cs = suite_of(server_);
      if (!cs) return "server suite unknown";
      if (cs->kx == KeyExchange::Rsa || cs->kx == KeyExchange::RsaExport) {
        crypto::RsaPublicKey key;
        if (server_.ske) {
          auto f = decode_params(server_.ske->params);
          key = {f.at(0), f.at(1), crypto::strength_of(f.at(0))};
        } else if (server_.sc) {
          key = server_.sc->cert.key;
        } else {
          return "server key unknown";
        }
        auto pms = encode_u64(2 + rng_() % (key.modulus - 3));
        cke->params = crypto::rsa_wrap_pms(pms, key);
        knowledge_.add({KnowledgeKind::PreMasterSecret, "server", pms,
                        {"adversary-wrap", {key.modulus, key.public_exp, decode_u64(cke->params)}, {}}});
        server_.pms = pms;
        return std::nullopt;
      }
      if (!server_.ske) return "server key share unknown";
      auto f = decode_params(server_.ske->params);
      if (f.size() < 3) return "server key share malformed";
      const auto p = f[0], g = f[1], ys = f[2];
      const auto a = 2 + rng_() % (p - 3);
      cke->params = encode_params({crypto::pow_mod(g, a, p)});
      auto pms = encode_u64(crypto::pow_mod(ys, a, p));
      knowledge_.add({KnowledgeKind::PreMasterSecret, "server", pms, {"adversary-share", {p, ys, a}, {}}});
      server_.pms = pms;
      return std::nullopt;
    }
    case ComputedValue::Reencrypt: {
      auto* rec = std::get_if<ApplicationData>(&m);
      if (!rec) return "not an application record";
      auto in_suite = suite_of(source);
      auto out_suite = suite_of(target);
      if (!in_suite || !out_suite) return "suites unknown";
      const bool to_server = dir == Direction::ClientToServer;
      const bool in_null = in_suite->enc == BulkCipher::Null, out_null = out_suite->enc == BulkCipher::Null;
      if ((!in_null && !source.secrets) || (!out_null && !target.secrets)) return "record keys unknown";
      Bytes in_key = source.secrets ? (to_server ? source.secrets->k_client : source.secrets->k_server) : Bytes{};
      Bytes out_key = target.secrets ? (to_server ? target.secrets->k_client : target.secrets->k_server) : Bytes{};
      auto plain = protect_record(*in_suite, in_key, rec->seq, rec->ciphertext);
      knowledge_.add({KnowledgeKind::Plaintext, to_server ? "c2s" : "s2c", plain,
                      in_null ? Derivation{"null-cipher", {}, {rec->ciphertext}}
                              : Derivation{"decrypt", {rec->seq}, {in_key, rec->ciphertext}}});
      rec->ciphertext = protect_record(*out_suite, out_key, rec->seq, plain);
      return std::nullopt;
    }
  }
  return "unknown computed value";
}

// Derives whatever the current views allow: session keys from known
// pre-master secrets, and the server's pms when it saw exactly the key
// exchange the client produced.
void Adversary::refresh() {
  if (!server_.pms && client_.pms && client_.cke && server_.cke && client_.cke->params == server_.cke->params) {
    const bool same_params = (!client_.ske && !server_.ske) ||
                             (client_.ske && server_.ske && client_.ske->params == server_.ske->params);
    if (same_params) {
      server_.pms = client_.pms;
      knowledge_.add({KnowledgeKind::PreMasterSecret, "server", *server_.pms, {"same-inputs", {}, {*client_.pms}}});
    }
  }
  for (auto* v : {&client_, &server_}) {
    if (v->pms && !v->secrets && v->ch && v->sh) {
      v->secrets = crypto::derive_secrets(*v->pms, v->ch->nonce, v->sh->nonce);
      if (!knowledge_.latest(KnowledgeKind::SessionKeys, side_name(v->role)) ||
          knowledge_.latest(KnowledgeKind::SessionKeys, side_name(v->role))->value != key_material(*v->secrets)) {
        knowledge_.add({KnowledgeKind::SessionKeys, side_name(v->role), key_material(*v->secrets),
                        {"kdf", {}, {*v->pms, v->ch->nonce, v->sh->nonce}}});
      }
    }
  }
}

InterceptResult Adversary::intercept(const Message& m, Direction dir) {
  InterceptResult out;
  observe(view(sender_of(dir)), m);
  knowledge_.add({KnowledgeKind::Observed, std::string(to_string(type_of(m))), serialize(m), {"observation", {}, {}}});
  if (const auto* clear = std::get_if<PlaintextData>(&m)) {
    knowledge_.add({KnowledgeKind::Plaintext, "cleartext", to_bytes(clear->payload), {"observation", {}, {}}});
  }

  std::vector<std::string> notes;
  for (std::size_t i = 0; i < script_.hooks.size(); ++i) {
    const auto& h = script_.hooks[i];
    if (!matches(h.trigger, m, dir)) continue;
    if (!occurrence_hit(h.trigger, ++hook_counts_[i])) continue;
    std::vector<std::string> hook_notes;
    run_hook(h.oracle, m, dir, hook_notes);
    refresh();
    for (auto& n : hook_notes) {
      TraceEvent e;
      e.kind = EventKind::Oracle;
      e.connection = connection_;
      e.direction = dir;
      e.summary = n;
      out.events.push_back(std::move(e));
    }
  }

  const Rule* rule = nullptr;
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const auto& r = script_.rules[i];
    if (!matches(r.trigger, m, dir)) continue;
    if (occurrence_hit(r.trigger, ++rule_counts_[i]) && !rule) rule = &r;
  }

  ActionKind action = rule ? rule->action : ActionKind::Forward;
  Message delivered = m;
  std::string detail;
  if (action == ActionKind::Modify) {
    for (const auto& e : rule->edits) {
      if (const auto* cv = std::get_if<ComputedValue>(&e.value)) {
        if (auto failure = compute(*cv, delivered, dir)) {
          detail = *failure;
          break;
        }
      } else {
        apply_edit(delivered, e);
      }
    }
    if (!detail.empty()) {
      action = ActionKind::Forward;
      delivered = m;
      detail = "modification abandoned: " + detail;
    } else if (delivered == m) {
      detail = "edit left the message unchanged";
    }
  }

  switch (action) {
    case ActionKind::Forward:
    case ActionKind::Modify:
      out.events.push_back(message_event(connection_, dir, action, m, &delivered, detail));
      out.deliveries.push_back({dir, delivered});
      break;
    case ActionKind::Drop:
      out.events.push_back(message_event(connection_, dir, action, m, nullptr, detail));
      break;
    case ActionKind::Inject: {
      auto injected = make_message(rule->inject_type, rule->inject_fields);
      if (!rule->absorb_trigger) out.deliveries.push_back({dir, m});
      out.deliveries.push_back({rule->inject_direction, injected});
      out.events.push_back(message_event(connection_, rule->inject_direction, action, m, &injected,
                                         rule->absorb_trigger ? "trigger absorbed" : "trigger forwarded"));
      break;
    }
  }

  for (const auto& d : out.deliveries) observe(view(receiver_of(d.direction)), d.message);
  refresh();
  return out;
}

}  // namespace downgrade
