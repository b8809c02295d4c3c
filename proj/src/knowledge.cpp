#include <limits>

#include "downgrade/adversary.hpp"

namespace downgrade {

std::string_view to_string(KnowledgeKind k) {
  switch (k) {
    case KnowledgeKind::Observed: return "observed";
    case KnowledgeKind::PreMasterSecret: return "pms";
    case KnowledgeKind::SessionKeys: return "keys";
    case KnowledgeKind::Plaintext: return "plaintext";
    case KnowledgeKind::Forged: return "forged";
    case KnowledgeKind::Collision: return "collision";
  }
  return "?";
}

const KnowledgeEntry* KnowledgeSet::latest(KnowledgeKind kind, std::string_view label) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->kind == kind && it->label == label) return &*it;
  }
  return nullptr;
}

std::size_t KnowledgeSet::count(KnowledgeKind kind) const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.kind == kind;
  return n;
}

std::vector<std::string> KnowledgeSet::plaintexts() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.kind == KnowledgeKind::Plaintext) out.push_back(to_string(e.value));
  }
  return out;
}

std::vector<std::string> KnowledgeSet::summary() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.kind == KnowledgeKind::Observed) continue;
    std::string line = std::string(to_string(e.kind)) + ":" + e.label + " via " + e.derivation.method;
    if (e.kind == KnowledgeKind::Plaintext) line += " = \"" + downgrade::to_string(e.value) + "\"";
    out.push_back(std::move(line));
  }
  return out;
}

namespace {

Bytes key_material(const crypto::SecretBundle& s) { return concat(concat(s.ms, s.k_client), s.k_server); }

std::optional<std::string> token_after(const std::string& plain, const std::string& marker) {
  auto at = plain.find(marker);
  if (at == std::string::npos) return std::nullopt;
  auto start = at + marker.size();
  auto end = plain.find_first_of(" ;\r\n", start);
  if (end == std::string::npos) end = plain.size();
  return plain.substr(start, end - start);
}

}  // namespace

bool replay(const KnowledgeEntry& e) {
  const auto& d = e.derivation;
  const auto& m = d.method;
  try {
    if (m == "observation" || m == "collision-oracle") return true;
    if (m == "dlog") {
      // ints: p, g, order, target public value, peer public value
      crypto::DhGroup g{"replay", crypto::GroupFamily::FiniteField, d.ints.at(0), d.ints.at(1), d.ints.at(2),
                        crypto::Strength::Export};
      crypto::WorkBudget unlimited(std::numeric_limits<std::uint64_t>::max());
      auto x = crypto::recover_private(crypto::DhPublicKey{g, d.ints.at(3), crypto::Strength::Export}, unlimited);
      return x && encode_u64(crypto::pow_mod(d.ints.at(4), *x, g.prime)) == e.value;
    }
    if (m == "factor" || m == "bleichenbacher" || m == "adversary-wrap") {
      // ints: n, e, ciphertext. Textbook RSA is deterministic.
      return crypto::rsa_wrap_pms(e.value, {d.ints.at(0), d.ints.at(1), crypto::Strength::Export}) ==
             encode_u64(d.ints.at(2));
    }
    if (m == "adversary-share") {
      // ints: p, server public value, adversary exponent
      return encode_u64(crypto::pow_mod(d.ints.at(1), d.ints.at(2), d.ints.at(0))) == e.value;
    }
    if (m == "same-inputs") return d.blobs.at(0) == e.value;
    if (m == "kdf") {
      return key_material(crypto::derive_secrets(d.blobs.at(0), d.blobs.at(1), d.blobs.at(2))) == e.value;
    }
    if (m == "null-cipher") return d.blobs.at(0) == e.value;
    if (m == "decrypt") return crypto::record_xor(d.blobs.at(0), d.ints.at(0), d.blobs.at(1)) == e.value;
    if (m == "cbc-oracle") {
      // blobs: record, key of the endpoint answering padding queries, marker
      auto plain = downgrade::to_string(crypto::record_xor(d.blobs.at(1), d.ints.at(0), d.blobs.at(0)));
      auto tok = token_after(plain, downgrade::to_string(d.blobs.at(2)));
      return tok && to_bytes(*tok) == e.value;
    }
    if (m == "forge") return crypto::finished_mac(d.blobs.at(0), d.blobs.at(1)) == e.value;
  } catch (const std::exception&) {
    return false;
  }
  return false;
}

bool attempt_key_recovery(KnowledgeSet& knowledge, const KeyObservation& obs, crypto::WorkBudget& budget) {
  Bytes pms;
  Derivation how;
  try {
    if (const auto* dh = std::get_if<crypto::DhPublicKey>(&obs.key)) {
      auto fields = decode_params(obs.key_exchange);
      if (fields.empty()) return false;
      auto y = crypto::recover_private(*dh, budget);
      if (!y) return false;
      const auto& g = dh->group;
      pms = encode_u64(crypto::pow_mod(fields[0], *y, g.prime));
      how = {"dlog", {g.prime, g.generator, g.order, dh->value, fields[0]}, {}};
    } else {
      const auto& rsa = std::get<crypto::RsaPublicKey>(obs.key);
      auto d = crypto::recover_private(rsa, budget);
      if (!d) return false;
      pms = crypto::rsa_unwrap_pms(obs.key_exchange, rsa.modulus, *d);
      how = {"factor", {rsa.modulus, rsa.public_exp, decode_u64(obs.key_exchange)}, {}};
    }
  } catch (const Error&) {
    return false;
  }
  knowledge.add({KnowledgeKind::PreMasterSecret, obs.side, pms, how});
  auto secrets = crypto::derive_secrets(pms, obs.client_nonce, obs.server_nonce);
  knowledge.add({KnowledgeKind::SessionKeys, obs.side, key_material(secrets),
                 {"kdf", {}, {pms, obs.client_nonce, obs.server_nonce}}});
  return true;
}

std::optional<Bytes> forge_finished(const Bytes* ms, ByteView target_log, crypto::HashAlgo algo,
                                    const crypto::CollisionTable& collisions, const Bytes* honest_tag,
                                    ByteView honest_log) {
  if (ms) return finished_tag(target_log, *ms, algo, collisions);
  if (honest_tag && !crypto::collision_resistant(algo) &&
      crypto::transcript_hash(target_log, algo, collisions) == crypto::transcript_hash(honest_log, algo, collisions))
    return *honest_tag;
  return std::nullopt;
}

}  // namespace downgrade
