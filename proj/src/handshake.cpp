#include "downgrade/handshake.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace downgrade {

namespace {

constexpr std::array<std::pair<BugFlag, std::string_view>, 4> kBugNames = {{
    {BugFlag::DowngradeDance, "DOWNGRADE_DANCE"},
    {BugFlag::AcceptsSkeInRsa, "ACCEPTS_SKE_IN_RSA"},
    {BugFlag::AcceptsArbitraryGroups, "ACCEPTS_ARBITRARY_GROUPS"},
    {BugFlag::FsFallbackOnMissingSke, "FS_FALLBACK_ON_MISSING_SKE"},
}};

constexpr std::array<std::string_view, 12> kAbortNames = {
    "ProtocolError", "NoCommonVersion", "NoCommonSuite", "NoCommonGroup",
    "UnsupportedGroup", "BadSignature", "CertRejected", "KeyParamError",
    "FinishedMismatch", "DowngradeDetected", "HandshakeTimeout", "UpgradeRefused"};

constexpr std::array<std::string_view, 10> kPhaseNames = {
    "Idle", "WaitServerHello", "WaitCertificate", "WaitKeyExchange", "WaitServerFinished",
    "WaitClientHello", "WaitClientKeyExchange", "WaitClientFinished", "Complete", "Aborted"};

constexpr std::string_view kSentinelTag = "DOWNGRD";

}  // namespace

std::string_view to_string(BugFlag f) {
  for (const auto& [flag, name] : kBugNames) {
    if (flag == f) return name;
  }
  return "?";
}

BugFlag bug_flag_from_string(std::string_view s) {
  for (const auto& [flag, name] : kBugNames) {
    if (name == s) return flag;
  }
  throw NotFound("unknown bug flag '" + std::string(s) + "'");
}

std::string_view to_string(AbortReason r) { return kAbortNames.at(static_cast<std::size_t>(r)); }

AbortReason abort_reason_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kAbortNames.size(); ++i) {
    if (kAbortNames[i] == s) return static_cast<AbortReason>(i);
  }
  throw NotFound("unknown abort reason '" + std::string(s) + "'");
}

std::string_view to_string(Phase p) { return kPhaseNames.at(static_cast<std::size_t>(p)); }

void EndpointConfig::validate() const {
  const char* who = role == Role::Client ? "client" : "server";
  if (min_version > max_version) throw ConfigError(std::string(who) + ": min version above max version");
  if (suites.empty()) throw ConfigError(std::string(who) + ": empty suite list");
  for (const auto& s : suites) {
    if (!find_suite(s)) throw ConfigError(std::string(who) + ": unknown suite '" + s + "'");
  }
  for (const auto& g : groups) {
    try {
      named_group(g);
    } catch (const NotFound&) {
      throw ConfigError(std::string(who) + ": unknown group '" + g + "'");
    }
  }
  if (role == Role::Server && rsa_key.modulus == 0) throw ConfigError("server: missing RSA key");
}

Bytes EndpointState::transcript_log() const {
  Bytes out;
  for (const auto& m : transcript) out.insert(out.end(), m.begin(), m.end());
  return out;
}

EndpointState initial_state(Role role, std::uint64_t seed) {
  EndpointState s;
  s.role = role;
  s.phase = role == Role::Client ? Phase::Idle : Phase::WaitClientHello;
  s.rng.seed(seed);
  return s;
}

crypto::HashAlgo finished_hash(Version v, const EndpointConfig& config) {
  if (v >= Version::Tls12 || config.strong_transcript_hash) return crypto::HashAlgo::Strong;
  return crypto::HashAlgo::WeakMd5Sha1;
}

Bytes protect_record(const CipherSuite& suite, ByteView key, std::uint64_t seq, ByteView data) {
  if (suite.enc == BulkCipher::Null) return Bytes(data.begin(), data.end());
  return crypto::record_xor(key, seq, data);
}

Bytes sentinel_tail(Version negotiated) {
  Bytes tail = to_bytes(kSentinelTag);
  tail.push_back(version_code(negotiated));
  return tail;
}

std::optional<Version> read_sentinel(ByteView server_nonce) {
  if (server_nonce.size() < 8) return std::nullopt;
  auto tail = server_nonce.last(8);
  if (!std::equal(kSentinelTag.begin(), kSentinelTag.end(), tail.begin())) return std::nullopt;
  return version_from_code(tail[7]);
}

bool check_sentinel(ByteView server_nonce, Version client_offered_max) {
  auto seen = read_sentinel(server_nonce);
  return !seen || *seen >= client_offered_max;
}

namespace {

bool strong_group(const std::string& label) {
  return named_group(label).strength == crypto::Strength::Strong;
}

}  // namespace

std::optional<GroupDecision> negotiate_group_with_hrr(const ClientHello& ch, const EndpointConfig& server_config) {
  std::vector<std::string> acceptable;
  for (const auto& g : server_config.groups) {
    if (strong_group(g)) acceptable.push_back(g);
  }
  auto is_acceptable = [&](const std::string& g) {
    return std::find(acceptable.begin(), acceptable.end(), g) != acceptable.end();
  };
  for (const auto& share : ch.extensions.key_share) {
    if (is_acceptable(share.group)) return GroupDecision{share.group, false};
  }
  const auto& offered = ch.extensions.supported_groups;
  for (const auto& g : acceptable) {
    if (std::find(offered.begin(), offered.end(), g) != offered.end()) return GroupDecision{g, true};
  }
  return std::nullopt;
}

std::vector<Bytes> apply_hrr_policy(const std::vector<Bytes>& transcript, HelloRetryPolicy policy) {
  if (policy.restart_transcript_on_hrr) return {};
  return transcript;
}

EffectiveKey interpret_key_params(ByteView params, KeyLabel expected_by_client, KeyLabel sent_by_server) {
  std::vector<std::uint64_t> fields;
  try {
    fields = decode_params(params);
  } catch (const EncodingError& e) {
    throw KeyParamError(std::string("undecodable key parameters: ") + e.what());
  }
  const bool mismatch = expected_by_client != sent_by_server;
  if (expected_by_client == KeyLabel::Rsa) {
    if (fields.size() < 2) throw KeyParamError("RSA parameters need a modulus and an exponent");
    crypto::RsaPublicKey key{fields[0], fields[1], crypto::strength_of(fields[0])};
    if (key.modulus < 4 || key.public_exp < 2) throw KeyParamError("malformed RSA parameters");
    if (mismatch) key.strength = crypto::Strength::Export;
    return key;
  }
  if (fields.size() < 3) throw KeyParamError("DH parameters need a prime, a generator and a public value");
  const auto family = expected_by_client == KeyLabel::EllipticDh ? crypto::GroupFamily::Elliptic
                                                                 : crypto::GroupFamily::FiniteField;
  const std::uint64_t p = fields[0], g = fields[1], y = fields[2];
  std::optional<crypto::DhGroup> group;
  for (const auto& known : crypto::group_catalog()) {
    if (known.family == family && known.prime == p && known.generator == g) group = known;
  }
  if (!group) {
    try {
      group = crypto::DhGroup::make("unnamed-" + std::to_string(p), family, p, g);
    } catch (const GroupError& e) {
      throw KeyParamError(std::string("invalid DH group: ") + e.what());
    }
  }
  if (y < 2 || y > p - 2) throw KeyParamError("DH public value out of range");
  crypto::DhPublicKey key{*group, y, mismatch ? crypto::Strength::Export : group->strength};
  return key;
}

Bytes finished_tag(ByteView log, ByteView ms, crypto::HashAlgo algo, const crypto::CollisionTable& collisions) {
  return crypto::finished_mac(ms, crypto::transcript_hash(log, algo, collisions));
}

bool verify_finished(ByteView local_log, ByteView received_tag, ByteView ms, crypto::HashAlgo algo,
                     const crypto::CollisionTable& collisions) {
  return crypto::verify_finished_mac(received_tag, ms, crypto::transcript_hash(local_log, algo, collisions));
}

Bytes ske_signed_data(ByteView client_nonce, ByteView server_nonce, ByteView params) {
  return concat(concat(client_nonce, server_nonce), params);
}

}  // namespace downgrade
