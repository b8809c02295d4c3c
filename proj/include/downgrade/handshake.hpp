#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "downgrade/crypto.hpp"
#include "downgrade/messages.hpp"

namespace downgrade {

using crypto::named_group;

enum class Role { Client, Server };

enum class BugFlag { DowngradeDance, AcceptsSkeInRsa, AcceptsArbitraryGroups, FsFallbackOnMissingSke };

std::string_view to_string(BugFlag f);
BugFlag bug_flag_from_string(std::string_view s);

enum class AbortReason {
  ProtocolError,
  NoCommonVersion,
  NoCommonSuite,
  NoCommonGroup,
  UnsupportedGroup,
  BadSignature,
  CertRejected,
  KeyParamError,
  FinishedMismatch,
  DowngradeDetected,
  HandshakeTimeout,
  UpgradeRefused,
};

std::string_view to_string(AbortReason r);
AbortReason abort_reason_from_string(std::string_view s);

struct Abort {
  AbortReason reason = AbortReason::ProtocolError;
  std::string detail;
};

struct EndpointConfig {
  Role role = Role::Client;
  Version min_version = Version::Tls12;
  Version max_version = Version::Tls12;
  std::vector<std::string> suites;  // by preference
  std::vector<std::string> groups;  // by preference
  std::set<BugFlag> bugs;
  crypto::RsaToyKey rsa_key;  // long-term key; servers only
  std::string cert_subject = "server.example";
  std::string cert_issuer = "RootCA";
  std::set<std::string> trust_store{"RootCA"};
  bool strong_transcript_hash = false;  // Finished over a strong hash below TLS 1.2

  bool has(BugFlag f) const { return bugs.count(f) != 0; }
  bool supports(Version v) const { return v >= min_version && v <= max_version; }
  Certificate certificate() const { return {cert_subject, cert_issuer, rsa_key.public_part()}; }
  /// Throws ConfigError on empty preference lists, min > max, or unknown names.
  void validate() const;
};

/// True for draft-10: a HelloRetryRequest restarts the transcript.
struct HelloRetryPolicy {
  bool restart_transcript_on_hrr = false;
  static HelloRetryPolicy for_version(Version v) { return {v == Version::Tls13Draft10}; }
};

enum class Phase {
  Idle,
  WaitServerHello,
  WaitCertificate,
  WaitKeyExchange,
  WaitServerFinished,
  WaitClientHello,
  WaitClientKeyExchange,
  WaitClientFinished,
  Complete,
  Aborted,
};

std::string_view to_string(Phase p);

struct Negotiated {
  Version version = Version::Tls12;
  std::string suite;
  std::string group;  // empty for plain RSA
};

/// A key as the receiving party interprets SKE parameter bytes.
using EffectiveKey = std::variant<crypto::DhPublicKey, crypto::RsaPublicKey>;

struct EndpointState {
  Role role = Role::Client;
  Phase phase = Phase::Idle;
  std::vector<Bytes> transcript;  // serialized handshake messages, CCS excluded
  std::optional<Negotiated> chosen;
  std::optional<crypto::SecretBundle> secrets;
  std::optional<Abort> aborted;

  std::uint64_t connection = 0;
  Version offered_max = Version::Tls12;  // client: current maximum after any fallback
  bool fs_fallback = false;              // client: re-offering only non-FS suites
  bool hrr_seen = false;
  std::optional<ClientHello> client_hello;  // last CH sent (client) or received (server)
  Bytes client_nonce;
  Bytes server_nonce;
  std::optional<Certificate> peer_certificate;
  std::optional<EffectiveKey> peer_key;  // client: from SKE
  std::optional<crypto::DhKeyPair> own_dh;
  std::optional<crypto::RsaToyKey> export_rsa;  // server: ephemeral RSA_EXPORT key

  std::uint64_t send_seq = 0;
  std::vector<std::string> sent_app;
  std::vector<std::string> received_app;

  std::mt19937_64 rng;

  bool complete() const { return phase == Phase::Complete; }
  bool is_aborted() const { return phase == Phase::Aborted; }
  Bytes transcript_log() const;
};

struct Start {};
struct Timeout {};
struct SendApp {
  std::string payload;
};
using Input = std::variant<Start, Timeout, Message, SendApp>;

struct StepResult {
  EndpointState state;
  std::vector<Message> outgoing;
  bool new_connection = false;  // the client abandoned the connection and opened a new one
};

EndpointState initial_state(Role role, std::uint64_t seed);

StepResult client_step(EndpointState state, const EndpointConfig& config, const Input& input,
                       const crypto::CollisionTable& collisions);
StepResult server_step(EndpointState state, const EndpointConfig& config, const Input& input,
                       const crypto::CollisionTable& collisions);

/// Hash used for Finished: strong from TLS 1.2 on, otherwise per configuration.
crypto::HashAlgo finished_hash(Version v, const EndpointConfig& config);

/// Record protection for the negotiated suite; NULL ciphers are the identity.
Bytes protect_record(const CipherSuite& suite, ByteView key, std::uint64_t seq, ByteView data);

// ---------------------------------------------------------------------------
// Negotiation helpers

Bytes sentinel_tail(Version negotiated);
/// The version encoded in a sentinel-bearing nonce, if any.
std::optional<Version> read_sentinel(ByteView server_nonce);
/// False means DowngradeDetected.
bool check_sentinel(ByteView server_nonce, Version client_offered_max);

/// Picks the TLS 1.3 group. `needs_hrr` is set when the key share is not
/// acceptable but a supported_groups entry is; nullopt means NoCommonGroup.
struct GroupDecision {
  std::string group;
  bool needs_hrr = false;
};
std::optional<GroupDecision> negotiate_group_with_hrr(const ClientHello& ch, const EndpointConfig& server_config);

/// Transcript after a HelloRetryRequest has been appended.
std::vector<Bytes> apply_hrr_policy(const std::vector<Bytes>& transcript, HelloRetryPolicy policy);

/// Reads untagged parameter bytes under the receiver's expected label.
/// Throws KeyParamError when the bytes do not decode under that label.
EffectiveKey interpret_key_params(ByteView params, KeyLabel expected_by_client, KeyLabel sent_by_server);

bool verify_finished(ByteView local_log, ByteView received_tag, ByteView ms, crypto::HashAlgo algo,
                     const crypto::CollisionTable& collisions);

/// Finished tag over a transcript log.
Bytes finished_tag(ByteView log, ByteView ms, crypto::HashAlgo algo, const crypto::CollisionTable& collisions);

/// Data covered by the SKE signature: n_I | n_R | params.
Bytes ske_signed_data(ByteView client_nonce, ByteView server_nonce, ByteView params);

}  // namespace downgrade
