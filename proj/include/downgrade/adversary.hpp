#pragma once

// Man-in-the-middle adversary: scripted interception of every message,
// knowledge accumulation, and budgeted oracle use.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "downgrade/handshake.hpp"
#include "downgrade/trace.hpp"

namespace downgrade {

enum class OracleKind { RecoverKey, Bleichenbacher, RegisterCollision, CbcRecover, DecryptAppData };
/// Values the adversary computes at interception time rather than taking literally.
enum class ComputedValue { ForgedFinished, AdversaryKeyShare, Reencrypt };

std::string_view to_string(OracleKind k);
OracleKind oracle_kind_from_string(std::string_view s);
std::string_view to_string(ComputedValue v);
ComputedValue computed_value_from_string(std::string_view s);

using FieldValue =
    std::variant<std::int64_t, std::string, std::vector<std::string>, std::vector<std::int64_t>, ComputedValue>;

struct FieldEdit {
  std::string path;
  FieldValue value;
};

struct Trigger {
  std::optional<Direction> direction;
  MessageType type = MessageType::CH;
  std::vector<int> occurrences;  // 1-based among matching messages; empty matches every one

  bool operator==(const Trigger&) const = default;
};

struct Rule {
  Trigger trigger;
  ActionKind action = ActionKind::Forward;
  std::vector<FieldEdit> edits;  // Modify
  MessageType inject_type = MessageType::HRR;
  std::vector<FieldEdit> inject_fields;  // Inject: fields set on a default message
  Direction inject_direction = Direction::ServerToClient;
  bool absorb_trigger = true;  // Inject: the triggering message is answered, not delivered
};

struct Hook {
  Trigger trigger;
  OracleKind oracle = OracleKind::RecoverKey;
};

struct AdversaryScript {
  std::vector<Rule> rules;
  std::vector<Hook> hooks;
  std::uint64_t budget = 1'000'000;
  std::vector<std::string> parallel_connections;  // "sslv2": an SSLv2 endpoint with the server's certificate key
  crypto::OracleCosts costs;
};

/// Names of the editable fields of a message type.
std::vector<std::string> editable_fields(MessageType type);
/// Applies a literal edit. Throws ScriptError for unknown paths, type
/// mismatches, and computed values.
void apply_edit(Message& m, const FieldEdit& edit);
Message default_message(MessageType type);
Message make_message(MessageType type, const std::vector<FieldEdit>& fields);
/// Throws ScriptError when a rule cannot apply to the messages it targets.
void validate_script(const AdversaryScript& script);

// ---------------------------------------------------------------------------
// Knowledge

enum class KnowledgeKind { Observed, PreMasterSecret, SessionKeys, Plaintext, Forged, Collision };

std::string_view to_string(KnowledgeKind k);

/// How an entry was obtained, with every input needed to recompute it.
struct Derivation {
  std::string method;
  std::vector<std::uint64_t> ints;
  std::vector<Bytes> blobs;
};

struct KnowledgeEntry {
  KnowledgeKind kind = KnowledgeKind::Observed;
  std::string label;
  Bytes value;
  Derivation derivation;
};

class KnowledgeSet {
 public:
  void add(KnowledgeEntry entry) { entries_.push_back(std::move(entry)); }
  const std::vector<KnowledgeEntry>& entries() const { return entries_; }
  const KnowledgeEntry* latest(KnowledgeKind kind, std::string_view label) const;
  std::size_t count(KnowledgeKind kind) const;
  std::vector<std::string> plaintexts() const;
  /// One line per non-observation entry.
  std::vector<std::string> summary() const;

 private:
  std::vector<KnowledgeEntry> entries_;
};

/// Recomputes an entry from its derivation alone.
bool replay(const KnowledgeEntry& entry);

struct KeyObservation {
  std::string side;      // "client" or "server": whose secrets this yields
  EffectiveKey key;      // the server key as this side interpreted it
  Bytes key_exchange;    // ClientKeyExchange params as that side holds them
  Bytes client_nonce;
  Bytes server_nonce;
};

/// On success adds the pre-master secret and the session keys.
bool attempt_key_recovery(KnowledgeSet& knowledge, const KeyObservation& obs, crypto::WorkBudget& budget);

/// A Finished tag the verifier of `target_log` accepts, if one can be made:
/// with the master secret, or by reusing an honest tag whose transcript
/// collides with the target under a weak hash.
std::optional<Bytes> forge_finished(const Bytes* ms, ByteView target_log, crypto::HashAlgo algo,
                                    const crypto::CollisionTable& collisions, const Bytes* honest_tag,
                                    ByteView honest_log);

// ---------------------------------------------------------------------------
// Engine

struct AdversaryContext {
  const EndpointConfig* client = nullptr;
  const EndpointConfig* server = nullptr;
  /// Record key of the endpoint that receives records sent in `dir`; used by
  /// the padding oracle, which answers by querying that endpoint.
  std::function<std::optional<Bytes>(Direction)> padding_oracle_key;
  std::optional<crypto::RsaToyKey> sslv2_endpoint;
  std::string secret_marker;
};

struct Delivery {
  Direction direction;
  Message message;
};

struct InterceptResult {
  std::vector<Delivery> deliveries;
  std::vector<TraceEvent> events;
};

class Adversary {
 public:
  Adversary(AdversaryScript script, AdversaryContext context, std::uint64_t seed);

  InterceptResult intercept(const Message& m, Direction dir);
  /// The client opened a new connection; per-connection views reset.
  void new_connection();

  const KnowledgeSet& knowledge() const { return knowledge_; }
  const crypto::CollisionTable& collisions() const { return collisions_; }
  const crypto::WorkBudget& budget() const { return budget_; }
  std::uint64_t connection() const { return connection_; }

  struct SideView {
    Role role = Role::Client;
    std::vector<Bytes> transcript;
    std::optional<ClientHello> ch;
    std::optional<ServerHello> sh;
    std::optional<ServerCertificate> sc;
    std::optional<ServerKeyExchange> ske;
    std::optional<ClientKeyExchange> cke;
    std::optional<Bytes> pms;
    std::optional<crypto::SecretBundle> secrets;
  };

 private:
  SideView& view(Role r) { return r == Role::Client ? client_ : server_; }
  void observe(SideView& v, const Message& m);
  void run_hook(OracleKind oracle, const Message& m, Direction dir, std::vector<std::string>& notes);
  std::optional<std::string> compute(ComputedValue what, Message& m, Direction dir);
  void refresh();
  const EndpointConfig& config(Role r) const { return r == Role::Client ? *ctx_.client : *ctx_.server; }
  std::optional<CipherSuite> suite_of(const SideView& v) const;
  crypto::HashAlgo hash_of(const SideView& v) const;
  std::optional<EffectiveKey> client_view_key() const;

  AdversaryScript script_;
  AdversaryContext ctx_;
  std::mt19937_64 rng_;
  crypto::WorkBudget budget_;
  crypto::CollisionTable collisions_;
  KnowledgeSet knowledge_;
  SideView client_;
  SideView server_;
  std::vector<int> rule_counts_;
  std::vector<int> hook_counts_;
  std::uint64_t connection_ = 0;
};

}  // namespace downgrade
