#pragma once

// Executable toy cryptography. Every primitive carries an explicit strength
// label; the breaking oracles do real (small) computations but refuse any
// key labeled Strong, whatever its actual size.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "downgrade/bytes.hpp"

namespace downgrade::crypto {

enum class Strength { Export, Strong };

/// Moduli and primes below this bound are export grade.
inline constexpr std::uint64_t kBreakabilityThreshold = std::uint64_t{1} << 24;

Strength strength_of(std::uint64_t modulus);
std::string_view to_string(Strength s);

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);
/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(std::uint64_t n);
std::optional<std::uint64_t> inverse_mod(std::uint64_t a, std::uint64_t m);

// ---------------------------------------------------------------------------
// Diffie-Hellman

/// ECDHE is modeled as DH over a separately labeled family of groups; the
/// arithmetic is identical, only the label differs.
enum class GroupFamily { FiniteField, Elliptic };

struct DhGroup {
  std::string label;
  GroupFamily family = GroupFamily::FiniteField;
  std::uint64_t prime = 0;
  std::uint64_t generator = 0;
  std::uint64_t order = 0;  // multiplicative order of the generator
  Strength strength = Strength::Strong;

  /// Validates the parameters. When `order` is omitted it is computed by
  /// factoring p-1, which is only supported for p < 2^40.
  static DhGroup make(std::string label, GroupFamily family, std::uint64_t p, std::uint64_t g,
                      std::optional<std::uint64_t> order = std::nullopt);

  bool same_parameters(const DhGroup& other) const {
    return prime == other.prime && generator == other.generator;
  }
  bool operator==(const DhGroup&) const = default;
};

/// Named groups used by the scenarios.
const std::vector<DhGroup>& group_catalog();
const DhGroup& named_group(std::string_view label);

struct DhKeyPair {
  DhGroup group;
  std::uint64_t secret_exponent = 0;
  std::uint64_t public_value = 0;
};

DhKeyPair dh_keypair_from_secret(const DhGroup& group, std::uint64_t secret);
DhKeyPair dh_keygen(const DhGroup& group, std::uint64_t rng_seed);
Bytes dh_shared_secret(const DhKeyPair& own, std::uint64_t peer_public);

/// A DH public value as some party interprets it. The effective strength can
/// be Export even for a large group when the party misread the parameters.
struct DhPublicKey {
  DhGroup group;
  std::uint64_t value = 0;
  Strength effective_strength = Strength::Strong;
};

// ---------------------------------------------------------------------------
// RSA

struct RsaPublicKey {
  std::uint64_t modulus = 0;
  std::uint64_t public_exp = 0;
  Strength strength = Strength::Strong;
  bool operator==(const RsaPublicKey&) const = default;
};

struct RsaToyKey {
  std::uint64_t modulus = 0;
  std::uint64_t public_exp = 0;
  std::uint64_t private_exp = 0;
  Strength strength = Strength::Strong;
  bool shared_with_sslv2 = false;

  RsaPublicKey public_part() const { return {modulus, public_exp, strength}; }
};

RsaToyKey rsa_keygen(Strength strength, std::uint64_t rng_seed, bool shared_with_sslv2 = false);

Bytes rsa_wrap_pms(ByteView pms, const RsaPublicKey& key);
Bytes rsa_unwrap_pms(ByteView ciphertext, std::uint64_t modulus, std::uint64_t private_exp);

Bytes rsa_sign(const RsaToyKey& key, ByteView data);
bool rsa_verify(const RsaPublicKey& key, ByteView data, ByteView signature);

// ---------------------------------------------------------------------------
// Attacker work accounting and breaking oracles

class WorkBudget {
 public:
  explicit WorkBudget(std::uint64_t units = 0) : initial_(units), remaining_(units) {}

  std::uint64_t remaining() const { return remaining_; }
  std::uint64_t spent() const { return initial_ - remaining_; }
  std::uint64_t initial() const { return initial_; }

  /// Debits `cost` iff it fits; never partially debits.
  bool try_debit(std::uint64_t cost);

 private:
  std::uint64_t initial_;
  std::uint64_t remaining_;
};

struct OracleCosts {
  std::uint64_t bleichenbacher = 50'000;
  std::uint64_t collision = 200'000;
  std::uint64_t cbc_padding = 5'000;
};

/// ceil(sqrt(order)): one baby-step giant-step run.
std::uint64_t dlog_cost(const DhGroup& group);
/// Smallest prime factor of n, or 1 when n itself is prime (phi is then n-1).
std::uint64_t factoring_cost(std::uint64_t n);

/// Discrete log of `key.value`. nullopt is the Infeasible outcome.
std::optional<std::uint64_t> recover_private(const DhPublicKey& key, WorkBudget& budget);
/// Private exponent of an RSA public key by factoring its modulus.
std::optional<std::uint64_t> recover_private(const RsaPublicKey& key, WorkBudget& budget);

/// `sslv2_endpoint_key` is the key held by the SSLv2 endpoint the attacker
/// queries; it only leaks the plaintext when that key is the shared one.
std::optional<Bytes> bleichenbacher_decrypt(ByteView ciphertext, const RsaToyKey& sslv2_endpoint_key,
                                            WorkBudget& budget, const OracleCosts& costs = {});

// ---------------------------------------------------------------------------
// Hashing, key derivation and MACs

enum class HashAlgo { WeakMd5Sha1, Strong };

constexpr bool collision_resistant(HashAlgo algo) { return algo == HashAlgo::Strong; }
std::string_view to_string(HashAlgo algo);

Bytes sha256(ByteView data);
Bytes hmac_sha256(ByteView key, ByteView data);
/// Keyed PRF over a label and input.
Bytes prf(ByteView key, std::string_view label, ByteView input);

/// Prefix collisions registered by the adversary. A forged prefix hashes
/// like its original prefix under the weak hash, so any shared suffix keeps
/// colliding.
class CollisionTable {
 public:
  void add(Bytes original, Bytes forged);
  bool empty() const { return pairs_.empty(); }
  std::size_t size() const { return pairs_.size(); }
  const std::vector<std::pair<Bytes, Bytes>>& pairs() const { return pairs_; }

  Bytes canonical(ByteView log) const;

 private:
  std::vector<std::pair<Bytes, Bytes>> pairs_;
};

Bytes transcript_hash(ByteView log, HashAlgo algo, const CollisionTable& collisions);

/// Registers (original, forged); false is the Infeasible outcome.
/// Throws OracleUnavailable for a collision-resistant hash.
bool register_collision(CollisionTable& table, Bytes original, Bytes forged, HashAlgo algo,
                        WorkBudget& budget, const OracleCosts& costs = {});

struct SecretBundle {
  Bytes pms;
  Bytes ms;
  Bytes k_client;  // k_I
  Bytes k_server;  // k_R
  bool operator==(const SecretBundle&) const = default;
};

SecretBundle derive_secrets(ByteView pms, ByteView client_nonce, ByteView server_nonce);

Bytes finished_mac(ByteView ms, ByteView digest);
bool verify_finished_mac(ByteView tag, ByteView ms, ByteView digest);

/// Toy record protection: XOR with a PRF keystream bound to the sequence
/// number. Encryption and decryption are the same operation.
Bytes record_xor(ByteView key, std::uint64_t seq, ByteView data);

/// Symbolic CBC padding oracle against an SSL 3.0 block-cipher endpoint.
/// `endpoint_key` is the key of the endpoint answering padding queries.
/// Returns the token that follows `secret_marker` in the record plaintext.
std::optional<std::string> cbc_padding_oracle_recover(ByteView record, std::uint64_t seq,
                                                      ByteView endpoint_key,
                                                      std::string_view secret_marker,
                                                      WorkBudget& budget,
                                                      const OracleCosts& costs = {});

}  // namespace downgrade::crypto
