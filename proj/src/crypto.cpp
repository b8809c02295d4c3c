#include "downgrade/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace downgrade::crypto {

Strength strength_of(std::uint64_t modulus) {
  return modulus < kBreakabilityThreshold ? Strength::Export : Strength::Strong;
}

std::string_view to_string(Strength s) { return s == Strength::Export ? "EXPORT" : "STRONG"; }

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  if (m == 1) return 0;
  std::uint64_t result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    auto x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::optional<std::uint64_t> inverse_mod(std::uint64_t a, std::uint64_t m) {
  __int128 t = 0, new_t = 1;
  __int128 r = m, new_r = a % m;
  while (new_r != 0) {
    auto q = r / new_r;
    std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
    std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
  }
  if (r != 1) return std::nullopt;
  if (t < 0) t += m;
  return static_cast<std::uint64_t>(t);
}

namespace {

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t f = 2; f * f <= n; ++f) {
    if (n % f == 0) {
      out.push_back(f);
      while (n % f == 0) n /= f;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

std::uint64_t element_order(std::uint64_t g, std::uint64_t p) {
  std::uint64_t order = p - 1;
  for (auto f : prime_factors(p - 1)) {
    while (order % f == 0 && pow_mod(g, order / f, p) == 1) order /= f;
  }
  return order;
}

}  // namespace

DhGroup DhGroup::make(std::string label, GroupFamily family, std::uint64_t p, std::uint64_t g,
                      std::optional<std::uint64_t> order) {
  if (!is_prime(p)) throw GroupError("group '" + label + "': modulus " + std::to_string(p) + " is not prime");
  if (g < 2 || g > p - 1) throw GroupError("group '" + label + "': generator out of range");
  std::uint64_t q = 0;
  if (order) {
    q = *order;
    if (q == 0 || (p - 1) % q != 0 || pow_mod(g, q, p) != 1) {
      throw GroupError("group '" + label + "': stated order does not annihilate the generator");
    }
    for (auto f : prime_factors(q)) {
      if (pow_mod(g, q / f, p) == 1) throw GroupError("group '" + label + "': stated order is not exact");
    }
  } else {
    if (p >= (std::uint64_t{1} << 40)) throw GroupError("group '" + label + "': order must be given for large p");
    q = element_order(g, p);
  }
  if (q <= 2) throw GroupError("group '" + label + "': generator order too small");
  return DhGroup{std::move(label), family, p, g, q, strength_of(p)};
}

const std::vector<DhGroup>& group_catalog() {
  // Safe primes p = 2q + 1; g = 9 is a square, so it has order q.
  static const std::vector<DhGroup> catalog = {
      DhGroup::make("ffdhe-export", GroupFamily::FiniteField, 8388287, 9, 4194143),
      DhGroup::make("ffdhe-legacy", GroupFamily::FiniteField, 8288543, 9, 4144271),
      DhGroup::make("ffdhe-strong", GroupFamily::FiniteField, 4294967087, 9, 2147483543),
      DhGroup::make("ffdhe-strong-b", GroupFamily::FiniteField, 4293966563, 9, 2146983281),
      DhGroup::make("ec-strong", GroupFamily::Elliptic, 2147483579, 9, 1073741789),
      DhGroup::make("ec-strong-b", GroupFamily::Elliptic, 2146483499, 9, 1073241749),
  };
  return catalog;
}

const DhGroup& named_group(std::string_view label) {
  for (const auto& g : group_catalog()) {
    if (g.label == label) return g;
  }
  throw NotFound("unknown group '" + std::string(label) + "'");
}

DhKeyPair dh_keypair_from_secret(const DhGroup& group, std::uint64_t secret) {
  if (secret < 1 || secret >= group.order) throw KeyParamError("secret exponent out of range");
  return {group, secret, pow_mod(group.generator, secret, group.prime)};
}

DhKeyPair dh_keygen(const DhGroup& group, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  return dh_keypair_from_secret(group, 1 + rng() % (group.order - 1));
}

Bytes dh_shared_secret(const DhKeyPair& own, std::uint64_t peer_public) {
  const auto p = own.group.prime;
  if (peer_public < 2 || peer_public > p - 2) throw KeyParamError("peer public value out of range");
  return encode_u64(pow_mod(peer_public, own.secret_exponent, p));
}

RsaToyKey rsa_keygen(Strength strength, std::uint64_t rng_seed, bool shared_with_sslv2) {
  constexpr std::uint64_t kExp = 65537;
  std::mt19937_64 rng(rng_seed);
  // Export: primes in [2^10, 2^11) keep n below 2^22. Strong: [2^28, 2^29).
  const int bits = strength == Strength::Export ? 10 : 28;
  const std::uint64_t lo = std::uint64_t{1} << bits;
  auto draw_prime = [&] {
    for (;;) {
      std::uint64_t c = lo + rng() % lo;
      if (is_prime(c) && std::gcd(c - 1, kExp) == 1) return c;
    }
  };
  auto p = draw_prime();
  auto q = draw_prime();
  while (q == p) q = draw_prime();
  const auto n = p * q;
  const auto phi = (p - 1) * (q - 1);
  auto d = inverse_mod(kExp % phi, phi);
  return RsaToyKey{n, kExp, *d, strength_of(n), shared_with_sslv2};
}

Bytes rsa_wrap_pms(ByteView pms, const RsaPublicKey& key) {
  if (pms.size() != 8) throw EncodingError("pre-master secret must be an 8-byte integer");
  const auto m = decode_u64(pms);
  if (m >= key.modulus) throw EncodingError("pre-master secret does not fit the modulus");
  return encode_u64(pow_mod(m, key.public_exp, key.modulus));
}

Bytes rsa_unwrap_pms(ByteView ciphertext, std::uint64_t modulus, std::uint64_t private_exp) {
  const auto c = decode_u64(ciphertext);
  if (c >= modulus) throw KeyParamError("ciphertext does not fit the modulus");
  return encode_u64(pow_mod(c, private_exp, modulus));
}

namespace {
std::uint64_t digest_to_int(ByteView data, std::uint64_t modulus) {
  auto h = sha256(data);
  return decode_u64(ByteView(h).first(8)) % modulus;
}
}  // namespace

Bytes rsa_sign(const RsaToyKey& key, ByteView data) {
  return encode_u64(pow_mod(digest_to_int(data, key.modulus), key.private_exp, key.modulus));
}

bool rsa_verify(const RsaPublicKey& key, ByteView data, ByteView signature) {
  if (signature.size() != 8 || key.modulus < 4) return false;
  const auto s = decode_u64(signature);
  if (s >= key.modulus) return false;
  return pow_mod(s, key.public_exp, key.modulus) == digest_to_int(data, key.modulus);
}

bool WorkBudget::try_debit(std::uint64_t cost) {
  if (cost > remaining_) return false;
  remaining_ -= cost;
  return true;
}

std::uint64_t dlog_cost(const DhGroup& group) {
  auto m = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(group.order)));
  while (m * m < group.order) ++m;
  while (m > 0 && (m - 1) * (m - 1) >= group.order) --m;
  return m;
}

std::uint64_t factoring_cost(std::uint64_t n) {
  if (is_prime(n)) return 1;
  for (std::uint64_t f = 2; f * f <= n; ++f) {
    if (n % f == 0) return f;
  }
  return n;
}

namespace {

std::uint64_t baby_step_giant_step(const DhGroup& group, std::uint64_t target) {
  const auto p = group.prime;
  const auto m = dlog_cost(group);
  std::unordered_map<std::uint64_t, std::uint64_t> baby;
  baby.reserve(m * 2);
  std::uint64_t cur = 1;
  for (std::uint64_t j = 0; j < m; ++j) {
    baby.emplace(cur, j);
    cur = mul_mod(cur, group.generator, p);
  }
  // g^-m == g^(order - m) since g^order == 1.
  const auto giant = pow_mod(group.generator, (group.order - m % group.order) % group.order, p);
  std::uint64_t gamma = target;
  for (std::uint64_t i = 0; i <= m; ++i) {
    if (auto it = baby.find(gamma); it != baby.end()) return (i * m + it->second) % group.order;
    gamma = mul_mod(gamma, giant, p);
  }
  throw KeyParamError("value is not in the subgroup generated by g");
}

}  // namespace

std::optional<std::uint64_t> recover_private(const DhPublicKey& key, WorkBudget& budget) {
  if (key.value < 1 || key.value >= key.group.prime) throw KeyParamError("DH public value out of range");
  if (key.effective_strength == Strength::Strong) return std::nullopt;
  const auto cost = dlog_cost(key.group);
  if (cost > budget.remaining()) return std::nullopt;
  const auto x = baby_step_giant_step(key.group, key.value);
  budget.try_debit(cost);
  return x;
}

std::optional<std::uint64_t> recover_private(const RsaPublicKey& key, WorkBudget& budget) {
  if (key.modulus < 4 || key.public_exp == 0) throw KeyParamError("malformed RSA public key");
  if (key.strength == Strength::Strong) return std::nullopt;
  const auto cost = factoring_cost(key.modulus);
  if (cost > budget.remaining()) return std::nullopt;
  std::uint64_t phi = 0;
  if (cost == 1) {
    phi = key.modulus - 1;
  } else {
    const auto p = cost;
    auto rest = key.modulus / p;
    phi = p - 1;
    // Toy moduli are squarefree products of two primes; handle any rest generally.
    for (auto f : prime_factors(rest)) {
      std::uint64_t pk = 1;
      while (rest % f == 0) {
        rest /= f;
        pk *= f;
      }
      phi *= pk / f * (f - 1);
    }
  }
  auto d = inverse_mod(key.public_exp % phi, phi);
  if (!d) throw KeyParamError("public exponent not invertible for this modulus");
  budget.try_debit(cost);
  return *d;
}

std::optional<Bytes> bleichenbacher_decrypt(ByteView ciphertext, const RsaToyKey& sslv2_endpoint_key,
                                            WorkBudget& budget, const OracleCosts& costs) {
  if (!sslv2_endpoint_key.shared_with_sslv2) return std::nullopt;
  if (!budget.try_debit(costs.bleichenbacher)) return std::nullopt;
  return rsa_unwrap_pms(ciphertext, sslv2_endpoint_key.modulus, sslv2_endpoint_key.private_exp);
}

std::string_view to_string(HashAlgo algo) {
  return algo == HashAlgo::Strong ? "STRONG" : "WEAK_MD5SHA1";
}

Bytes sha256(ByteView data) {
  Bytes out(SHA256_DIGEST_LENGTH);
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Bytes hmac_sha256(ByteView key, ByteView data) {
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len);
  out.resize(len);
  return out;
}

Bytes prf(ByteView key, std::string_view label, ByteView input) {
  ByteWriter w;
  w.str(label).bytes(input);
  return hmac_sha256(key, w.data());
}

void CollisionTable::add(Bytes original, Bytes forged) { pairs_.emplace_back(std::move(original), std::move(forged)); }

Bytes CollisionTable::canonical(ByteView log) const {
  for (const auto& [original, forged] : pairs_) {
    if (log.size() >= forged.size() && std::equal(forged.begin(), forged.end(), log.begin())) {
      Bytes out = original;
      out.insert(out.end(), log.begin() + static_cast<std::ptrdiff_t>(forged.size()), log.end());
      return out;
    }
  }
  return Bytes(log.begin(), log.end());
}

Bytes transcript_hash(ByteView log, HashAlgo algo, const CollisionTable& collisions) {
  if (algo == HashAlgo::Strong) return sha256(concat(to_bytes("strong:"), log));
  return sha256(concat(to_bytes("md5sha1:"), collisions.canonical(log)));
}

bool register_collision(CollisionTable& table, Bytes original, Bytes forged, HashAlgo algo, WorkBudget& budget,
                        const OracleCosts& costs) {
  if (collision_resistant(algo)) throw OracleUnavailable("no collision oracle for a collision-resistant hash");
  if (!budget.try_debit(costs.collision)) return false;
  table.add(std::move(original), std::move(forged));
  return true;
}

SecretBundle derive_secrets(ByteView pms, ByteView client_nonce, ByteView server_nonce) {
  SecretBundle s;
  s.pms.assign(pms.begin(), pms.end());
  s.ms = prf(pms, "ms", concat(client_nonce, server_nonce));
  const auto key_seed = concat(server_nonce, client_nonce);
  s.k_client = prf(s.ms, "kI", key_seed);
  s.k_server = prf(s.ms, "kR", key_seed);
  return s;
}

Bytes finished_mac(ByteView ms, ByteView digest) { return prf(ms, "fin", digest); }

bool verify_finished_mac(ByteView tag, ByteView ms, ByteView digest) {
  auto expected = finished_mac(ms, digest);
  return tag.size() == expected.size() && std::equal(tag.begin(), tag.end(), expected.begin());
}

Bytes record_xor(ByteView key, std::uint64_t seq, ByteView data) {
  Bytes out(data.begin(), data.end());
  Bytes block;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i % 32 == 0) {
      ByteWriter w;
      w.u64(seq).u64(i / 32);
      block = prf(key, "rec", w.data());
    }
    out[i] ^= block[i % 32];
  }
  return out;
}

std::optional<std::string> cbc_padding_oracle_recover(ByteView record, std::uint64_t seq, ByteView endpoint_key,
                                                      std::string_view secret_marker, WorkBudget& budget,
                                                      const OracleCosts& costs) {
  if (secret_marker.empty()) return std::nullopt;
  if (budget.remaining() < costs.cbc_padding) return std::nullopt;
  // Byte-at-a-time padding queries; modeled by letting the endpoint decrypt.
  const auto plain = downgrade::to_string(record_xor(endpoint_key, seq, record));
  const auto at = plain.find(secret_marker);
  if (at == std::string::npos) return std::nullopt;
  const auto start = at + secret_marker.size();
  auto end = plain.find_first_of(" ;\r\n", start);
  if (end == std::string::npos) end = plain.size();
  budget.try_debit(costs.cbc_padding);
  return plain.substr(start, end - start);
}

}  // namespace downgrade::crypto
