#include <gtest/gtest.h>

#include "downgrade/crypto.hpp"

using namespace downgrade;
using namespace downgrade::crypto;

namespace {

// Textbook instance: p = 23, g = 5.
DhGroup toy() { return DhGroup::make("toy", GroupFamily::FiniteField, 23, 5); }

}  // namespace

TEST(Dh, ToyPublicValues) {
  EXPECT_EQ(dh_keypair_from_secret(toy(), 6).public_value, 8u);
  EXPECT_EQ(dh_keypair_from_secret(toy(), 15).public_value, 19u);
}

TEST(Dh, ToySharedSecretAgrees) {
  const auto a = dh_keypair_from_secret(toy(), 6);
  const auto b = dh_keypair_from_secret(toy(), 15);
  EXPECT_EQ(dh_shared_secret(a, b.public_value), encode_u64(2));
  EXPECT_EQ(dh_shared_secret(b, a.public_value), encode_u64(2));
}

TEST(Dh, RecoverToyExponent) {
  WorkBudget budget(1000);
  const auto x = recover_private(DhPublicKey{toy(), 8, Strength::Export}, budget);
  ASSERT_TRUE(x);
  EXPECT_EQ(*x, 6u);
  EXPECT_GT(budget.spent(), 0u);
}

TEST(Dh, RecoverRespectsBudget) {
  WorkBudget budget(0);
  EXPECT_FALSE(recover_private(DhPublicKey{toy(), 8, Strength::Export}, budget));
  EXPECT_EQ(budget.spent(), 0u);
}

TEST(Dh, StrongGroupsAreNeverRecovered) {
  const auto& g = named_group("ffdhe-strong");
  WorkBudget budget(~std::uint64_t{0});
  const auto kp = dh_keygen(g, 3);
  EXPECT_FALSE(recover_private(DhPublicKey{g, kp.public_value, g.strength}, budget));
}

TEST(Dh, PeerValueRangeChecked) {
  const auto a = dh_keypair_from_secret(toy(), 6);
  EXPECT_THROW(dh_shared_secret(a, 1), KeyParamError);
  EXPECT_THROW(dh_shared_secret(a, 22), KeyParamError);
}

TEST(Dh, GroupConstructionRejectsComposites) {
  EXPECT_THROW(DhGroup::make("bad", GroupFamily::FiniteField, 21, 5), GroupError);
  EXPECT_THROW(DhGroup::make("bad", GroupFamily::FiniteField, 23, 1), GroupError);
  EXPECT_THROW(DhGroup::make("bad", GroupFamily::FiniteField, 23, 5, 7), GroupError);
}

TEST(Dh, CatalogStrengths) {
  EXPECT_EQ(named_group("ffdhe-export").strength, Strength::Export);
  EXPECT_EQ(named_group("ffdhe-legacy").strength, Strength::Export);
  for (const char* g : {"ffdhe-strong", "ffdhe-strong-b", "ec-strong", "ec-strong-b"})
    EXPECT_EQ(named_group(g).strength, Strength::Strong) << g;
  EXPECT_THROW(named_group("nope"), NotFound);
}

TEST(Rsa, WrapUnwrapRoundTrip) {
  for (auto s : {Strength::Export, Strength::Strong}) {
    const auto key = rsa_keygen(s, 42);
    const Bytes pms = encode_u64(123456789 % key.modulus);
    EXPECT_EQ(rsa_unwrap_pms(rsa_wrap_pms(pms, key.public_part()), key.modulus, key.private_exp), pms);
  }
}

TEST(Rsa, SignatureVerifies) {
  const auto key = rsa_keygen(Strength::Strong, 9);
  const auto sig = rsa_sign(key, to_bytes("params"));
  EXPECT_TRUE(rsa_verify(key.public_part(), to_bytes("params"), sig));
  EXPECT_FALSE(rsa_verify(key.public_part(), to_bytes("other"), sig));
}

TEST(Rsa, ExportKeysFactor) {
  const auto key = rsa_keygen(Strength::Export, 5);
  WorkBudget budget(1'000'000);
  const auto d = recover_private(key.public_part(), budget);
  ASSERT_TRUE(d);
  const Bytes pms = encode_u64(4242);
  EXPECT_EQ(rsa_unwrap_pms(rsa_wrap_pms(pms, key.public_part()), key.modulus, *d), pms);
  WorkBudget none(~std::uint64_t{0});
  EXPECT_FALSE(recover_private(rsa_keygen(Strength::Strong, 5).public_part(), none));
}

TEST(Rsa, BleichenbacherNeedsSharedKey) {
  const auto shared = rsa_keygen(Strength::Strong, 8, true);
  const Bytes pms = encode_u64(777);
  const auto ct = rsa_wrap_pms(pms, shared.public_part());
  WorkBudget budget(1'000'000);
  const auto got = bleichenbacher_decrypt(ct, shared, budget);
  ASSERT_TRUE(got);
  EXPECT_EQ(*got, pms);

  auto unshared = shared;
  unshared.shared_with_sslv2 = false;
  WorkBudget budget2(1'000'000);
  EXPECT_FALSE(bleichenbacher_decrypt(ct, unshared, budget2));

  WorkBudget poor(10);
  EXPECT_FALSE(bleichenbacher_decrypt(ct, shared, poor));
}

TEST(Budget, DebitIsAllOrNothing) {
  WorkBudget b(10);
  EXPECT_TRUE(b.try_debit(4));
  EXPECT_FALSE(b.try_debit(7));
  EXPECT_EQ(b.remaining(), 6u);
  EXPECT_EQ(b.spent(), 4u);
}

TEST(Hash, Sha256KnownAnswer) {
  EXPECT_EQ(to_hex(sha256(to_bytes("abc"))), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hash, WeakCollisionsOnlyUnderWeakAlgo) {
  const Bytes original = to_bytes("original transcript");
  const Bytes forged = to_bytes("forged transcript");
  CollisionTable table;
  WorkBudget budget(10'000'000);
  EXPECT_THROW(register_collision(table, original, forged, HashAlgo::Strong, budget), Error);
  ASSERT_TRUE(register_collision(table, original, forged, HashAlgo::WeakMd5Sha1, budget));
  EXPECT_EQ(transcript_hash(original, HashAlgo::WeakMd5Sha1, table),
            transcript_hash(forged, HashAlgo::WeakMd5Sha1, table));
  EXPECT_NE(transcript_hash(original, HashAlgo::Strong, table), transcript_hash(forged, HashAlgo::Strong, table));
}

TEST(Hash, CollisionCostsBudget) {
  CollisionTable table;
  WorkBudget budget(5);
  EXPECT_FALSE(register_collision(table, to_bytes("a"), to_bytes("b"), HashAlgo::WeakMd5Sha1, budget));
  EXPECT_TRUE(table.empty());
}

TEST(Kdf, DerivationIsDeterministicAndNonceBound) {
  const Bytes pms = encode_u64(99), n1 = Bytes(32, 1), n2 = Bytes(32, 2);
  const auto a = derive_secrets(pms, n1, n2);
  EXPECT_EQ(a, derive_secrets(pms, n1, n2));
  EXPECT_NE(a.ms, derive_secrets(pms, n2, n1).ms);
  EXPECT_NE(a.k_client, a.k_server);
}

TEST(Finished, MacVerifies) {
  const Bytes ms(48, 7), digest = sha256(to_bytes("log"));
  const auto tag = finished_mac(ms, digest);
  EXPECT_TRUE(verify_finished_mac(tag, ms, digest));
  EXPECT_FALSE(verify_finished_mac(tag, Bytes(48, 8), digest));
}

TEST(Record, XorIsAnInvolution) {
  const Bytes key(16, 3), data = to_bytes("payload");
  EXPECT_EQ(record_xor(key, 4, record_xor(key, 4, data)), data);
  EXPECT_NE(record_xor(key, 4, data), record_xor(key, 5, data));
}

TEST(Record, PaddingOracleRecoversMarkedToken) {
  const Bytes key(16, 5);
  const auto record = record_xor(key, 1, to_bytes("Cookie: sid=abc123"));
  WorkBudget budget(1'000'000);
  EXPECT_EQ(cbc_padding_oracle_recover(record, 1, key, "sid=", budget), "abc123");
  WorkBudget poor(1);
  EXPECT_FALSE(cbc_padding_oracle_recover(record, 1, key, "sid=", poor));
}

TEST(Arithmetic, PrimalityAndInverse) {
  EXPECT_TRUE(is_prime(8388287));
  EXPECT_FALSE(is_prime(8388289 * 3ull));
  EXPECT_EQ(inverse_mod(3, 7), 5u);
  EXPECT_FALSE(inverse_mod(2, 4));
  EXPECT_EQ(strength_of(kBreakabilityThreshold - 1), Strength::Export);
  EXPECT_EQ(strength_of(kBreakabilityThreshold), Strength::Strong);
}
