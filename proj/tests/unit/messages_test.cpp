#include <gtest/gtest.h>

#include "downgrade/messages.hpp"

using namespace downgrade;

TEST(Version, OrderedAndNamed) {
  EXPECT_LT(Version::Ssl20, Version::Ssl30);
  EXPECT_LT(Version::Tls12, Version::Tls13Draft10);
  EXPECT_LT(Version::Tls13Draft10, Version::Tls13Final);
  for (const char* name : {"SSL20", "SSL30", "TLS10", "TLS11", "TLS12", "TLS13_DRAFT10", "TLS13_FINAL"})
    EXPECT_EQ(to_string(version_from_string(name)), name);
  EXPECT_THROW(version_from_string("TLS14"), NotFound);
}

TEST(Version, CodesRoundTrip) {
  for (int v = 0; v <= static_cast<int>(Version::Tls13Final); ++v) {
    const auto ver = static_cast<Version>(v);
    EXPECT_EQ(version_from_code(version_code(ver)), ver);
  }
}

TEST(Suites, CatalogHasFourteenEntries) {
  EXPECT_EQ(suite_catalog().size(), 14u);
  EXPECT_EQ(find_suite("NOPE"), nullptr);
  EXPECT_THROW(suite_by_name("NOPE"), NotFound);
}

TEST(Suites, Properties) {
  const auto& freak = suite_by_name("RSA_EXPORT_WITH_RC4_40_MD5");
  EXPECT_TRUE(freak.export_kx());
  EXPECT_FALSE(freak.forward_secret());
  EXPECT_TRUE(suite_by_name("ECDHE_RSA_WITH_AES_128_GCM_SHA256").forward_secret());
  EXPECT_FALSE(suite_by_name("RSA_WITH_AES_128_GCM_SHA256").sends_server_key_exchange());
  EXPECT_TRUE(suite_by_name("SSL2_NULL_WITH_MD5").available_in(Version::Ssl20));
  EXPECT_FALSE(suite_by_name("SSL2_NULL_WITH_MD5").available_in(Version::Tls12));
  EXPECT_TRUE(suite_by_name("TLS_AES_128_GCM_SHA256").available_in(Version::Tls13Final));
  EXPECT_FALSE(suite_by_name("TLS_AES_128_GCM_SHA256").available_in(Version::Tls12));
}

TEST(Wire, EveryMessageRoundTrips) {
  ClientHello ch;
  ch.vmax = Version::Tls13Final;
  ch.nonce = Bytes(32, 0xab);
  ch.suites = {"TLS_AES_128_GCM_SHA256", "ECDHE_RSA_WITH_AES_128_GCM_SHA256"};
  ch.compressions = {0, 1};
  ch.extensions.supported_versions = {"TLS13_FINAL", "TLS12"};
  ch.extensions.key_share = {{"ec-strong", 12345}};
  ch.extensions.supported_groups = {"ec-strong", "ffdhe-strong"};
  ServerHello sh;
  sh.nonce = Bytes(32, 1);
  sh.suite = "TLS_AES_128_GCM_SHA256";
  sh.key_share = KeyShareEntry{"ec-strong", 99};
  ServerKeyExchange ske{encode_params({23, 5, 8}), KeyLabel::FiniteFieldDh, Bytes{1, 2, 3}};
  const std::vector<Message> all = {ch,
                                    sh,
                                    HelloRetryRequest{Version::Tls13Draft10, "TLS_AES_128_GCM_SHA256", "ec-strong-b"},
                                    ServerCertificate{{"server.example", "RootCA", {3233, 17, crypto::Strength::Export}}},
                                    ske,
                                    ServerHelloDone{},
                                    ClientKeyExchange{encode_params({19})},
                                    ChangeCipherSpec{},
                                    ClientFinished{Bytes(32, 9)},
                                    ServerFinished{Bytes(32, 8), Bytes{4, 5}},
                                    ApplicationData{3, to_bytes("ciphertext")},
                                    SmtpEhlo{"client.example"},
                                    SmtpCapabilities{{"PIPELINING", "STARTTLS"}},
                                    SmtpStartTls{},
                                    SmtpReady{},
                                    SmtpReject{"454 TLS not available"},
                                    PlaintextData{"MAIL FROM:<a@b>"}};
  ASSERT_EQ(all.size(), std::variant_size_v<Message>);
  for (const auto& m : all) {
    EXPECT_EQ(deserialize(serialize(m)), m) << describe(m);
    EXPECT_EQ(message_type_from_string(to_string(type_of(m))), type_of(m));
  }
}

TEST(Wire, TruncatedBytesRejected) {
  auto bytes = serialize(SmtpEhlo{"client.example"});
  bytes.pop_back();
  EXPECT_THROW(deserialize(bytes), EncodingError);
  EXPECT_THROW(deserialize(Bytes{}), EncodingError);
}

TEST(Wire, ParamsCarryNoAlgorithmTag) {
  // The same bytes decode regardless of who reads them.
  const auto p = encode_params({8388287, 9, 1234});
  EXPECT_EQ(decode_params(p), (std::vector<std::uint64_t>{8388287, 9, 1234}));
}
