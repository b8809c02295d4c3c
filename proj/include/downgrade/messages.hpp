#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "downgrade/bytes.hpp"
#include "downgrade/crypto.hpp"

namespace downgrade {

/// Ordered: SSL20 < SSL30 < TLS10 < TLS11 < TLS12 < TLS13_DRAFT10 < TLS13_FINAL.
enum class Version : std::uint8_t { Ssl20, Ssl30, Tls10, Tls11, Tls12, Tls13Draft10, Tls13Final };

std::string_view to_string(Version v);
Version version_from_string(std::string_view s);
constexpr bool is_tls13(Version v) { return v >= Version::Tls13Draft10; }
/// The eight-byte-tail version code used by the downgrade sentinel.
std::uint8_t version_code(Version v);
std::optional<Version> version_from_code(std::uint8_t code);

enum class KeyExchange { Rsa, RsaExport, Dhe, DheExport, Ecdhe };
enum class BulkCipher { StrongAead, CbcBlock, ExportCipher, Null };

/// How a party reads key-exchange parameter bytes.
enum class KeyLabel { Rsa, FiniteFieldDh, EllipticDh };

std::string_view to_string(KeyExchange kx);
std::string_view to_string(BulkCipher enc);
std::string_view to_string(KeyLabel label);
KeyLabel key_label_from_string(std::string_view s);
KeyLabel key_label(KeyExchange kx);

struct CipherSuite {
  std::string name;
  KeyExchange kx;
  BulkCipher enc;
  crypto::HashAlgo hash;
  Version min_version;
  Version max_version;

  bool forward_secret() const {
    return kx == KeyExchange::Dhe || kx == KeyExchange::DheExport || kx == KeyExchange::Ecdhe;
  }
  bool export_kx() const { return kx == KeyExchange::RsaExport || kx == KeyExchange::DheExport; }
  bool available_in(Version v) const { return v >= min_version && v <= max_version; }
  /// True when the server sends a ServerKeyExchange for this suite (TLS <= 1.2).
  bool sends_server_key_exchange() const { return kx != KeyExchange::Rsa; }
};

const std::vector<CipherSuite>& suite_catalog();
const CipherSuite* find_suite(std::string_view name);
const CipherSuite& suite_by_name(std::string_view name);

// ---------------------------------------------------------------------------
// Messages

struct KeyShareEntry {
  std::string group;
  std::uint64_t public_value = 0;
  bool operator==(const KeyShareEntry&) const = default;
};

struct HelloExtensions {
  std::vector<std::string> supported_versions;
  std::vector<KeyShareEntry> key_share;
  std::vector<std::string> supported_groups;
  bool operator==(const HelloExtensions&) const = default;
};

struct ClientHello {
  Version vmax = Version::Tls12;
  Bytes nonce;
  std::vector<std::string> suites;
  Bytes compressions{0};
  HelloExtensions extensions;
  bool operator==(const ClientHello&) const = default;
};

struct ServerHello {
  Version version = Version::Tls12;
  Bytes nonce;
  std::string suite;
  std::uint8_t compression = 0;
  std::optional<KeyShareEntry> key_share;
  bool operator==(const ServerHello&) const = default;
};

struct HelloRetryRequest {
  Version version = Version::Tls13Final;
  std::string suite;
  std::string group;
  bool operator==(const HelloRetryRequest&) const = default;
};

/// Validation is issuer membership in the trust store; no chains.
struct Certificate {
  std::string subject;
  std::string issuer;
  crypto::RsaPublicKey key;
  bool operator==(const Certificate&) const = default;
};

struct ServerCertificate {
  Certificate cert;
  bool operator==(const ServerCertificate&) const = default;
};

struct ServerKeyExchange {
  Bytes params;     // length-prefixed list of integers, no algorithm tag
  KeyLabel label;   // the server's own reading; not covered by the signature
  Bytes signature;  // over n_I | n_R | params
  bool operator==(const ServerKeyExchange&) const = default;
};

struct ServerHelloDone {
  bool operator==(const ServerHelloDone&) const = default;
};

struct ClientKeyExchange {
  Bytes params;
  bool operator==(const ClientKeyExchange&) const = default;
};

struct ChangeCipherSpec {
  bool operator==(const ChangeCipherSpec&) const = default;
};

struct ClientFinished {
  Bytes mac;
  bool operator==(const ClientFinished&) const = default;
};

struct ServerFinished {
  Bytes mac;
  Bytes transcript_signature;  // TLS 1.3 only: signature over the transcript hash
  bool operator==(const ServerFinished&) const = default;
};

struct ApplicationData {
  std::uint64_t seq = 0;
  Bytes ciphertext;
  bool operator==(const ApplicationData&) const = default;
};

struct SmtpEhlo {
  std::string domain;
  bool operator==(const SmtpEhlo&) const = default;
};

struct SmtpCapabilities {
  std::vector<std::string> capabilities;
  bool operator==(const SmtpCapabilities&) const = default;
};

struct SmtpStartTls {
  std::string verb = "STARTTLS";
  bool operator==(const SmtpStartTls&) const = default;
};

struct SmtpReady {
  bool operator==(const SmtpReady&) const = default;
};

struct SmtpReject {
  std::string reason;
  bool operator==(const SmtpReject&) const = default;
};

/// Cleartext application payload: SMTP mail without TLS, or a request a
/// proxy forwards without a TLS layer.
struct PlaintextData {
  std::string payload;
  bool operator==(const PlaintextData&) const = default;
};

using Message = std::variant<ClientHello, ServerHello, HelloRetryRequest, ServerCertificate, ServerKeyExchange,
                             ServerHelloDone, ClientKeyExchange, ChangeCipherSpec, ClientFinished, ServerFinished,
                             ApplicationData, SmtpEhlo, SmtpCapabilities, SmtpStartTls, SmtpReady, SmtpReject,
                             PlaintextData>;

/// Mirrors the variant order.
enum class MessageType : std::uint8_t {
  CH, SH, HRR, SC, SKE, SHD, CKE, CCS, CF, SF, AppData,
  Ehlo, Capabilities, StartTls, Ready, Reject, Plaintext
};

MessageType type_of(const Message& m);
std::string_view to_string(MessageType t);
MessageType message_type_from_string(std::string_view s);

/// Canonical bytes: type code, then the length-prefixed body.
Bytes serialize(const Message& m);
Message deserialize(ByteView bytes);

/// One-line rendering for traces. SMTP messages render as their text lines.
std::string describe(const Message& m);

Bytes encode_params(const std::vector<std::uint64_t>& values);
std::vector<std::uint64_t> decode_params(ByteView bytes);

}  // namespace downgrade
