#include "downgrade/messages.hpp"

#include <array>
#include <sstream>

namespace downgrade {

namespace {

constexpr std::array<std::string_view, 7> kVersionNames = {"SSL20", "SSL30", "TLS10", "TLS11",
                                                           "TLS12", "TLS13_DRAFT10", "TLS13_FINAL"};
constexpr std::array<std::uint8_t, 7> kVersionCodes = {0x02, 0x30, 0x31, 0x32, 0x33, 0x7a, 0x34};

constexpr std::array<std::string_view, 17> kTypeNames = {
    "CH", "SH", "HRR", "SC", "SKE", "SHD", "CKE", "CCS", "CF", "SF", "AppData",
    "EHLO", "CAPABILITIES", "STARTTLS", "READY", "REJECT", "PLAINTEXT"};

}  // namespace

std::string_view to_string(Version v) { return kVersionNames.at(static_cast<std::size_t>(v)); }

Version version_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kVersionNames.size(); ++i) {
    if (kVersionNames[i] == s) return static_cast<Version>(i);
  }
  throw NotFound("unknown version '" + std::string(s) + "'");
}

std::uint8_t version_code(Version v) { return kVersionCodes.at(static_cast<std::size_t>(v)); }

std::optional<Version> version_from_code(std::uint8_t code) {
  for (std::size_t i = 0; i < kVersionCodes.size(); ++i) {
    if (kVersionCodes[i] == code) return static_cast<Version>(i);
  }
  return std::nullopt;
}

std::string_view to_string(KeyExchange kx) {
  switch (kx) {
    case KeyExchange::Rsa: return "RSA";
    case KeyExchange::RsaExport: return "RSA_EXPORT";
    case KeyExchange::Dhe: return "DHE";
    case KeyExchange::DheExport: return "DHE_EXPORT";
    case KeyExchange::Ecdhe: return "ECDHE";
  }
  return "?";
}

std::string_view to_string(BulkCipher enc) {
  switch (enc) {
    case BulkCipher::StrongAead: return "STRONG_AEAD";
    case BulkCipher::CbcBlock: return "CBC_BLOCK";
    case BulkCipher::ExportCipher: return "EXPORT_CIPHER";
    case BulkCipher::Null: return "NULL";
  }
  return "?";
}

std::string_view to_string(KeyLabel label) {
  switch (label) {
    case KeyLabel::Rsa: return "RSA";
    case KeyLabel::FiniteFieldDh: return "DH";
    case KeyLabel::EllipticDh: return "EC";
  }
  return "?";
}

KeyLabel key_label_from_string(std::string_view s) {
  if (s == "RSA") return KeyLabel::Rsa;
  if (s == "DH") return KeyLabel::FiniteFieldDh;
  if (s == "EC") return KeyLabel::EllipticDh;
  throw NotFound("unknown key label '" + std::string(s) + "'");
}

KeyLabel key_label(KeyExchange kx) {
  switch (kx) {
    case KeyExchange::Rsa:
    case KeyExchange::RsaExport: return KeyLabel::Rsa;
    case KeyExchange::Dhe:
    case KeyExchange::DheExport: return KeyLabel::FiniteFieldDh;
    case KeyExchange::Ecdhe: return KeyLabel::EllipticDh;
  }
  return KeyLabel::Rsa;
}

const std::vector<CipherSuite>& suite_catalog() {
  using enum KeyExchange;
  using enum BulkCipher;
  using crypto::HashAlgo;
  constexpr auto S20 = Version::Ssl20, S30 = Version::Ssl30, T10 = Version::Tls10, T12 = Version::Tls12;
  constexpr auto D10 = Version::Tls13Draft10, FIN = Version::Tls13Final;
  static const std::vector<CipherSuite> catalog = {
      {"SSL2_DES_192_EDE3_CBC_WITH_MD5", Rsa, CbcBlock, HashAlgo::WeakMd5Sha1, S20, S20},
      {"SSL2_RC4_128_EXPORT40_WITH_MD5", Rsa, ExportCipher, HashAlgo::WeakMd5Sha1, S20, S20},
      {"SSL2_NULL_WITH_MD5", Rsa, Null, HashAlgo::WeakMd5Sha1, S20, S20},
      {"RSA_WITH_NULL_SHA", Rsa, Null, HashAlgo::WeakMd5Sha1, S30, T12},
      {"RSA_EXPORT_WITH_RC4_40_MD5", RsaExport, ExportCipher, HashAlgo::WeakMd5Sha1, S30, T12},
      {"RSA_WITH_AES_128_CBC_SHA", Rsa, CbcBlock, HashAlgo::WeakMd5Sha1, S30, T12},
      {"RSA_WITH_AES_128_GCM_SHA256", Rsa, StrongAead, HashAlgo::Strong, T12, T12},
      {"DHE_RSA_EXPORT_WITH_DES40_CBC_SHA", DheExport, ExportCipher, HashAlgo::WeakMd5Sha1, S30, T12},
      {"DHE_RSA_WITH_AES_128_CBC_SHA", Dhe, CbcBlock, HashAlgo::WeakMd5Sha1, S30, T12},
      {"DHE_RSA_WITH_AES_128_GCM_SHA256", Dhe, StrongAead, HashAlgo::Strong, T12, T12},
      {"ECDHE_RSA_WITH_AES_128_CBC_SHA", Ecdhe, CbcBlock, HashAlgo::WeakMd5Sha1, T10, T12},
      {"ECDHE_RSA_WITH_AES_128_GCM_SHA256", Ecdhe, StrongAead, HashAlgo::Strong, T12, T12},
      // TLS 1.3 suites name no key exchange; the group comes from key_share.
      {"TLS_AES_128_GCM_SHA256", Ecdhe, StrongAead, HashAlgo::Strong, D10, FIN},
      {"TLS_CHACHA20_POLY1305_SHA256", Ecdhe, StrongAead, HashAlgo::Strong, D10, FIN},
  };
  return catalog;
}

const CipherSuite* find_suite(std::string_view name) {
  for (const auto& s : suite_catalog()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const CipherSuite& suite_by_name(std::string_view name) {
  if (const auto* s = find_suite(name)) return *s;
  throw NotFound("unknown cipher suite '" + std::string(name) + "'");
}

MessageType type_of(const Message& m) { return static_cast<MessageType>(m.index()); }

std::string_view to_string(MessageType t) { return kTypeNames.at(static_cast<std::size_t>(t)); }

MessageType message_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == s) return static_cast<MessageType>(i);
  }
  throw NotFound("unknown message type '" + std::string(s) + "'");
}

Bytes encode_params(const std::vector<std::uint64_t>& values) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(values.size()));
  for (auto v : values) w.u64(v);
  return w.take();
}

std::vector<std::uint64_t> decode_params(ByteView bytes) {
  ByteReader r(bytes);
  auto n = r.u32();
  if (n > 16) throw EncodingError("too many key parameters");
  std::vector<std::uint64_t> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(r.u64());
  if (!r.done()) throw EncodingError("trailing bytes after key parameters");
  return out;
}

namespace {

void write_key_share(ByteWriter& w, const KeyShareEntry& e) { w.str(e.group).u64(e.public_value); }

KeyShareEntry read_key_share(ByteReader& r) {
  KeyShareEntry e;
  e.group = r.str();
  e.public_value = r.u64();
  return e;
}

struct BodyWriter {
  ByteWriter& w;

  void operator()(const ClientHello& m) {
    w.u8(version_code(m.vmax)).bytes(m.nonce).str_list(m.suites).bytes(m.compressions);
    w.str_list(m.extensions.supported_versions);
    w.u32(static_cast<std::uint32_t>(m.extensions.key_share.size()));
    for (const auto& e : m.extensions.key_share) write_key_share(w, e);
    w.str_list(m.extensions.supported_groups);
  }
  void operator()(const ServerHello& m) {
    w.u8(version_code(m.version)).bytes(m.nonce).str(m.suite).u8(m.compression);
    w.u8(m.key_share ? 1 : 0);
    if (m.key_share) write_key_share(w, *m.key_share);
  }
  void operator()(const HelloRetryRequest& m) { w.u8(version_code(m.version)).str(m.suite).str(m.group); }
  void operator()(const ServerCertificate& m) {
    w.str(m.cert.subject).str(m.cert.issuer).u64(m.cert.key.modulus).u64(m.cert.key.public_exp);
  }
  void operator()(const ServerKeyExchange& m) {
    w.bytes(m.params).str(to_string(m.label)).bytes(m.signature);
  }
  void operator()(const ServerHelloDone&) {}
  void operator()(const ClientKeyExchange& m) { w.bytes(m.params); }
  void operator()(const ChangeCipherSpec&) {}
  void operator()(const ClientFinished& m) { w.bytes(m.mac); }
  void operator()(const ServerFinished& m) { w.bytes(m.mac).bytes(m.transcript_signature); }
  void operator()(const ApplicationData& m) { w.u64(m.seq).bytes(m.ciphertext); }
  void operator()(const SmtpEhlo& m) { w.str(m.domain); }
  void operator()(const SmtpCapabilities& m) { w.str_list(m.capabilities); }
  void operator()(const SmtpStartTls& m) { w.str(m.verb); }
  void operator()(const SmtpReady&) {}
  void operator()(const SmtpReject& m) { w.str(m.reason); }
  void operator()(const PlaintextData& m) { w.str(m.payload); }
};

Version read_version(ByteReader& r) {
  auto code = r.u8();
  auto v = version_from_code(code);
  if (!v) throw EncodingError("unknown version code " + std::to_string(code));
  return *v;
}

Message read_body(MessageType type, ByteReader& r) {
  switch (type) {
    case MessageType::CH: {
      ClientHello m;
      m.vmax = read_version(r);
      m.nonce = r.bytes();
      m.suites = r.str_list();
      m.compressions = r.bytes();
      m.extensions.supported_versions = r.str_list();
      auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) m.extensions.key_share.push_back(read_key_share(r));
      m.extensions.supported_groups = r.str_list();
      return m;
    }
    case MessageType::SH: {
      ServerHello m;
      m.version = read_version(r);
      m.nonce = r.bytes();
      m.suite = r.str();
      m.compression = r.u8();
      if (r.u8() != 0) m.key_share = read_key_share(r);
      return m;
    }
    case MessageType::HRR: {
      HelloRetryRequest m;
      m.version = read_version(r);
      m.suite = r.str();
      m.group = r.str();
      return m;
    }
    case MessageType::SC: {
      ServerCertificate m;
      m.cert.subject = r.str();
      m.cert.issuer = r.str();
      m.cert.key.modulus = r.u64();
      m.cert.key.public_exp = r.u64();
      m.cert.key.strength = crypto::strength_of(m.cert.key.modulus);
      return m;
    }
    case MessageType::SKE: {
      ServerKeyExchange m;
      m.params = r.bytes();
      m.label = key_label_from_string(r.str());
      m.signature = r.bytes();
      return m;
    }
    case MessageType::SHD: return ServerHelloDone{};
    case MessageType::CKE: return ClientKeyExchange{r.bytes()};
    case MessageType::CCS: return ChangeCipherSpec{};
    case MessageType::CF: return ClientFinished{r.bytes()};
    case MessageType::SF: {
      ServerFinished m;
      m.mac = r.bytes();
      m.transcript_signature = r.bytes();
      return m;
    }
    case MessageType::AppData: {
      ApplicationData m;
      m.seq = r.u64();
      m.ciphertext = r.bytes();
      return m;
    }
    case MessageType::Ehlo: return SmtpEhlo{r.str()};
    case MessageType::Capabilities: return SmtpCapabilities{r.str_list()};
    case MessageType::StartTls: return SmtpStartTls{r.str()};
    case MessageType::Ready: return SmtpReady{};
    case MessageType::Reject: return SmtpReject{r.str()};
    case MessageType::Plaintext: return PlaintextData{r.str()};
  }
  throw EncodingError("unknown message type");
}

std::string join(const std::vector<std::string>& items, std::string_view sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

Bytes serialize(const Message& m) {
  ByteWriter body;
  std::visit(BodyWriter{body}, m);
  ByteWriter out;
  out.u8(static_cast<std::uint8_t>(m.index())).bytes(body.data());
  return out.take();
}

Message deserialize(ByteView bytes) {
  ByteReader outer(bytes);
  auto code = outer.u8();
  if (code >= kTypeNames.size()) throw EncodingError("unknown message type code " + std::to_string(code));
  auto body = outer.bytes();
  if (!outer.done()) throw EncodingError("trailing bytes after message");
  ByteReader r(body);
  auto m = read_body(static_cast<MessageType>(code), r);
  if (!r.done()) throw EncodingError("trailing bytes in message body");
  return m;
}

std::string describe(const Message& m) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, ClientHello>) {
          os << "CH(vmax=" << to_string(msg.vmax) << ", suites=[" << join(msg.suites) << "]";
          if (!msg.extensions.supported_versions.empty())
            os << ", supported_versions=[" << join(msg.extensions.supported_versions) << "]";
          for (const auto& e : msg.extensions.key_share) os << ", key_share=" << e.group;
          if (!msg.extensions.supported_groups.empty())
            os << ", supported_groups=[" << join(msg.extensions.supported_groups) << "]";
          os << ")";
        } else if constexpr (std::is_same_v<T, ServerHello>) {
          os << "SH(" << to_string(msg.version) << ", " << msg.suite;
          if (msg.key_share) os << ", key_share=" << msg.key_share->group;
          os << ")";
        } else if constexpr (std::is_same_v<T, HelloRetryRequest>) {
          os << "HRR(" << to_string(msg.version) << ", " << msg.suite << ", " << msg.group << ")";
        } else if constexpr (std::is_same_v<T, ServerCertificate>) {
          os << "SC(subject=" << msg.cert.subject << ", issuer=" << msg.cert.issuer << ")";
        } else if constexpr (std::is_same_v<T, ServerKeyExchange>) {
          os << "SKE(" << to_string(msg.label) << ")";
        } else if constexpr (std::is_same_v<T, ServerHelloDone>) {
          os << "SHD";
        } else if constexpr (std::is_same_v<T, ClientKeyExchange>) {
          os << "CKE";
        } else if constexpr (std::is_same_v<T, ChangeCipherSpec>) {
          os << "CCS";
        } else if constexpr (std::is_same_v<T, ClientFinished>) {
          os << "CF(" << to_hex(msg.mac).substr(0, 16) << ")";
        } else if constexpr (std::is_same_v<T, ServerFinished>) {
          os << "SF(" << to_hex(msg.mac).substr(0, 16) << ")";
        } else if constexpr (std::is_same_v<T, ApplicationData>) {
          os << "AppData(seq=" << msg.seq << ", " << msg.ciphertext.size() << " bytes)";
        } else if constexpr (std::is_same_v<T, SmtpEhlo>) {
          os << "EHLO " << msg.domain;
        } else if constexpr (std::is_same_v<T, SmtpCapabilities>) {
          os << "250 " << join(msg.capabilities, " ");
        } else if constexpr (std::is_same_v<T, SmtpStartTls>) {
          os << msg.verb;
        } else if constexpr (std::is_same_v<T, SmtpReady>) {
          os << "220 Ready to start TLS";
        } else if constexpr (std::is_same_v<T, SmtpReject>) {
          os << "500 " << msg.reason;
        } else if constexpr (std::is_same_v<T, PlaintextData>) {
          os << "DATA " << msg.payload;
        }
      },
      m);
  return os.str();
}

}  // namespace downgrade
