#include <algorithm>
#include <array>

#include "downgrade/adversary.hpp"

namespace downgrade {

namespace {

constexpr std::array<std::string_view, 5> kOracleNames = {"RecoverKey", "Bleichenbacher", "RegisterCollision",
                                                          "CbcRecover", "DecryptAppData"};
constexpr std::array<std::string_view, 3> kComputedNames = {"ForgedFinished", "AdversaryKeyShare", "Reencrypt"};

[[noreturn]] void bad_type(MessageType t, const std::string& path, const char* want) {
  throw ScriptError(std::string(to_string(t)) + "." + path + " expects " + want);
}

std::string as_string(MessageType t, const FieldEdit& e) {
  if (const auto* s = std::get_if<std::string>(&e.value)) return *s;
  bad_type(t, e.path, "a string");
}

std::vector<std::string> as_list(MessageType t, const FieldEdit& e) {
  if (const auto* s = std::get_if<std::vector<std::string>>(&e.value)) return *s;
  bad_type(t, e.path, "a list of strings");
}

std::int64_t as_int(MessageType t, const FieldEdit& e) {
  if (const auto* s = std::get_if<std::int64_t>(&e.value)) return *s;
  bad_type(t, e.path, "an integer");
}

std::vector<std::int64_t> as_ints(MessageType t, const FieldEdit& e) {
  if (const auto* s = std::get_if<std::vector<std::int64_t>>(&e.value)) return *s;
  bad_type(t, e.path, "a list of integers");
}

Version as_version(MessageType t, const FieldEdit& e) {
  try {
    return version_from_string(as_string(t, e));
  } catch (const NotFound& err) {
    throw ScriptError(err.what());
  }
}

Bytes as_hex(MessageType t, const FieldEdit& e) {
  try {
    return from_hex(as_string(t, e));
  } catch (const EncodingError& err) {
    throw ScriptError(std::string(to_string(t)) + "." + e.path + ": " + err.what());
  }
}

std::uint8_t as_byte(MessageType t, const FieldEdit& e) {
  auto v = as_int(t, e);
  if (v < 0 || v > 255) bad_type(t, e.path, "a byte value");
  return static_cast<std::uint8_t>(v);
}

Bytes as_params(MessageType t, const FieldEdit& e) {
  std::vector<std::uint64_t> vals;
  for (auto v : as_ints(t, e)) {
    if (v < 0) bad_type(t, e.path, "non-negative integers");
    vals.push_back(static_cast<std::uint64_t>(v));
  }
  return encode_params(vals);
}

[[noreturn]] void unknown_path(MessageType t, const std::string& path) {
  throw ScriptError("message " + std::string(to_string(t)) + " has no field '" + path + "'");
}

}  // namespace

std::string_view to_string(OracleKind k) { return kOracleNames.at(static_cast<std::size_t>(k)); }

OracleKind oracle_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kOracleNames.size(); ++i) {
    if (kOracleNames[i] == s) return static_cast<OracleKind>(i);
  }
  throw NotFound("unknown oracle '" + std::string(s) + "'");
}

std::string_view to_string(ComputedValue v) { return kComputedNames.at(static_cast<std::size_t>(v)); }

ComputedValue computed_value_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kComputedNames.size(); ++i) {
    if (kComputedNames[i] == s) return static_cast<ComputedValue>(i);
  }
  throw NotFound("unknown computed value '" + std::string(s) + "'");
}

std::vector<std::string> editable_fields(MessageType type) {
  switch (type) {
    case MessageType::CH: return {"vmax", "nonce", "suites", "compressions", "supported_versions", "supported_groups"};
    case MessageType::SH: return {"version", "nonce", "suite", "compression"};
    case MessageType::HRR: return {"version", "suite", "group"};
    case MessageType::SC: return {"subject", "issuer"};
    case MessageType::SKE: return {"params", "label"};
    case MessageType::CKE: return {"params"};
    case MessageType::CF:
    case MessageType::SF: return {"mac"};
    case MessageType::AppData: return {"ciphertext"};
    case MessageType::Ehlo: return {"domain"};
    case MessageType::Capabilities: return {"capabilities"};
    case MessageType::StartTls: return {"verb"};
    case MessageType::Reject: return {"reason"};
    case MessageType::Plaintext: return {"payload"};
    default: return {};
  }
}

void apply_edit(Message& m, const FieldEdit& e) {
  const auto t = type_of(m);
  if (std::holds_alternative<ComputedValue>(e.value))
    throw ScriptError("computed value " + std::string(to_string(std::get<ComputedValue>(e.value))) +
                      " cannot be applied literally");
  const auto& p = e.path;
  std::visit(
      [&](auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, ClientHello>) {
          if (p == "vmax") msg.vmax = as_version(t, e);
          else if (p == "nonce") msg.nonce = as_hex(t, e);
          else if (p == "suites") msg.suites = as_list(t, e);
          else if (p == "compressions") {
            msg.compressions.clear();
            for (auto v : as_ints(t, e)) {
              if (v < 0 || v > 255) bad_type(t, p, "byte values");
              msg.compressions.push_back(static_cast<std::uint8_t>(v));
            }
          } else if (p == "supported_versions") msg.extensions.supported_versions = as_list(t, e);
          else if (p == "supported_groups") msg.extensions.supported_groups = as_list(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, ServerHello>) {
          if (p == "version") msg.version = as_version(t, e);
          else if (p == "nonce") msg.nonce = as_hex(t, e);
          else if (p == "suite") msg.suite = as_string(t, e);
          else if (p == "compression") msg.compression = as_byte(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, HelloRetryRequest>) {
          if (p == "version") msg.version = as_version(t, e);
          else if (p == "suite") msg.suite = as_string(t, e);
          else if (p == "group") msg.group = as_string(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, ServerCertificate>) {
          if (p == "subject") msg.cert.subject = as_string(t, e);
          else if (p == "issuer") msg.cert.issuer = as_string(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, ServerKeyExchange>) {
          if (p == "params") msg.params = as_params(t, e);
          else if (p == "label") {
            try {
              msg.label = key_label_from_string(as_string(t, e));
            } catch (const NotFound& err) {
              throw ScriptError(err.what());
            }
          } else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, ClientKeyExchange>) {
          if (p == "params") msg.params = as_params(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, ClientFinished> || std::is_same_v<T, ServerFinished>) {
          if (p == "mac") msg.mac = as_hex(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, ApplicationData>) {
          if (p == "ciphertext") msg.ciphertext = as_hex(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, SmtpEhlo>) {
          if (p == "domain") msg.domain = as_string(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, SmtpCapabilities>) {
          if (p == "capabilities") msg.capabilities = as_list(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, SmtpStartTls>) {
          if (p == "verb") msg.verb = as_string(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, SmtpReject>) {
          if (p == "reason") msg.reason = as_string(t, e);
          else unknown_path(t, p);
        } else if constexpr (std::is_same_v<T, PlaintextData>) {
          if (p == "payload") msg.payload = as_string(t, e);
          else unknown_path(t, p);
        } else {
          unknown_path(t, p);
        }
      },
      m);
}

Message default_message(MessageType type) {
  switch (type) {
    case MessageType::CH: return ClientHello{};
    case MessageType::SH: return ServerHello{};
    case MessageType::HRR: return HelloRetryRequest{};
    case MessageType::SC: return ServerCertificate{};
    case MessageType::SKE: return ServerKeyExchange{{}, KeyLabel::Rsa, {}};
    case MessageType::SHD: return ServerHelloDone{};
    case MessageType::CKE: return ClientKeyExchange{};
    case MessageType::CCS: return ChangeCipherSpec{};
    case MessageType::CF: return ClientFinished{};
    case MessageType::SF: return ServerFinished{};
    case MessageType::AppData: return ApplicationData{};
    case MessageType::Ehlo: return SmtpEhlo{};
    case MessageType::Capabilities: return SmtpCapabilities{};
    case MessageType::StartTls: return SmtpStartTls{};
    case MessageType::Ready: return SmtpReady{};
    case MessageType::Reject: return SmtpReject{};
    case MessageType::Plaintext: return PlaintextData{};
  }
  throw ScriptError("unknown message type");
}

Message make_message(MessageType type, const std::vector<FieldEdit>& fields) {
  auto m = default_message(type);
  for (const auto& f : fields) apply_edit(m, f);
  return m;
}

namespace {

void check_computed(MessageType type, const FieldEdit& e, ComputedValue v) {
  bool ok = false;
  switch (v) {
    case ComputedValue::ForgedFinished: ok = (type == MessageType::CF || type == MessageType::SF) && e.path == "mac"; break;
    case ComputedValue::AdversaryKeyShare: ok = type == MessageType::CKE && e.path == "params"; break;
    case ComputedValue::Reencrypt: ok = type == MessageType::AppData && e.path == "ciphertext"; break;
  }
  if (!ok)
    throw ScriptError(std::string(to_string(v)) + " cannot fill " + std::string(to_string(type)) + "." + e.path);
}

}  // namespace

void validate_script(const AdversaryScript& script) {
  for (const auto& r : script.rules) {
    for (int n : r.trigger.occurrences) {
      if (n < 1) throw ScriptError("trigger occurrences are 1-based");
    }
    if (r.action == ActionKind::Modify) {
      if (r.edits.empty()) throw ScriptError("Modify rule without edits");
      auto probe = default_message(r.trigger.type);
      for (const auto& e : r.edits) {
        if (const auto* v = std::get_if<ComputedValue>(&e.value)) {
          const auto fields = editable_fields(r.trigger.type);
          if (std::find(fields.begin(), fields.end(), e.path) == fields.end()) unknown_path(r.trigger.type, e.path);
          check_computed(r.trigger.type, e, *v);
        } else {
          apply_edit(probe, e);
        }
      }
    } else if (r.action == ActionKind::Inject) {
      make_message(r.inject_type, r.inject_fields);
    } else if (!r.edits.empty()) {
      throw ScriptError("edits given for a " + std::string(to_string(r.action)) + " rule");
    }
  }
  for (const auto& h : script.hooks) {
    for (int n : h.trigger.occurrences) {
      if (n < 1) throw ScriptError("trigger occurrences are 1-based");
    }
  }
}

}  // namespace downgrade
