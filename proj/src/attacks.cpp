#include "downgrade/attacks.hpp"

#include <algorithm>

namespace downgrade {

namespace {

using V = Version;
using MT = MessageType;
constexpr auto C2S = Direction::ClientToServer;
constexpr auto S2C = Direction::ServerToClient;

const char* const kWorstCase = "worst case assumption: theoretical attack realized under the most favorable conditions";

EndpointConfig endpoint(Role role, V min, V max, std::vector<std::string> suites, std::vector<std::string> groups,
                        std::set<BugFlag> bugs = {}) {
  EndpointConfig c;
  c.role = role;
  c.min_version = min;
  c.max_version = max;
  c.suites = std::move(suites);
  c.groups = std::move(groups);
  c.bugs = std::move(bugs);
  return c;
}

Trigger on(MT type, std::optional<Direction> dir = std::nullopt, std::vector<int> occurrences = {}) {
  return {dir, type, std::move(occurrences)};
}

Rule modify(Trigger t, std::vector<FieldEdit> edits) {
  Rule r;
  r.trigger = std::move(t);
  r.action = ActionKind::Modify;
  r.edits = std::move(edits);
  return r;
}

Rule drop(Trigger t) {
  Rule r;
  r.trigger = std::move(t);
  r.action = ActionKind::Drop;
  return r;
}

Rule inject(Trigger t, MT type, std::vector<FieldEdit> fields, Direction to) {
  Rule r;
  r.trigger = std::move(t);
  r.action = ActionKind::Inject;
  r.inject_type = type;
  r.inject_fields = std::move(fields);
  r.inject_direction = to;
  return r;
}

Hook hook(Trigger t, OracleKind oracle) { return {std::move(t), oracle}; }

using Strings = std::vector<std::string>;

// Forged Finished both ways once the master secrets are known.
void add_forgeries(AdversaryScript& s) {
  s.rules.push_back(modify(on(MT::CF, C2S), {{"mac", ComputedValue::ForgedFinished}}));
  s.rules.push_back(modify(on(MT::SF, S2C), {{"mac", ComputedValue::ForgedFinished}}));
}

Scenario base(std::string name, EndpointConfig client, EndpointConfig server, AdversaryScript script) {
  Scenario sc;
  sc.name = std::move(name);
  sc.client = std::move(client);
  sc.server = std::move(server);
  sc.adversary = std::move(script);
  sc.seed = 1;
  return sc;
}

AttackSpec make(int id, std::string name, Scenario vulnerable, std::string patch, bool theoretical) {
  AttackSpec a;
  a.id = id;
  a.name = std::move(name);
  a.declared = ground_truth_vector(id);
  a.vulnerable = std::move(vulnerable);
  a.patched = a.vulnerable;
  a.patch = std::move(patch);
  a.theoretical = theoretical;
  if (theoretical) a.notes.emplace_back(kWorstCase);
  return a;
}

AttackSpec ssl2_suite_rollback() {
  const Strings suites = {"SSL2_DES_192_EDE3_CBC_WITH_MD5", "SSL2_NULL_WITH_MD5"};
  AdversaryScript s;
  s.rules.push_back(modify(on(MT::CH, C2S), {{"suites", Strings{"SSL2_NULL_WITH_MD5"}}}));
  s.hooks.push_back(hook(on(MT::AppData), OracleKind::DecryptAppData));
  auto a = make(1, "SSL 2.0 ciphersuite rollback",
                base("ssl2-suite-rollback", endpoint(Role::Client, V::Ssl20, V::Ssl20, suites, {"ec-strong"}),
                     endpoint(Role::Server, V::Ssl20, V::Ssl20, suites, {"ec-strong"}), s),
                "server drops SSL2_NULL_WITH_MD5", true);
  a.patched.server.suites = {"SSL2_DES_192_EDE3_CBC_WITH_MD5"};
  return a;
}

AttackSpec ssl3_version_rollback() {
  const Strings suites = {"RSA_WITH_AES_128_CBC_SHA", "SSL2_DES_192_EDE3_CBC_WITH_MD5", "SSL2_NULL_WITH_MD5"};
  AdversaryScript s;
  s.rules.push_back(
      modify(on(MT::CH, C2S), {{"vmax", std::string("SSL20")}, {"suites", Strings{"SSL2_NULL_WITH_MD5"}}}));
  s.hooks.push_back(hook(on(MT::AppData), OracleKind::DecryptAppData));
  auto a = make(2, "SSL 3.0 version rollback",
                base("ssl3-version-rollback", endpoint(Role::Client, V::Ssl20, V::Ssl30, suites, {"ec-strong"}),
                     endpoint(Role::Server, V::Ssl20, V::Ssl30, suites, {"ec-strong"}), s),
                "server minimum version raised to SSL30", true);
  a.notes.emplace_back("after the version rollback the adversary also applies the SSL 2.0 suite rollback");
  a.patched.server.min_version = V::Ssl30;
  return a;
}

AttackSpec ssl3_kx_rollback() {
  AdversaryScript s;
  s.rules.push_back(modify(on(MT::CH, C2S), {{"suites", Strings{"DHE_RSA_WITH_AES_128_CBC_SHA"}}}));
  s.rules.push_back(modify(on(MT::SH, S2C), {{"suite", std::string("RSA_EXPORT_WITH_RC4_40_MD5")}}));
  s.rules.push_back(modify(on(MT::CKE, C2S), {{"params", ComputedValue::AdversaryKeyShare}}));
  add_forgeries(s);
  s.rules.push_back(modify(on(MT::AppData), {{"ciphertext", ComputedValue::Reencrypt}}));
  s.hooks.push_back(hook(on(MT::CKE, C2S), OracleKind::RecoverKey));
  auto a = make(3, "SSL 3.0 key-exchange rollback",
                base("ssl3-kx-rollback",
                     endpoint(Role::Client, V::Ssl30, V::Ssl30,
                              {"RSA_WITH_AES_128_CBC_SHA", "RSA_EXPORT_WITH_RC4_40_MD5"}, {"ffdhe-strong"}),
                     endpoint(Role::Server, V::Ssl30, V::Ssl30,
                              {"DHE_RSA_WITH_AES_128_CBC_SHA", "RSA_WITH_AES_128_CBC_SHA"}, {"ffdhe-strong"}),
                     s),
                "client drops RSA_EXPORT_WITH_RC4_40_MD5", true);
  a.notes.emplace_back("the client reads signed DH parameters as an export RSA key: modulus p, exponent g");
  a.patched.client.suites = {"RSA_WITH_AES_128_CBC_SHA"};
  return a;
}

AttackSpec dhe_kx_rollback() {
  AdversaryScript s;
  s.rules.push_back(modify(on(MT::CH, C2S), {{"suites", Strings{"ECDHE_RSA_WITH_AES_128_GCM_SHA256"}}}));
  s.rules.push_back(modify(on(MT::SH, S2C), {{"suite", std::string("DHE_RSA_WITH_AES_128_GCM_SHA256")}}));
  add_forgeries(s);
  s.hooks.push_back(hook(on(MT::CKE, C2S), OracleKind::RecoverKey));
  s.hooks.push_back(hook(on(MT::AppData), OracleKind::DecryptAppData));
  auto a = make(4, "DHE key-exchange rollback",
                base("dhe-kx-rollback",
                     endpoint(Role::Client, V::Tls12, V::Tls12, {"DHE_RSA_WITH_AES_128_GCM_SHA256"}, {"ffdhe-strong"},
                              {BugFlag::AcceptsArbitraryGroups}),
                     endpoint(Role::Server, V::Tls12, V::Tls12,
                              {"ECDHE_RSA_WITH_AES_128_GCM_SHA256", "DHE_RSA_WITH_AES_128_GCM_SHA256"},
                              {"ec-strong", "ffdhe-strong"}),
                     s),
                "client no longer accepts unlisted DH groups", false);
  a.notes.emplace_back("elliptic-curve parameters read as finite-field DH have export strength");
  a.patched.client.bugs.clear();
  return a;
}

AttackSpec sloth() {
  const Strings suites = {"RSA_WITH_AES_128_CBC_SHA"};
  AdversaryScript s;
  s.rules.push_back(modify(on(MT::CH, C2S), {{"vmax", std::string("SSL30")}}));
  s.hooks.push_back(hook(on(MT::SH, S2C), OracleKind::RegisterCollision));
  s.hooks.push_back(hook(on(MT::AppData, C2S), OracleKind::CbcRecover));
  auto a = make(5, "TLS 1.0-1.1 SLOTH",
                base("sloth", endpoint(Role::Client, V::Ssl30, V::Tls11, suites, {"ec-strong"}),
                     endpoint(Role::Server, V::Ssl30, V::Tls11, suites, {"ec-strong"}), s),
                "both endpoints compute Finished over a strong hash", true);
  a.notes.emplace_back("the version change is hidden by a transcript collision; the SSL 3.0 CBC flaw breaks secrecy");
  a.patched.client.strong_transcript_hash = true;
  a.patched.server.strong_transcript_hash = true;
  return a;
}

AttackSpec poodle() {
  const Strings suites = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256", "RSA_WITH_AES_128_CBC_SHA"};
  AdversaryScript s;
  s.rules.push_back(drop(on(MT::CH, C2S, {1, 2, 3})));
  s.hooks.push_back(hook(on(MT::AppData, C2S), OracleKind::CbcRecover));
  auto a = make(6, "POODLE version downgrade",
                base("poodle",
                     endpoint(Role::Client, V::Ssl30, V::Tls12, suites, {"ec-strong"}, {BugFlag::DowngradeDance}),
                     endpoint(Role::Server, V::Ssl30, V::Tls12, suites, {"ec-strong"}), s),
                "client does not retry at lower versions", false);
  a.patched.client.bugs.clear();
  return a;
}

AttackSpec freak() {
  AdversaryScript s;
  s.rules.push_back(modify(on(MT::CH, C2S), {{"suites", Strings{"RSA_EXPORT_WITH_RC4_40_MD5"}}}));
  s.rules.push_back(modify(on(MT::SH, S2C), {{"suite", std::string("RSA_WITH_AES_128_CBC_SHA")}}));
  add_forgeries(s);
  s.hooks.push_back(hook(on(MT::CKE, C2S), OracleKind::RecoverKey));
  s.hooks.push_back(hook(on(MT::AppData), OracleKind::DecryptAppData));
  auto a = make(7, "FREAK",
                base("freak",
                     endpoint(Role::Client, V::Tls10, V::Tls12, {"RSA_WITH_AES_128_CBC_SHA"}, {"ec-strong"},
                              {BugFlag::AcceptsSkeInRsa}),
                     endpoint(Role::Server, V::Tls10, V::Tls12,
                              {"RSA_WITH_AES_128_CBC_SHA", "RSA_EXPORT_WITH_RC4_40_MD5"}, {"ec-strong"}),
                     s),
                "client rejects ServerKeyExchange under RSA key exchange", false);
  a.patched.client.bugs.clear();
  return a;
}

AttackSpec drown() {
  const Strings suites = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256", "RSA_WITH_AES_128_GCM_SHA256"};
  AdversaryScript s;
  s.parallel_connections = {"sslv2"};
  s.rules.push_back(modify(on(MT::CH, C2S), {{"suites", Strings{"RSA_WITH_AES_128_GCM_SHA256"}}}));
  add_forgeries(s);
  s.hooks.push_back(hook(on(MT::CKE, C2S), OracleKind::Bleichenbacher));
  s.hooks.push_back(hook(on(MT::AppData), OracleKind::DecryptAppData));
  auto a = make(8, "DROWN",
                base("drown", endpoint(Role::Client, V::Tls12, V::Tls12, suites, {"ec-strong"}),
                     endpoint(Role::Server, V::Tls12, V::Tls12, suites, {"ec-strong"}), s),
                "server key no longer shared with an SSLv2 endpoint", false);
  a.vulnerable.server_key.shared_with_sslv2 = true;
  a.patched.server_key.shared_with_sslv2 = false;
  return a;
}

AttackSpec fs_rollback() {
  const Strings suites = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256", "RSA_WITH_AES_128_GCM_SHA256"};
  AdversaryScript s;
  s.rules.push_back(drop(on(MT::SKE, S2C, {1})));
  auto a = make(9, "Forward Secrecy rollback",
                base("fs-rollback",
                     endpoint(Role::Client, V::Tls12, V::Tls12, suites, {"ec-strong"},
                              {BugFlag::FsFallbackOnMissingSke}),
                     endpoint(Role::Server, V::Tls12, V::Tls12, suites, {"ec-strong"}), s),
                "client aborts when ServerKeyExchange is missing", false);
  a.notes.emplace_back("the client's fallback is modeled as a fresh connection offering only non-FS suites");
  a.patched.client.bugs.clear();
  return a;
}

AttackSpec logjam() {
  AdversaryScript s;
  s.rules.push_back(modify(on(MT::CH, C2S), {{"suites", Strings{"DHE_RSA_EXPORT_WITH_DES40_CBC_SHA"}}}));
  s.rules.push_back(modify(on(MT::SH, S2C), {{"suite", std::string("DHE_RSA_WITH_AES_128_GCM_SHA256")}}));
  add_forgeries(s);
  s.hooks.push_back(hook(on(MT::CKE, C2S), OracleKind::RecoverKey));
  s.hooks.push_back(hook(on(MT::AppData), OracleKind::DecryptAppData));
  auto a = make(10, "Logjam",
                base("logjam",
                     endpoint(Role::Client, V::Tls12, V::Tls12, {"DHE_RSA_WITH_AES_128_GCM_SHA256"}, {"ffdhe-strong"},
                              {BugFlag::AcceptsArbitraryGroups}),
                     endpoint(Role::Server, V::Tls12, V::Tls12,
                              {"DHE_RSA_WITH_AES_128_GCM_SHA256", "DHE_RSA_EXPORT_WITH_DES40_CBC_SHA"},
                              {"ffdhe-strong", "ffdhe-export"}),
                     s),
                "server drops DHE_RSA_EXPORT_WITH_DES40_CBC_SHA", false);
  a.patched.server.suites = {"DHE_RSA_WITH_AES_128_GCM_SHA256"};
  return a;
}

AttackSpec smtp_strip() {
  const Strings suites = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256"};
  AdversaryScript s;
  s.rules.push_back(modify(on(MT::Capabilities, S2C), {{"capabilities", Strings{"PIPELINING", "8BITMIME"}}}));
  auto a = make(11, "SMTPS to SMTP",
                base("smtp-starttls-strip", endpoint(Role::Client, V::Tls12, V::Tls12, suites, {"ec-strong"}),
                     endpoint(Role::Server, V::Tls12, V::Tls12, suites, {"ec-strong"}), s),
                "client policy FAIL_CLOSED", true);
  a.vulnerable.app = AppKind::Smtp;
  a.vulnerable.smtp.policy = PolicyMode::FailOpen;
  a.vulnerable.payload = "MAIL FROM:<alice@example.org> token sid=55aa01c3";
  a.patched = a.vulnerable;
  a.patched.smtp.policy = PolicyMode::FailClosed;
  return a;
}

AttackSpec proxied_https() {
  const Strings suites = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256"};
  auto a = make(12, "Proxied HTTPS",
                base("proxied-https", endpoint(Role::Client, V::Tls12, V::Tls12, suites, {"ec-strong"}),
                     endpoint(Role::Server, V::Tls12, V::Tls12, suites, {"ec-strong"}), AdversaryScript{}),
                "client no longer trusts the proxy issuer", true);
  a.vulnerable.adversary.reset();
  a.vulnerable.app = AppKind::Proxy;
  a.vulnerable.proxy = {"CorpProxyCA", ProxyBehavior::ForwardPlaintext};
  a.vulnerable.client.trust_store = {"RootCA", "CorpProxyCA"};
  a.notes.emplace_back("the proxy forwards to the server without TLS, the worst of the observed proxy behaviors");
  a.patched = a.vulnerable;
  a.patched.client.trust_store = {"RootCA"};
  return a;
}

AttackSpec tls13_version_rollback() {
  const Strings suites = {"TLS_AES_128_GCM_SHA256", "DHE_RSA_EXPORT_WITH_DES40_CBC_SHA"};
  const Strings groups = {"ec-strong", "ffdhe-export"};
  AdversaryScript s;
  s.rules.push_back(modify(on(MT::CH, C2S), {{"supported_versions", Strings{"TLS12"}},
                                             {"suites", Strings{"DHE_RSA_EXPORT_WITH_DES40_CBC_SHA"}}}));
  add_forgeries(s);
  s.hooks.push_back(hook(on(MT::CKE, C2S), OracleKind::RecoverKey));
  s.hooks.push_back(hook(on(MT::AppData), OracleKind::DecryptAppData));
  auto a = make(13, "TLS 1.3 version rollback",
                base("tls13-version-rollback", endpoint(Role::Client, V::Tls12, V::Tls13Draft10, suites, groups),
                     endpoint(Role::Server, V::Tls12, V::Tls13Draft10, suites, groups), s),
                "both endpoints run TLS13_FINAL with the downgrade sentinel", true);
  a.notes.emplace_back("both endpoints still support an export DHE suite in TLS 1.2");
  a.patched.client.max_version = V::Tls13Final;
  a.patched.server.max_version = V::Tls13Final;
  return a;
}

AttackSpec tls13_dance() {
  const Strings suites = {"TLS_AES_128_GCM_SHA256", "DHE_RSA_WITH_AES_128_GCM_SHA256"};
  const Strings groups = {"ec-strong", "ffdhe-legacy"};
  AdversaryScript s;
  s.rules.push_back(drop(on(MT::CH, C2S, {1})));
  s.hooks.push_back(hook(on(MT::CKE, C2S), OracleKind::RecoverKey));
  s.hooks.push_back(hook(on(MT::AppData), OracleKind::DecryptAppData));
  auto a = make(14, "TLS 1.3 downgrade-dance version fallback",
                base("tls13-dance",
                     endpoint(Role::Client, V::Tls12, V::Tls13Draft10, suites, groups, {BugFlag::DowngradeDance}),
                     endpoint(Role::Server, V::Tls12, V::Tls13Draft10, suites, groups), s),
                "client does not retry at lower versions", true);
  a.notes.emplace_back("TLS 1.2 DHE uses a legacy group breakable within the budget");
  a.patched.client.bugs.clear();
  return a;
}

AttackSpec hello_retry() {
  const Strings suites = {"TLS_AES_128_GCM_SHA256"};
  const Strings groups = {"ec-strong", "ec-strong-b"};
  AdversaryScript s;
  s.rules.push_back(inject(on(MT::CH, C2S, {1}), MT::HRR,
                           {{"version", std::string("TLS13_DRAFT10")},
                            {"suite", std::string("TLS_AES_128_GCM_SHA256")},
                            {"group", std::string("ec-strong-b")}},
                           S2C));
  auto a = make(15, "TLS 1.3 HelloRetry downgrade",
                base("tls13-hello-retry", endpoint(Role::Client, V::Tls13Draft10, V::Tls13Draft10, suites, groups),
                     endpoint(Role::Server, V::Tls13Draft10, V::Tls13Draft10, suites, groups), s),
                "both endpoints run TLS13_FINAL, which keeps hashing across retries", true);
  for (auto* c : {&a.patched.client, &a.patched.server}) {
    c->min_version = V::Tls13Final;
    c->max_version = V::Tls13Final;
  }
  return a;
}

}  // namespace

const AdversaryScript& AttackSpec::script() const {
  static const AdversaryScript none;
  return vulnerable.adversary ? *vulnerable.adversary : none;
}

const std::vector<AttackSpec>& attack_registry() {
  static const std::vector<AttackSpec> registry = {
      ssl2_suite_rollback(), ssl3_version_rollback(), ssl3_kx_rollback(), dhe_kx_rollback(), sloth(),
      poodle(),              freak(),                 drown(),            fs_rollback(),     logjam(),
      smtp_strip(),          proxied_https(),         tls13_version_rollback(), tls13_dance(), hello_retry(),
  };
  return registry;
}

const AttackSpec& get_attack(int id) {
  for (const auto& a : attack_registry()) {
    if (a.id == id) return a;
  }
  throw NotFound("no attack with id " + std::to_string(id));
}

Scenario vulnerable_scenario(int id) { return get_attack(id).vulnerable; }
Scenario patched_scenario(int id) { return get_attack(id).patched; }

bool AttackRun::ok() const {
  const bool patch_holds =
      patched_damage == Damage::None || (patched_damage != Damage::Broken && patched.aborted.has_value());
  return report.damage_match && report.method_match && patch_holds;
}

AttackRun run_attack(const AttackSpec& spec, std::optional<std::uint64_t> seed) {
  auto vulnerable = spec.vulnerable;
  auto patched = spec.patched;
  if (seed) vulnerable.seed = patched.seed = *seed;
  AttackRun run;
  run.id = spec.id;
  run.name = spec.name;
  run.notes = spec.notes;
  run.vulnerable = run_session(vulnerable);
  run.patched = run_session(patched);
  run.report = verify_classification(spec.id, spec.declared, run.vulnerable);
  run.patched_damage = evaluate_damage(run.patched);
  return run;
}

AttackRun run_attack(int id, std::optional<std::uint64_t> seed) { return run_attack(get_attack(id), seed); }

}  // namespace downgrade
