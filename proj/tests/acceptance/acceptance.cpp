// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion; exits
// non-zero when any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "downgrade/report.hpp"
#include "downgrade/scenario_io.hpp"

using namespace downgrade;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

EndpointConfig config(Role role, Version v, std::vector<std::string> suites, std::vector<std::string> groups) {
  EndpointConfig c;
  c.role = role;
  c.min_version = c.max_version = v;
  c.suites = std::move(suites);
  c.groups = std::move(groups);
  return c;
}

Scenario handshake_scenario(Version v, const std::vector<std::string>& suites, const std::vector<std::string>& groups,
                            std::uint64_t seed) {
  Scenario s;
  s.name = "benign";
  s.client = config(Role::Client, v, suites, groups);
  s.server = config(Role::Server, v, suites, groups);
  s.seed = seed;
  return s;
}

// 1: damage column reproduced.
Verdict table_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  const auto report = run_matrix(load_attack_dir(default_data_dir() / "attacks"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  int matches = 0, broken = 0, weakened = 0;
  bool weak_rows = true;
  for (const auto& r : report.rows) {
    matches += r.damage_match && r.observed_damage == ground_truth_vector(r.id).damage;
    broken += r.observed_damage == Damage::Broken;
    weakened += r.observed_damage == Damage::Weakened;
    if (r.observed_damage == Damage::Weakened && r.id != 9 && r.id != 15) weak_rows = false;
  }
  std::ostringstream d;
  d << matches << "/" << report.rows.size() << " damage matches, " << broken << " Broken, " << weakened
    << " Weakened, " << secs << " s";
  return {report.rows.size() == 15 && matches == 15 && broken == 13 && weakened == 2 && weak_rows && secs < 10.0,
          d.str()};
}

// 2: each trace uses exactly the declared interception kind.
Verdict method_fidelity() {
  int ok = 0;
  std::string bad;
  for (const auto& spec : attack_registry()) {
    const auto outcome = run_session(spec.vulnerable);
    if (method_consistent(spec.declared.method, outcome.trace)) {
      ++ok;
    } else {
      bad += " " + std::to_string(spec.id);
    }
  }
  return {ok == 15, std::to_string(ok) + "/15 traces consistent" + (bad.empty() ? "" : "; failing:" + bad)};
}

// 3: patches defeat every attack.
Verdict patched_defeat() {
  int defeated = 0, broken = 0;
  for (const auto& spec : attack_registry()) {
    const auto outcome = run_session(spec.patched);
    const auto damage = evaluate_damage(outcome);
    broken += damage == Damage::Broken;
    defeated += damage == Damage::None || (damage != Damage::Broken && outcome.aborted.has_value());
  }
  return {defeated == 15 && broken == 0, std::to_string(defeated) + "/15 defeated, " + std::to_string(broken) +
                                             " Broken"};
}

std::vector<std::string> groups_for(const CipherSuite& cs, Version v) {
  if (is_tls13(v) || cs.kx == KeyExchange::Ecdhe) return {"ec-strong"};
  if (cs.kx == KeyExchange::DheExport) return {"ffdhe-export"};
  return {"ffdhe-strong"};
}

// 4: honest runs agree on secrets and verify Finished.
Verdict benign_suite() {
  int pairs = 0, good = 0;
  std::string bad;
  for (int vi = 0; vi <= static_cast<int>(Version::Tls13Final); ++vi) {
    const auto v = static_cast<Version>(vi);
    for (const auto& cs : suite_catalog()) {
      if (!cs.available_in(v)) continue;
      ++pairs;
      const auto run = run_session_detailed(handshake_scenario(v, {cs.name}, groups_for(cs, v), 11 + pairs));
      const bool agree = run.client.secrets && run.server.secrets && *run.client.secrets == *run.server.secrets;
      const bool finished = run.client.complete() && run.server.complete() && !run.outcome.aborted;
      const bool data = run.server.received_app == run.client.sent_app && run.client.received_app == run.server.sent_app;
      if (agree && finished && data) {
        ++good;
      } else {
        bad += " " + std::string(to_string(v)) + "/" + cs.name;
      }
    }
  }
  return {good >= 20 && good == pairs,
          std::to_string(good) + "/" + std::to_string(pairs) + " pairs complete" + (bad.empty() ? "" : ";" + bad)};
}

Message first_message(const std::vector<TraceEvent>& trace, MessageType type) {
  for (const auto& e : trace) {
    if (e.kind != EventKind::Message || e.original.empty()) continue;
    auto m = deserialize(e.original);
    if (type_of(m) == type) return m;
  }
  throw std::runtime_error("message not found in trace");
}

// A random single-field edit of the honest Hello of the same seed.
Rule random_hello_mutation(const ClientHello& ch, const ServerHello& sh, std::mt19937_64& rng) {
  Rule r;
  r.action = ActionKind::Modify;
  auto flip = [&](Bytes b) {
    const auto i = rng() % b.size();
    b[i] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    return to_hex(b);
  };
  switch (rng() % 5) {
    case 0:
      r.trigger = {Direction::ClientToServer, MessageType::CH, {1}};
      r.edits = {{"nonce", flip(ch.nonce)}};
      break;
    case 1: {
      r.trigger = {Direction::ClientToServer, MessageType::CH, {1}};
      auto suites = ch.suites;
      if (rng() % 2 == 0 && suites.size() > 1) {
        do std::shuffle(suites.begin(), suites.end(), rng);
        while (suites == ch.suites);
      } else {
        suites.push_back("UNKNOWN_" + std::to_string(rng() % 65536));
      }
      r.edits = {{"suites", suites}};
      break;
    }
    case 2: {
      r.trigger = {Direction::ClientToServer, MessageType::CH, {1}};
      std::vector<std::int64_t> comp(ch.compressions.begin(), ch.compressions.end());
      comp.push_back(static_cast<std::int64_t>(1 + rng() % 255));
      r.edits = {{"compressions", comp}};
      break;
    }
    case 3:
      r.trigger = {Direction::ServerToClient, MessageType::SH, {1}};
      r.edits = {{"nonce", flip(sh.nonce)}};
      break;
    default:
      r.trigger = {Direction::ServerToClient, MessageType::SH, {1}};
      r.edits = {{"compression", static_cast<std::int64_t>(1 + rng() % 255)}};
      break;
  }
  return r;
}

// Returns how many of `trials` mutated handshakes completed on both sides.
int mutated_completions(Version v, const std::vector<std::string>& suites, const std::vector<std::string>& groups,
                        int trials, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  int completed = 0;
  for (int i = 0; i < trials; ++i) {
    auto scenario = handshake_scenario(v, suites, groups, 1000 + i);
    const auto honest = run_session(scenario);
    const auto ch = std::get<ClientHello>(first_message(honest.trace, MessageType::CH));
    const auto sh = std::get<ServerHello>(first_message(honest.trace, MessageType::SH));
    AdversaryScript script;
    script.budget = 0;
    script.rules.push_back(random_hello_mutation(ch, sh, rng));
    scenario.adversary = script;
    const auto run = run_session_detailed(scenario);
    completed += run.client.complete() && run.server.complete();
  }
  return completed;
}

// 5: Hello tampering is caught by strong Finished, not by SSL 2.0.
Verdict tamper_evidence() {
  const std::vector<std::string> tls_suites = {"ECDHE_RSA_WITH_AES_128_GCM_SHA256", "DHE_RSA_WITH_AES_128_GCM_SHA256",
                                               "RSA_WITH_AES_128_GCM_SHA256"};
  const std::vector<std::string> ssl2_suites = {"SSL2_DES_192_EDE3_CBC_WITH_MD5", "SSL2_RC4_128_EXPORT40_WITH_MD5",
                                                "SSL2_NULL_WITH_MD5"};
  const int strong = mutated_completions(Version::Tls12, tls_suites, {"ec-strong", "ffdhe-strong"}, 500, 5);
  const int legacy = mutated_completions(Version::Ssl20, ssl2_suites, {"ec-strong"}, 500, 55);
  return {strong == 0 && legacy == 500, "TLS12 aborted " + std::to_string(500 - strong) + "/500, SSL20 completed " +
                                            std::to_string(legacy) + "/500"};
}

std::uint64_t naive_pow(std::uint64_t g, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < e; ++i) r = r * g % p;
  return r;
}

std::uint64_t exhaustive_dlog(std::uint64_t g, std::uint64_t y, std::uint64_t p) {
  std::uint64_t cur = 1;
  for (std::uint64_t k = 0; k < p; ++k) {
    if (cur == y) return k;
    cur = cur * g % p;
  }
  return p;
}

bool prime16(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// 6: the dlog oracle agrees with brute force and refuses strong groups.
Verdict oracle_soundness() {
  std::mt19937_64 rng(6);
  int agree = 0;
  for (int i = 0; i < 1000;) {
    const std::uint64_t p = 5 + rng() % (65536 - 5);
    if (!prime16(p)) continue;
    const std::uint64_t g = 2 + rng() % (p - 3);
    crypto::DhGroup group;
    try {
      group = crypto::DhGroup::make("toy", crypto::GroupFamily::FiniteField, p, g);
    } catch (const GroupError&) {
      continue;
    }
    const std::uint64_t x = 1 + rng() % (group.order - 1);
    const std::uint64_t y = naive_pow(g, x, p);
    crypto::WorkBudget budget(1'000'000'000);
    const auto got = crypto::recover_private(crypto::DhPublicKey{group, y, group.strength}, budget);
    agree += got && *got == exhaustive_dlog(g, y, p);
    ++i;
  }
  int refused = 0;
  const std::vector<std::string> strong = {"ffdhe-strong", "ffdhe-strong-b", "ec-strong", "ec-strong-b"};
  for (int i = 0; i < 1000; ++i) {
    const auto& group = crypto::named_group(strong[i % strong.size()]);
    const std::uint64_t y = crypto::pow_mod(group.generator, 1 + rng() % (group.order - 1), group.prime);
    crypto::WorkBudget budget(~std::uint64_t{0});
    refused += !crypto::recover_private(crypto::DhPublicKey{group, y, group.strength}, budget).has_value();
  }
  return {agree == 1000 && refused == 1000,
          std::to_string(agree) + "/1000 toy instances agree, " + std::to_string(refused) + "/1000 strong refused"};
}

// 7: the downgrade sentinel.
Verdict sentinel() {
  int detected = 0, broken = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto fin = patched_scenario(13);
    fin.seed = seed;
    const auto f = run_session(fin);
    detected += f.aborted && f.aborted->reason == AbortReason::DowngradeDetected;
    auto draft = vulnerable_scenario(13);
    draft.seed = seed;
    broken += evaluate_damage(run_session(draft)) == Damage::Broken;
  }
  return {detected == 100 && broken == 100, "FINAL DowngradeDetected " + std::to_string(detected) +
                                                "/100, DRAFT10 Broken " + std::to_string(broken) + "/100"};
}

// 8: HRR transcript policy.
Verdict hrr_policy() {
  int weakened = 0, mismatch = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto draft = vulnerable_scenario(15);
    draft.seed = seed;
    weakened += evaluate_damage(run_session(draft)) == Damage::Weakened;
    auto fin = patched_scenario(15);
    fin.seed = seed;
    const auto f = run_session(fin);
    mismatch += f.aborted && f.aborted->reason == AbortReason::FinishedMismatch;
  }
  return {weakened == 100 && mismatch == 100, "restart-on-HRR Weakened " + std::to_string(weakened) +
                                                  "/100, continued-hash FinishedMismatch " + std::to_string(mismatch) +
                                                  "/100"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 9: byte-identical reports from the CLI.
Verdict determinism() {
  const auto dir = fs::temp_directory_path() / ("downgrade-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto a = dir / "a.json", b = dir / "b.json";
  const std::string cli = DOWNGRADE_CLI;
  const int ra = std::system((cli + " matrix --seed 7 --out " + a.string()).c_str());
  const int rb = std::system((cli + " matrix --seed 7 --out " + b.string()).c_str());
  const auto ta = slurp(a), tb = slurp(b);
  fs::remove_all(dir);
  const bool same = !ta.empty() && ta == tb;
  return {ra == 0 && rb == 0 && same, same ? std::to_string(ta.size()) + " identical bytes" : "reports differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"matrix reproduces the damage column", table_reproduction},
      {"trace methods match declared methods", method_fidelity},
      {"patched scenarios defeat every attack", patched_defeat},
      {"benign handshakes agree on secrets", benign_suite},
      {"Hello tampering detected under strong TLS 1.2 only", tamper_evidence},
      {"dlog oracle soundness", oracle_soundness},
      {"downgrade sentinel under TLS13_FINAL", sentinel},
      {"HRR transcript policy", hrr_policy},
      {"matrix --seed 7 determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << "criterion " << i + 1 << ": " << (v.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << " ("
              << v.detail << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
