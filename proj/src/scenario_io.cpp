#include "downgrade/scenario_io.hpp"

#include <algorithm>
#include <fstream>

namespace downgrade {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

namespace {

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

crypto::Strength strength_from_string(const std::string& s) {
  if (s == "EXPORT") return crypto::Strength::Export;
  if (s == "STRONG") return crypto::Strength::Strong;
  throw ConfigError("unknown strength '" + s + "'");
}

ojson trigger_to_json(const Trigger& t) {
  ojson j;
  j["type"] = to_string(t.type);
  if (t.direction) j["direction"] = to_string(*t.direction);
  if (!t.occurrences.empty()) j["occurrences"] = t.occurrences;
  return j;
}

Trigger trigger_from_json(const json& j) {
  Trigger t;
  t.type = message_type_from_string(get<std::string>(j, "type"));
  if (j.contains("direction")) t.direction = direction_from_string(get<std::string>(j, "direction"));
  t.occurrences = get_or<std::vector<int>>(j, "occurrences", {});
  return t;
}

ojson value_to_json(const FieldValue& v) {
  return std::visit(
      [](const auto& x) -> ojson {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ComputedValue>) {
          return ojson{{"computed", to_string(x)}};
        } else {
          return ojson(x);
        }
      },
      v);
}

bool int_list_path(const std::string& path) { return path == "compressions" || path == "params"; }

FieldValue value_from_json(const json& j, const std::string& path) {
  if (j.is_object()) return computed_value_from_string(get<std::string>(j, "computed"));
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) {
    if (j.empty()) return int_list_path(path) ? FieldValue{std::vector<std::int64_t>{}} : FieldValue{std::vector<std::string>{}};
    if (j.front().is_number_integer()) return j.get<std::vector<std::int64_t>>();
    return j.get<std::vector<std::string>>();
  }
  throw ConfigError("unsupported value for field '" + path + "'");
}

ojson edits_to_json(const std::vector<FieldEdit>& edits) {
  ojson arr = ojson::array();
  for (const auto& e : edits) arr.push_back({{"path", e.path}, {"value", value_to_json(e.value)}});
  return arr;
}

std::vector<FieldEdit> edits_from_json(const json& arr) {
  std::vector<FieldEdit> out;
  for (const auto& e : arr) {
    auto path = get<std::string>(e, "path");
    if (!e.contains("value")) throw ConfigError("edit of '" + path + "' has no value");
    out.push_back({path, value_from_json(e.at("value"), path)});
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json parse(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void expect_schema(const json& j, std::string_view schema) {
  if (get_or<std::string>(j, "schema", "") != schema)
    throw ConfigError("expected schema " + std::string(schema));
}

// Unknown names surface as NotFound deep inside the parsers.
template <typename F>
auto config_errors(F&& f) {
  try {
    return f();
  } catch (const NotFound& e) {
    throw ConfigError(e.what());
  } catch (const ScriptError& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ojson endpoint_to_json(const EndpointConfig& c) {
  ojson j;
  j["role"] = c.role == Role::Client ? "client" : "server";
  j["min_version"] = to_string(c.min_version);
  j["max_version"] = to_string(c.max_version);
  j["suites"] = c.suites;
  j["groups"] = c.groups;
  ojson bugs = ojson::array();
  for (auto b : c.bugs) bugs.push_back(to_string(b));
  j["bugs"] = bugs;
  j["cert_subject"] = c.cert_subject;
  j["cert_issuer"] = c.cert_issuer;
  j["trust_store"] = std::vector<std::string>(c.trust_store.begin(), c.trust_store.end());
  j["strong_transcript_hash"] = c.strong_transcript_hash;
  return j;
}

EndpointConfig endpoint_from_json(const json& j) {
  return config_errors([&] {
    EndpointConfig c;
    const auto role = get<std::string>(j, "role");
    if (role != "client" && role != "server") throw ConfigError("role must be client or server");
    c.role = role == "client" ? Role::Client : Role::Server;
    c.min_version = version_from_string(get<std::string>(j, "min_version"));
    c.max_version = version_from_string(get<std::string>(j, "max_version"));
    c.suites = get<std::vector<std::string>>(j, "suites");
    c.groups = get<std::vector<std::string>>(j, "groups");
    for (const auto& b : get_or<std::vector<std::string>>(j, "bugs", {})) c.bugs.insert(bug_flag_from_string(b));
    c.cert_subject = get_or<std::string>(j, "cert_subject", c.cert_subject);
    c.cert_issuer = get_or<std::string>(j, "cert_issuer", c.cert_issuer);
    if (j.contains("trust_store")) {
      auto ts = get<std::vector<std::string>>(j, "trust_store");
      c.trust_store = {ts.begin(), ts.end()};
    }
    c.strong_transcript_hash = get_or<bool>(j, "strong_transcript_hash", false);
    return c;
  });
}

ojson script_to_json(const AdversaryScript& s) {
  ojson j;
  j["budget"] = s.budget;
  j["parallel_connections"] = s.parallel_connections;
  j["costs"] = {{"bleichenbacher", s.costs.bleichenbacher},
                {"collision", s.costs.collision},
                {"cbc_padding", s.costs.cbc_padding}};
  ojson rules = ojson::array();
  for (const auto& r : s.rules) {
    ojson rj;
    rj["trigger"] = trigger_to_json(r.trigger);
    rj["action"] = to_string(r.action);
    if (r.action == ActionKind::Modify) rj["edits"] = edits_to_json(r.edits);
    if (r.action == ActionKind::Inject) {
      rj["inject"] = {{"type", to_string(r.inject_type)},
                      {"direction", to_string(r.inject_direction)},
                      {"fields", edits_to_json(r.inject_fields)},
                      {"absorb_trigger", r.absorb_trigger}};
    }
    rules.push_back(std::move(rj));
  }
  j["rules"] = std::move(rules);
  ojson hooks = ojson::array();
  for (const auto& h : s.hooks) hooks.push_back({{"trigger", trigger_to_json(h.trigger)}, {"oracle", to_string(h.oracle)}});
  j["hooks"] = std::move(hooks);
  return j;
}

AdversaryScript script_from_json(const json& j) {
  return config_errors([&] {
    AdversaryScript s;
    s.budget = get_or<std::uint64_t>(j, "budget", s.budget);
    s.parallel_connections = get_or<std::vector<std::string>>(j, "parallel_connections", {});
    if (j.contains("costs")) {
      const auto& c = j.at("costs");
      s.costs.bleichenbacher = get_or<std::uint64_t>(c, "bleichenbacher", s.costs.bleichenbacher);
      s.costs.collision = get_or<std::uint64_t>(c, "collision", s.costs.collision);
      s.costs.cbc_padding = get_or<std::uint64_t>(c, "cbc_padding", s.costs.cbc_padding);
    }
    for (const auto& rj : get_or<json>(j, "rules", json::array())) {
      Rule r;
      r.trigger = trigger_from_json(rj.at("trigger"));
      r.action = action_kind_from_string(get<std::string>(rj, "action"));
      if (rj.contains("edits")) r.edits = edits_from_json(rj.at("edits"));
      if (r.action == ActionKind::Inject) {
        const auto& ij = rj.at("inject");
        r.inject_type = message_type_from_string(get<std::string>(ij, "type"));
        r.inject_direction = direction_from_string(get<std::string>(ij, "direction"));
        r.inject_fields = edits_from_json(get_or<json>(ij, "fields", json::array()));
        r.absorb_trigger = get_or<bool>(ij, "absorb_trigger", true);
      }
      s.rules.push_back(std::move(r));
    }
    for (const auto& hj : get_or<json>(j, "hooks", json::array()))
      s.hooks.push_back({trigger_from_json(hj.at("trigger")), oracle_kind_from_string(get<std::string>(hj, "oracle"))});
    validate_script(s);
    return s;
  });
}

ojson scenario_to_json(const Scenario& s) {
  ojson j;
  j["schema"] = kScenarioSchema;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["app"] = to_string(s.app);
  j["client"] = endpoint_to_json(s.client);
  j["server"] = endpoint_to_json(s.server);
  j["server_key"] = {{"strength", to_string(s.server_key.strength)},
                     {"shared_with_sslv2", s.server_key.shared_with_sslv2}};
  if (s.app == AppKind::Smtp)
    j["smtp"] = {{"policy", to_string(s.smtp.policy)}, {"offers_starttls", s.smtp.offers_starttls}};
  if (s.app == AppKind::Proxy) j["proxy"] = {{"issuer", s.proxy.issuer}, {"behavior", to_string(s.proxy.behavior)}};
  j["payload"] = s.payload;
  j["response"] = s.response;
  j["secret_marker"] = s.secret_marker;
  j["adversary"] = s.adversary ? script_to_json(*s.adversary) : ojson(nullptr);
  return j;
}

Scenario scenario_from_json(const json& j) {
  return config_errors([&] {
    expect_schema(j, kScenarioSchema);
    Scenario s;
    s.name = get_or<std::string>(j, "name", "");
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
    s.app = app_kind_from_string(get_or<std::string>(j, "app", "tls"));
    s.client = endpoint_from_json(j.at("client"));
    s.server = endpoint_from_json(j.at("server"));
    if (j.contains("server_key")) {
      const auto& k = j.at("server_key");
      s.server_key.strength = strength_from_string(get_or<std::string>(k, "strength", "STRONG"));
      s.server_key.shared_with_sslv2 = get_or<bool>(k, "shared_with_sslv2", false);
    }
    if (j.contains("smtp")) {
      const auto& m = j.at("smtp");
      s.smtp.policy = policy_mode_from_string(get<std::string>(m, "policy"));
      s.smtp.offers_starttls = get_or<bool>(m, "offers_starttls", true);
    }
    if (j.contains("proxy")) {
      const auto& p = j.at("proxy");
      s.proxy.issuer = get_or<std::string>(p, "issuer", s.proxy.issuer);
      s.proxy.behavior = proxy_behavior_from_string(get<std::string>(p, "behavior"));
    }
    s.payload = get_or<std::string>(j, "payload", s.payload);
    s.response = get_or<std::string>(j, "response", s.response);
    s.secret_marker = get_or<std::string>(j, "secret_marker", s.secret_marker);
    if (j.contains("adversary") && !j.at("adversary").is_null()) s.adversary = script_from_json(j.at("adversary"));
    return s;
  });
}

ojson attack_to_json(const AttackSpec& a) {
  ojson j;
  j["schema"] = kAttackSchema;
  j["id"] = a.id;
  j["name"] = a.name;
  j["declared"] = {{"element", to_string(a.declared.element)},
                   {"vulnerability", to_string(a.declared.vulnerability)},
                   {"method", to_string(a.declared.method)},
                   {"damage", to_string(a.declared.damage)}};
  j["patch"] = a.patch;
  j["theoretical"] = a.theoretical;
  j["notes"] = a.notes;
  j["vulnerable"] = scenario_to_json(a.vulnerable);
  j["patched"] = scenario_to_json(a.patched);
  return j;
}

AttackSpec attack_from_json(const json& j) {
  return config_errors([&] {
    expect_schema(j, kAttackSchema);
    AttackSpec a;
    a.id = get<int>(j, "id");
    a.name = get<std::string>(j, "name");
    const auto& d = j.at("declared");
    a.declared = {element_from_string(get<std::string>(d, "element")),
                  vulnerability_from_string(get<std::string>(d, "vulnerability")),
                  method_from_string(get<std::string>(d, "method")), damage_from_string(get<std::string>(d, "damage"))};
    a.patch = get_or<std::string>(j, "patch", "");
    a.theoretical = get_or<bool>(j, "theoretical", false);
    a.notes = get_or<std::vector<std::string>>(j, "notes", {});
    a.vulnerable = scenario_from_json(j.at("vulnerable"));
    a.patched = scenario_from_json(j.at("patched"));
    return a;
  });
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(parse(path)); }

AttackSpec load_attack(const std::filesystem::path& path) { return attack_from_json(parse(path)); }

std::vector<AttackSpec> load_attack_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<AttackSpec> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.push_back(load_attack(entry.path()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::filesystem::path default_data_dir() {
#ifdef DOWNGRADE_DATA_DIR
  return DOWNGRADE_DATA_DIR;
#else
  return "data";
#endif
}

}  // namespace downgrade
