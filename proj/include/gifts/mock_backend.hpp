#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gifts/backends.hpp"
#include "gifts/json_io.hpp"

namespace gifts::backend {

/// One scripted reply. An empty match_substring matches every prompt; an absent role
/// matches every role.
struct ScriptRule {
  std::optional<ModelRole> match_role;
  std::string match_substring;
  std::string response;
  bool consume_once = false;
  std::optional<ErrorCode> fail_with;  // simulate a transport failure instead of replying

  bool operator==(const ScriptRule&) const = default;
};

struct BackendScript {
  std::vector<ScriptRule> rules;
  std::string default_response;

  bool operator==(const BackendScript&) const = default;
};

inline ScriptRule rule_from_json(const json_io::Json& j, const std::string& context) {
  json_io::ObjectReader r(j, context);
  ScriptRule rule;
  if (auto role = r.optional_string("match_role"); role && *role != "*") {
    rule.match_role = role_from_string(*role);
    if (!rule.match_role) {
      throw Error(ErrorCode::SchemaMismatch, context + ": unknown role '" + *role + "'");
    }
  }
  rule.match_substring = r.optional_string("match_substring").value_or("");
  rule.response = r.optional_string("response").value_or("");
  if (const auto* c = r.optional("consume_once")) {
    if (!c->is_boolean()) throw Error(ErrorCode::SchemaMismatch, context + ": consume_once must be a bool");
    rule.consume_once = c->get<bool>();
  }
  if (auto f = r.optional_string("fail_with")) {
    rule.fail_with = json_io::error_code_from(*f);
    if (!rule.fail_with) throw Error(ErrorCode::SchemaMismatch, context + ": unknown error '" + *f + "'");
  }
  r.finish();
  return rule;
}

/// Accepts a bare list of rules or {"rules": [...], "default_response": "..."}.
inline BackendScript script_from_json(const json_io::Json& j) {
  BackendScript s;
  const json_io::Json* rules = &j;
  std::optional<json_io::ObjectReader> obj;
  if (j.is_object()) {
    obj.emplace(j, "script");
    rules = &obj->array("rules");
    s.default_response = obj->optional_string("default_response").value_or("");
    obj->finish();
  }
  if (!rules->is_array()) throw Error(ErrorCode::SchemaMismatch, "script: expected a list of rules");
  for (std::size_t i = 0; i < rules->size(); ++i) {
    s.rules.push_back(rule_from_json((*rules)[i], "script.rules[" + std::to_string(i) + "]"));
  }
  return s;
}

inline json_io::Json to_json(const BackendScript& s) {
  json_io::Json rules = json_io::Json::array();
  for (const auto& r : s.rules) {
    json_io::Json j;
    if (r.match_role) j["match_role"] = std::string(to_string(*r.match_role));
    j["match_substring"] = r.match_substring;
    j["response"] = r.response;
    j["consume_once"] = r.consume_once;
    if (r.fail_with) j["fail_with"] = std::string(to_string(*r.fail_with));
    rules.push_back(j);
  }
  return json_io::Json{{"rules", rules}, {"default_response", s.default_response}};
}

inline BackendScript load_script(const std::filesystem::path& path) {
  try {
    return script_from_json(json_io::Json::parse(text::read_file(path)));
  } catch (const json_io::Json::parse_error& e) {
    throw Error(ErrorCode::SchemaMismatch, path.string() + ": " + e.what());
  }
}

/// Deterministic stand-in for remote models: first matching rule wins, audio is ignored.
class MockBackend : public Backend {
 public:
  explicit MockBackend(BackendScript script)
      : script_(std::move(script)), consumed_(script_.rules.size(), false) {}

  std::string complete(const Request& request) override {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < script_.rules.size(); ++i) {
      const ScriptRule& r = script_.rules[i];
      if (consumed_[i]) continue;
      if (r.match_role && *r.match_role != request.role) continue;
      if (!r.match_substring.empty() && !text::contains(request.user, r.match_substring)) continue;
      if (r.consume_once) consumed_[i] = true;
      if (r.fail_with) throw Error(*r.fail_with, "scripted failure (rule " + std::to_string(i) + ")");
      return r.response;
    }
    return script_.default_response;
  }

  const BackendScript& script() const { return script_; }

 private:
  BackendScript script_;
  std::vector<bool> consumed_;
  std::mutex mu_;
};

}  // namespace gifts::backend
