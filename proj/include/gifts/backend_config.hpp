#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "gifts/backends.hpp"
#include "gifts/http_backend.hpp"
#include "gifts/json_io.hpp"
#include "gifts/mock_backend.hpp"
#include "gifts/template.hpp"

namespace gifts::backend {

inline constexpr std::string_view kMockScheme = "mock:";

struct BackendConfig {
  std::map<ModelRole, RoleConfig> roles;
  std::filesystem::path base_dir;  // mock script paths resolve against this

  bool all_mock() const {
    for (const auto& [role, cfg] : roles) {
      if (!cfg.endpoint.starts_with(kMockScheme)) return false;
    }
    return true;
  }
};

namespace config_detail {

inline void apply_fields(const json_io::Json& j, RoleConfig& cfg, const std::string& context) {
  json_io::ObjectReader r(j, context);
  auto number = [&](const char* key, auto& out) {
    if (const auto* v = r.optional(key)) {
      if (!v->is_number()) throw Error(ErrorCode::SchemaMismatch, context + "." + key + " must be a number");
      out = v->get<std::decay_t<decltype(out)>>();
    }
  };
  if (auto e = r.optional_string("endpoint")) cfg.endpoint = *e;
  if (auto m = r.optional_string("model")) cfg.model = *m;
  if (auto s = r.optional_string("system_prompt")) cfg.system_prompt = *s;
  number("temperature", cfg.temperature);
  number("max_tokens", cfg.max_tokens);
  number("timeout_s", cfg.timeout_s);
  number("max_retries", cfg.max_retries);
  number("min_interval_ms", cfg.min_interval_ms);
  number("retry_base_ms", cfg.retry_base_ms);
  r.finish();
  if (cfg.max_retries < 0 || cfg.max_tokens < 1 || cfg.timeout_s <= 0 || cfg.min_interval_ms < 0) {
    throw Error(ErrorCode::SchemaMismatch, context + ": out-of-range numeric setting");
  }
}

}  // namespace config_detail

/// {"default": {...}?, "roles": {"<role>": {...}}}. Role entries override the default
/// entry field by field; a default with an endpoint binds every role.
inline BackendConfig parse_backend_config(const json_io::Json& j, const std::filesystem::path& base_dir) {
  json_io::ObjectReader r(j, "backends");
  BackendConfig out;
  out.base_dir = base_dir;
  RoleConfig defaults;
  const bool has_default = r.has("default");
  if (const auto* d = r.optional("default")) config_detail::apply_fields(*d, defaults, "backends.default");
  std::map<ModelRole, const json_io::Json*> listed;
  if (const auto* roles = r.optional("roles")) {
    if (!roles->is_object()) throw Error(ErrorCode::SchemaMismatch, "backends.roles must be an object");
    for (const auto& item : roles->items()) {
      auto role = role_from_string(item.key());
      if (!role) throw Error(ErrorCode::UnknownField, "backends.roles: unknown role '" + item.key() + "'");
      listed[*role] = &item.value();
    }
  }
  r.finish();
  for (ModelRole role : kAllRoles) {
    RoleConfig cfg = defaults;
    auto it = listed.find(role);
    if (it != listed.end()) {
      config_detail::apply_fields(*it->second, cfg, "backends.roles." + std::string(to_string(role)));
    } else if (!has_default || defaults.endpoint.empty()) {
      continue;
    }
    if (cfg.endpoint.empty()) {
      throw Error(ErrorCode::SchemaMismatch, "role '" + std::string(to_string(role)) + "' has no endpoint");
    }
    if (cfg.system_prompt.empty()) cfg.system_prompt = std::string(default_system_prompt(role));
    out.roles[role] = cfg;
  }
  return out;
}

inline BackendConfig load_backend_config(const std::filesystem::path& path) {
  try {
    return parse_backend_config(json_io::Json::parse(text::read_file(path)), path.parent_path());
  } catch (const json_io::Json::parse_error& e) {
    throw Error(ErrorCode::SchemaMismatch, path.string() + ": " + e.what());
  }
}

/// Builds a client with every configured role bound. Roles that name the same mock script
/// share one MockBackend, so consume_once state is shared too.
inline std::unique_ptr<ModelClient> build_client(const BackendConfig& config,
                                                 const prompt::TemplateCatalog& catalog) {
  auto client = std::make_unique<ModelClient>();
  std::map<std::string, std::shared_ptr<Backend>> transports;
  for (const auto& [role, cfg] : config.roles) {
    auto& transport = transports[cfg.endpoint];
    if (!transport) {
      if (cfg.endpoint.starts_with(kMockScheme)) {
        std::filesystem::path script(cfg.endpoint.substr(kMockScheme.size()));
        if (script.is_relative()) script = config.base_dir / script;
        transport = std::make_shared<MockBackend>(load_script(script));
      } else {
        transport = std::make_shared<HttpBackend>(cfg.endpoint);
      }
    }
    client->bind(role, cfg, transport, catalog.get(cfg.system_prompt).body());
  }
  return client;
}

}  // namespace gifts::backend
