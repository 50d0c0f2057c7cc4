#pragma once

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "gifts/backends.hpp"
#include "gifts/json_io.hpp"

namespace gifts::backend {

/// Process-wide count of network requests attempted by HttpBackend instances.
inline std::atomic<std::size_t>& network_operation_count() {
  static std::atomic<std::size_t> count{0};
  return count;
}

/// Environment variable carrying the API key for a role, e.g. GIFTS_KEY_LLM_REVIEW.
inline std::string api_key_variable(ModelRole role) {
  std::string name = "GIFTS_KEY_";
  for (char c : to_string(role)) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return name;
}

struct ParsedUrl {
  std::string scheme_host_port;  // "http://host:port"
  std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "endpoint '" + url + "' is not an http(s) URL");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidArgument, "unsupported scheme in '" + url + "'");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") {
    throw Error(ErrorCode::InvalidArgument,
                "'" + url + "' needs TLS; rebuild with CPPHTTPLIB_OPENSSL_SUPPORT and link OpenSSL");
  }
#endif
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// One JSON POST per call: {model, system, user, temperature, max_tokens, audio_b64?};
/// the reply body must be a JSON object with a string field "text".
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(std::string endpoint) : endpoint_(std::move(endpoint)), url_(parse_url(endpoint_)) {}

  std::string complete(const Request& request) override {
    json_io::Json body;
    body["model"] = request.model;
    body["system"] = request.system;
    body["user"] = request.user;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (request.audio) body["audio_b64"] = text::base64_encode(*request.audio);

    httplib::Client client(url_.scheme_host_port);
    const auto timeout = std::chrono::duration<double>(request.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    httplib::Headers headers;
    if (const char* key = std::getenv(api_key_variable(request.role).c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    ++network_operation_count();
    auto res = client.Post(url_.path, headers, body.dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::Write ||
          err == httplib::Error::ConnectionTimeout) {
        throw Error(ErrorCode::Timeout, endpoint_ + ": " + httplib::to_string(err));
      }
      throw Error(ErrorCode::TransportError, endpoint_ + ": " + httplib::to_string(err));
    }
    if (res->status == 429) throw Error(ErrorCode::RateLimited, endpoint_ + ": HTTP 429");
    if (res->status == 408 || res->status == 504) {
      throw Error(ErrorCode::Timeout, endpoint_ + ": HTTP " + std::to_string(res->status));
    }
    if (res->status >= 500) {
      throw Error(ErrorCode::TransportError, endpoint_ + ": HTTP " + std::to_string(res->status));
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::TransportError, endpoint_ + ": HTTP " + std::to_string(res->status),
                  false);
    }
    json_io::Json reply;
    try {
      reply = json_io::Json::parse(res->body);
    } catch (const json_io::Json::parse_error&) {
      throw Error(ErrorCode::TransportError, endpoint_ + ": reply is not JSON", false);
    }
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
      throw Error(ErrorCode::TransportError, endpoint_ + ": reply lacks a string 'text' field",
                  false);
    }
    return reply["text"].get<std::string>();
  }

 private:
  std::string endpoint_;
  ParsedUrl url_;
};

}  // namespace gifts::backend
