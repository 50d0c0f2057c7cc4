#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gifts/error.hpp"
#include "gifts/text.hpp"
#include "gifts/wav.hpp"

namespace gifts::backend {

enum class ModelRole {
  AlmCaption,
  AlmTranscribe,
  AlmInfer,
  AlmForensics,
  LlmGuide,
  LlmReview,
  LlmConsolidate,
  Judge,
};

inline constexpr ModelRole kAllRoles[] = {
    ModelRole::AlmCaption, ModelRole::AlmTranscribe, ModelRole::AlmInfer,
    ModelRole::AlmForensics, ModelRole::LlmGuide, ModelRole::LlmReview,
    ModelRole::LlmConsolidate, ModelRole::Judge,
};

constexpr std::string_view to_string(ModelRole r) {
  switch (r) {
    case ModelRole::AlmCaption: return "alm_caption";
    case ModelRole::AlmTranscribe: return "alm_transcribe";
    case ModelRole::AlmInfer: return "alm_infer";
    case ModelRole::AlmForensics: return "alm_forensics";
    case ModelRole::LlmGuide: return "llm_guide";
    case ModelRole::LlmReview: return "llm_review";
    case ModelRole::LlmConsolidate: return "llm_consolidate";
    case ModelRole::Judge: return "judge";
  }
  return "?";
}

inline std::optional<ModelRole> role_from_string(std::string_view s) {
  for (ModelRole r : kAllRoles) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

constexpr bool audio_capable(ModelRole r) {
  return r == ModelRole::AlmCaption || r == ModelRole::AlmTranscribe ||
         r == ModelRole::AlmInfer || r == ModelRole::AlmForensics;
}

constexpr bool is_llm_role(ModelRole r) {
  return r == ModelRole::LlmGuide || r == ModelRole::LlmReview || r == ModelRole::LlmConsolidate;
}

/// Catalog name of the system prompt each role is bound to unless configured otherwise.
constexpr std::string_view default_system_prompt(ModelRole r) {
  switch (r) {
    case ModelRole::AlmCaption: return "system_alm_caption";
    case ModelRole::AlmTranscribe: return "system_alm_transcription";
    case ModelRole::AlmInfer: return "system_alm_inference";
    case ModelRole::AlmForensics: return "system_alm_inference";
    case ModelRole::LlmGuide: return "system_llm_guide";
    case ModelRole::LlmReview: return "system_llm_review";
    case ModelRole::LlmConsolidate: return "system_llm_unify";
    case ModelRole::Judge: return "system_judge";
  }
  return "";
}

struct RoleConfig {
  std::string endpoint;  // http(s) URL or "mock:<script path>"
  std::string model;
  double temperature = 0.1;
  int max_tokens = 5000;
  double timeout_s = 60.0;
  int max_retries = 3;
  int min_interval_ms = 0;
  int retry_base_ms = 500;
  std::string system_prompt;  // catalog name; empty -> default_system_prompt(role)
};

struct Request {
  ModelRole role = ModelRole::LlmGuide;
  std::string model;
  std::string system;
  std::string user;
  double temperature = 0.1;
  int max_tokens = 5000;
  double timeout_s = 60.0;
  std::optional<std::vector<std::uint8_t>> audio;
};

/// One transport. Implementations may be called from several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const Request& request) = 0;
};

struct CallLogEntry {
  ModelRole role = ModelRole::LlmGuide;
  std::string prompt_digest;
  std::optional<std::string> audio_digest;
  std::string response_digest;  // empty when the call failed
  double latency_ms = 0.0;
  int attempt = 1;
  bool ok = true;
  std::string error;
  std::vector<std::string> warnings;
};

/// Append-only record of every issued call, failed attempts included.
class CallLog {
 public:
  void append(CallLogEntry e) {
    std::lock_guard lock(mu_);
    entries_.push_back(std::move(e));
  }

  std::vector<CallLogEntry> snapshot() const {
    std::lock_guard lock(mu_);
    return entries_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

  std::size_t count(ModelRole r) const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [r](const auto& e) { return e.role == r; }));
  }

  void clear() {
    std::lock_guard lock(mu_);
    entries_.clear();
  }

 private:
  mutable std::mutex mu_;
  std::vector<CallLogEntry> entries_;
};

/// Uniform client over all roles: binds each role to a transport and system prompt, paces
/// and retries calls, keeps the call log.
class ModelClient {
 public:
  using Clock = std::chrono::steady_clock;

  void bind(ModelRole role, RoleConfig config, std::shared_ptr<Backend> backend,
            std::string system_text) {
    std::lock_guard lock(pace_mu_);
    bindings_[role] = Binding{std::move(config), std::move(backend), std::move(system_text)};
  }

  bool bound(ModelRole role) const { return bindings_.count(role) > 0; }

  const RoleConfig& config(ModelRole role) const { return binding(role).config; }

  std::string query_text(ModelRole role, const std::string& user_prompt) {
    return issue(role, user_prompt, std::nullopt);
  }

  /// The audio must decode as a PCM waveform; a corrupt clip fails before any call is made.
  std::string query_audio(ModelRole role, const std::string& user_prompt,
                          std::span<const std::uint8_t> audio) {
    if (!audio_capable(role)) {
      throw Error(ErrorCode::RoleViolation,
                  "role '" + std::string(to_string(role)) + "' is text-only and cannot take audio");
    }
    decode_wav(audio);
    return issue(role, user_prompt, std::vector<std::uint8_t>(audio.begin(), audio.end()));
  }

  /// Fixes the retry-jitter stream so backoff delays repeat across runs.
  void seed_jitter(std::uint64_t seed) {
    std::lock_guard lock(pace_mu_);
    rng_.seed(seed);
  }

  CallLog& call_log() { return log_; }
  const CallLog& call_log() const { return log_; }

 private:
  struct Binding {
    RoleConfig config;
    std::shared_ptr<Backend> backend;
    std::string system_text;
  };

  const Binding& binding(ModelRole role) const {
    auto it = bindings_.find(role);
    if (it == bindings_.end()) {
      throw Error(ErrorCode::UnboundRole, "no backend bound for role '" +
                                              std::string(to_string(role)) + "'");
    }
    return it->second;
  }

  void pace(ModelRole role, int min_interval_ms) {
    if (min_interval_ms <= 0) return;
    Clock::time_point slot;
    {
      std::lock_guard lock(pace_mu_);
      const auto now = Clock::now();
      auto it = last_issue_.find(role);
      slot = now;
      if (it != last_issue_.end()) {
        slot = std::max(now, it->second + std::chrono::milliseconds(min_interval_ms));
      }
      last_issue_[role] = slot;
    }
    std::this_thread::sleep_until(slot);
  }

  double backoff_ms(int base_ms, int attempt) {
    std::lock_guard lock(pace_mu_);
    std::uniform_real_distribution<double> jitter(0.5, 1.0);
    return base_ms * std::pow(2.0, attempt) * jitter(rng_);
  }

  std::string issue(ModelRole role, const std::string& user_prompt,
                    std::optional<std::vector<std::uint8_t>> audio) {
    require(!user_prompt.empty(), "prompt must be non-empty");
    const Binding& b = binding(role);
    Request req;
    req.role = role;
    req.model = b.config.model;
    req.system = b.system_text;
    req.user = user_prompt;
    req.temperature = b.config.temperature;
    req.max_tokens = b.config.max_tokens;
    req.timeout_s = b.config.timeout_s;
    req.audio = std::move(audio);

    const std::string prompt_digest = text::digest(req.system + "\x1f" + req.user);
    std::optional<std::string> audio_digest;
    if (req.audio) {
      audio_digest = text::digest(std::string_view(
          reinterpret_cast<const char*>(req.audio->data()), req.audio->size()));
    }

    std::vector<std::string> warnings;
    for (int attempt = 0;; ++attempt) {
      pace(role, b.config.min_interval_ms);
      CallLogEntry entry{role, prompt_digest, audio_digest, "", 0.0, attempt + 1, true, "", warnings};
      const auto t0 = Clock::now();
      try {
        std::string reply = b.backend->complete(req);
        entry.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        entry.response_digest = text::digest(reply);
        if (text::trim(reply).empty()) {
          entry.ok = false;
          entry.error = "EmptyResponse";
          log_.append(std::move(entry));
          throw Error(ErrorCode::EmptyResponse,
                      "role '" + std::string(to_string(role)) + "' returned no text");
        }
        log_.append(std::move(entry));
        return reply;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::EmptyResponse) throw;
        entry.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        entry.ok = false;
        entry.error = e.what();
        log_.append(std::move(entry));
        if (!e.transient() || attempt >= b.config.max_retries) {
          if (e.transient()) {
            throw Error(e.code(), e.detail() + " (after " +
                                      std::to_string(attempt + 1) + " attempts)", false);
          }
          throw;
        }
        warnings.push_back("retry " + std::to_string(attempt + 1) + " after " +
                           std::string(to_string(e.code())));
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(
            backoff_ms(b.config.retry_base_ms, attempt)));
      }
    }
  }

  std::map<ModelRole, Binding> bindings_;
  CallLog log_;
  std::mutex pace_mu_;
  std::map<ModelRole, Clock::time_point> last_issue_;
  std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace gifts::backend
