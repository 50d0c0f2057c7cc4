#pragma once

#include <cctype>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gifts/error.hpp"
#include "gifts/text.hpp"

namespace gifts::prompt {

// A placeholder is `<Name>` where Name starts with a letter and continues with letters,
// digits, '_', ' ' or ';'. Output-format markers such as `<Answer: ...>` contain other
// characters and are left alone.
struct PlaceholderSpan {
  std::size_t begin;  // index of '<'
  std::size_t end;    // one past '>'
  std::string name;
};

inline std::optional<PlaceholderSpan> placeholder_at(std::string_view body, std::size_t pos) {
  if (pos >= body.size() || body[pos] != '<') return std::nullopt;
  std::size_t i = pos + 1;
  if (i >= body.size() || !std::isalpha(static_cast<unsigned char>(body[i]))) return std::nullopt;
  while (i < body.size()) {
    const auto c = static_cast<unsigned char>(body[i]);
    if (c == '>') break;
    if (!(std::isalnum(c) || c == '_' || c == ' ' || c == ';')) return std::nullopt;
    ++i;
  }
  if (i >= body.size()) return std::nullopt;
  std::string name(body.substr(pos + 1, i - pos - 1));
  if (name.back() == ' ') return std::nullopt;
  return PlaceholderSpan{pos, i + 1, std::move(name)};
}

inline std::vector<PlaceholderSpan> scan_placeholders(std::string_view body) {
  std::vector<PlaceholderSpan> out;
  for (std::size_t pos = body.find('<'); pos != std::string_view::npos;) {
    if (auto p = placeholder_at(body, pos)) {
      out.push_back(*p);
      pos = body.find('<', p->end);
    } else {
      pos = body.find('<', pos + 1);
    }
  }
  return out;
}

using Binding = std::map<std::string, std::string>;

class Template {
 public:
  Template() = default;

  /// Required placeholders are exactly those found in `body`.
  Template(std::string name, std::string body) : name_(std::move(name)), body_(std::move(body)) {
    for (const auto& p : scan_placeholders(body_)) required_.insert(p.name);
  }

  /// Checks `body` against a declared placeholder set in both directions.
  Template(std::string name, std::string body, const std::set<std::string>& declared)
      : Template(std::move(name), std::move(body)) {
    for (const auto& found : required_) {
      if (!declared.count(found)) {
        throw Error(ErrorCode::UnknownPlaceholder, "template '" + name_ + "': <" + found + ">");
      }
    }
    for (const auto& want : declared) {
      if (!required_.count(want)) {
        throw Error(ErrorCode::UnknownPlaceholder,
                    "template '" + name_ + "' declares <" + want + "> but never uses it");
      }
    }
  }

  const std::string& name() const { return name_; }
  const std::string& body() const { return body_; }
  const std::set<std::string>& required_placeholders() const { return required_; }
  bool uses(const std::string& placeholder) const { return required_.count(placeholder) > 0; }

  /// Copy with the sentence segment holding <placeholder> removed: from the previous sentence
  /// boundary (". ", "? ", "! ", newline, or start) up to the marker and its trailing spaces.
  Template without_segment(const std::string& placeholder) const {
    std::string body = body_;
    const std::string marker = "<" + placeholder + ">";
    std::size_t pos;
    while ((pos = body.find(marker)) != std::string::npos) {
      std::size_t start = pos;
      while (start > 0) {
        const char prev = body[start - 1];
        if (prev == '\n') break;
        if (prev == ' ' && start >= 2) {
          const char p2 = body[start - 2];
          if (p2 == '.' || p2 == '?' || p2 == '!') break;
        }
        --start;
      }
      std::size_t end = pos + marker.size();
      while (end < body.size() && body[end] == ' ') ++end;
      body.erase(start, end - start);
    }
    return Template(name_, std::move(body));
  }

 private:
  std::string name_;
  std::string body_;
  std::set<std::string> required_;
};

/// Replaces every <Name> of the template in a single left-to-right pass. Bound text is not
/// rescanned, so replacement values may themselves contain angle brackets.
inline std::string compose(const Template& t, const Binding& bindings) {
  for (const auto& name : t.required_placeholders()) {
    auto it = bindings.find(name);
    if (it == bindings.end() || it->second.empty()) {
      throw Error(ErrorCode::MissingBinding, "template '" + t.name() + "': <" + name + ">");
    }
  }
  const std::string& body = t.body();
  std::string out;
  out.reserve(body.size() + 256);
  std::size_t cursor = 0;
  for (const auto& p : scan_placeholders(body)) {
    out.append(body, cursor, p.begin - cursor);
    out += bindings.at(p.name);
    cursor = p.end;
  }
  out.append(body, cursor, std::string::npos);
  return out;
}

/// Inserts extra sentences before the template's output-format block when present,
/// otherwise appends them, separated by single spaces.
inline std::string insert_segments(std::string prompt, const std::vector<std::string>& segments) {
  if (segments.empty()) return prompt;
  std::string joined;
  for (const auto& s : segments) {
    if (!joined.empty()) joined += ' ';
    joined += s;
  }
  static constexpr std::string_view kFormatAnchor = "Please respond strictly in the format below.";
  const std::size_t at = prompt.find(kFormatAnchor);
  if (at == std::string::npos) {
    if (!prompt.empty() && prompt.back() != ' ' && prompt.back() != '\n') prompt += ' ';
    return prompt + joined;
  }
  std::size_t sentence = at;
  // Step back over "Reason step-by-step. " so the added facts precede the instructions.
  static constexpr std::string_view kReason = "Reason step-by-step. ";
  if (sentence >= kReason.size() &&
      std::string_view(prompt).substr(sentence - kReason.size(), kReason.size()) == kReason) {
    sentence -= kReason.size();
  }
  prompt.insert(sentence, joined + " ");
  return prompt;
}

namespace names {
inline constexpr const char* kTargetAttribute = "Target_Attribute";
inline constexpr const char* kSpeaker = "Speaker_Information";
inline constexpr const char* kGuidance = "Guidance from LLM";
inline constexpr const char* kClipText = "Audio Event Description and Spoken Word Transcription";
inline constexpr const char* kClipTexts = "Audio Event Descriptions and Spoken Word Transcriptions";
inline constexpr const char* kQuestion = "Question from LLM";
inline constexpr const char* kInference = "Inference Result of ALM";
inline constexpr const char* kForensics = "Forensics Questions of LLM and Answers of ALM";
inline constexpr const char* kFirstInference = "First Inference Result of ALM";
inline constexpr const char* kSecondInference = "Second Inference Result of ALM";
inline constexpr const char* kFirstForensics =
    "Forensics Questions of LLM and Answers of ALM for the First Inference";
inline constexpr const char* kSecondForensics =
    "Forensics Questions of LLM and Answers of ALM for the Second Inference";
inline constexpr const char* kResultsAndForensics =
    "Inference Results of ALM; Forensics Questions of LLM and Answers of ALM";
inline constexpr const char* kInferenceResults = "Inference Results of ALM";
inline constexpr const char* kOptions = "Target_Attribute_Options";
inline constexpr const char* kTime = "Recording_Time";
inline constexpr const char* kRejected = "Rejected_Value";
inline constexpr const char* kInferred = "Inferred_Value";
inline constexpr const char* kTrue = "True_Value";
inline constexpr const char* kAspect = "Comparison_Aspect";
}  // namespace names

/// Every template the pipeline uses, with its declared placeholder set.
inline const std::map<std::string, std::set<std::string>>& catalog_schema() {
  using namespace names;
  static const std::map<std::string, std::set<std::string>> kSchema = {
      {"system_alm_inference", {}},
      {"system_alm_transcription", {}},
      {"system_alm_caption", {}},
      {"system_llm_guide", {}},
      {"system_llm_review", {}},
      {"system_llm_unify", {}},
      {"system_judge", {}},
      {"alm_caption", {}},
      {"alm_transcription", {}},
      {"alm_inference", {kTargetAttribute, kSpeaker, kGuidance}},
      {"alm_forensics_answer", {kQuestion}},
      {"llm_guidance", {kClipText, kTargetAttribute, kSpeaker}},
      {"llm_forensics_questions", {kClipText, kTargetAttribute, kSpeaker}},
      {"llm_review", {kClipText, kTargetAttribute, kSpeaker, kInference, kForensics}},
      {"llm_dual_review",
       {kClipText, kTargetAttribute, kSpeaker, kFirstInference, kFirstForensics,
        kSecondInference, kSecondForensics}},
      {"llm_consolidation",
       {kClipTexts, kSpeaker, kTargetAttribute, kResultsAndForensics, kOptions}},
      {"baseline_llm_inference", {kClipTexts, kSpeaker, kTargetAttribute, kOptions}},
      {"baseline_alm_aggregate", {kTargetAttribute, kInferenceResults, kOptions}},
      {"segment_scope", {kOptions}},
      {"segment_time", {kTime}},
      {"segment_agent_inference", {kTargetAttribute, kSpeaker, kInference}},
      {"negation", {kRejected}},
      {"judge_similarity", {kTargetAttribute, kInferred, kTrue, kAspect}},
  };
  return kSchema;
}

/// One file per template, `<name>.txt`; a single trailing newline is not part of the body.
class TemplateCatalog {
 public:
  static TemplateCatalog load(const std::filesystem::path& dir) {
    TemplateCatalog cat;
    for (const auto& [name, declared] : catalog_schema()) {
      const auto path = dir / (name + ".txt");
      std::string body = text::read_file(path);
      if (!body.empty() && body.back() == '\n') body.pop_back();
      cat.templates_.emplace(name, Template(name, std::move(body), declared));
    }
    return cat;
  }

  const Template& get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
      throw Error(ErrorCode::InvalidArgument, "no template named '" + name + "'");
    }
    return it->second;
  }

  const std::map<std::string, Template>& all() const { return templates_; }

 private:
  std::map<std::string, Template> templates_;
};

}  // namespace gifts::prompt
