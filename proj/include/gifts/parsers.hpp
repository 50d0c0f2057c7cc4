#pragma once

// Tolerant readers for the structured replies the prompt templates ask for. Models drift
// from the requested format, so most readers fall back to the raw text and report a warning
// instead of failing.

#include <cctype>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "gifts/error.hpp"
#include "gifts/text.hpp"
#include "gifts/types.hpp"

namespace gifts::prompt {

template <typename T>
struct Parsed {
  T value;
  std::optional<std::string> warning;
};

namespace detail {

/// Text after a case-insensitive `marker` up to the next '>' (or end); nullopt if absent.
inline std::optional<std::string> after_marker(std::string_view raw, std::string_view marker) {
  const std::size_t at = text::ifind(raw, marker);
  if (at == std::string::npos) return std::nullopt;
  const std::size_t start = at + marker.size();
  std::size_t stop = raw.find('>', start);
  if (stop == std::string_view::npos) stop = raw.size();
  return text::trim(raw.substr(start, stop - start));
}

inline std::string alnum_lower(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

/// Lowercased words of `s` (runs of letters).
inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline bool has_word(const std::vector<std::string>& ws, std::string_view w) {
  for (const auto& x : ws) {
    if (x == w) return true;
  }
  return false;
}

inline std::string strip_brackets(std::string s) {
  s = text::trim(s);
  if (!s.empty() && s.front() == '<') s.erase(0, 1);
  if (!s.empty() && s.back() == '>') s.pop_back();
  return text::trim(s);
}

}  // namespace detail

inline Parsed<std::string> parse_guidance(std::string_view raw) {
  const std::string trimmed = text::trim(raw);
  if (trimmed.empty()) throw Error(ErrorCode::EmptyResponse, "guidance reply is empty");
  if (auto g = detail::after_marker(trimmed, "Guidance:")) {
    if (g->empty()) throw Error(ErrorCode::EmptyResponse, "guidance marker with no text");
    return {*g, std::nullopt};
  }
  return {trimmed, "guidance marker absent; using the whole reply"};
}

/// Every quoted string that follows a "Question" key, in order, duplicates kept.
inline std::vector<std::string> parse_questions(std::string_view raw) {
  static const std::regex kQuestion(R"re("Question"\s*:\s*"((?:[^"\\]|\\.)*)")re",
                                    std::regex::icase);
  std::vector<std::string> out;
  const std::string s(raw);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kQuestion); it != std::sregex_iterator();
       ++it) {
    std::string q = (*it)[1].str();
    q = text::replace_all(std::move(q), "\\\"", "\"");
    q = text::replace_all(std::move(q), "\\\\", "\\");
    out.push_back(text::trim(q));
  }
  if (out.empty()) throw Error(ErrorCode::NoQuestionsFound, "no \"Question\" entries in reply");
  return out;
}

/// Total: anything that is not exactly one of the three words is Uncertain.
inline Parsed<ForensicAnswer> parse_forensics_answer(std::string_view raw) {
  const std::string key = detail::alnum_lower(raw);
  if (key == "true") return {ForensicAnswer::True, std::nullopt};
  if (key == "false") return {ForensicAnswer::False, std::nullopt};
  if (key == "uncertain") return {ForensicAnswer::Uncertain, std::nullopt};
  return {ForensicAnswer::Uncertain,
          "unrecognized forensic answer '" + text::trim(raw) + "' read as Uncertain"};
}

inline Verdict parse_verdict(std::string_view raw) {
  const std::string region = detail::after_marker(raw, "Answer:").value_or(std::string(raw));
  const auto ws = detail::words(region);
  const bool yes = detail::has_word(ws, "yes");
  const bool no = detail::has_word(ws, "no");
  if (yes == no) {
    throw Error(ErrorCode::AmbiguousVerdict, "cannot read Yes/No from '" + text::trim(raw) + "'");
  }
  return yes ? Verdict::Yes : Verdict::No;
}

/// Reads the pick between two inference results: "First"/"Second", or a verbatim echo of
/// one candidate.
inline DualChoice parse_dual_choice(std::string_view raw, std::string_view first,
                                    std::string_view second) {
  const std::string region =
      detail::strip_brackets(detail::after_marker(raw, "Answer:").value_or(std::string(raw)));
  std::string key = text::to_lower(region);
  while (!key.empty() && std::ispunct(static_cast<unsigned char>(key.back()))) key.pop_back();
  if (key == "first") return DualChoice::First;
  if (key == "second") return DualChoice::Second;
  if (region == text::trim(first)) return DualChoice::First;
  if (region == text::trim(second)) return DualChoice::Second;
  throw Error(ErrorCode::AmbiguousVerdict,
              "cannot read First/Second choice from '" + text::trim(raw) + "'");
}

inline Parsed<std::string> parse_final_value(std::string_view raw) {
  const std::string trimmed = text::trim(raw);
  if (trimmed.empty()) throw Error(ErrorCode::EmptyResponse, "consolidation reply is empty");
  if (auto v = detail::after_marker(trimmed, "Inference result:")) {
    if (v->empty()) throw Error(ErrorCode::EmptyResponse, "inference-result marker with no text");
    return {*v, std::nullopt};
  }
  return {trimmed, "inference-result marker absent; using the whole reply"};
}

}  // namespace gifts::prompt
