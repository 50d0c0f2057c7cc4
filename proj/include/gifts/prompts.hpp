#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gifts/attributes.hpp"
#include "gifts/template.hpp"
#include "gifts/text.hpp"
#include "gifts/types.hpp"

namespace gifts::prompt {

/// "first speaker" for ordinal 1, "speaker" when the clip carries no ordinal.
inline std::string speaker_noun(std::optional<int> ordinal) {
  return ordinal ? text::ordinal_word(*ordinal) + " speaker" : std::string("speaker");
}

/// Templates write both "the <Speaker_Information>" and a bare "<Speaker_Information>"; folding
/// the article into the placeholder lets one binding ("the first speaker") read well in both.
inline Template fold_speaker_article(const Template& t) {
  const std::string marker = std::string("<") + names::kSpeaker + ">";
  return Template(t.name(), text::replace_all(t.body(), "the " + marker, marker));
}

inline std::string speaker_phrase(std::optional<int> ordinal) { return "the " + speaker_noun(ordinal); }

/// Comma-separated option list closed by a period; HEA and EDU add how to name the
/// disease or major.
inline std::string options_text(const AttributeScope& scope) {
  std::string out = text::join(scope.options, ", ") + ".";
  if (scope.attribute == AttributeKind::HEA) {
    out += " If the person is physically sick, also name the disease among: " +
           text::join(options::kPhysicalDisease, ", ") +
           "; if mentally sick, among: " + text::join(options::kMentalDisease, ", ") +
           " (e.g. \"Severely Physically Sick (Parkinson)\").";
  } else if (scope.attribute == AttributeKind::EDU) {
    out += " Also name the major (e.g. \"Master's Degree in Computer Science\").";
  }
  return out;
}

inline std::string clip_text_block(const ClipDerivedText& d) {
  return "Audio event description: " + text::trim(d.event_description) +
         "\nSpoken word transcription:\n" + text::trim(d.transcription);
}

inline std::string forensics_block(const ForensicsExchange& f) {
  std::string out;
  for (std::size_t i = 0; i < f.questions.size(); ++i) {
    if (i) out += '\n';
    const std::string n = std::to_string(i + 1);
    out += "Question " + n + ": " + f.questions[i] + "\nAnswer " + n + ": ";
    out += i < f.answers.size() ? std::string(to_string(f.answers[i])) : std::string("(none)");
  }
  return out;
}

/// Per-clip material handed to the multi-clip prompts.
struct ClipEvidence {
  const ClipRecord* clip = nullptr;
  const ClipDerivedText* derived = nullptr;     // absent for variants without captioning
  std::string value;                            // candidate / per-clip inference
  const ForensicsExchange* forensics = nullptr;  // Gifts only
};

class PromptRenderer {
 public:
  explicit PromptRenderer(const TemplateCatalog& catalog) : catalog_(catalog) {}

  const TemplateCatalog& catalog() const { return catalog_; }

  std::string system_prompt(const std::string& name) const { return catalog_.get(name).body(); }

  std::string caption_prompt() const { return catalog_.get("alm_caption").body(); }
  std::string transcription_prompt() const { return catalog_.get("alm_transcription").body(); }

  /// ALM inference prompt. `scope` is included only for closed scopes; time and speaker
  /// sentences only when known.
  std::string inference_prompt(AttributeKind attr, const std::string& guidance,
                               const std::optional<AttributeScope>& scope,
                               const std::optional<std::string>& time,
                               std::optional<int> speaker) const {
    if (text::trim(guidance).empty()) {
      throw Error(ErrorCode::MissingBinding, "inference prompt needs a guidance sentence");
    }
    const Template t = fold_speaker_article(catalog_.get("alm_inference"));
    std::string out = compose(t, {{names::kTargetAttribute, std::string(display_name(attr))},
                                  {names::kSpeaker, speaker_phrase(speaker)},
                                  {names::kGuidance, text::trim(guidance)}});
    return insert_segments(std::move(out), aux_segments(scope, time));
  }

  /// Same template with the guidance sentence dropped (single-agent baselines).
  std::string direct_inference_prompt(AttributeKind attr, const std::optional<AttributeScope>& scope,
                                      const std::optional<std::string>& time,
                                      std::optional<int> speaker) const {
    const Template t =
        fold_speaker_article(catalog_.get("alm_inference").without_segment(names::kGuidance));
    std::string out = compose(t, {{names::kTargetAttribute, std::string(display_name(attr))},
                                  {names::kSpeaker, speaker_phrase(speaker)}});
    return insert_segments(std::move(out), aux_segments(scope, time));
  }

  std::string negated_inference_prompt(const std::string& base_prompt,
                                       const std::string& rejected_value) const {
    const std::string v = text::trim(rejected_value);
    require(!v.empty(), "negated inference needs a non-empty rejected value");
    std::string out = base_prompt;
    if (!out.empty() && out.back() != ' ' && out.back() != '\n') out += ' ';
    return out + compose(catalog_.get("negation"), {{names::kRejected, v}});
  }

  std::string guidance_prompt(const ClipDerivedText& u_g, AttributeKind attr,
                              std::optional<int> speaker) const {
    const Template t = fold_speaker_article(catalog_.get("llm_guidance"));
    return compose(t, {{names::kClipText, clip_text_block(u_g)},
                       {names::kTargetAttribute, std::string(display_name(attr))},
                       {names::kSpeaker, speaker_phrase(speaker)}});
  }

  std::string forensics_question_prompt(const std::string& inferred, const ClipDerivedText& u_g,
                                        AttributeKind attr, const std::optional<std::string>& time,
                                        std::optional<int> speaker) const {
    const Template t = fold_speaker_article(catalog_.get("llm_forensics_questions"));
    std::string out = compose(t, {{names::kClipText, clip_text_block(u_g)},
                                  {names::kTargetAttribute, std::string(display_name(attr))},
                                  {names::kSpeaker, speaker_phrase(speaker)}});
    const Template seg = fold_speaker_article(catalog_.get("segment_agent_inference"));
    std::string agent = compose(seg, {{names::kTargetAttribute, std::string(display_name(attr))},
                                      {names::kSpeaker, speaker_phrase(speaker)},
                                      {names::kInference, text::trim(inferred)}});
    if (agent.back() != '.' && agent.back() != '!' && agent.back() != '?') agent += '.';
    std::vector<std::string> segments = {std::move(agent)};
    if (time) segments.push_back(time_segment(*time));
    return insert_segments(std::move(out), segments);
  }

  std::string forensics_answer_prompt(const std::string& question) const {
    return compose(catalog_.get("alm_forensics_answer"), {{names::kQuestion, text::trim(question)}});
  }

  std::string review_prompt(const std::string& inferred, const ForensicsExchange& exchange,
                            const ClipDerivedText& u_g, AttributeKind attr,
                            const std::optional<std::string>& time,
                            std::optional<int> speaker) const {
    const Template t = fold_speaker_article(catalog_.get("llm_review"));
    std::string out = compose(t, {{names::kClipText, clip_text_block(u_g)},
                                  {names::kTargetAttribute, std::string(display_name(attr))},
                                  {names::kSpeaker, speaker_phrase(speaker)},
                                  {names::kInference, text::trim(inferred)},
                                  {names::kForensics, forensics_block(exchange)}});
    return time ? insert_segments(std::move(out), {time_segment(*time)}) : out;
  }

  std::string dual_review_prompt(const std::string& first, const ForensicsExchange& first_ex,
                                 const std::string& second, const ForensicsExchange& second_ex,
                                 const ClipDerivedText& u_g, AttributeKind attr,
                                 const std::optional<std::string>& time,
                                 std::optional<int> speaker) const {
    const Template t = fold_speaker_article(catalog_.get("llm_dual_review"));
    std::string out = compose(t, {{names::kClipText, clip_text_block(u_g)},
                                  {names::kTargetAttribute, std::string(display_name(attr))},
                                  {names::kSpeaker, speaker_phrase(speaker)},
                                  {names::kFirstInference, text::trim(first)},
                                  {names::kFirstForensics, forensics_block(first_ex)},
                                  {names::kSecondInference, text::trim(second)},
                                  {names::kSecondForensics, forensics_block(second_ex)}});
    return time ? insert_segments(std::move(out), {time_segment(*time)}) : out;
  }

  /// Multi-clip consolidation. Carries this attribute's candidates only.
  std::string consolidation_prompt(AttributeKind attr, const std::vector<ClipEvidence>& clips) const {
    require(!clips.empty(), "consolidation needs at least one clip");
    Template t = catalog_.get("llm_consolidation");
    const AttributeScope scope = scope_of(attr);
    if (scope.open()) t = t.without_segment(names::kOptions);
    Binding b = {{names::kClipTexts, clip_texts_block(clips)},
                 {names::kSpeaker, multi_clip_speaker(clips)},
                 {names::kTargetAttribute, std::string(display_name(attr))},
                 {names::kResultsAndForensics, results_block(clips, true)}};
    if (!scope.open()) b[names::kOptions] = options_text(scope);
    return compose(t, b);
  }

  /// Captioning-first single-LLM inference over every clip's text.
  std::string llm_only_prompt(AttributeKind attr, const std::vector<ClipEvidence>& clips) const {
    require(!clips.empty(), "inference needs at least one clip");
    Template t = catalog_.get("baseline_llm_inference");
    const AttributeScope scope = scope_of(attr);
    if (scope.open()) t = t.without_segment(names::kOptions);
    Binding b = {{names::kClipTexts, clip_texts_block(clips)},
                 {names::kSpeaker, multi_clip_speaker(clips)},
                 {names::kTargetAttribute, std::string(display_name(attr))}};
    if (!scope.open()) b[names::kOptions] = options_text(scope);
    return compose(t, b);
  }

  /// Text-only aggregation of per-clip ALM results, sent back to the ALM.
  std::string alm_aggregate_prompt(AttributeKind attr, const std::vector<ClipEvidence>& clips) const {
    require(!clips.empty(), "aggregation needs at least one clip");
    Template t = catalog_.get("baseline_alm_aggregate");
    const AttributeScope scope = scope_of(attr);
    if (scope.open()) t = t.without_segment(names::kOptions);
    Binding b = {{names::kTargetAttribute, std::string(display_name(attr))},
                 {names::kInferenceResults, results_block(clips, false)}};
    if (!scope.open()) b[names::kOptions] = options_text(scope);
    return compose(t, b);
  }

  std::string judge_prompt(const std::string& target, const std::string& inferred,
                           const std::string& truth, const std::string& aspect) const {
    auto nonempty = [](const std::string& s) { return s.empty() ? std::string("(none)") : s; };
    return compose(catalog_.get("judge_similarity"), {{names::kTargetAttribute, target},
                                                      {names::kInferred, nonempty(inferred)},
                                                      {names::kTrue, nonempty(truth)},
                                                      {names::kAspect, aspect}});
  }

 private:
  std::string time_segment(const std::string& time) const {
    return compose(catalog_.get("segment_time"), {{names::kTime, time}});
  }

  std::vector<std::string> aux_segments(const std::optional<AttributeScope>& scope,
                                        const std::optional<std::string>& time) const {
    std::vector<std::string> out;
    if (scope && !scope->open()) {
      out.push_back(compose(catalog_.get("segment_scope"), {{names::kOptions, options_text(*scope)}}));
    }
    if (time) out.push_back(time_segment(*time));
    return out;
  }

  static std::string clip_header(const ClipEvidence& e, std::size_t index) {
    std::string h = "Clip " + std::to_string(index + 1);
    if (e.clip && e.clip->recorded_at) h += " (recorded at " + *e.clip->recorded_at + ")";
    return h + ":";
  }

  static std::string clip_texts_block(const std::vector<ClipEvidence>& clips) {
    std::string out;
    for (std::size_t i = 0; i < clips.size(); ++i) {
      if (i) out += "\n\n";
      out += clip_header(clips[i], i) + "\n";
      out += clips[i].derived ? clip_text_block(*clips[i].derived)
                              : std::string("(no description available)");
    }
    return out;
  }

  static std::string results_block(const std::vector<ClipEvidence>& clips, bool with_forensics) {
    std::string out;
    for (std::size_t i = 0; i < clips.size(); ++i) {
      if (i) out += "\n\n";
      out += clip_header(clips[i], i) + "\nInference result: " + text::trim(clips[i].value);
      if (with_forensics && clips[i].forensics && !clips[i].forensics->questions.empty()) {
        out += "\n" + forensics_block(*clips[i].forensics);
      }
    }
    return out;
  }

  static std::string multi_clip_speaker(const std::vector<ClipEvidence>& clips) {
    std::optional<int> first = clips.front().clip ? clips.front().clip->speaker_ordinal : std::nullopt;
    bool uniform = true;
    for (const auto& e : clips) {
      const std::optional<int> o = e.clip ? e.clip->speaker_ordinal : std::nullopt;
      if (o != first) uniform = false;
    }
    if (uniform) return "the " + speaker_noun(first) + " in every clip.";
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < clips.size(); ++i) {
      const std::optional<int> o = clips[i].clip ? clips[i].clip->speaker_ordinal : std::nullopt;
      parts.push_back("the " + speaker_noun(o) + " in clip " + std::to_string(i + 1));
    }
    return text::join(parts, ", ") + ".";
  }

  const TemplateCatalog& catalog_;
};

}  // namespace gifts::prompt
