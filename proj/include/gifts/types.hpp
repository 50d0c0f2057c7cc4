#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gifts/attributes.hpp"
#include "gifts/error.hpp"

namespace gifts {

struct ClipRecord {
  std::string clip_id;
  std::string audio_path;
  std::optional<std::string> recorded_at;  // opaque, passed to prompts verbatim
  std::optional<int> speaker_ordinal;      // 1 = first speaker to talk

  bool operator==(const ClipRecord&) const = default;
};

enum class Severity { Healthy, Slightly, Severely };
enum class SicknessKind { None, Physical, Mental };

constexpr std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Healthy: return "Healthy";
    case Severity::Slightly: return "Slightly";
    case Severity::Severely: return "Severely";
  }
  return "?";
}

constexpr std::string_view to_string(SicknessKind k) {
  switch (k) {
    case SicknessKind::None: return "None";
    case SicknessKind::Physical: return "Physical";
    case SicknessKind::Mental: return "Mental";
  }
  return "?";
}

inline std::optional<Severity> severity_from_string(std::string_view s) {
  for (Severity v : {Severity::Healthy, Severity::Slightly, Severity::Severely}) {
    if (text::iequals(s, to_string(v))) return v;
  }
  return std::nullopt;
}

inline std::optional<SicknessKind> kind_from_string(std::string_view s) {
  for (SicknessKind v : {SicknessKind::None, SicknessKind::Physical, SicknessKind::Mental}) {
    if (text::iequals(s, to_string(v))) return v;
  }
  return std::nullopt;
}

struct HealthTriple {
  Severity severity = Severity::Healthy;
  SicknessKind kind = SicknessKind::None;
  std::optional<std::string> disease;

  bool operator==(const HealthTriple&) const = default;

  bool well_formed() const {
    if ((kind == SicknessKind::None) != (severity == Severity::Healthy)) return false;
    if (disease && kind == SicknessKind::None) return false;
    return true;
  }

  /// "Healthy" or e.g. "Severely Physically Sick (Parkinson)".
  std::string label() const {
    if (severity == Severity::Healthy) return "Healthy";
    std::string out(to_string(severity));
    if (kind == SicknessKind::Physical) out += " Physically";
    if (kind == SicknessKind::Mental) out += " Mentally";
    out += " Sick";
    if (disease) out += " (" + *disease + ")";
    return out;
  }
};

struct EducationPair {
  std::string level;  // one of options::kEducationLevel
  std::string major;  // free text, may be empty

  bool operator==(const EducationPair&) const = default;

  std::string label() const { return major.empty() ? level : level + " in " + major; }
};

/// True attribute values for one individual. HEA and EDU live in their structured fields;
/// `values` holds the other ten attributes keyed by kind.
struct GroundTruthProfile {
  std::map<AttributeKind, std::string> values;
  HealthTriple health;
  EducationPair education;

  bool operator==(const GroundTruthProfile&) const = default;

  /// Single-string rendering, as a prediction for this attribute would look.
  std::string value_label(AttributeKind a) const {
    if (a == AttributeKind::HEA) return health.label();
    if (a == AttributeKind::EDU) return education.label();
    auto it = values.find(a);
    return it == values.end() ? std::string() : it->second;
  }
};

struct Individual {
  std::string individual_id;
  std::vector<ClipRecord> clips;
  std::optional<GroundTruthProfile> ground_truth;

  bool operator==(const Individual&) const = default;
};

struct Dataset {
  std::string dataset_name;
  std::vector<Individual> individuals;

  bool operator==(const Dataset&) const = default;
};

struct ClipDerivedText {
  std::string clip_id;
  std::string event_description;
  std::string transcription;  // speaker-tagged lines

  bool operator==(const ClipDerivedText&) const = default;
};

enum class ForensicAnswer { True, False, Uncertain };
enum class Verdict { Yes, No };
enum class DualChoice { First, Second };

constexpr std::string_view to_string(ForensicAnswer a) {
  switch (a) {
    case ForensicAnswer::True: return "True";
    case ForensicAnswer::False: return "False";
    case ForensicAnswer::Uncertain: return "Uncertain";
  }
  return "?";
}
constexpr std::string_view to_string(Verdict v) { return v == Verdict::Yes ? "Yes" : "No"; }
constexpr std::string_view to_string(DualChoice c) {
  return c == DualChoice::First ? "First" : "Second";
}

struct ForensicsExchange {
  std::vector<std::string> questions;
  std::vector<ForensicAnswer> answers;

  bool operator==(const ForensicsExchange&) const = default;
  bool complete() const { return !questions.empty() && questions.size() == answers.size(); }
};

enum class TaskStatus { Ok, Failed };
constexpr std::string_view to_string(TaskStatus s) { return s == TaskStatus::Ok ? "ok" : "failed"; }

/// Everything one (individual, attribute, clip) run of the five-phase loop produced.
struct InferenceTrace {
  std::string individual_id;
  AttributeKind attribute = AttributeKind::AGE;
  std::string clip_id;
  std::string guidance;
  std::string inference_prompt;
  std::string initial_value;
  ForensicsExchange forensics_initial;
  Verdict verdict_initial = Verdict::Yes;
  std::optional<std::string> second_inference_prompt;
  std::optional<std::string> second_value;
  std::optional<ForensicsExchange> forensics_second;
  std::optional<DualChoice> dual_choice;
  std::string candidate_value;
  TaskStatus status = TaskStatus::Ok;
  std::string error;
  std::vector<std::string> warnings;

  bool operator==(const InferenceTrace&) const = default;

  /// Exchange backing the candidate (the one consolidation sees).
  const ForensicsExchange& candidate_forensics() const {
    if (dual_choice == DualChoice::Second && forensics_second) return *forensics_second;
    return forensics_initial;
  }
};

enum class PipelineVariant { Gifts, LlmOnly, AlmOnly, AlmPlusLlm };

constexpr std::string_view to_string(PipelineVariant v) {
  switch (v) {
    case PipelineVariant::Gifts: return "gifts";
    case PipelineVariant::LlmOnly: return "llm";
    case PipelineVariant::AlmOnly: return "alm";
    case PipelineVariant::AlmPlusLlm: return "alm+llm";
  }
  return "?";
}

inline PipelineVariant parse_variant(std::string_view s) {
  for (PipelineVariant v : {PipelineVariant::Gifts, PipelineVariant::LlmOnly,
                            PipelineVariant::AlmOnly, PipelineVariant::AlmPlusLlm}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(s) + "'");
}

/// Outcome for one attribute of one individual.
struct AttributeResult {
  AttributeKind attribute = AttributeKind::AGE;
  std::string final_value;
  TaskStatus status = TaskStatus::Ok;
  std::string error;
  std::optional<ErrorCode> error_code;
  std::vector<std::string> warnings;
  std::vector<InferenceTrace> traces;    // Gifts: one per clip
  std::vector<std::string> clip_values;  // baselines: per-clip ALM inference
  std::string aggregation_prompt;        // consolidation / aggregation prompt sent

  bool operator==(const AttributeResult&) const = default;
};

struct PredictedProfile {
  std::string individual_id;
  PipelineVariant variant = PipelineVariant::Gifts;
  std::vector<ClipDerivedText> derived;  // empty for variants that skip captioning
  std::vector<AttributeResult> attributes;

  bool operator==(const PredictedProfile&) const = default;

  const AttributeResult* find(AttributeKind a) const {
    for (const auto& r : attributes) {
      if (r.attribute == a) return &r;
    }
    return nullptr;
  }
};

}  // namespace gifts
