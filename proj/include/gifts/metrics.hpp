#pragma once

#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gifts/attributes.hpp"
#include "gifts/backends.hpp"
#include "gifts/error.hpp"
#include "gifts/parsers.hpp"
#include "gifts/prompts.hpp"
#include "gifts/text.hpp"
#include "gifts/types.hpp"

namespace gifts::metrics {

enum class SimilarityLabel { HighlySimilar, Similar, ModeratelySimilar, SlightlySimilar, CompletelyDifferent };

inline constexpr SimilarityLabel kAllLabels[] = {
    SimilarityLabel::HighlySimilar, SimilarityLabel::Similar, SimilarityLabel::ModeratelySimilar,
    SimilarityLabel::SlightlySimilar, SimilarityLabel::CompletelyDifferent};

constexpr double label_score(SimilarityLabel l) {
  switch (l) {
    case SimilarityLabel::HighlySimilar: return 1.0;
    case SimilarityLabel::Similar: return 0.75;
    case SimilarityLabel::ModeratelySimilar: return 0.5;
    case SimilarityLabel::SlightlySimilar: return 0.25;
    case SimilarityLabel::CompletelyDifferent: return 0.0;
  }
  return 0.0;
}

constexpr std::string_view to_string(SimilarityLabel l) {
  switch (l) {
    case SimilarityLabel::HighlySimilar: return "Highly Similar";
    case SimilarityLabel::Similar: return "Similar";
    case SimilarityLabel::ModeratelySimilar: return "Moderately Similar";
    case SimilarityLabel::SlightlySimilar: return "Slightly Similar";
    case SimilarityLabel::CompletelyDifferent: return "Completely Different";
  }
  return "?";
}

/// Accepts "<Similarity: X>", a bare label, or either with trailing punctuation; the label
/// comparison ignores case, spaces, and hyphens.
inline SimilarityLabel parse_similarity_label(std::string_view raw) {
  std::string region = text::trim(raw);
  const std::size_t at = text::ifind(region, "Similarity:");
  if (at != std::string::npos) region = region.substr(at + 11);
  const std::string key = prompt::detail::alnum_lower(region);
  for (SimilarityLabel l : kAllLabels) {
    if (prompt::detail::alnum_lower(to_string(l)) == key) return l;
  }
  throw Error(ErrorCode::UnparseableJudgeLabel, "unrecognized similarity label '" + text::trim(raw) + "'");
}

/// Fuzzy comparison oracle. Implementations must return HighlySimilar for byte-identical
/// inputs.
class SimilarityJudge {
 public:
  virtual ~SimilarityJudge() = default;
  virtual SimilarityLabel judge(AttributeKind attr, const std::string& target,
                                const std::string& predicted, const std::string& truth) = 0;
};

inline std::string comparison_aspect(AttributeKind attr) {
  return attr == AttributeKind::ACC ? "pronunciation and vocabulary usage" : "meaning and range";
}

/// Judge backed by the Judge model role.
class ModelJudge : public SimilarityJudge {
 public:
  ModelJudge(backend::ModelClient& client, const prompt::PromptRenderer& renderer)
      : client_(client), renderer_(renderer) {}

  SimilarityLabel judge(AttributeKind attr, const std::string& target, const std::string& predicted,
                        const std::string& truth) override {
    if (predicted == truth) return SimilarityLabel::HighlySimilar;
    return parse_similarity_label(client_.query_text(
        backend::ModelRole::Judge,
        renderer_.judge_prompt(target, predicted, truth, comparison_aspect(attr))));
  }

 private:
  backend::ModelClient& client_;
  const prompt::PromptRenderer& renderer_;
};

/// Scored cell, possibly with notes about how the prediction was read.
struct Score {
  double value = 0.0;
  std::vector<std::string> warnings;
};

inline double score_qualitative(const std::string& pred, const std::string& truth, AttributeKind attr) {
  require(attribute_category(attr) == Category::Qualitative,
          std::string(code_of(attr)) + " is not a qualitative attribute");
  return text::normalize_label(pred) == text::normalize_label(truth) ? 1.0 : 0.0;
}

/// 1 - |i - j| / (L - 1) over the ordered options; an off-scope prediction scores 0.
inline Score score_quantitative(const std::string& pred, const std::string& truth, AttributeKind attr) {
  require(attribute_category(attr) == Category::Quantitative,
          std::string(code_of(attr)) + " is not a quantitative attribute");
  const AttributeScope scope = scope_of(attr);
  const auto j = scope.index_of(truth);
  if (!j) throw Error(ErrorCode::ScopeViolation, "ground truth '" + truth + "' is outside the options");
  const auto i = scope.index_of(pred);
  if (!i) return {0.0, {std::string(code_of(attr)) + ": prediction '" + pred + "' is off-scope; scored 0"}};
  const double dist = static_cast<double>(*i > *j ? *i - *j : *j - *i);
  return {1.0 - dist / static_cast<double>(scope.options.size() - 1), {}};
}

inline double score_fuzzy(const std::string& pred, const std::string& truth, AttributeKind attr,
                          SimilarityJudge& judge) {
  require(attribute_category(attr) == Category::Fuzzy,
          std::string(code_of(attr)) + " is not a fuzzy attribute");
  return label_score(judge.judge(attr, std::string(display_name(attr)), pred, truth));
}

inline double score_health(const HealthTriple& pred, const HealthTriple& truth) {
  if (!pred.well_formed() || !truth.well_formed()) {
    throw Error(ErrorCode::MalformedTriple, "health triple violates the severity/kind/disease rules");
  }
  const bool pred_healthy = pred.severity == Severity::Healthy;
  const bool truth_healthy = truth.severity == Severity::Healthy;
  if (pred_healthy && truth_healthy) return 1.0;
  double s = pred.severity == truth.severity ? 0.5 : 0.0;
  if (pred_healthy != truth_healthy) return s;
  if (pred.kind == truth.kind) s += 0.25;
  const bool disease_match =
      (!pred.disease && !truth.disease) ||
      (pred.disease && truth.disease && text::normalize_label(*pred.disease) == text::normalize_label(*truth.disease));
  if (disease_match) s += 0.25;
  return s;
}

inline double score_education(const EducationPair& pred, const EducationPair& truth, SimilarityJudge& judge) {
  const AttributeScope scope = scope_of(AttributeKind::EDU);
  const auto i = scope.index_of(pred.level);
  const auto j = scope.index_of(truth.level);
  if (!i || !j) throw Error(ErrorCode::ScopeViolation, "education level outside the ordered list");
  const double dist = static_cast<double>(*i > *j ? *i - *j : *j - *i);
  const double level = 1.0 - dist / static_cast<double>(scope.options.size() - 1);
  const double major =
      label_score(judge.judge(AttributeKind::EDU, "major", pred.major, truth.major));
  return 0.7 * level + 0.3 * major;
}

// ---------------------------------------------------------------- reading predictions

/// Reads "Severely Physically Sick (Parkinson)", "Healthy", "Slightly Mentally Sick: Anxiety"
/// and similar phrasings. Returns nullopt when no severity can be found.
inline std::optional<HealthTriple> parse_health_value(const std::string& raw) {
  const std::string low = text::to_lower(text::fold_quotes(raw));
  HealthTriple t;
  const bool sev = text::contains(low, "severe");
  const bool slight = text::contains(low, "slight") || text::contains(low, "mild");
  if (sev == slight) {
    if (text::contains(low, "healthy") && !sev) return HealthTriple{Severity::Healthy, SicknessKind::None, std::nullopt};
    return std::nullopt;
  }
  t.severity = sev ? Severity::Severely : Severity::Slightly;
  std::optional<std::string> disease;
  SicknessKind disease_kind = SicknessKind::None;
  for (const auto& d : options::kPhysicalDisease) {
    if (text::ifind(raw, d) != std::string::npos) disease = d, disease_kind = SicknessKind::Physical;
  }
  for (const auto& d : options::kMentalDisease) {
    if (text::ifind(raw, d) != std::string::npos) disease = d, disease_kind = SicknessKind::Mental;
  }
  if (!disease && text::contains(low, "ptsd")) disease = options::kMentalDisease[2], disease_kind = SicknessKind::Mental;
  const bool physical = text::contains(low, "physical");
  const bool mental = text::contains(low, "mental");
  if (physical != mental) {
    t.kind = physical ? SicknessKind::Physical : SicknessKind::Mental;
  } else if (disease_kind != SicknessKind::None) {
    t.kind = disease_kind;
  } else {
    return std::nullopt;
  }
  if (disease && disease_kind == t.kind) t.disease = disease;
  return t;
}

/// Splits "Master's Degree in Computer Science" into level and major. The level is the
/// longest option named in the text; the major is what follows " in " or " of ".
inline std::optional<EducationPair> parse_education_value(const std::string& raw) {
  const std::string s = text::fold_quotes(text::trim(raw));
  std::optional<std::size_t> best;
  std::size_t best_pos = 0;
  for (std::size_t k = 0; k < options::kEducationLevel.size(); ++k) {
    const std::size_t pos = text::ifind(s, options::kEducationLevel[k]);
    if (pos == std::string::npos) continue;
    if (!best || options::kEducationLevel[k].size() > options::kEducationLevel[*best].size()) {
      best = k;
      best_pos = pos;
    }
  }
  if (!best) return std::nullopt;
  EducationPair p;
  p.level = options::kEducationLevel[*best];
  std::string rest = s.substr(best_pos + options::kEducationLevel[*best].size());
  for (const char* joiner : {" in ", " of "}) {
    const std::size_t at = text::ifind(rest, joiner);
    if (at != std::string::npos) {
      rest = rest.substr(at + std::string_view(joiner).size());
      break;
    }
  }
  rest = text::trim(rest);
  if (!rest.empty() && (rest.back() == '.' || rest.back() == ')')) rest.pop_back();
  p.major = text::trim(rest);
  return p;
}

// ---------------------------------------------------------------- profile scoring

struct AttributeScore {
  AttributeKind attribute = AttributeKind::AGE;
  std::optional<double> score;  // nullopt: excluded (failed attribute or judge error)
  std::string note;
  std::vector<std::string> warnings;
};

struct ProfileScore {
  std::string individual_id;
  std::vector<AttributeScore> attributes;  // declaration order
};

inline Score score_attribute(AttributeKind attr, const std::string& pred, const GroundTruthProfile& truth,
                             SimilarityJudge& judge) {
  switch (attribute_category(attr)) {
    case Category::Qualitative:
      return {score_qualitative(pred, truth.value_label(attr), attr), {}};
    case Category::Quantitative:
      return score_quantitative(pred, truth.value_label(attr), attr);
    case Category::Fuzzy:
      return {score_fuzzy(pred, truth.value_label(attr), attr, judge), {}};
    case Category::Hybrid:
      if (attr == AttributeKind::HEA) {
        auto h = parse_health_value(pred);
        if (!h) return {0.0, {"HEA: cannot read a health condition from '" + pred + "'; scored 0"}};
        return {score_health(*h, truth.health), {}};
      } else {
        auto e = parse_education_value(pred);
        if (!e) return {0.0, {"EDU: cannot read an education level from '" + pred + "'; scored 0"}};
        return {score_education(*e, truth.education, judge), {}};
      }
  }
  return {};
}

/// Scores every attribute present in `pred`. Failed attributes and scoring errors leave the
/// cell empty with a note.
inline ProfileScore score_profile(const PredictedProfile& pred, const GroundTruthProfile& truth,
                                  SimilarityJudge& judge) {
  ProfileScore out;
  out.individual_id = pred.individual_id;
  for (AttributeKind a : kAllAttributes) {
    AttributeScore cell;
    cell.attribute = a;
    const AttributeResult* r = pred.find(a);
    if (!r) {
      cell.note = "no prediction";
    } else if (r->status != TaskStatus::Ok) {
      cell.note = "prediction failed: " + r->error;
    } else {
      try {
        Score s = score_attribute(a, r->final_value, truth, judge);
        cell.score = s.value;
        cell.warnings = std::move(s.warnings);
      } catch (const Error& e) {
        cell.note = e.what();
      }
    }
    out.attributes.push_back(std::move(cell));
  }
  return out;
}

}  // namespace gifts::metrics
