#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gifts/error.hpp"
#include "gifts/text.hpp"

namespace gifts {

// Declaration order is the report column order (AGE ... MAR).
enum class AttributeKind {
  AGE, GEN, ACC, HEA, HAB, PER, SOP, SOS, INC, OCC, EDU, MAR,
};

inline constexpr std::size_t kAttributeCount = 12;

inline constexpr std::array<AttributeKind, kAttributeCount> kAllAttributes = {
    AttributeKind::AGE, AttributeKind::GEN, AttributeKind::ACC, AttributeKind::HEA,
    AttributeKind::HAB, AttributeKind::PER, AttributeKind::SOP, AttributeKind::SOS,
    AttributeKind::INC, AttributeKind::OCC, AttributeKind::EDU, AttributeKind::MAR,
};

enum class Category { Qualitative, Quantitative, Fuzzy, Hybrid };

constexpr std::string_view code_of(AttributeKind a) {
  switch (a) {
    case AttributeKind::AGE: return "AGE";
    case AttributeKind::GEN: return "GEN";
    case AttributeKind::ACC: return "ACC";
    case AttributeKind::HEA: return "HEA";
    case AttributeKind::HAB: return "HAB";
    case AttributeKind::PER: return "PER";
    case AttributeKind::SOP: return "SOP";
    case AttributeKind::SOS: return "SOS";
    case AttributeKind::INC: return "INC";
    case AttributeKind::OCC: return "OCC";
    case AttributeKind::EDU: return "EDU";
    case AttributeKind::MAR: return "MAR";
  }
  return "?";
}

/// Lowercase noun phrase used inside prompts ("infer the social stratum of ...").
constexpr std::string_view display_name(AttributeKind a) {
  switch (a) {
    case AttributeKind::AGE: return "age";
    case AttributeKind::GEN: return "gender";
    case AttributeKind::ACC: return "accent";
    case AttributeKind::HEA: return "health condition";
    case AttributeKind::HAB: return "habit";
    case AttributeKind::PER: return "personality";
    case AttributeKind::SOP: return "social preference";
    case AttributeKind::SOS: return "social stratum";
    case AttributeKind::INC: return "income";
    case AttributeKind::OCC: return "occupation";
    case AttributeKind::EDU: return "education";
    case AttributeKind::MAR: return "marital status";
  }
  return "?";
}

inline std::optional<AttributeKind> attribute_from_code(std::string_view code) {
  for (AttributeKind a : kAllAttributes) {
    if (code_of(a) == code) return a;
  }
  return std::nullopt;
}

inline AttributeKind parse_attribute_code(std::string_view code) {
  if (auto a = attribute_from_code(code)) return *a;
  throw Error(ErrorCode::InvalidArgument, "unknown attribute code '" + std::string(code) + "'");
}

constexpr Category attribute_category(AttributeKind a) {
  switch (a) {
    case AttributeKind::GEN:
    case AttributeKind::MAR:
      return Category::Qualitative;
    case AttributeKind::AGE:
    case AttributeKind::SOS:
    case AttributeKind::INC:
      return Category::Quantitative;
    case AttributeKind::HEA:
    case AttributeKind::EDU:
      return Category::Hybrid;
    case AttributeKind::ACC:
    case AttributeKind::PER:
    case AttributeKind::SOP:
    case AttributeKind::OCC:
    case AttributeKind::HAB:
      return Category::Fuzzy;
  }
  return Category::Fuzzy;
}

constexpr std::string_view to_string(Category c) {
  switch (c) {
    case Category::Qualitative: return "Qualitative";
    case Category::Quantitative: return "Quantitative";
    case Category::Fuzzy: return "Fuzzy";
    case Category::Hybrid: return "Hybrid";
  }
  return "?";
}

/// Option list for one attribute. An open scope has no options and accepts free text.
struct AttributeScope {
  AttributeKind attribute;
  std::vector<std::string> options;
  bool ordered = false;

  bool open() const { return options.empty(); }

  /// Index of the option equal to `value` under label normalization.
  std::optional<std::size_t> index_of(std::string_view value) const {
    const std::string key = text::normalize_label(value);
    for (std::size_t i = 0; i < options.size(); ++i) {
      if (text::normalize_label(options[i]) == key) return i;
    }
    return std::nullopt;
  }

  bool contains(std::string_view value) const { return index_of(value).has_value(); }
};

namespace options {
inline const std::vector<std::string> kAge = {
    "Younger than twenties", "twenties", "thirties", "forties",
    "fifties", "sixties", "older than sixties"};
inline const std::vector<std::string> kGender = {"Male", "Female"};
// "British" and "England" are distinct entries in the source table and kept that way.
inline const std::vector<std::string> kAccent = {
    "American", "British", "England", "Canadian", "Australian", "Irish",
    "Scottish", "New Zealand", "South African", "Indian", "Asian"};
inline const std::vector<std::string> kHealth = {
    "Healthy", "Slightly Physically Sick", "Slightly Mentally Sick",
    "Severely Physically Sick", "Severely Mentally Sick"};
inline const std::vector<std::string> kPhysicalDisease = {"Parkinson", "Alzheimer", "Dysarthric"};
inline const std::vector<std::string> kMentalDisease = {
    "Depression", "Anxiety", "Post-Traumatic Stress Disorder"};
inline const std::vector<std::string> kSocialStratum = {
    "Lower Class", "Working Class", "Middle Class", "Upper-Middle Class", "Upper Class"};
inline const std::vector<std::string> kIncome = {
    "Low Income", "Lower-Middle Income", "Middle Income", "Upper-Middle Income", "High Income"};
inline const std::vector<std::string> kEducationLevel = {
    "Lower than High School", "High School", "Associate Degree",
    "Bachelor's Degree", "Master's Degree", "Doctorate's Degree"};
inline const std::vector<std::string> kMarital = {
    "Single", "Married", "Separated", "Divorced", "Widowed"};
}  // namespace options

inline AttributeScope scope_of(AttributeKind a) {
  switch (a) {
    case AttributeKind::AGE: return {a, options::kAge, true};
    case AttributeKind::GEN: return {a, options::kGender, false};
    case AttributeKind::ACC: return {a, options::kAccent, false};
    case AttributeKind::HEA: return {a, options::kHealth, false};
    case AttributeKind::SOS: return {a, options::kSocialStratum, true};
    case AttributeKind::INC: return {a, options::kIncome, true};
    case AttributeKind::EDU: return {a, options::kEducationLevel, true};
    case AttributeKind::MAR: return {a, options::kMarital, false};
    case AttributeKind::HAB:
    case AttributeKind::PER:
    case AttributeKind::SOP:
    case AttributeKind::OCC:
      return {a, {}, false};
  }
  return {a, {}, false};
}

}  // namespace gifts
