#pragma once

// In-context unlearning: mispaired (individual, value) examples prepended to attribute prompts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gifts/attributes.hpp"
#include "gifts/backends.hpp"
#include "gifts/error.hpp"
#include "gifts/json_io.hpp"
#include "gifts/random.hpp"
#include "gifts/types.hpp"

namespace gifts::icu {

struct IcuPair {
  std::string individual_id;
  std::string wrong_value;

  bool operator==(const IcuPair&) const = default;
};

struct IcuContext {
  std::uint64_t seed = 0;
  std::map<AttributeKind, std::vector<IcuPair>> assignments;
  std::vector<std::string> warnings;

  bool operator==(const IcuContext&) const = default;
  bool empty() const { return assignments.empty(); }
};

inline constexpr int kMaxValueAwareAttempts = 10000;

/// Seeded uniform derangement of [0, n) by rejection over Fisher-Yates shuffles.
inline std::vector<std::size_t> sample_derangement(std::size_t n, SeededRng& rng) {
  if (n < 2) throw Error(ErrorCode::TooFewIndividuals, "a derangement needs at least 2 elements");
  std::vector<std::size_t> p(n);
  for (;;) {
    std::iota(p.begin(), p.end(), std::size_t{0});
    rng.shuffle(p);
    bool fixed = false;
    for (std::size_t i = 0; i < n && !fixed; ++i) fixed = p[i] == i;
    if (!fixed) return p;
  }
}

/// True when some derangement moves every value onto a different value: possible iff no
/// value occurs more than n/2 times.
inline bool value_derangement_exists(std::span<const std::string> values) {
  std::map<std::string, std::size_t> counts;
  for (const auto& v : values) ++counts[text::normalize_label(v)];
  for (const auto& [v, c] : counts) {
    if (2 * c > values.size()) return false;
  }
  return true;
}

/// Derangement of positions that, when achievable, also never hands anyone a value equal to
/// their own (duplicate values across individuals would otherwise pair correctly by accident).
inline std::vector<std::size_t> sample_value_derangement(std::span<const std::string> values,
                                                         SeededRng& rng, bool& value_safe) {
  const std::size_t n = values.size();
  value_safe = value_derangement_exists(values);
  for (int attempt = 0; attempt < kMaxValueAwareAttempts; ++attempt) {
    auto p = sample_derangement(n, rng);
    if (!value_safe) return p;
    bool clash = false;
    for (std::size_t i = 0; i < n && !clash; ++i) {
      clash = text::normalize_label(values[p[i]]) == text::normalize_label(values[i]);
    }
    if (!clash) return p;
  }
  value_safe = false;
  return sample_derangement(n, rng);
}

inline IcuContext build_icu_context(std::span<const Individual> calibration, std::uint64_t seed) {
  if (calibration.size() < 2) {
    throw Error(ErrorCode::TooFewIndividuals,
                "in-context unlearning needs at least 2 calibration individuals, got " +
                    std::to_string(calibration.size()));
  }
  for (const auto& ind : calibration) {
    if (!ind.ground_truth) {
      throw Error(ErrorCode::MissingGroundTruth,
                  "calibration individual '" + ind.individual_id + "' has no ground truth");
    }
  }
  IcuContext ctx;
  ctx.seed = seed;
  for (AttributeKind a : kAllAttributes) {
    std::vector<std::string> values;
    for (const auto& ind : calibration) values.push_back(ind.ground_truth->value_label(a));
    SeededRng rng(derive_seed(seed, code_of(a)));
    bool value_safe = false;
    const auto p = sample_value_derangement(values, rng, value_safe);
    if (!value_safe) {
      ctx.warnings.push_back(std::string(code_of(a)) +
                             ": a repeated value makes some pairs correct by value");
    }
    auto& pairs = ctx.assignments[a];
    for (std::size_t i = 0; i < calibration.size(); ++i) {
      pairs.push_back({calibration[i].individual_id, values[p[i]]});
    }
  }
  return ctx;
}

/// Example block for one attribute followed by a blank line and the base prompt.
inline std::string wrap_prompt_with_icu(const IcuContext& ctx, const std::string& base_prompt,
                                        backend::ModelRole role, AttributeKind attr) {
  require(!base_prompt.empty(), "cannot wrap an empty prompt");
  auto it = ctx.assignments.find(attr);
  require(it != ctx.assignments.end() && !it->second.empty(),
          "unlearning context has no examples for " + std::string(code_of(attr)));
  const std::string subject = backend::audio_capable(role) ? "speakers" : "individuals";
  std::string out = "Reference examples of " + subject + " and their " +
                    std::string(display_name(attr)) + ":\n";
  for (std::size_t i = 0; i < it->second.size(); ++i) {
    const auto& pair = it->second[i];
    out += "Example " + std::to_string(i + 1) + ": the " + std::string(display_name(attr)) +
           " of " + pair.individual_id + " is " + pair.wrong_value + ".\n";
  }
  return out + "\n" + base_prompt;
}

inline json_io::Json to_json(const IcuContext& ctx) {
  json_io::Json j;
  j["seed"] = ctx.seed;
  json_io::Json attrs = json_io::Json::object();
  for (const auto& [a, pairs] : ctx.assignments) {
    json_io::Json list = json_io::Json::array();
    for (const auto& p : pairs) list.push_back({{"individual_id", p.individual_id}, {"value", p.wrong_value}});
    attrs[std::string(code_of(a))] = list;
  }
  j["assignments"] = attrs;
  j["warnings"] = ctx.warnings;
  return j;
}

inline IcuContext icu_from_json(const json_io::Json& j) {
  json_io::ObjectReader r(j, "icu_context");
  IcuContext ctx;
  const auto& seed = r.at("seed");
  if (!seed.is_number_unsigned()) throw Error(ErrorCode::SchemaMismatch, "icu_context.seed must be unsigned");
  ctx.seed = seed.get<std::uint64_t>();
  const auto& attrs = r.at("assignments");
  if (!attrs.is_object()) throw Error(ErrorCode::SchemaMismatch, "icu_context.assignments must be an object");
  for (const auto& item : attrs.items()) {
    const AttributeKind a = parse_attribute_code(item.key());
    if (!item.value().is_array()) {
      throw Error(ErrorCode::SchemaMismatch, "icu_context.assignments." + item.key() + " must be a list");
    }
    auto& pairs = ctx.assignments[a];
    for (const auto& p : item.value()) {
      json_io::ObjectReader pr(p, "icu_context.assignments." + item.key());
      pairs.push_back({pr.string("individual_id"), pr.string("value")});
      pr.finish();
    }
  }
  if (const auto* w = r.optional("warnings")) ctx.warnings = json_io::string_list(*w, "icu_context.warnings");
  r.finish();
  if (ctx.empty()) throw Error(ErrorCode::SchemaMismatch, "icu_context has no assignments");
  return ctx;
}

inline IcuContext load_icu_context(const std::filesystem::path& path) {
  try {
    return icu_from_json(json_io::Json::parse(text::read_file(path)));
  } catch (const json_io::Json::parse_error& e) {
    throw Error(ErrorCode::SchemaMismatch, path.string() + ": " + e.what());
  }
}

}  // namespace gifts::icu
