#pragma once

// JSON forms of the domain types. Writers use insertion-ordered objects so output is
// byte-stable for equal values; readers reject fields they do not know.

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gifts/attributes.hpp"
#include "gifts/error.hpp"
#include "gifts/types.hpp"

namespace gifts::json_io {

using Json = nlohmann::ordered_json;

/// Strict field access over one JSON object. Call finish() once all fields are read.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string context, ErrorCode code = ErrorCode::SchemaMismatch)
      : obj_(obj), context_(std::move(context)), code_(code) {
    if (!obj_.is_object()) throw Error(code_, context_ + ": expected an object");
  }

  bool has(const std::string& key) const {
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw Error(code_, context_ + ": missing field '" + key + "'");
    return obj_.at(key);
  }

  const Json* optional(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return nullptr;
    return &obj_.at(key);
  }

  std::string string(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_string()) throw Error(code_, context_ + ": field '" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_string(const std::string& key) {
    const Json* v = optional(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw Error(code_, context_ + ": field '" + key + "' must be a string");
    return v->get<std::string>();
  }

  const Json& array(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_array()) throw Error(code_, context_ + ": field '" + key + "' must be a list");
    return v;
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) {
        throw Error(ErrorCode::UnknownField, context_ + ": unknown field '" + item.key() + "'");
      }
    }
  }

  const std::string& context() const { return context_; }

 private:
  const Json& obj_;
  std::string context_;
  ErrorCode code_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------- enums

template <typename E, std::size_t N>
E enum_from(const std::string& s, const E (&values)[N], const std::string& what) {
  for (E v : values) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::SchemaMismatch, "invalid " + what + " '" + s + "'");
}

inline ForensicAnswer answer_from(const std::string& s) {
  static constexpr ForensicAnswer kAll[] = {ForensicAnswer::True, ForensicAnswer::False,
                                            ForensicAnswer::Uncertain};
  return enum_from(s, kAll, "forensic answer");
}
inline Verdict verdict_from(const std::string& s) {
  static constexpr Verdict kAll[] = {Verdict::Yes, Verdict::No};
  return enum_from(s, kAll, "verdict");
}
inline DualChoice choice_from(const std::string& s) {
  static constexpr DualChoice kAll[] = {DualChoice::First, DualChoice::Second};
  return enum_from(s, kAll, "dual choice");
}
inline TaskStatus status_from(const std::string& s) {
  static constexpr TaskStatus kAll[] = {TaskStatus::Ok, TaskStatus::Failed};
  return enum_from(s, kAll, "status");
}

inline std::vector<std::string> string_list(const Json& arr, const std::string& context) {
  std::vector<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw Error(ErrorCode::SchemaMismatch, context + ": expected strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

// ---------------------------------------------------------------- dataset

inline Json to_json(const ClipRecord& c) {
  Json j;
  j["clip_id"] = c.clip_id;
  j["audio_path"] = c.audio_path;
  if (c.recorded_at) j["recorded_at"] = *c.recorded_at;
  if (c.speaker_ordinal) j["speaker_ordinal"] = *c.speaker_ordinal;
  return j;
}

inline Json to_json(const GroundTruthProfile& g) {
  Json j = Json::object();
  for (AttributeKind a : kAllAttributes) {
    const std::string code(code_of(a));
    if (a == AttributeKind::HEA) {
      Json h;
      h["severity"] = std::string(to_string(g.health.severity));
      h["kind"] = std::string(to_string(g.health.kind));
      if (g.health.disease) h["disease"] = *g.health.disease;
      j[code] = h;
    } else if (a == AttributeKind::EDU) {
      j[code] = Json{{"level", g.education.level}, {"major", g.education.major}};
    } else if (auto it = g.values.find(a); it != g.values.end()) {
      j[code] = it->second;
    }
  }
  return j;
}

inline Json to_json(const Individual& ind) {
  Json j;
  j["individual_id"] = ind.individual_id;
  j["clips"] = Json::array();
  for (const auto& c : ind.clips) j["clips"].push_back(to_json(c));
  if (ind.ground_truth) j["ground_truth"] = to_json(*ind.ground_truth);
  return j;
}

inline Json to_json(const Dataset& d) {
  Json j;
  j["dataset_name"] = d.dataset_name;
  j["individuals"] = Json::array();
  for (const auto& ind : d.individuals) j["individuals"].push_back(to_json(ind));
  return j;
}

inline ClipRecord clip_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context, ErrorCode::ManifestError);
  ClipRecord c;
  c.clip_id = r.string("clip_id");
  c.audio_path = r.string("audio_path");
  c.recorded_at = r.optional_string("recorded_at");
  if (const Json* s = r.optional("speaker_ordinal")) {
    if (!s->is_number_integer() || s->get<long long>() < 1) {
      throw Error(ErrorCode::ManifestError, context + ": speaker_ordinal must be an integer >= 1");
    }
    c.speaker_ordinal = s->get<int>();
  }
  r.finish();
  if (c.clip_id.empty()) throw Error(ErrorCode::ManifestError, context + ": empty clip_id");
  return c;
}

/// Closed-scope values are checked and stored in their canonical option spelling.
inline std::string canonical_option(AttributeKind a, const std::string& value,
                                    const std::string& context) {
  const AttributeScope scope = scope_of(a);
  if (scope.open()) {
    if (text::trim(value).empty()) {
      throw Error(ErrorCode::ManifestError, context + ": empty value for " + std::string(code_of(a)));
    }
    return value;
  }
  auto idx = scope.index_of(value);
  if (!idx) {
    throw Error(ErrorCode::ScopeViolation, context + ": '" + value + "' is not an option of " +
                                               std::string(code_of(a)));
  }
  return scope.options[*idx];
}

inline GroundTruthProfile ground_truth_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context, ErrorCode::ManifestError);
  GroundTruthProfile g;
  for (AttributeKind a : kAllAttributes) {
    const std::string code(code_of(a));
    const std::string where = context + "." + code;
    if (a == AttributeKind::HEA) {
      ObjectReader h(r.at(code), where, ErrorCode::ManifestError);
      const std::string sev = h.string("severity");
      const std::string kind = h.string("kind");
      auto s = severity_from_string(sev);
      auto k = kind_from_string(kind);
      if (!s) throw Error(ErrorCode::ScopeViolation, where + ": invalid severity '" + sev + "'");
      if (!k) throw Error(ErrorCode::ScopeViolation, where + ": invalid kind '" + kind + "'");
      g.health.severity = *s;
      g.health.kind = *k;
      g.health.disease = h.optional_string("disease");
      h.finish();
      if (!g.health.well_formed()) {
        throw Error(ErrorCode::MalformedTriple,
                    where + ": kind must be None exactly when severity is Healthy, and a disease "
                            "requires a Physical or Mental kind");
      }
    } else if (a == AttributeKind::EDU) {
      ObjectReader e(r.at(code), where, ErrorCode::ManifestError);
      g.education.level = canonical_option(AttributeKind::EDU, e.string("level"), where);
      g.education.major = e.optional_string("major").value_or("");
      e.finish();
    } else {
      const Json& v = r.at(code);
      if (!v.is_string()) throw Error(ErrorCode::ManifestError, where + ": must be a string");
      g.values[a] = canonical_option(a, v.get<std::string>(), where);
    }
  }
  r.finish();
  return g;
}

inline Individual individual_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context, ErrorCode::ManifestError);
  Individual ind;
  ind.individual_id = r.string("individual_id");
  if (ind.individual_id.empty()) {
    throw Error(ErrorCode::ManifestError, context + ": empty individual_id");
  }
  const std::string where = context + "[" + ind.individual_id + "]";
  const Json& clips = r.array("clips");
  if (clips.empty()) throw Error(ErrorCode::ManifestError, where + ": clips must be non-empty");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    ClipRecord c = clip_from_json(clips[i], where + ".clips[" + std::to_string(i) + "]");
    if (!ids.insert(c.clip_id).second) {
      throw Error(ErrorCode::ManifestError, where + ": duplicate clip_id '" + c.clip_id + "'");
    }
    ind.clips.push_back(std::move(c));
  }
  if (const Json* gt = r.optional("ground_truth")) {
    ind.ground_truth = ground_truth_from_json(*gt, where + ".ground_truth");
  }
  r.finish();
  return ind;
}

inline Dataset dataset_from_json(const Json& j) {
  ObjectReader r(j, "manifest", ErrorCode::ManifestError);
  Dataset d;
  d.dataset_name = r.string("dataset_name");
  const Json& inds = r.array("individuals");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < inds.size(); ++i) {
    Individual ind = individual_from_json(inds[i], "individuals[" + std::to_string(i) + "]");
    if (!ids.insert(ind.individual_id).second) {
      throw Error(ErrorCode::ManifestError, "duplicate individual_id '" + ind.individual_id + "'");
    }
    d.individuals.push_back(std::move(ind));
  }
  r.finish();
  return d;
}

// ---------------------------------------------------------------- traces

inline Json to_json(const ForensicsExchange& f) {
  Json j;
  j["questions"] = f.questions;
  j["answers"] = Json::array();
  for (ForensicAnswer a : f.answers) j["answers"].push_back(std::string(to_string(a)));
  return j;
}

inline ForensicsExchange forensics_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context);
  ForensicsExchange f;
  f.questions = string_list(r.array("questions"), context);
  for (const auto& s : string_list(r.array("answers"), context)) f.answers.push_back(answer_from(s));
  r.finish();
  if (f.questions.size() != f.answers.size()) {
    throw Error(ErrorCode::SchemaMismatch, context + ": questions/answers length mismatch");
  }
  return f;
}

inline Json to_json(const InferenceTrace& t) {
  Json j;
  j["individual_id"] = t.individual_id;
  j["attribute"] = std::string(code_of(t.attribute));
  j["clip_id"] = t.clip_id;
  j["status"] = std::string(to_string(t.status));
  if (!t.error.empty()) j["error"] = t.error;
  j["guidance"] = t.guidance;
  j["inference_prompt"] = t.inference_prompt;
  j["initial_value"] = t.initial_value;
  j["forensics_initial"] = to_json(t.forensics_initial);
  j["verdict_initial"] = std::string(to_string(t.verdict_initial));
  if (t.second_inference_prompt) j["second_inference_prompt"] = *t.second_inference_prompt;
  if (t.second_value) j["second_value"] = *t.second_value;
  if (t.forensics_second) j["forensics_second"] = to_json(*t.forensics_second);
  if (t.dual_choice) j["dual_choice"] = std::string(to_string(*t.dual_choice));
  j["candidate_value"] = t.candidate_value;
  j["warnings"] = t.warnings;
  return j;
}

inline InferenceTrace trace_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context);
  InferenceTrace t;
  t.individual_id = r.string("individual_id");
  t.attribute = parse_attribute_code(r.string("attribute"));
  t.clip_id = r.string("clip_id");
  t.status = status_from(r.string("status"));
  t.error = r.optional_string("error").value_or("");
  t.guidance = r.string("guidance");
  t.inference_prompt = r.string("inference_prompt");
  t.initial_value = r.string("initial_value");
  t.forensics_initial = forensics_from_json(r.at("forensics_initial"), context + ".forensics_initial");
  t.verdict_initial = verdict_from(r.string("verdict_initial"));
  t.second_inference_prompt = r.optional_string("second_inference_prompt");
  t.second_value = r.optional_string("second_value");
  if (const Json* f = r.optional("forensics_second")) {
    t.forensics_second = forensics_from_json(*f, context + ".forensics_second");
  }
  if (auto c = r.optional_string("dual_choice")) t.dual_choice = choice_from(*c);
  t.candidate_value = r.string("candidate_value");
  t.warnings = string_list(r.array("warnings"), context);
  r.finish();
  return t;
}

inline Json to_json(const ClipDerivedText& d) {
  Json j;
  j["clip_id"] = d.clip_id;
  j["event_description"] = d.event_description;
  j["transcription"] = d.transcription;
  return j;
}

inline ClipDerivedText derived_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context);
  ClipDerivedText d;
  d.clip_id = r.string("clip_id");
  d.event_description = r.string("event_description");
  d.transcription = r.string("transcription");
  r.finish();
  return d;
}

inline Json to_json(const AttributeResult& a) {
  Json j;
  j["attribute"] = std::string(code_of(a.attribute));
  j["final_value"] = a.final_value;
  j["status"] = std::string(to_string(a.status));
  if (!a.error.empty()) j["error"] = a.error;
  if (a.error_code) j["error_code"] = std::string(to_string(*a.error_code));
  j["warnings"] = a.warnings;
  j["traces"] = Json::array();
  for (const auto& t : a.traces) j["traces"].push_back(to_json(t));
  j["clip_values"] = a.clip_values;
  j["aggregation_prompt"] = a.aggregation_prompt;
  return j;
}

inline std::optional<ErrorCode> error_code_from(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::InvalidArgument); ++i) {
    auto c = static_cast<ErrorCode>(i);
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

inline AttributeResult attribute_result_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context);
  AttributeResult a;
  a.attribute = parse_attribute_code(r.string("attribute"));
  a.final_value = r.string("final_value");
  a.status = status_from(r.string("status"));
  a.error = r.optional_string("error").value_or("");
  if (auto c = r.optional_string("error_code")) a.error_code = error_code_from(*c);
  a.warnings = string_list(r.array("warnings"), context);
  const Json& traces = r.array("traces");
  for (std::size_t i = 0; i < traces.size(); ++i) {
    a.traces.push_back(trace_from_json(traces[i], context + ".traces[" + std::to_string(i) + "]"));
  }
  a.clip_values = string_list(r.array("clip_values"), context);
  a.aggregation_prompt = r.string("aggregation_prompt");
  r.finish();
  return a;
}

inline Json to_json(const PredictedProfile& p) {
  Json j;
  j["individual_id"] = p.individual_id;
  j["variant"] = std::string(to_string(p.variant));
  j["derived"] = Json::array();
  for (const auto& d : p.derived) j["derived"].push_back(to_json(d));
  j["attributes"] = Json::array();
  for (const auto& a : p.attributes) j["attributes"].push_back(to_json(a));
  return j;
}

inline PredictedProfile profile_from_json(const Json& j) {
  ObjectReader r(j, "profile");
  PredictedProfile p;
  p.individual_id = r.string("individual_id");
  p.variant = parse_variant(r.string("variant"));
  for (const auto& d : r.array("derived")) p.derived.push_back(derived_from_json(d, "derived"));
  const Json& attrs = r.array("attributes");
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    p.attributes.push_back(
        attribute_result_from_json(attrs[i], "attributes[" + std::to_string(i) + "]"));
  }
  r.finish();
  return p;
}

/// Canonical text form: two-space indentation, trailing newline.
inline std::string dump_document(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace gifts::json_io
