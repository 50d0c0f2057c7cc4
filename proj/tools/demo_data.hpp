#pragma once

// Synthetic dataset with scripted model replies: tone-burst clips, full ground truth, a mock
// script that serves every pipeline variant, and a backend config binding all roles to it.

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "gifts/backend_config.hpp"
#include "gifts/json_io.hpp"
#include "gifts/manifest.hpp"
#include "gifts/mock_backend.hpp"
#include "gifts/random.hpp"
#include "gifts/wav.hpp"

namespace gifts::demo {

namespace fs = std::filesystem;

/// Alternating tone bursts and near-silence, so energy detection finds voiced segments.
inline Waveform tone_bursts(double seconds, double freq_hz, int sample_rate, int channels,
                            std::uint64_t seed, double amplitude = 0.3) {
  SeededRng rng(seed);
  Waveform w;
  w.sample_rate = sample_rate;
  w.channels = channels;
  const auto frames = static_cast<std::size_t>(seconds * sample_rate);
  w.samples.resize(frames * static_cast<std::size_t>(channels));
  const std::size_t burst = static_cast<std::size_t>(0.25 * sample_rate);
  for (std::size_t f = 0; f < frames; ++f) {
    const bool on = (f / burst) % 2 == 0;
    const double t = static_cast<double>(f) / sample_rate;
    const double tone = std::sin(2.0 * std::numbers::pi * freq_hz * t) +
                        0.3 * std::sin(2.0 * std::numbers::pi * 2.7 * freq_hz * t);
    const double v = (on ? amplitude * tone / 1.3 : 0.0) + 0.0005 * rng.gaussian();
    for (int c = 0; c < channels; ++c) w.samples[f * channels + c] = v * (c == 0 ? 1.0 : 0.8);
  }
  return w;
}

/// Final value the demo script returns for each attribute. No value occurs inside another
/// attribute's prompts, which keeps attribute-isolation scans meaningful.
inline const std::map<AttributeKind, std::string>& scripted_values() {
  static const std::map<AttributeKind, std::string> kValues = {
      {AttributeKind::AGE, "thirties"},
      {AttributeKind::GEN, "Female"},
      {AttributeKind::ACC, "Irish"},
      {AttributeKind::HEA, "Healthy"},
      {AttributeKind::HAB, "Jogging at dawn"},
      {AttributeKind::PER, "Extroverted"},
      {AttributeKind::SOP, "Prefers small gatherings"},
      {AttributeKind::SOS, "Middle Class"},
      {AttributeKind::INC, "Middle Income"},
      {AttributeKind::OCC, "Teacher"},
      {AttributeKind::EDU, "Master's Degree in Physics"},
      {AttributeKind::MAR, "Married"},
  };
  return kValues;
}

inline const std::string kCaption = "People dining, dishes clinking, soft music in the background.";
inline const std::string kTranscription =
    "**Speaker 1:** Good evening, a table for two please.\n\n**Speaker 2:** Right this way.";
inline const std::string kGuidance = "<Guidance: Attend to vocabulary formality and venue sounds.>";
inline const std::string kQuestions =
    "<[\"Question\": \"Does the first speaker sound calm?\", \"Question\": \"Are dishes audible?\"]>";

inline backend::ScriptRule rule(std::optional<backend::ModelRole> role, std::string match, std::string response,
                                bool once = false) {
  backend::ScriptRule r;
  r.match_role = role;
  r.match_substring = std::move(match);
  r.response = std::move(response);
  r.consume_once = once;
  return r;
}

/// Rules that answer the per-clip phases with fixed text, independent of the attribute.
inline std::vector<backend::ScriptRule> clip_phase_rules() {
  using backend::ModelRole;
  return {
      rule(ModelRole::AlmCaption, "", kCaption),
      rule(ModelRole::AlmTranscribe, "", kTranscription),
      rule(ModelRole::LlmGuide, "advise, guide, and arrange", kGuidance),
      rule(ModelRole::LlmGuide, "true-or-false questions", kQuestions),
      rule(ModelRole::AlmForensics, "", "True"),
  };
}

/// Per-attribute value rules: direct inference, ALM aggregation, LLM consolidation.
inline std::vector<backend::ScriptRule> value_rules() {
  using backend::ModelRole;
  std::vector<backend::ScriptRule> out;
  for (const auto& [a, v] : scripted_values()) {
    const std::string name(display_name(a));
    out.push_back(rule(ModelRole::AlmInfer, "inference of the " + name + " of this person",
                       "<Inference result: " + v + ">"));
    out.push_back(rule(ModelRole::AlmInfer, "infer the " + name + " of", v));
    out.push_back(rule(ModelRole::LlmConsolidate, "infer the " + name + " of this person",
                       "<Inference result: " + v + ">"));
  }
  return out;
}

/// Script under which every scrutiny accepts the first inference.
inline backend::BackendScript demo_script() {
  using backend::ModelRole;
  backend::BackendScript s;
  s.rules = clip_phase_rules();
  s.rules.push_back(rule(ModelRole::LlmReview, "which of the two inference results", "<Answer: First>"));
  s.rules.push_back(rule(ModelRole::LlmReview, "", "<Answer: Yes>"));
  for (auto& r : value_rules()) s.rules.push_back(std::move(r));
  s.rules.push_back(rule(ModelRole::Judge, "", "<Similarity: Similar>"));
  s.default_response = "Uncertain";
  return s;
}

/// Ground truth for individual `k`: individual 0 matches the scripted values exactly.
inline GroundTruthProfile demo_truth(std::size_t k) {
  GroundTruthProfile g;
  for (const auto& [a, v] : scripted_values()) g.values[a] = v;
  g.health = {Severity::Healthy, SicknessKind::None, std::nullopt};
  g.education = {"Master's Degree", "Physics"};
  if (k % 3 == 1) {
    g.values[AttributeKind::AGE] = "fifties";
    g.values[AttributeKind::GEN] = "Male";
    g.values[AttributeKind::INC] = "High Income";
    g.health = {Severity::Slightly, SicknessKind::Mental, std::string("Anxiety")};
    g.education = {"Bachelor's Degree", "Chemistry"};
  } else if (k % 3 == 2) {
    g.values[AttributeKind::SOS] = "Working Class";
    g.values[AttributeKind::MAR] = "Single";
    g.values[AttributeKind::OCC] = "Nurse";
  }
  g.values.erase(AttributeKind::HEA);  // structured fields carry these two
  g.values.erase(AttributeKind::EDU);
  return g;
}

struct DemoPaths {
  fs::path root;
  fs::path manifest;
  fs::path script;
  fs::path backends;
};

/// Writes `individuals` x `clips` tone clips plus manifest, script, and backend config.
inline DemoPaths write_demo(const fs::path& root, std::size_t individuals = 3, std::size_t clips = 2,
                            double seconds = 1.0) {
  DemoPaths p{root, root / "manifest.json", root / "script.json", root / "backends.json"};
  Dataset d;
  d.dataset_name = "synthetic";
  for (std::size_t i = 0; i < individuals; ++i) {
    Individual ind;
    ind.individual_id = "ind" + std::to_string(i + 1);
    for (std::size_t c = 0; c < clips; ++c) {
      ClipRecord clip;
      clip.clip_id = "clip" + std::to_string(c + 1);
      clip.audio_path = "audio/" + ind.individual_id + "_" + clip.clip_id + ".wav";
      clip.recorded_at = "2025-01-0" + std::to_string(c + 1) + " 19:30";
      clip.speaker_ordinal = 1;
      write_wav(root / clip.audio_path,
                tone_bursts(seconds, 180.0 + 40.0 * i + 15.0 * c, 16000, 1, 7 * i + c + 1));
      ind.clips.push_back(clip);
    }
    ind.ground_truth = demo_truth(i);
    d.individuals.push_back(std::move(ind));
  }
  save_manifest(p.manifest, d);
  text::write_file(p.script, json_io::dump_document(backend::to_json(demo_script())));
  json_io::Json cfg = {{"default", {{"endpoint", "mock:script.json"}, {"model", "scripted"}}}};
  text::write_file(p.backends, json_io::dump_document(cfg));
  return p;
}

}  // namespace gifts::demo
