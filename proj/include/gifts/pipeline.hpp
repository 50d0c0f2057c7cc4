#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gifts/attributes.hpp"
#include "gifts/backends.hpp"
#include "gifts/error.hpp"
#include "gifts/icu.hpp"
#include "gifts/parsers.hpp"
#include "gifts/prompts.hpp"
#include "gifts/text.hpp"
#include "gifts/types.hpp"

namespace gifts::pipeline {

using backend::ModelRole;

enum class PhaseState {
  Captioned,
  Guided,
  Inferred,
  ForensicsDone,
  Scrutinized,
  SecondInferred,
  DualScrutinized,
  CandidateFixed,
};

constexpr std::string_view to_string(PhaseState s) {
  switch (s) {
    case PhaseState::Captioned: return "Captioned";
    case PhaseState::Guided: return "Guided";
    case PhaseState::Inferred: return "Inferred";
    case PhaseState::ForensicsDone: return "ForensicsDone";
    case PhaseState::Scrutinized: return "Scrutinized";
    case PhaseState::SecondInferred: return "SecondInferred";
    case PhaseState::DualScrutinized: return "DualScrutinized";
    case PhaseState::CandidateFixed: return "CandidateFixed";
  }
  return "?";
}

/// Enforces the legal phase order of one (clip, attribute) run.
class PhaseTracker {
 public:
  PhaseState state() const { return state_; }
  const std::vector<PhaseState>& history() const { return history_; }

  static bool legal(PhaseState from, PhaseState to, std::optional<Verdict> verdict) {
    using P = PhaseState;
    switch (from) {
      case P::Captioned: return to == P::Guided;
      case P::Guided: return to == P::Inferred;
      case P::Inferred: return to == P::ForensicsDone;
      case P::ForensicsDone: return to == P::Scrutinized;
      case P::Scrutinized:
        if (to == P::CandidateFixed) return verdict == Verdict::Yes;
        if (to == P::SecondInferred) return verdict == Verdict::No;
        return false;
      case P::SecondInferred: return to == P::DualScrutinized;
      case P::DualScrutinized: return to == P::CandidateFixed;
      case P::CandidateFixed: return false;
    }
    return false;
  }

  /// `verdict` is required when entering Scrutinized.
  void advance(PhaseState next, std::optional<Verdict> verdict = std::nullopt) {
    if (next == PhaseState::Scrutinized && !verdict) {
      throw Error(ErrorCode::PreconditionViolation, "Scrutinized needs a verdict");
    }
    if (!legal(state_, next, verdict_)) {
      throw Error(ErrorCode::PreconditionViolation, "illegal phase transition " +
                                                        std::string(to_string(state_)) + " -> " +
                                                        std::string(to_string(next)));
    }
    state_ = next;
    if (verdict) verdict_ = verdict;
    history_.push_back(next);
  }

 private:
  PhaseState state_ = PhaseState::Captioned;
  std::optional<Verdict> verdict_;
  std::vector<PhaseState> history_{PhaseState::Captioned};
};

/// Roles each variant calls; a client missing any of them is rejected before the run starts.
inline std::vector<ModelRole> required_roles(PipelineVariant v) {
  switch (v) {
    case PipelineVariant::Gifts:
      return {ModelRole::AlmCaption, ModelRole::AlmTranscribe, ModelRole::AlmInfer,
              ModelRole::AlmForensics, ModelRole::LlmGuide, ModelRole::LlmReview,
              ModelRole::LlmConsolidate};
    case PipelineVariant::LlmOnly:
      return {ModelRole::AlmCaption, ModelRole::AlmTranscribe, ModelRole::LlmConsolidate};
    case PipelineVariant::AlmOnly:
      return {ModelRole::AlmInfer};
    case PipelineVariant::AlmPlusLlm:
      return {ModelRole::AlmCaption, ModelRole::AlmTranscribe, ModelRole::AlmInfer,
              ModelRole::LlmConsolidate};
  }
  return {};
}

constexpr bool uses_captioning(PipelineVariant v) { return v != PipelineVariant::AlmOnly; }

/// Runs fn(0..n-1) on at most `parallelism` threads; rethrows the first escaped exception.
inline void run_bounded(std::size_t n, std::size_t parallelism,
                        const std::function<void(std::size_t)>& fn) {
  if (parallelism <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < std::min(parallelism, n); ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct PipelineOptions {
  std::size_t parallelism = 1;
  std::size_t max_questions = 8;
  const icu::IcuContext* icu = nullptr;  // prepended to every attribute-specific call
};

/// A clip with its audio bytes loaded.
struct ClipInput {
  const ClipRecord* clip = nullptr;
  std::vector<std::uint8_t> audio;
};

/// "Code: detail", as carried in trace and result error fields.
inline std::string describe(const Error& e) { return e.what(); }

class Pipeline {
 public:
  Pipeline(backend::ModelClient& client, const prompt::PromptRenderer& renderer,
           PipelineOptions options = {})
      : client_(client), renderer_(renderer), options_(options) {}

  const PipelineOptions& options() const { return options_; }

  ClipDerivedText derive_clip_text(const ClipInput& in) {
    ClipDerivedText d;
    d.clip_id = in.clip->clip_id;
    d.event_description =
        text::trim(client_.query_audio(ModelRole::AlmCaption, renderer_.caption_prompt(), in.audio));
    d.transcription = text::trim(
        client_.query_audio(ModelRole::AlmTranscribe, renderer_.transcription_prompt(), in.audio));
    return d;
  }

  std::string generate_guidance(const ClipDerivedText& u_g, const ClipRecord& clip, AttributeKind attr,
                                std::vector<std::string>& warnings) {
    require(!u_g.event_description.empty() && !u_g.transcription.empty(),
            "guidance needs a complete clip description");
    const std::string raw = send_text(ModelRole::LlmGuide,
                                      renderer_.guidance_prompt(u_g, attr, clip.speaker_ordinal), attr);
    auto parsed = prompt::parse_guidance(raw);
    if (parsed.warning) warnings.push_back("guidance: " + *parsed.warning);
    return parsed.value;
  }

  /// Returns the inference and stores the unwrapped prompt in `prompt_out`.
  std::string infer_initial(const ClipInput& in, AttributeKind attr, const std::string& guidance,
                            std::string& prompt_out, std::vector<std::string>& warnings) {
    require(!text::trim(guidance).empty(), "inference needs guidance");
    prompt_out = renderer_.inference_prompt(attr, guidance, scope_of(attr), in.clip->recorded_at,
                                            in.clip->speaker_ordinal);
    const std::string v = text::trim(send_audio(ModelRole::AlmInfer, prompt_out, in.audio, attr));
    note_scope(attr, v, warnings);
    return v;
  }

  std::string infer_second(const ClipInput& in, AttributeKind attr, const std::string& base_prompt,
                           const std::string& rejected, std::string& prompt_out,
                           std::vector<std::string>& warnings) {
    prompt_out = renderer_.negated_inference_prompt(base_prompt, rejected);
    const std::string v = text::trim(send_audio(ModelRole::AlmInfer, prompt_out, in.audio, attr));
    note_scope(attr, v, warnings);
    return v;
  }

  ForensicsExchange run_forensics(const std::string& inferred, const ClipDerivedText& u_g,
                                  const ClipInput& in, AttributeKind attr,
                                  std::vector<std::string>& warnings) {
    require(!text::trim(inferred).empty(), "forensics needs a non-empty inference");
    const std::string raw = send_text(
        ModelRole::LlmGuide,
        renderer_.forensics_question_prompt(inferred, u_g, attr, in.clip->recorded_at,
                                            in.clip->speaker_ordinal),
        attr);
    ForensicsExchange ex;
    ex.questions = prompt::parse_questions(raw);
    if (ex.questions.size() > options_.max_questions) {
      warnings.push_back("forensics: kept the first " + std::to_string(options_.max_questions) +
                         " of " + std::to_string(ex.questions.size()) + " questions");
      ex.questions.resize(options_.max_questions);
    }
    for (const auto& q : ex.questions) {
      const std::string reply =
          send_audio(ModelRole::AlmForensics, renderer_.forensics_answer_prompt(q), in.audio, attr);
      auto parsed = prompt::parse_forensics_answer(reply);
      if (parsed.warning) warnings.push_back("forensics: " + *parsed.warning);
      ex.answers.push_back(parsed.value);
    }
    return ex;
  }

  Verdict scrutinize(const std::string& inferred, const ForensicsExchange& ex,
                     const ClipDerivedText& u_g, const ClipRecord& clip, AttributeKind attr) {
    require(ex.complete(), "scrutiny needs a complete forensics exchange");
    return prompt::parse_verdict(send_text(
        ModelRole::LlmReview,
        renderer_.review_prompt(inferred, ex, u_g, attr, clip.recorded_at, clip.speaker_ordinal),
        attr));
  }

  DualChoice dual_scrutinize(const std::string& first, const ForensicsExchange& first_ex,
                             const std::string& second, const ForensicsExchange& second_ex,
                             const ClipDerivedText& u_g, const ClipRecord& clip, AttributeKind attr) {
    require(first_ex.complete() && second_ex.complete(),
            "dual scrutiny needs both forensics exchanges");
    return prompt::parse_dual_choice(
        send_text(ModelRole::LlmReview,
                  renderer_.dual_review_prompt(first, first_ex, second, second_ex, u_g, attr,
                                               clip.recorded_at, clip.speaker_ordinal),
                  attr),
        first, second);
  }

  /// Full per-clip loop. Errors never escape: they end the trace with status failed and the
  /// failing phase named; `code_out` receives the error code.
  InferenceTrace run_clip_attribute(const std::string& individual_id, const ClipInput& in,
                                    const ClipDerivedText& u_g, AttributeKind attr,
                                    std::optional<ErrorCode>* code_out = nullptr) {
    InferenceTrace t;
    t.individual_id = individual_id;
    t.attribute = attr;
    t.clip_id = in.clip->clip_id;
    PhaseTracker phase;
    try {
      t.guidance = generate_guidance(u_g, *in.clip, attr, t.warnings);
      phase.advance(PhaseState::Guided);
      t.initial_value = infer_initial(in, attr, t.guidance, t.inference_prompt, t.warnings);
      phase.advance(PhaseState::Inferred);
      t.forensics_initial = run_forensics(t.initial_value, u_g, in, attr, t.warnings);
      phase.advance(PhaseState::ForensicsDone);
      t.verdict_initial = scrutinize(t.initial_value, t.forensics_initial, u_g, *in.clip, attr);
      phase.advance(PhaseState::Scrutinized, t.verdict_initial);
      if (t.verdict_initial == Verdict::Yes) {
        t.candidate_value = t.initial_value;
      } else {
        std::string second_prompt;
        const std::string second =
            infer_second(in, attr, t.inference_prompt, t.initial_value, second_prompt, t.warnings);
        t.second_inference_prompt = second_prompt;
        t.second_value = second;
        t.forensics_second = run_forensics(second, u_g, in, attr, t.warnings);
        phase.advance(PhaseState::SecondInferred);
        t.dual_choice = dual_scrutinize(t.initial_value, t.forensics_initial, second,
                                        *t.forensics_second, u_g, *in.clip, attr);
        phase.advance(PhaseState::DualScrutinized);
        t.candidate_value = *t.dual_choice == DualChoice::First ? t.initial_value : second;
      }
      phase.advance(PhaseState::CandidateFixed);
    } catch (const Error& e) {
      fail(t, phase, describe(e));
      if (code_out) *code_out = e.code();
    } catch (const std::exception& e) {
      fail(t, phase, e.what());
      if (code_out) *code_out = ErrorCode::PreconditionViolation;
    }
    return t;
  }

  /// Final value for one attribute from its K candidate traces. Returns the parsed value and
  /// sets `prompt_out` to the unwrapped consolidation prompt.
  std::string consolidate(AttributeKind attr, std::span<const InferenceTrace> traces,
                          std::span<const ClipDerivedText> derived,
                          std::span<const ClipRecord* const> clips, std::string& prompt_out,
                          std::vector<std::string>& warnings) {
    require(!traces.empty() && traces.size() == derived.size() && traces.size() == clips.size(),
            "consolidation needs one trace and one description per clip");
    std::vector<prompt::ClipEvidence> ev;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      require(traces[i].status == TaskStatus::Ok && !traces[i].candidate_value.empty(),
              "trace for clip '" + traces[i].clip_id + "' carries no candidate");
      require(traces[i].attribute == attr, "trace attribute does not match consolidation target");
      ev.push_back({clips[i], &derived[i], traces[i].candidate_value,
                    &traces[i].candidate_forensics()});
    }
    prompt_out = renderer_.consolidation_prompt(attr, ev);
    return final_value(ModelRole::LlmConsolidate, prompt_out, attr, warnings);
  }

  /// Profiles every individual; work fans out over clips, then over (individual, attribute).
  std::vector<PredictedProfile> profile_dataset(std::span<const Individual> individuals,
                                                PipelineVariant variant) {
    struct ClipSlot {
      std::size_t individual;
      ClipInput input;
      std::optional<ClipDerivedText> derived;
      std::string error;
      std::optional<ErrorCode> code;
    };
    std::vector<ClipSlot> slots;
    std::vector<std::size_t> first_slot;
    for (std::size_t i = 0; i < individuals.size(); ++i) {
      require(!individuals[i].clips.empty(), "individual '" + individuals[i].individual_id +
                                                 "' has no clips");
      first_slot.push_back(slots.size());
      for (const auto& c : individuals[i].clips) slots.push_back({i, {&c, {}}, std::nullopt, "", std::nullopt});
    }
    run_bounded(slots.size(), options_.parallelism, [&](std::size_t s) {
      auto& slot = slots[s];
      try {
        slot.input.audio = text::read_bytes(slot.input.clip->audio_path);
        if (uses_captioning(variant)) slot.derived = derive_clip_text(slot.input);
      } catch (const Error& e) {
        slot.error = "clip '" + slot.input.clip->clip_id + "': " + describe(e);
        slot.code = e.code();
      }
    });

    std::vector<PredictedProfile> out(individuals.size());
    for (std::size_t i = 0; i < individuals.size(); ++i) {
      out[i].individual_id = individuals[i].individual_id;
      out[i].variant = variant;
      out[i].attributes.resize(kAttributeCount);
      for (std::size_t k = 0; k < individuals[i].clips.size(); ++k) {
        if (slots[first_slot[i] + k].derived) out[i].derived.push_back(*slots[first_slot[i] + k].derived);
      }
    }
    run_bounded(individuals.size() * kAttributeCount, options_.parallelism, [&](std::size_t task) {
      const std::size_t i = task / kAttributeCount;
      const AttributeKind attr = kAllAttributes[task % kAttributeCount];
      std::span<ClipSlot> mine(slots.data() + first_slot[i], individuals[i].clips.size());
      std::vector<const ClipInput*> inputs;
      std::vector<const ClipDerivedText*> texts;
      const ClipSlot* broken = nullptr;
      for (auto& s : mine) {
        inputs.push_back(&s.input);
        texts.push_back(s.derived ? &*s.derived : nullptr);
        if (!broken && !s.error.empty()) broken = &s;
      }
      AttributeResult& r = out[i].attributes[task % kAttributeCount];
      r.attribute = attr;
      if (broken) {
        r.status = TaskStatus::Failed;
        r.error = broken->error;
        r.error_code = broken->code;
        if (variant == PipelineVariant::Gifts) {
          for (std::size_t k = 0; k < mine.size(); ++k) {
            InferenceTrace t;
            t.individual_id = individuals[i].individual_id;
            t.attribute = attr;
            t.clip_id = mine[k].input.clip->clip_id;
            t.status = TaskStatus::Failed;
            t.error = mine[k].error.empty() ? "not run: another clip failed to load" : mine[k].error;
            r.traces.push_back(std::move(t));
          }
        }
        return;
      }
      run_attribute(individuals[i].individual_id, attr, variant, inputs, texts, r);
    });
    return out;
  }

  PredictedProfile profile_individual(const Individual& individual, PipelineVariant variant) {
    return profile_dataset(std::span<const Individual>(&individual, 1), variant).front();
  }

 private:
  void run_attribute(const std::string& individual_id, AttributeKind attr, PipelineVariant variant,
                     const std::vector<const ClipInput*>& inputs,
                     const std::vector<const ClipDerivedText*>& texts, AttributeResult& r) {
    std::vector<const ClipRecord*> clips;
    for (const auto* in : inputs) clips.push_back(in->clip);
    try {
      switch (variant) {
        case PipelineVariant::Gifts: {
          std::vector<ClipDerivedText> derived;
          for (std::size_t k = 0; k < inputs.size(); ++k) {
            std::optional<ErrorCode> code;
            r.traces.push_back(run_clip_attribute(individual_id, *inputs[k], *texts[k], attr, &code));
            derived.push_back(*texts[k]);
            if (code && !r.error_code) {
              r.status = TaskStatus::Failed;
              r.error = "clip '" + inputs[k]->clip->clip_id + "': " + r.traces.back().error;
              r.error_code = code;
            }
          }
          if (r.status == TaskStatus::Failed) return;
          r.final_value = consolidate(attr, r.traces, derived, clips, r.aggregation_prompt, r.warnings);
          break;
        }
        case PipelineVariant::LlmOnly: {
          std::vector<prompt::ClipEvidence> ev;
          for (std::size_t k = 0; k < inputs.size(); ++k) ev.push_back({clips[k], texts[k], "", nullptr});
          r.aggregation_prompt = renderer_.llm_only_prompt(attr, ev);
          r.final_value = final_value(ModelRole::LlmConsolidate, r.aggregation_prompt, attr, r.warnings);
          break;
        }
        case PipelineVariant::AlmOnly:
        case PipelineVariant::AlmPlusLlm: {
          std::vector<prompt::ClipEvidence> ev;
          for (std::size_t k = 0; k < inputs.size(); ++k) {
            const std::string p = renderer_.direct_inference_prompt(
                attr, scope_of(attr), clips[k]->recorded_at, clips[k]->speaker_ordinal);
            r.clip_values.push_back(text::trim(send_audio(ModelRole::AlmInfer, p, inputs[k]->audio, attr)));
            note_scope(attr, r.clip_values.back(), r.warnings);
            ev.push_back({clips[k], texts[k], r.clip_values.back(), nullptr});
          }
          if (variant == PipelineVariant::AlmOnly) {
            r.aggregation_prompt = renderer_.alm_aggregate_prompt(attr, ev);
            r.final_value = final_value(ModelRole::AlmInfer, r.aggregation_prompt, attr, r.warnings);
          } else {
            r.aggregation_prompt = renderer_.consolidation_prompt(attr, ev);
            r.final_value = final_value(ModelRole::LlmConsolidate, r.aggregation_prompt, attr, r.warnings);
          }
          break;
        }
      }
    } catch (const Error& e) {
      r.status = TaskStatus::Failed;
      r.error = describe(e);
      r.error_code = e.code();
      r.final_value.clear();
    }
  }

  std::string final_value(ModelRole role, const std::string& prompt, AttributeKind attr,
                          std::vector<std::string>& warnings) {
    auto parsed = prompt::parse_final_value(send_text(role, prompt, attr));
    if (parsed.warning) warnings.push_back("final value: " + *parsed.warning);
    note_scope(attr, parsed.value, warnings);
    return parsed.value;
  }

  std::string wrap(ModelRole role, const std::string& prompt, AttributeKind attr) const {
    if (!options_.icu) return prompt;
    return icu::wrap_prompt_with_icu(*options_.icu, prompt, role, attr);
  }

  std::string send_text(ModelRole role, const std::string& prompt, AttributeKind attr) {
    return client_.query_text(role, wrap(role, prompt, attr));
  }

  std::string send_audio(ModelRole role, const std::string& prompt,
                         std::span<const std::uint8_t> audio, AttributeKind attr) {
    return client_.query_audio(role, wrap(role, prompt, attr), audio);
  }

  /// Off-scope values are kept as returned; only a warning is recorded.
  static void note_scope(AttributeKind attr, const std::string& value, std::vector<std::string>& warnings) {
    const AttributeScope scope = scope_of(attr);
    if (scope.open()) return;
    bool in_scope = scope.contains(value);
    if (!in_scope && attribute_category(attr) == Category::Hybrid) {
      for (const auto& o : scope.options) in_scope = in_scope || text::ifind(value, o) != std::string::npos;
    }
    if (!in_scope) {
      warnings.push_back(std::string(code_of(attr)) + ": value '" + value + "' is outside the option list");
    }
  }

  static void fail(InferenceTrace& t, const PhaseTracker& phase, const std::string& what) {
    t.status = TaskStatus::Failed;
    t.error = "after phase " + std::string(to_string(phase.state())) + ": " + what;
    t.candidate_value.clear();
  }

  backend::ModelClient& client_;
  const prompt::PromptRenderer& renderer_;
  PipelineOptions options_;
};

}  // namespace gifts::pipeline
