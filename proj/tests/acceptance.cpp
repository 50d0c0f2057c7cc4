// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero if any line fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include "demo_data.hpp"
#include "gifts/gifts.hpp"
#include "golden_cases.hpp"
#include "support.hpp"

namespace {

using namespace gifts;
using backend::ModelRole;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

int g_failed = 0;

void criterion(const std::string& name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(secs < budget_s, "runtime over budget");
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, budget_s);
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << timing << "]";
  if (!o.detail.empty()) std::cout << " " << o.detail;
  std::cout << "\n";
  for (const auto& f : o.failures) std::cout << "    " << f << "\n";
  if (!o.pass) ++g_failed;
}

std::unique_ptr<backend::ModelClient> client_for(backend::BackendScript script) {
  auto c = std::make_unique<backend::ModelClient>();
  auto mock = std::make_shared<backend::MockBackend>(std::move(script));
  for (ModelRole r : backend::kAllRoles) c->bind(r, backend::RoleConfig{}, mock, "sys");
  return c;
}

struct FixedJudge : metrics::SimilarityJudge {
  explicit FixedJudge(metrics::SimilarityLabel l) : label(l) {}
  metrics::SimilarityLabel judge(AttributeKind, const std::string&, const std::string&, const std::string&) override {
    return label;
  }
  metrics::SimilarityLabel label;
};

void metric_exactness(Outcome& o) {
  using metrics::SimilarityLabel;
  auto near = [&](double got, double want, const std::string& what) {
    o.check(std::abs(got - want) <= 1e-9, what + ": got " + std::to_string(got) + ", want " + std::to_string(want));
  };
  near(metrics::score_qualitative("Female", "Female", AttributeKind::GEN), 1.0, "GEN identity");
  near(metrics::score_qualitative("married", "Married", AttributeKind::MAR), 1.0, "MAR case fold");
  near(metrics::score_qualitative("Single", "Divorced", AttributeKind::MAR), 0.0, "MAR mismatch");
  near(metrics::score_quantitative("thirties", "fifties", AttributeKind::AGE).value, 1.0 - 2.0 / 6.0, "AGE 30s/50s");
  near(metrics::score_quantitative("Low Income", "High Income", AttributeKind::INC).value, 0.0, "INC extremes");
  const std::pair<SimilarityLabel, double> label_map[] = {{SimilarityLabel::HighlySimilar, 1.0},
                                                          {SimilarityLabel::Similar, 0.75},
                                                          {SimilarityLabel::ModeratelySimilar, 0.5},
                                                          {SimilarityLabel::SlightlySimilar, 0.25},
                                                          {SimilarityLabel::CompletelyDifferent, 0.0}};
  for (const auto& [label, want] : label_map) {
    FixedJudge j(label);
    near(metrics::score_fuzzy("a", "b", AttributeKind::OCC, j), want, "fuzzy " + std::string(to_string(label)));
  }
  bool unparseable = false;
  try {
    metrics::parse_similarity_label("kinda similar");
  } catch (const Error& e) {
    unparseable = e.code() == ErrorCode::UnparseableJudgeLabel;
  }
  o.check(unparseable, "'kinda similar' must be UnparseableJudgeLabel");
  const HealthTriple parkinson{Severity::Severely, SicknessKind::Physical, std::string("Parkinson")};
  near(metrics::score_health(parkinson, parkinson), 1.0, "HEA identity");
  near(metrics::score_health({Severity::Severely, SicknessKind::Physical, std::string("Alzheimer")}, parkinson), 0.75,
       "HEA disease differs");
  near(metrics::score_health({Severity::Healthy, SicknessKind::None, std::nullopt},
                             {Severity::Slightly, SicknessKind::Mental, std::string("Anxiety")}),
       0.0, "HEA healthy vs sick");
  FixedJudge similar(SimilarityLabel::Similar);
  near(metrics::score_education({"Bachelor's Degree", "CS"}, {"Master's Degree", "SE"}, similar), 0.785, "EDU 0.785");
  FixedJudge different(SimilarityLabel::CompletelyDifferent);
  near(metrics::score_education({"Lower than High School", ""}, {"Doctorate's Degree", ""}, different), 0.0,
       "EDU extremes");

  // Oracle: hand-entered numerators over 6.
  const int kNumerators[7][7] = {
      {6, 5, 4, 3, 2, 1, 0}, {5, 6, 5, 4, 3, 2, 1}, {4, 5, 6, 5, 4, 3, 2}, {3, 4, 5, 6, 5, 4, 3},
      {2, 3, 4, 5, 6, 5, 4}, {1, 2, 3, 4, 5, 6, 5}, {0, 1, 2, 3, 4, 5, 6},
  };
  const auto& opts = scope_of(AttributeKind::AGE).options;
  int matched = 0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const double got = metrics::score_quantitative(opts[i], opts[j], AttributeKind::AGE).value;
      const bool ok = std::abs(got - kNumerators[i][j] / 6.0) <= 1e-9;
      matched += ok;
      o.check(ok, "AGE " + opts[i] + "/" + opts[j]);
    }
  }
  o.detail = "AGE oracle " + std::to_string(matched) + "/49 pairs";
}

inline constexpr const char* kReviewAnchor = "agent's inference is reasonable";
inline constexpr const char* kDualAnchor = "which of the two inference results";
inline constexpr const char* kRejectAnchor = "should not express similar meanings";

void state_machine(Outcome& o, const Dataset& dataset, const prompt::PromptRenderer& renderer) {
  constexpr int kScripts = 1000;
  const std::size_t tasks = dataset.individuals.front().clips.size() * kAttributeCount;
  SeededRng rng(2024);
  std::size_t checked = 0;
  std::size_t rejected = 0;
  std::size_t violations = 0;
  auto violate = [&](bool ok, const std::string& what) {
    if (!ok) ++violations;
    o.check(ok, what);
  };
  for (int s = 0; s < kScripts; ++s) {
    std::vector<bool> yes(tasks);
    std::vector<bool> first;
    backend::BackendScript script;
    script.rules.push_back(demo::rule(ModelRole::AlmInfer, kRejectAnchor, "<Inference result: Alternative value>"));
    for (std::size_t k = 0; k < tasks; ++k) {
      yes[k] = rng.below(2) == 0;
      if (!yes[k]) first.push_back(rng.below(2) == 0);
    }
    for (bool f : first) {
      script.rules.push_back(demo::rule(ModelRole::LlmReview, kDualAnchor, f ? "<Answer: First>" : "<Answer: Second>", true));
    }
    for (std::size_t k = 0; k < tasks; ++k) {
      script.rules.push_back(demo::rule(ModelRole::LlmReview, kReviewAnchor, yes[k] ? "<Answer: Yes>" : "<Answer: No>", true));
    }
    for (auto& r : demo::demo_script().rules) {
      if (r.match_role != ModelRole::LlmReview) script.rules.push_back(std::move(r));
    }
    script.default_response = "Uncertain";

    auto client = client_for(script);
    pipeline::Pipeline pipe(*client, renderer, pipeline::PipelineOptions{1, 8, nullptr});
    const auto profile = pipe.profile_individual(dataset.individuals.front(), PipelineVariant::Gifts);

    std::map<std::string, int> infer_calls;
    for (const auto& e : client->call_log().snapshot()) {
      if (e.role == ModelRole::AlmInfer) ++infer_calls[e.prompt_digest];
    }
    auto calls_for = [&](const std::string& prompt) {
      auto it = infer_calls.find(text::digest("sys\x1f" + prompt));
      return it == infer_calls.end() ? 0 : it->second;
    };
    std::size_t no_seen = 0, second_seen = 0;
    for (const auto& a : profile.attributes) {
      violate(a.status == TaskStatus::Ok, "script " + std::to_string(s) + " " + std::string(code_of(a.attribute)) +
                                               " failed: " + a.error);
      for (const auto& t : a.traces) {
        ++checked;
        const std::string where = "script " + std::to_string(s) + " " + std::string(code_of(a.attribute)) + " " + t.clip_id;
        int n = calls_for(t.inference_prompt);
        if (t.second_inference_prompt) n += calls_for(*t.second_inference_prompt);
        const bool rejected_first = t.verdict_initial == Verdict::No;
        violate(n == 1 || n == 2, where + ": AlmInfer count " + std::to_string(n));
        violate((n == 2) == rejected_first, where + ": two inferences must mean a rejected first verdict");
        violate(t.candidate_value == t.initial_value || (t.second_value && t.candidate_value == *t.second_value),
                where + ": candidate is neither inference");
        if (rejected_first) {
          ++no_seen;
          ++rejected;
          violate(t.dual_choice.has_value(), where + ": rejected trace without a dual choice");
          if (t.dual_choice == DualChoice::Second) {
            ++second_seen;
            violate(t.second_value && t.candidate_value == *t.second_value, where + ": Second must pick the re-inference");
          } else {
            violate(t.candidate_value == t.initial_value, where + ": First must keep the initial inference");
          }
        } else {
          violate(!t.second_inference_prompt && t.candidate_value == t.initial_value,
                  where + ": accepted trace must keep its only inference");
        }
      }
    }
    const auto queued_no = static_cast<std::size_t>(std::count(yes.begin(), yes.end(), false));
    const auto queued_second = static_cast<std::size_t>(std::count(first.begin(), first.end(), false));
    violate(no_seen == queued_no && second_seen == queued_second,
            "script " + std::to_string(s) + ": verdicts seen differ from the script");
  }
  o.check(checked == kScripts * tasks, "not every (clip, attribute) produced a trace");
  o.detail = std::to_string(kScripts) + " scripts, " + std::to_string(checked) + " traces (" +
             std::to_string(rejected) + " rejected), " + std::to_string(violations) + " violations";
}

int run_shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string concat_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) out += f.filename().string() + "\n" + text::read_file(f);
  return out;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

void end_to_end(Outcome& o, const demo::DemoPaths& demo, const fs::path& scratch) {
  const std::size_t net_before = backend::network_operation_count();
  std::string predictions[2], traces[2];
  for (int k = 0; k < 2; ++k) {
    cli::RunConfig cfg;
    cfg.manifest = demo.manifest;
    cfg.backends = demo.backends;
    cfg.templates = GIFTS_TEMPLATE_DIR;
    cfg.out = scratch / ("run" + std::to_string(k));
    std::ostringstream log;
    const int rc = cli::cmd_profile(cfg, log);
    o.check(rc == cli::kExitOk, "cmd_profile exit " + std::to_string(rc) + ": " + log.str());
    predictions[k] = text::read_file(cli::predictions_file(cfg.out, 1));
    traces[k] = concat_dir(cli::traces_dir(cfg.out, 1));
  }
  o.check(predictions[0] == predictions[1], "predictions differ between runs");
  o.check(traces[0] == traces[1], "traces differ between runs");
  o.check(line_count(predictions[0]) == 36, "expected 36 prediction lines, got " + std::to_string(line_count(predictions[0])));
  const std::size_t net = backend::network_operation_count() - net_before;
  o.check(net == 0, std::to_string(net) + " network operations");

  std::string isolation = "network namespace unavailable; operation counter only";
  // The namespace's root may not reach the build tree, so the binary and templates are staged
  // next to the demo data.
  const fs::path staged = scratch / "stage";
  fs::create_directories(staged);
  fs::copy_file(GIFTS_CLI_PATH, staged / "gifts");
  fs::copy(GIFTS_TEMPLATE_DIR, staged / "templates", fs::copy_options::recursive);
  if (run_shell("unshare -rn " + (staged / "gifts").string() + " --help > /dev/null 2>&1") == 0) {
    std::string cli_predictions[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = scratch / ("offline" + std::to_string(k));
      const std::string cmd = "unshare -rn " + (staged / "gifts").string() + " profile --manifest " +
                              demo.manifest.string() + " --backends " + demo.backends.string() + " --templates " +
                              (staged / "templates").string() + " --out " + out.string() + " > /dev/null 2>&1";
      o.check(run_shell(cmd) == 0, "offline CLI run failed");
      cli_predictions[k] = text::read_file(cli::predictions_file(out, 1));
    }
    o.check(cli_predictions[0] == cli_predictions[1], "offline CLI runs differ");
    o.check(cli_predictions[0] == predictions[0], "offline CLI run differs from in-process run");
    isolation = "CLI also run twice with networking disabled";
  }
  o.detail = std::to_string(line_count(predictions[0])) + " lines, " + std::to_string(net) +
             " network operations; " + isolation;
}

void variant_contracts(Outcome& o, const Dataset& dataset, const prompt::PromptRenderer& renderer) {
  {
    auto client = client_for(demo::demo_script());
    pipeline::Pipeline(*client, renderer).profile_dataset(dataset.individuals, PipelineVariant::LlmOnly);
    const auto& log = client->call_log();
    o.check(log.count(ModelRole::AlmInfer) == 0, "LlmOnly issued AlmInfer calls");
    o.check(log.count(ModelRole::AlmForensics) == 0, "LlmOnly issued AlmForensics calls");
    o.check(log.count(ModelRole::LlmConsolidate) == dataset.individuals.size() * kAttributeCount,
            "LlmOnly must consolidate once per (individual, attribute)");
  }
  {
    auto client = client_for(demo::demo_script());
    pipeline::Pipeline(*client, renderer).profile_dataset(dataset.individuals, PipelineVariant::AlmOnly);
    std::size_t llm = 0;
    for (const auto& e : client->call_log().snapshot()) llm += backend::is_llm_role(e.role);
    o.check(llm == 0, "AlmOnly issued " + std::to_string(llm) + " LLM-role calls");
    o.check(client->call_log().count(ModelRole::AlmInfer) > 0, "AlmOnly issued no AlmInfer calls");
  }
  o.detail = "LlmOnly: 0 AlmInfer/AlmForensics; AlmOnly: 0 LLM-role calls";
}

void goldens(Outcome& o, const prompt::PromptRenderer& renderer) {
  const auto cases = gifts::testing::render_golden_cases(renderer);
  std::size_t matched = 0;
  for (const auto& [name, t] : renderer.catalog().all()) {
    if (name.rfind("segment_", 0) == 0 || name == "negation") continue;
    o.check(cases.count(name) > 0, "no golden case for " + name);
  }
  for (const auto& [name, rendered] : cases) {
    const bool ok = rendered == gifts::testing::read_golden(name);
    matched += ok;
    o.check(ok, "golden mismatch: " + name);
  }
  o.detail = std::to_string(matched) + "/" + std::to_string(cases.size()) + " goldens byte-identical";
}

/// Calibration individuals whose values differ for every attribute.
std::vector<Individual> distinct_calibration(std::size_t n) {
  std::vector<HealthTriple> health = {{Severity::Healthy, SicknessKind::None, std::nullopt}};
  for (auto sev : {Severity::Slightly, Severity::Severely}) {
    for (const auto& d : options::kPhysicalDisease) health.push_back({sev, SicknessKind::Physical, d});
    for (std::size_t k = 0; k < 2; ++k) health.push_back({sev, SicknessKind::Mental, options::kMentalDisease[k]});
  }
  std::vector<Individual> out;
  for (std::size_t i = 0; i < n; ++i) {
    Individual ind;
    ind.individual_id = "cal" + std::to_string(i);
    GroundTruthProfile g;
    for (AttributeKind a : kAllAttributes) g.values[a] = std::string(code_of(a)) + " value " + std::to_string(i);
    g.values.erase(AttributeKind::HEA);
    g.values.erase(AttributeKind::EDU);
    g.health = health[i];
    g.education = {"Master's Degree", "Major " + std::to_string(i)};
    ind.ground_truth = g;
    out.push_back(std::move(ind));
  }
  return out;
}

void icu_derangements(Outcome& o) {
  constexpr int kSamples = 10000;
  std::vector<std::vector<Individual>> sets;
  for (std::size_t n = 2; n <= 10; ++n) sets.push_back(distinct_calibration(n));
  std::size_t fixed_points = 0, non_bijections = 0, lists = 0;
  for (int s = 0; s < kSamples; ++s) {
    const auto& cal = sets[static_cast<std::size_t>(s) % sets.size()];
    const auto ctx = icu::build_icu_context(cal, static_cast<std::uint64_t>(s));
    for (AttributeKind a : kAllAttributes) {
      const auto& pairs = ctx.assignments.at(a);
      ++lists;
      std::multiset<std::string> given, truth;
      bool ids_ok = pairs.size() == cal.size();
      for (std::size_t i = 0; i < cal.size() && ids_ok; ++i) {
        ids_ok = pairs[i].individual_id == cal[i].individual_id;
        const std::string own = cal[i].ground_truth->value_label(a);
        fixed_points += pairs[i].wrong_value == own;
        given.insert(pairs[i].wrong_value);
        truth.insert(own);
      }
      non_bijections += !ids_ok || given != truth;
    }
  }
  o.check(fixed_points == 0, std::to_string(fixed_points) + " fixed points");
  o.check(non_bijections == 0, std::to_string(non_bijections) + " assignments are not bijections");
  o.detail = std::to_string(kSamples) + " contexts, " + std::to_string(lists) + " assignment lists, sizes 2-10, " +
             std::to_string(fixed_points) + " fixed points";
}

void jamming(Outcome& o) {
  std::size_t checked = 0, rescaled = 0;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Waveform input;
    const int rate = t % 3 == 0 ? 8000 : (t % 3 == 1 ? 16000 : 22050);
    if (t % 4 == 3) {
      SeededRng rng(static_cast<std::uint64_t>(t));
      input.sample_rate = rate;
      input.channels = 1 + t % 2;
      input.samples.resize(static_cast<std::size_t>(rate) * input.channels);
      for (double& v : input.samples) v = 0.1 * rng.gaussian();
    } else {
      input = demo::tone_bursts(0.5 + 0.05 * t, 120.0 + 45.0 * t, rate, 1 + t % 2, static_cast<std::uint64_t>(t),
                                0.1 + 0.02 * t);
    }
    jam::JamParams params;
    params.snr_db = -3.0 + 1.5 * t;
    params.white_ratio = (t % 5) / 4.0;
    params.segment_ms = 20 + 10 * (t % 8);
    params.seed = 1000 + static_cast<std::uint64_t>(t);
    const auto r = jam::protect_waveform(input, params);
    const std::string where = "input " + std::to_string(t);
    o.check(r.output.samples.size() == input.samples.size(), where + ": sample count changed");
    o.check(r.output.sample_rate == input.sample_rate && r.output.channels == input.channels,
            where + ": rate or channels changed");
    o.check(r.output == jam::protect_waveform(input, params).output, where + ": not deterministic");
    if (r.peak_rescaled) {
      ++rescaled;
      continue;
    }
    ++checked;
    const double err = std::abs(r.achieved_snr_db - params.snr_db);
    worst = std::max(worst, err);
    o.check(err <= 0.5, where + ": achieved " + std::to_string(r.achieved_snr_db) + " dB");
  }
  o.check(checked >= 15, "too many inputs triggered peak rescaling");
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu calibrated inputs, %zu peak-rescaled, worst error %.3f dB", checked, rescaled,
                worst);
  o.detail = buf;
}

void attribute_isolation(Outcome& o, const Dataset& dataset, const prompt::PromptRenderer& renderer) {
  auto client = client_for(demo::demo_script());
  const auto profiles = pipeline::Pipeline(*client, renderer).profile_dataset(dataset.individuals, PipelineVariant::Gifts);
  std::size_t prompts = 0;
  for (const auto& p : profiles) {
    for (const auto& a : p.attributes) {
      o.check(!a.aggregation_prompt.empty(), p.individual_id + " " + std::string(code_of(a.attribute)) + ": no prompt");
      ++prompts;
      for (const auto& other : p.attributes) {
        if (other.attribute == a.attribute || other.final_value.empty()) continue;
        o.check(a.aggregation_prompt.find(other.final_value) == std::string::npos,
                p.individual_id + " " + std::string(code_of(a.attribute)) + " prompt contains " +
                    std::string(code_of(other.attribute)) + " value '" + other.final_value + "'");
      }
    }
  }
  o.detail = std::to_string(prompts) + " consolidation prompts scanned";
}

}  // namespace

int main() {
  gifts::testing::TempDir dir("acceptance");
  const auto demo = demo::write_demo(dir / "demo", 3, 2, 0.5);
  const auto small = demo::write_demo(dir / "small", 1, 2, 0.1);
  const Dataset dataset = load_manifest(demo.manifest).dataset;
  const Dataset small_dataset = load_manifest(small.manifest).dataset;
  const prompt::PromptRenderer renderer(gifts::testing::catalog());

  criterion("metric-exactness", 1, metric_exactness);
  criterion("state-machine", 30, [&](Outcome& o) { state_machine(o, small_dataset, renderer); });
  criterion("end-to-end-determinism", 10, [&](Outcome& o) { end_to_end(o, demo, dir / "e2e"); });
  criterion("variant-contracts", 10, [&](Outcome& o) { variant_contracts(o, dataset, renderer); });
  criterion("prompt-goldens", 5, [&](Outcome& o) { goldens(o, renderer); });
  criterion("icu-derangement", 5, icu_derangements);
  criterion("jamming-calibration", 10, jamming);
  criterion("attribute-isolation", 10, [&](Outcome& o) { attribute_isolation(o, dataset, renderer); });
  return g_failed == 0 ? 0 : 1;
}
