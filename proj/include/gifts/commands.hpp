#pragma once

// The four operator commands. Each returns a process exit status and writes its artifacts
// under the requested output directory.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gifts/backend_config.hpp"
#include "gifts/icu.hpp"
#include "gifts/jamming.hpp"
#include "gifts/json_io.hpp"
#include "gifts/manifest.hpp"
#include "gifts/metrics.hpp"
#include "gifts/pipeline.hpp"
#include "gifts/prompts.hpp"
#include "gifts/report.hpp"

namespace gifts::cli {

namespace fs = std::filesystem;
using json_io::Json;

enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitLoadFailure = 2,
  kExitPartialFailure = 3,
  kExitBackendExhausted = 4,
};

struct RunConfig {
  fs::path manifest;
  PipelineVariant variant = PipelineVariant::Gifts;
  fs::path backends;
  fs::path templates;
  fs::path out;
  std::uint64_t seed = 0;
  int repeat = 1;
  int parallelism = 1;
  std::optional<fs::path> icu_context;
};

inline fs::path predictions_file(const fs::path& out, int run) {
  return out / ("predictions_run" + std::to_string(run) + ".jsonl");
}
inline fs::path traces_dir(const fs::path& out, int run) {
  return out / ("traces_run" + std::to_string(run));
}
inline fs::path calls_file(const fs::path& out, int run) {
  return out / ("calls_run" + std::to_string(run) + ".jsonl");
}

inline Json prediction_record(const PredictedProfile& p, const AttributeResult& a) {
  Json j;
  j["individual_id"] = p.individual_id;
  j["attribute"] = std::string(code_of(a.attribute));
  j["final_value"] = a.final_value;
  j["variant"] = std::string(to_string(p.variant));
  j["status"] = std::string(to_string(a.status));
  return j;
}

inline Json call_record(const backend::CallLogEntry& e) {
  Json j;
  j["role"] = std::string(to_string(e.role));
  j["prompt_digest"] = e.prompt_digest;
  if (e.audio_digest) j["audio_digest"] = *e.audio_digest;
  j["response_digest"] = e.response_digest;
  j["latency_ms"] = e.latency_ms;
  j["attempt"] = e.attempt;
  j["ok"] = e.ok;
  if (!e.error.empty()) j["error"] = e.error;
  j["warnings"] = e.warnings;
  return j;
}

inline bool exhausted(ErrorCode c) {
  return c == ErrorCode::Timeout || c == ErrorCode::RateLimited || c == ErrorCode::TransportError;
}

/// Everything cmd_profile needs, loaded and validated before any model call.
struct LoadedRun {
  LoadedManifest manifest;
  prompt::TemplateCatalog catalog;
  backend::BackendConfig backends;
  std::optional<icu::IcuContext> icu;
};

inline LoadedRun load_run(const RunConfig& cfg) {
  require(cfg.repeat >= 1, "repeat must be at least 1");
  require(cfg.parallelism >= 1, "parallelism must be at least 1");
  LoadedRun run{load_manifest(cfg.manifest), prompt::TemplateCatalog::load(cfg.templates),
                backend::load_backend_config(cfg.backends), std::nullopt};
  for (auto role : pipeline::required_roles(cfg.variant)) {
    if (!run.backends.roles.count(role)) {
      throw Error(ErrorCode::UnboundRole, "variant '" + std::string(to_string(cfg.variant)) +
                                              "' needs role '" + std::string(to_string(role)) +
                                              "' in " + cfg.backends.string());
    }
  }
  backend::build_client(run.backends, run.catalog);  // surfaces bad scripts and URLs now
  if (cfg.icu_context) run.icu = icu::load_icu_context(*cfg.icu_context);
  return run;
}

inline int cmd_profile(const RunConfig& cfg, std::ostream& log = std::cerr) {
  std::optional<LoadedRun> loaded;
  try {
    loaded.emplace(load_run(cfg));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitLoadFailure;
  }
  for (const auto& w : loaded->manifest.warnings) log << "warning: " << w << "\n";
  const prompt::PromptRenderer renderer(loaded->catalog);
  const auto& individuals = loaded->manifest.dataset.individuals;

  bool partial = false;
  bool backend_exhausted = false;
  for (int run = 1; run <= cfg.repeat; ++run) {
    auto client = backend::build_client(loaded->backends, loaded->catalog);
    client->seed_jitter(derive_seed(cfg.seed, "run" + std::to_string(run)));
    pipeline::PipelineOptions opts;
    opts.parallelism = static_cast<std::size_t>(cfg.parallelism);
    opts.icu = loaded->icu ? &*loaded->icu : nullptr;
    pipeline::Pipeline pipe(*client, renderer, opts);
    const auto profiles = pipe.profile_dataset(individuals, cfg.variant);

    std::string predictions;
    for (const auto& p : profiles) {
      for (const auto& a : p.attributes) {
        predictions += prediction_record(p, a).dump() + "\n";
        if (a.status != TaskStatus::Ok) {
          partial = true;
          if (a.error_code && exhausted(*a.error_code)) backend_exhausted = true;
          log << "warning: run " << run << " " << p.individual_id << " " << code_of(a.attribute)
              << " failed: " << a.error << "\n";
        }
      }
      text::write_file(traces_dir(cfg.out, run) / (p.individual_id + ".json"),
                       json_io::dump_document(json_io::to_json(p)));
    }
    text::write_file(predictions_file(cfg.out, run), predictions);
    std::string calls;
    for (const auto& e : client->call_log().snapshot()) calls += call_record(e).dump() + "\n";
    text::write_file(calls_file(cfg.out, run), calls);
  }
  if (backend_exhausted) return kExitBackendExhausted;
  return partial ? kExitPartialFailure : kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateConfig {
  std::vector<fs::path> predictions;
  fs::path manifest;
  std::optional<fs::path> judge;
  fs::path templates;
  fs::path out;
  std::string defense = "none";
};

/// Predictions file back into profiles, grouped by individual in first-seen order.
inline std::vector<PredictedProfile> read_predictions(const fs::path& path) {
  std::vector<PredictedProfile> out;
  std::map<std::string, std::size_t> index;
  std::istringstream in(text::read_file(path));
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (text::trim(line).empty()) continue;
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::SchemaMismatch, ctx + ": " + e.what());
    }
    json_io::ObjectReader r(j, ctx);
    const std::string id = r.string("individual_id");
    AttributeResult a;
    a.attribute = parse_attribute_code(r.string("attribute"));
    a.final_value = r.string("final_value");
    const PipelineVariant variant = parse_variant(r.string("variant"));
    a.status = json_io::status_from(r.string("status"));
    r.finish();
    auto [it, fresh] = index.emplace(id, out.size());
    if (fresh) {
      out.emplace_back();
      out.back().individual_id = id;
      out.back().variant = variant;
    }
    out[it->second].attributes.push_back(std::move(a));
  }
  return out;
}

inline report::MetricReport evaluate_run(const std::vector<PredictedProfile>& profiles, const Dataset& dataset,
                                         metrics::SimilarityJudge& judge, const std::string& defense,
                                         const std::string& run_label, std::ostream& log) {
  std::map<std::string, const Individual*> by_id;
  for (const auto& ind : dataset.individuals) by_id[ind.individual_id] = &ind;
  report::MetricReport r;
  r.defense = defense;
  r.run = run_label;
  r.variant = profiles.empty() ? "unknown" : std::string(to_string(profiles.front().variant));
  for (const auto& p : profiles) {
    auto it = by_id.find(p.individual_id);
    if (it == by_id.end()) {
      r.warnings.push_back("UnknownIndividual: '" + p.individual_id + "' is not in the manifest; skipped");
    } else if (!it->second->ground_truth) {
      r.warnings.push_back("MissingGroundTruth: '" + p.individual_id + "' has no ground truth; skipped");
    } else {
      r.cells.push_back(metrics::score_profile(p, *it->second->ground_truth, judge));
      continue;
    }
    log << "warning: " << r.warnings.back() << "\n";
  }
  report::summarize(r);
  return r;
}

inline int cmd_evaluate(const EvaluateConfig& cfg, std::ostream& log = std::cerr) {
  std::optional<LoadedManifest> manifest;
  std::optional<prompt::TemplateCatalog> catalog;
  std::vector<std::vector<PredictedProfile>> runs;
  std::unique_ptr<backend::ModelClient> client;
  try {
    if (cfg.predictions.empty()) throw Error(ErrorCode::InvalidArgument, "no predictions files given");
    manifest.emplace(load_manifest(cfg.manifest, false));
    catalog.emplace(prompt::TemplateCatalog::load(cfg.templates));
    for (const auto& p : cfg.predictions) runs.push_back(read_predictions(p));
    if (cfg.judge) {
      auto config = backend::load_backend_config(*cfg.judge);
      if (!config.roles.count(backend::ModelRole::Judge)) {
        throw Error(ErrorCode::UnboundRole, cfg.judge->string() + " binds no 'judge' role");
      }
      client = backend::build_client(config, *catalog);
    } else {
      client = std::make_unique<backend::ModelClient>();
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitLoadFailure;
  }
  const prompt::PromptRenderer renderer(*catalog);
  metrics::ModelJudge judge(*client, renderer);

  std::vector<report::MetricReport> reports;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const std::string label = std::to_string(k + 1);
    reports.push_back(evaluate_run(runs[k], manifest->dataset, judge, cfg.defense, label, log));
    text::write_file(cfg.out / ("report_run" + label + ".jsonl"), report::to_jsonl(reports.back()));
  }
  std::vector<report::MetricReport> table_rows = reports;
  if (reports.size() > 1) {
    const auto summary = report::combine_runs(reports);
    text::write_file(cfg.out / "report_summary.jsonl", report::to_jsonl(summary));
    table_rows.push_back(summary);
  }
  const std::string table = report::render_table(table_rows);
  text::write_file(cfg.out / "report.txt", table);
  std::cout << table;
  return kExitOk;
}

// ---------------------------------------------------------------- defend

struct IcuDefendConfig {
  fs::path manifest;
  fs::path out;
  std::size_t calibration = 10;
  std::uint64_t seed = 0;
};

/// Picks a seeded calibration subset among individuals with ground truth, writes the
/// context file and a manifest of the remaining individuals.
inline int cmd_defend_icu(const IcuDefendConfig& cfg, std::ostream& log = std::cerr) {
  try {
    const auto m = load_manifest(cfg.manifest, false);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < m.dataset.individuals.size(); ++i) {
      if (m.dataset.individuals[i].ground_truth) eligible.push_back(i);
    }
    if (eligible.size() < cfg.calibration) {
      throw Error(ErrorCode::TooFewIndividuals, "asked for " + std::to_string(cfg.calibration) +
                                                    " calibration individuals, only " +
                                                    std::to_string(eligible.size()) + " have ground truth");
    }
    SeededRng rng(derive_seed(cfg.seed, "calibration"));
    rng.shuffle(eligible);
    eligible.resize(cfg.calibration);
    std::sort(eligible.begin(), eligible.end());
    std::vector<Individual> calibration;
    std::set<std::size_t> chosen(eligible.begin(), eligible.end());
    Dataset rest{m.dataset.dataset_name, {}};
    for (std::size_t i = 0; i < m.dataset.individuals.size(); ++i) {
      (chosen.count(i) ? calibration : rest.individuals).push_back(m.dataset.individuals[i]);
    }
    const auto ctx = icu::build_icu_context(calibration, cfg.seed);
    for (const auto& w : ctx.warnings) log << "warning: " << w << "\n";
    text::write_file(cfg.out / "icu_context.json", json_io::dump_document(icu::to_json(ctx)));
    save_manifest(cfg.out / "manifest_rest.json", rest);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::TooFewIndividuals ? kExitUsage : kExitLoadFailure;
  }
  return kExitOk;
}

struct JamDefendConfig {
  fs::path manifest;
  fs::path out;
  jam::JamParams params;
};

/// Protects every clip and writes a manifest whose audio paths point at the protected copies.
/// Each clip's noise seed is derived from the base seed and the clip's identity.
inline int cmd_defend_jam(const JamDefendConfig& cfg, std::ostream& log = std::cerr) {
  try {
    cfg.params.validate();
    auto m = load_manifest(cfg.manifest);
    for (auto& ind : m.dataset.individuals) {
      for (auto& clip : ind.clips) {
        jam::JamParams p = cfg.params;
        p.seed = derive_seed(cfg.params.seed, ind.individual_id + "/" + clip.clip_id);
        const fs::path target = fs::absolute(cfg.out / "audio" / ind.individual_id / (clip.clip_id + ".wav"));
        const auto r = jam::protect_clip(clip.audio_path, target, p);
        for (const auto& w : r.warnings) log << "warning: " << ind.individual_id << "/" << clip.clip_id << ": " << w << "\n";
        clip.audio_path = target.lexically_normal().string();
      }
    }
    save_manifest(cfg.out / "manifest.json", m.dataset);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitLoadFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- report

inline int cmd_report(const std::vector<fs::path>& files, const std::optional<fs::path>& out,
                      std::ostream& log = std::cerr) {
  if (files.empty()) {
    log << "error: no report files given\n";
    return kExitUsage;
  }
  std::vector<report::MetricReport> reports;
  bool bad = false;
  for (const auto& f : files) {
    try {
      reports.push_back(report::parse_report(text::read_file(f), f.string()));
    } catch (const Error& e) {
      log << "error: " << e.what() << "\n";
      bad = true;
    }
  }
  if (reports.empty()) return kExitLoadFailure;
  const std::string table = report::render_table(report::group_rows(reports));
  if (out) text::write_file(*out, table);
  std::cout << table;
  return bad ? kExitPartialFailure : kExitOk;
}

}  // namespace gifts::cli
