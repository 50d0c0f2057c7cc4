#include <iostream>

#include <CLI11.hpp>

#include "gifts/commands.hpp"

#ifndef GIFTS_TEMPLATE_DIR
#define GIFTS_TEMPLATE_DIR "templates"
#endif

int main(int argc, char** argv) {
  using namespace gifts;
  CLI::App app{"Audio private-attribute profiling audit harness"};
  app.require_subcommand(1);

  cli::RunConfig run;
  std::string variant = "gifts";
  std::string icu_path;
  run.templates = GIFTS_TEMPLATE_DIR;
  auto* profile = app.add_subcommand("profile", "Run a pipeline variant over a manifest");
  profile->add_option("--manifest", run.manifest, "Dataset manifest (JSON)")->required();
  profile->add_option("--variant", variant, "gifts | llm | alm | alm+llm")
      ->check(CLI::IsMember({"gifts", "llm", "alm", "alm+llm"}));
  profile->add_option("--backends", run.backends, "Backend config (JSON)")->required();
  profile->add_option("--templates", run.templates, "Prompt template directory");
  profile->add_option("--out", run.out, "Output directory")->required();
  profile->add_option("--seed", run.seed, "Seed for retry jitter");
  profile->add_option("--repeat", run.repeat, "Number of runs")->check(CLI::PositiveNumber);
  profile->add_option("--parallelism", run.parallelism, "Concurrent (individual, attribute) tasks")
      ->check(CLI::PositiveNumber);
  profile->add_option("--icu-context", icu_path, "Unlearning context file from 'defend icu'");

  cli::EvaluateConfig eval;
  std::string judge_path;
  eval.templates = GIFTS_TEMPLATE_DIR;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--predictions", eval.predictions, "Predictions file(s), one per run")->required();
  evaluate->add_option("--manifest", eval.manifest, "Manifest with ground truth")->required();
  evaluate->add_option("--judge", judge_path, "Backend config binding the judge role");
  evaluate->add_option("--templates", eval.templates, "Prompt template directory");
  evaluate->add_option("--out", eval.out, "Output directory")->required();
  evaluate->add_option("--defense", eval.defense, "Defense label for the report rows");

  auto* defend = app.add_subcommand("defend", "Build a defended dataset or unlearning context");
  defend->require_subcommand(1);
  cli::IcuDefendConfig icu_cfg;
  auto* icu = defend->add_subcommand("icu", "Derangement-based in-context unlearning context");
  icu->add_option("--manifest", icu_cfg.manifest, "Manifest with ground truth")->required();
  icu->add_option("--out", icu_cfg.out, "Output directory")->required();
  icu->add_option("--calibration", icu_cfg.calibration, "Calibration subset size");
  icu->add_option("--seed", icu_cfg.seed, "Seed");
  cli::JamDefendConfig jam_cfg;
  auto* jam = defend->add_subcommand("jam", "Phoneme-noise jamming of every clip");
  jam->add_option("--manifest", jam_cfg.manifest, "Manifest to protect")->required();
  jam->add_option("--out", jam_cfg.out, "Output directory")->required();
  jam->add_option("--snr", jam_cfg.params.snr_db, "Target SNR in dB");
  jam->add_option("--white-ratio", jam_cfg.params.white_ratio, "White-noise energy fraction in [0, 1]");
  jam->add_option("--segment-ms", jam_cfg.params.segment_ms, "Phoneme segment length (>= 20 ms)");
  jam->add_option("--seed", jam_cfg.params.seed, "Seed");

  std::vector<std::filesystem::path> report_files;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Comparison table from report files");
  report->add_option("files", report_files, "Report files (JSONL)")->required();
  report->add_option("--out", report_out, "Also write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (*profile) {
      run.variant = parse_variant(variant);
      if (!icu_path.empty()) run.icu_context = icu_path;
      return cli::cmd_profile(run);
    }
    if (*evaluate) {
      if (!judge_path.empty()) eval.judge = judge_path;
      return cli::cmd_evaluate(eval);
    }
    if (*icu) return cli::cmd_defend_icu(icu_cfg);
    if (*jam) return cli::cmd_defend_jam(jam_cfg);
    if (*report) {
      return cli::cmd_report(report_files, report_out.empty() ? std::nullopt
                                                              : std::optional<std::filesystem::path>(report_out));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitLoadFailure;
  }
  return cli::kExitUsage;
}
