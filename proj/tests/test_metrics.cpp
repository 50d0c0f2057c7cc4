#include <gtest/gtest.h>

#include "demo_data.hpp"
#include "gifts/metrics.hpp"
#include "gifts/report.hpp"
#include "support.hpp"

namespace gifts::metrics {
namespace {

/// Returns one fixed label for every comparison and counts calls.
struct FixedJudge : SimilarityJudge {
  explicit FixedJudge(SimilarityLabel l, bool identity = true) : label(l), honor_identity(identity) {}
  SimilarityLabel judge(AttributeKind, const std::string&, const std::string& p, const std::string& t) override {
    ++calls;
    if (honor_identity && p == t) return SimilarityLabel::HighlySimilar;
    return label;
  }
  SimilarityLabel label;
  bool honor_identity;
  int calls = 0;
};

TEST(Labels, FixedMapping) {
  EXPECT_EQ(label_score(SimilarityLabel::HighlySimilar), 1.0);
  EXPECT_EQ(label_score(SimilarityLabel::Similar), 0.75);
  EXPECT_EQ(label_score(SimilarityLabel::ModeratelySimilar), 0.5);
  EXPECT_EQ(label_score(SimilarityLabel::SlightlySimilar), 0.25);
  EXPECT_EQ(label_score(SimilarityLabel::CompletelyDifferent), 0.0);
  EXPECT_EQ(std::size(kAllLabels), 5u);
}

TEST(Labels, Parsing) {
  EXPECT_EQ(parse_similarity_label("<Similarity: Moderately Similar>"), SimilarityLabel::ModeratelySimilar);
  EXPECT_EQ(parse_similarity_label("highly similar."), SimilarityLabel::HighlySimilar);
  EXPECT_EQ(parse_similarity_label("Completely-Different"), SimilarityLabel::CompletelyDifferent);
  try {
    parse_similarity_label("kinda similar");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnparseableJudgeLabel);
  }
}

TEST(Qualitative, Examples) {
  EXPECT_EQ(score_qualitative("Female", "Female", AttributeKind::GEN), 1.0);
  EXPECT_EQ(score_qualitative("married", "Married", AttributeKind::MAR), 1.0);
  EXPECT_EQ(score_qualitative("  Married. ", "Married", AttributeKind::MAR), 1.0);
  EXPECT_EQ(score_qualitative("Single", "Divorced", AttributeKind::MAR), 0.0);
  EXPECT_THROW(score_qualitative("a", "a", AttributeKind::AGE), Error);
}

TEST(Quantitative, Examples) {
  EXPECT_EQ(score_quantitative("fifties", "fifties", AttributeKind::AGE).value, 1.0);
  EXPECT_NEAR(score_quantitative("thirties", "fifties", AttributeKind::AGE).value, 1.0 - 2.0 / 6.0, 1e-12);
  EXPECT_EQ(score_quantitative("Low Income", "High Income", AttributeKind::INC).value, 0.0);
}

TEST(Quantitative, OffScopePredictionScoresZeroWithWarning) {
  const Score s = score_quantitative("about 35", "thirties", AttributeKind::AGE);
  EXPECT_EQ(s.value, 0.0);
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_THROW(score_quantitative("thirties", "about 35", AttributeKind::AGE), Error);
}

// Hand-entered numerators of the 7x7 AGE table, over a denominator of 6.
TEST(Quantitative, AgeBruteForceOracle) {
  const int kNumerators[7][7] = {
      {6, 5, 4, 3, 2, 1, 0}, {5, 6, 5, 4, 3, 2, 1}, {4, 5, 6, 5, 4, 3, 2}, {3, 4, 5, 6, 5, 4, 3},
      {2, 3, 4, 5, 6, 5, 4}, {1, 2, 3, 4, 5, 6, 5}, {0, 1, 2, 3, 4, 5, 6},
  };
  const auto& opts = scope_of(AttributeKind::AGE).options;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      EXPECT_NEAR(score_quantitative(opts[i], opts[j], AttributeKind::AGE).value, kNumerators[i][j] / 6.0, 1e-9)
          << opts[i] << " vs " << opts[j];
    }
  }
}

TEST(Quantitative, RangeSymmetryMonotonicity) {
  for (AttributeKind a : {AttributeKind::AGE, AttributeKind::SOS, AttributeKind::INC}) {
    const auto& opts = scope_of(a).options;
    const std::size_t L = opts.size();
    for (std::size_t i = 0; i < L; ++i) {
      double prev = 2.0;
      for (std::size_t j = i; j < L; ++j) {
        const double s = score_quantitative(opts[i], opts[j], a).value;
        EXPECT_EQ(s, score_quantitative(opts[j], opts[i], a).value);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
        EXPECT_LE(s, prev);
        const double k = s * static_cast<double>(L - 1);
        EXPECT_NEAR(k, std::round(k), 1e-9);
        prev = s;
      }
    }
  }
}

TEST(Fuzzy, JudgeLabelsAndAspect) {
  FixedJudge moderate(SimilarityLabel::ModeratelySimilar);
  EXPECT_EQ(score_fuzzy("Teacher", "Lecturer", AttributeKind::OCC, moderate), 0.5);
  EXPECT_EQ(score_fuzzy("Teacher", "Teacher", AttributeKind::OCC, moderate), 1.0);
  EXPECT_EQ(comparison_aspect(AttributeKind::ACC), "pronunciation and vocabulary usage");
  for (auto a : {AttributeKind::PER, AttributeKind::SOP, AttributeKind::OCC, AttributeKind::HAB}) {
    EXPECT_EQ(comparison_aspect(a), "meaning and range");
  }
  EXPECT_THROW(score_fuzzy("a", "b", AttributeKind::GEN, moderate), Error);
}

TEST(Fuzzy, ModelJudgeIdentityShortcutAndPrompt) {
  const prompt::PromptRenderer r(gifts::testing::catalog());
  backend::BackendScript s;
  s.rules.push_back(demo::rule(backend::ModelRole::Judge, "pronunciation and vocabulary usage",
                               "<Similarity: Slightly Similar>"));
  s.rules.push_back(demo::rule(backend::ModelRole::Judge, "", "kinda similar"));
  backend::ModelClient c;
  c.bind(backend::ModelRole::Judge, {}, std::make_shared<backend::MockBackend>(s), "sys");
  ModelJudge j(c, r);
  EXPECT_EQ(score_fuzzy("Irish", "Irish", AttributeKind::ACC, j), 1.0);
  EXPECT_EQ(c.call_log().size(), 0u);
  EXPECT_EQ(score_fuzzy("Irish", "Scottish", AttributeKind::ACC, j), 0.25);
  try {
    score_fuzzy("Runner", "Swimmer", AttributeKind::HAB, j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnparseableJudgeLabel);
  }
}

TEST(Health, Examples) {
  const HealthTriple parkinson{Severity::Severely, SicknessKind::Physical, std::string("Parkinson")};
  const HealthTriple alzheimer{Severity::Severely, SicknessKind::Physical, std::string("Alzheimer")};
  const HealthTriple healthy{Severity::Healthy, SicknessKind::None, std::nullopt};
  const HealthTriple anxiety{Severity::Slightly, SicknessKind::Mental, std::string("Anxiety")};
  EXPECT_EQ(score_health(parkinson, parkinson), 1.0);
  EXPECT_NEAR(score_health(alzheimer, parkinson), 0.75, 1e-9);
  EXPECT_EQ(score_health(healthy, anxiety), 0.0);
  EXPECT_EQ(score_health(healthy, healthy), 1.0);
  EXPECT_EQ(score_health(HealthTriple{Severity::Slightly, SicknessKind::Physical, std::string("Parkinson")}, parkinson),
            0.5);
  EXPECT_EQ(score_health(HealthTriple{Severity::Severely, SicknessKind::Mental, std::string("Depression")}, parkinson),
            0.5);
  EXPECT_EQ(score_health(HealthTriple{Severity::Severely, SicknessKind::Physical, std::nullopt},
                         HealthTriple{Severity::Severely, SicknessKind::Physical, std::nullopt}),
            1.0);
  try {
    score_health(HealthTriple{Severity::Healthy, SicknessKind::Mental, std::nullopt}, healthy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedTriple);
  }
}

TEST(Health, RangeOverAllWellFormedTriples) {
  std::vector<HealthTriple> all = {{Severity::Healthy, SicknessKind::None, std::nullopt}};
  for (auto sev : {Severity::Slightly, Severity::Severely}) {
    all.push_back({sev, SicknessKind::Physical, std::nullopt});
    all.push_back({sev, SicknessKind::Mental, std::nullopt});
    for (const auto& d : options::kPhysicalDisease) all.push_back({sev, SicknessKind::Physical, d});
    for (const auto& d : options::kMentalDisease) all.push_back({sev, SicknessKind::Mental, d});
  }
  const std::set<double> allowed = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (const auto& p : all) {
    EXPECT_EQ(score_health(p, p), 1.0);
    for (const auto& t : all) EXPECT_TRUE(allowed.count(score_health(p, t)));
  }
}

TEST(Education, Examples) {
  FixedJudge similar(SimilarityLabel::Similar);
  EXPECT_NEAR(score_education({"Bachelor's Degree", "CS"}, {"Master's Degree", "SE"}, similar), 0.785, 1e-9);
  EXPECT_NEAR(score_education({"Master's Degree", "Physics"}, {"Master's Degree", "Physics"}, similar), 1.0, 1e-9);
  FixedJudge different(SimilarityLabel::CompletelyDifferent, false);
  EXPECT_NEAR(score_education({"Lower than High School", ""}, {"Doctorate's Degree", ""}, different), 0.0, 1e-9);
  EXPECT_THROW(score_education({"PhD", ""}, {"Master's Degree", ""}, similar), Error);
}

TEST(ReadingPredictions, HealthPhrasings) {
  EXPECT_EQ(parse_health_value("Healthy"), (HealthTriple{Severity::Healthy, SicknessKind::None, std::nullopt}));
  EXPECT_EQ(parse_health_value("Severely Physically Sick (Parkinson)"),
            (HealthTriple{Severity::Severely, SicknessKind::Physical, std::string("Parkinson")}));
  EXPECT_EQ(parse_health_value("slightly mentally sick: anxiety"),
            (HealthTriple{Severity::Slightly, SicknessKind::Mental, std::string("Anxiety")}));
  EXPECT_EQ(parse_health_value("Slightly Mentally Sick"),
            (HealthTriple{Severity::Slightly, SicknessKind::Mental, std::nullopt}));
  EXPECT_FALSE(parse_health_value("hard to say"));
}

TEST(ReadingPredictions, EducationPhrasings) {
  EXPECT_EQ(parse_education_value("Master's Degree in Computer Science"),
            (EducationPair{"Master's Degree", "Computer Science"}));
  EXPECT_EQ(parse_education_value("High School"), (EducationPair{"High School", ""}));
  EXPECT_EQ(parse_education_value("Lower than High School"), (EducationPair{"Lower than High School", ""}));
  EXPECT_EQ(parse_education_value("bachelor’s degree of Chemistry."), (EducationPair{"Bachelor's Degree", "Chemistry"}));
  EXPECT_FALSE(parse_education_value("self-taught"));
}

PredictedProfile profile_from(const std::map<AttributeKind, std::string>& values) {
  PredictedProfile p;
  p.individual_id = "x";
  for (const auto& [a, v] : values) {
    AttributeResult r;
    r.attribute = a;
    r.final_value = v;
    p.attributes.push_back(r);
  }
  return p;
}

std::map<AttributeKind, std::string> truth_labels(const GroundTruthProfile& g) {
  std::map<AttributeKind, std::string> out;
  for (AttributeKind a : kAllAttributes) out[a] = g.value_label(a);
  return out;
}

TEST(ProfileScoring, AllCorrectScoresOneEverywhere) {
  const auto truth = demo::demo_truth(1);
  FixedJudge j(SimilarityLabel::CompletelyDifferent);
  const auto s = score_profile(profile_from(truth_labels(truth)), truth, j);
  ASSERT_EQ(s.attributes.size(), 12u);
  for (const auto& c : s.attributes) {
    ASSERT_TRUE(c.score) << code_of(c.attribute) << ": " << c.note;
    EXPECT_EQ(*c.score, 1.0) << code_of(c.attribute);
  }
}

TEST(ProfileScoring, FailedAttributeIsExcludedWithNote) {
  const auto truth = demo::demo_truth(0);
  auto pred = profile_from(truth_labels(truth));
  pred.attributes[3].status = TaskStatus::Failed;
  pred.attributes[3].error = "Timeout: slow";
  FixedJudge j(SimilarityLabel::Similar);
  const auto s = score_profile(pred, truth, j);
  EXPECT_FALSE(s.attributes[3].score);
  EXPECT_NE(s.attributes[3].note.find("Timeout"), std::string::npos);

  report::MetricReport r;
  r.cells = {s};
  report::summarize(r);
  EXPECT_EQ(r.avg_n, 11u);
  EXPECT_EQ(r.attributes.at(kAllAttributes[3]).excluded, 1u);
  EXPECT_NEAR(*r.avg, 100.0, 1e-9);
}

TEST(ProfileScoring, JudgeErrorBecomesNote) {
  struct Broken : SimilarityJudge {
    SimilarityLabel judge(AttributeKind, const std::string&, const std::string&, const std::string&) override {
      throw Error(ErrorCode::UnparseableJudgeLabel, "bad");
    }
  } broken;
  const auto truth = demo::demo_truth(0);
  auto values = truth_labels(truth);
  values[AttributeKind::OCC] = "Nurse";
  const auto s = score_profile(profile_from(values), truth, broken);
  for (const auto& c : s.attributes) {
    if (c.attribute == AttributeKind::OCC) {
      EXPECT_FALSE(c.score);
      EXPECT_EQ(c.note, "UnparseableJudgeLabel: bad");
    }
  }
}

TEST(ProfileScoring, UnreadableHybridPredictionScoresZero) {
  const auto truth = demo::demo_truth(0);
  auto values = truth_labels(truth);
  values[AttributeKind::HEA] = "no idea";
  FixedJudge j(SimilarityLabel::Similar);
  const auto s = score_profile(profile_from(values), truth, j);
  EXPECT_EQ(s.attributes[3].score, 0.0);
  EXPECT_EQ(s.attributes[3].warnings.size(), 1u);
}

TEST(Report, HalfScoresAverageFifty) {
  report::MetricReport r;
  metrics::ProfileScore p;
  for (AttributeKind a : kAllAttributes) p.attributes.push_back({a, 0.5, "", {}});
  r.cells = {p};
  report::summarize(r);
  EXPECT_NEAR(*r.avg, 50.0, 1e-12);
  EXPECT_EQ(r.avg_n, 12u);
}

TEST(Report, AvgIsMeanOfAttributeMeans) {
  report::MetricReport r;
  metrics::ProfileScore p1, p2;
  p1.attributes = {{AttributeKind::AGE, 1.0, "", {}}, {AttributeKind::GEN, 1.0, "", {}}};
  p2.attributes = {{AttributeKind::AGE, 0.0, "", {}}, {AttributeKind::GEN, std::nullopt, "x", {}}};
  r.cells = {p1, p2};
  report::summarize(r);
  EXPECT_NEAR(*r.attributes[AttributeKind::AGE].mean, 50.0, 1e-12);
  EXPECT_NEAR(*r.attributes[AttributeKind::GEN].mean, 100.0, 1e-12);
  EXPECT_NEAR(*r.avg, 75.0, 1e-12);
  EXPECT_FALSE(r.attributes[AttributeKind::MAR].mean);
}

report::MetricReport run_with_avg(double avg, const std::string& run) {
  report::MetricReport r;
  r.variant = "gifts";
  r.run = run;
  r.avg = avg;
  r.avg_n = 12;
  for (AttributeKind a : kAllAttributes) r.attributes[a] = {avg, 3, 0, std::nullopt};
  return r;
}

TEST(Report, CombineRunsPopulationVariance) {
  const auto c = report::combine_runs({run_with_avg(80, "1"), run_with_avg(85, "2"), run_with_avg(90, "3")});
  EXPECT_NEAR(*c.avg, 85.0, 1e-12);
  EXPECT_NEAR(*c.avg_variance, 50.0 / 3.0, 1e-12);
  EXPECT_EQ(c.runs, 3u);
  EXPECT_NEAR(*c.attributes.at(AttributeKind::AGE).variance, 50.0 / 3.0, 1e-12);
}

TEST(Report, JsonlRoundTrip) {
  auto r = report::combine_runs({run_with_avg(80, "1"), run_with_avg(90, "2")});
  r.attributes[AttributeKind::OCC] = {std::nullopt, 0, 2, std::nullopt};
  const auto back = report::parse_report(report::to_jsonl(r), "mem");
  EXPECT_EQ(back.variant, "gifts");
  EXPECT_EQ(back.run, "mean");
  EXPECT_EQ(back.runs, 2u);
  EXPECT_EQ(back.avg, r.avg);
  EXPECT_EQ(back.avg_variance, r.avg_variance);
  EXPECT_FALSE(back.attributes.at(AttributeKind::OCC).mean);
  EXPECT_EQ(back.attributes.at(AttributeKind::OCC).excluded, 2u);
  EXPECT_THROW(report::parse_report("{\"type\": \"cell\"}\n", "mem"), Error);
  EXPECT_THROW(report::parse_report("not json\n", "mem"), Error);
}

TEST(Report, TableLayout) {
  auto a = run_with_avg(86.666, "1");
  auto b = report::combine_runs({run_with_avg(80, "1"), run_with_avg(90, "2")});
  b.variant = "llm";
  b.attributes[AttributeKind::HEA] = {std::nullopt, 0, 2, std::nullopt};
  const std::string table = report::render_table({a, b});
  std::istringstream in(table);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  EXPECT_EQ(header.rfind("Variant  Defense", 0), 0u);
  EXPECT_NE(header.find("AGE"), std::string::npos);
  EXPECT_NE(header.find("MAR"), std::string::npos);
  EXPECT_EQ(header.substr(header.size() - 3), "Avg");
  EXPECT_NE(row1.find("86.7"), std::string::npos);
  EXPECT_NE(row2.find("85.0±25.0"), std::string::npos);
  EXPECT_NE(row2.find("--"), std::string::npos);
  EXPECT_EQ(report::display_width(header), report::display_width(row2));
}

TEST(Report, GroupRowsByVariantAndDefense) {
  auto x = run_with_avg(80, "1");
  auto y = run_with_avg(90, "2");
  auto z = run_with_avg(70, "1");
  z.defense = "jam";
  const auto rows = report::group_rows({x, z, y});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].defense, "none");
  EXPECT_NEAR(*rows[0].avg, 85.0, 1e-12);
  EXPECT_EQ(rows[1].defense, "jam");
  EXPECT_FALSE(rows[1].avg_variance);
}

}  // namespace
}  // namespace gifts::metrics
