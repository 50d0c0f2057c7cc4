#include <gtest/gtest.h>

#include <set>

#include "demo_data.hpp"
#include "gifts/attributes.hpp"
#include "gifts/json_io.hpp"
#include "gifts/manifest.hpp"
#include "support.hpp"

namespace gifts {
namespace {

using json_io::Json;

TEST(AttributeCategory, FixedMapping) {
  EXPECT_EQ(attribute_category(AttributeKind::GEN), Category::Qualitative);
  EXPECT_EQ(attribute_category(AttributeKind::MAR), Category::Qualitative);
  EXPECT_EQ(attribute_category(AttributeKind::AGE), Category::Quantitative);
  EXPECT_EQ(attribute_category(AttributeKind::SOS), Category::Quantitative);
  EXPECT_EQ(attribute_category(AttributeKind::INC), Category::Quantitative);
  for (auto a : {AttributeKind::ACC, AttributeKind::PER, AttributeKind::SOP, AttributeKind::OCC,
                 AttributeKind::HAB}) {
    EXPECT_EQ(attribute_category(a), Category::Fuzzy) << code_of(a);
  }
  EXPECT_EQ(attribute_category(AttributeKind::HEA), Category::Hybrid);
  EXPECT_EQ(attribute_category(AttributeKind::EDU), Category::Hybrid);
}

TEST(AttributeCategory, TwelveDistinctCodesInReportOrder) {
  const std::vector<std::string> expected = {"AGE", "GEN", "ACC", "HEA", "HAB", "PER",
                                             "SOP", "SOS", "INC", "OCC", "EDU", "MAR"};
  ASSERT_EQ(kAllAttributes.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(code_of(kAllAttributes[i]), expected[i]);
    EXPECT_EQ(attribute_from_code(expected[i]), kAllAttributes[i]);
  }
  EXPECT_FALSE(attribute_from_code("XYZ"));
  EXPECT_THROW(parse_attribute_code("age"), Error);
}

TEST(AttributeScope, OptionCounts) {
  EXPECT_EQ(scope_of(AttributeKind::AGE).options.size(), 7u);
  EXPECT_EQ(scope_of(AttributeKind::SOS).options.size(), 5u);
  EXPECT_EQ(scope_of(AttributeKind::INC).options.size(), 5u);
  EXPECT_EQ(scope_of(AttributeKind::EDU).options.size(), 6u);
  EXPECT_EQ(scope_of(AttributeKind::GEN).options.size(), 2u);
  EXPECT_EQ(scope_of(AttributeKind::MAR).options.size(), 5u);
  EXPECT_EQ(scope_of(AttributeKind::ACC).options.size(), 11u);
  EXPECT_EQ(scope_of(AttributeKind::HEA).options.size(), 5u);
}

TEST(AttributeScope, Examples) {
  EXPECT_EQ(scope_of(AttributeKind::AGE).options.back(), "older than sixties");
  EXPECT_EQ(scope_of(AttributeKind::GEN).options, (std::vector<std::string>{"Male", "Female"}));
  EXPECT_TRUE(scope_of(AttributeKind::OCC).open());
  for (auto a : {AttributeKind::HAB, AttributeKind::PER, AttributeKind::SOP, AttributeKind::OCC}) {
    EXPECT_TRUE(scope_of(a).open()) << code_of(a);
  }
}

TEST(AttributeScope, OrderedFlagsAndUniqueOptions) {
  for (AttributeKind a : kAllAttributes) {
    const auto s = scope_of(a);
    const bool ordered = a == AttributeKind::AGE || a == AttributeKind::SOS ||
                         a == AttributeKind::INC || a == AttributeKind::EDU;
    EXPECT_EQ(s.ordered, ordered) << code_of(a);
    std::set<std::string> seen;
    for (const auto& o : s.options) EXPECT_TRUE(seen.insert(text::normalize_label(o)).second) << o;
  }
}

TEST(AttributeScope, BritishAndEnglandBothKept) {
  const auto s = scope_of(AttributeKind::ACC);
  EXPECT_TRUE(s.contains("British"));
  EXPECT_TRUE(s.contains("England"));
  EXPECT_NE(s.index_of("British"), s.index_of("England"));
}

TEST(AttributeScope, IndexOfNormalizes) {
  const auto s = scope_of(AttributeKind::SOS);
  EXPECT_EQ(s.index_of("  middle class. "), 2u);
  EXPECT_EQ(s.index_of("upper-middle class"), 3u);
}

TEST(HealthTriple, WellFormedRules) {
  EXPECT_TRUE((HealthTriple{Severity::Healthy, SicknessKind::None, std::nullopt}).well_formed());
  EXPECT_FALSE((HealthTriple{Severity::Healthy, SicknessKind::Mental, std::nullopt}).well_formed());
  EXPECT_FALSE((HealthTriple{Severity::Slightly, SicknessKind::None, std::nullopt}).well_formed());
  EXPECT_FALSE((HealthTriple{Severity::Healthy, SicknessKind::None, std::string("Anxiety")}).well_formed());
  EXPECT_TRUE((HealthTriple{Severity::Severely, SicknessKind::Physical, std::string("Parkinson")}).well_formed());
  EXPECT_EQ((HealthTriple{Severity::Severely, SicknessKind::Physical, std::string("Parkinson")}).label(),
            "Severely Physically Sick (Parkinson)");
}

Json minimal_manifest() {
  return Json::parse(R"({
    "dataset_name": "t",
    "individuals": [{"individual_id": "a", "clips": [{"clip_id": "c1", "audio_path": "x.wav"}]}]
  })");
}

TEST(Manifest, UnknownFieldRejectedByName) {
  Json j = minimal_manifest();
  j["individuals"][0]["clips"][0]["loudness"] = 3;
  try {
    json_io::dataset_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownField);
    EXPECT_NE(std::string(e.what()).find("loudness"), std::string::npos);
  }
}

TEST(Manifest, DuplicateClipIdsRejected) {
  Json j = minimal_manifest();
  j["individuals"][0]["clips"].push_back({{"clip_id", "c1"}, {"audio_path", "y.wav"}});
  EXPECT_THROW(json_io::dataset_from_json(j), Error);
}

TEST(Manifest, SpeakerOrdinalMustBePositive) {
  Json j = minimal_manifest();
  j["individuals"][0]["clips"][0]["speaker_ordinal"] = 0;
  EXPECT_THROW(json_io::dataset_from_json(j), Error);
  j["individuals"][0]["clips"][0]["speaker_ordinal"] = 2;
  EXPECT_EQ(json_io::dataset_from_json(j).individuals[0].clips[0].speaker_ordinal, 2);
}

TEST(Manifest, EmptyClipListRejected) {
  Json j = minimal_manifest();
  j["individuals"][0]["clips"] = Json::array();
  EXPECT_THROW(json_io::dataset_from_json(j), Error);
}

TEST(Manifest, MissingAudioIsLoadError) {
  testing::TempDir dir("manifest");
  text::write_file(dir / "m.json", minimal_manifest().dump());
  try {
    load_manifest(dir / "m.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ManifestError);
  }
  EXPECT_NO_THROW(load_manifest(dir / "m.json", false));
}

TEST(Manifest, RelativePathsResolveAgainstManifestDir) {
  testing::TempDir dir("manifest_rel");
  write_wav(dir / "x.wav", demo::tone_bursts(0.1, 200, 8000, 1, 1));
  text::write_file(dir / "m.json", minimal_manifest().dump());
  const auto m = load_manifest(dir / "m.json");
  EXPECT_EQ(m.dataset.individuals[0].clips[0].audio_path, (dir / "x.wav").lexically_normal().string());
  EXPECT_TRUE(m.warnings.empty());
}

TEST(Manifest, UndecodableAudioWarnsOnly) {
  testing::TempDir dir("manifest_bad");
  text::write_file(dir / "x.wav", "not a wave file");
  text::write_file(dir / "m.json", minimal_manifest().dump());
  const auto m = load_manifest(dir / "m.json");
  ASSERT_EQ(m.warnings.size(), 1u);
}

TEST(Manifest, MalformedJsonIsManifestError) {
  try {
    parse_manifest("{", {}, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ManifestError);
  }
}

Json truth_json() {
  Json g = json_io::to_json(demo::demo_truth(0));
  return g;
}

TEST(GroundTruth, ClosedScopeMembershipCheckedAtLoad) {
  Json g = truth_json();
  g["AGE"] = "around forty";
  try {
    json_io::ground_truth_from_json(g, "gt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ScopeViolation);
  }
}

TEST(GroundTruth, CanonicalSpellingStored) {
  Json g = truth_json();
  g["SOS"] = "middle class";
  EXPECT_EQ(json_io::ground_truth_from_json(g, "gt").values.at(AttributeKind::SOS), "Middle Class");
}

TEST(GroundTruth, OpenScopeAcceptsFreeText) {
  Json g = truth_json();
  g["OCC"] = "Deep-sea welder";
  EXPECT_EQ(json_io::ground_truth_from_json(g, "gt").values.at(AttributeKind::OCC), "Deep-sea welder");
}

TEST(GroundTruth, MalformedHealthTriple) {
  Json g = truth_json();
  g["HEA"] = {{"severity", "Healthy"}, {"kind", "Mental"}};
  try {
    json_io::ground_truth_from_json(g, "gt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedTriple);
  }
  g["HEA"] = {{"severity", "Slightly"}, {"kind", "None"}, {"disease", "Anxiety"}};
  EXPECT_THROW(json_io::ground_truth_from_json(g, "gt"), Error);
}

TEST(GroundTruth, MissingAttributeRejected) {
  Json g = truth_json();
  g.erase("MAR");
  EXPECT_THROW(json_io::ground_truth_from_json(g, "gt"), Error);
}

// Round-trip property over a family of generated values.
TEST(RoundTrip, IndividualTraceProfile) {
  for (std::size_t k = 0; k < 6; ++k) {
    Individual ind;
    ind.individual_id = "p" + std::to_string(k);
    for (std::size_t c = 0; c <= k % 3; ++c) {
      ClipRecord clip{"c" + std::to_string(c), "/a/b" + std::to_string(c) + ".wav", std::nullopt, std::nullopt};
      if (c % 2) clip.recorded_at = "2024-03-0" + std::to_string(c);
      if (k % 2) clip.speaker_ordinal = static_cast<int>(c + 1);
      ind.clips.push_back(clip);
    }
    if (k % 3 != 2) ind.ground_truth = demo::demo_truth(k);
    const Json j = json_io::to_json(ind);
    const Individual back = json_io::individual_from_json(j, "ind");
    EXPECT_EQ(back, ind);
    EXPECT_EQ(json_io::dump_document(json_io::to_json(back)), json_io::dump_document(j));

    InferenceTrace t;
    t.individual_id = ind.individual_id;
    t.attribute = kAllAttributes[k];
    t.clip_id = "c0";
    t.guidance = "g \"quoted\" é";
    t.inference_prompt = "line1\nline2";
    t.initial_value = "v1";
    t.forensics_initial = {{"q1", "q2"}, {ForensicAnswer::True, ForensicAnswer::Uncertain}};
    t.verdict_initial = k % 2 ? Verdict::No : Verdict::Yes;
    if (k % 2) {
      t.second_inference_prompt = "p2";
      t.second_value = "v2";
      t.forensics_second = ForensicsExchange{{"q3"}, {ForensicAnswer::False}};
      t.dual_choice = k % 4 == 1 ? DualChoice::Second : DualChoice::First;
    }
    t.candidate_value = t.dual_choice == DualChoice::Second ? "v2" : "v1";
    t.warnings = {"w"};
    EXPECT_EQ(json_io::trace_from_json(json_io::to_json(t), "t"), t);

    PredictedProfile p;
    p.individual_id = ind.individual_id;
    p.variant = static_cast<PipelineVariant>(k % 4);
    p.derived = {{"c0", "desc", "**Speaker 1:** hi"}};
    AttributeResult r;
    r.attribute = t.attribute;
    r.final_value = "v";
    r.traces = {t};
    r.clip_values = {"a", "b"};
    r.aggregation_prompt = "agg";
    if (k == 3) {
      r.status = TaskStatus::Failed;
      r.error = "Timeout: slow";
      r.error_code = ErrorCode::Timeout;
    }
    p.attributes = {r};
    const Json pj = json_io::to_json(p);
    EXPECT_EQ(json_io::profile_from_json(pj), p);
    EXPECT_EQ(json_io::to_json(json_io::profile_from_json(pj)).dump(), pj.dump());
  }
}

TEST(RoundTrip, DatasetThroughManifestFile) {
  testing::TempDir dir("rt");
  const auto paths = demo::write_demo(dir.path(), 2, 2, 0.2);
  const auto m = load_manifest(paths.manifest);
  save_manifest(dir / "copy.json", m.dataset);
  const auto again = load_manifest(dir / "copy.json");
  EXPECT_EQ(again.dataset, m.dataset);
}

TEST(Text, OrdinalWords) {
  EXPECT_EQ(text::ordinal_word(1), "first");
  EXPECT_EQ(text::ordinal_word(2), "second");
  EXPECT_EQ(text::ordinal_word(10), "tenth");
  EXPECT_EQ(text::ordinal_word(11), "11th");
  EXPECT_EQ(text::ordinal_word(22), "22nd");
}

TEST(Text, Base64) {
  const std::string s = "Man";
  const std::vector<std::uint8_t> b(s.begin(), s.end());
  EXPECT_EQ(text::base64_encode(b), "TWFu");
  EXPECT_EQ(text::base64_encode(std::vector<std::uint8_t>{'M', 'a'}), "TWE=");
  EXPECT_EQ(text::base64_encode(std::vector<std::uint8_t>{'M'}), "TQ==");
}

TEST(Wav, EncodeDecodeIsLossless) {
  const Waveform w = quantized(demo::tone_bursts(0.3, 300, 16000, 2, 9));
  const Waveform back = decode_wav(encode_wav(w));
  EXPECT_EQ(back.sample_rate, 16000);
  EXPECT_EQ(back.channels, 2);
  EXPECT_EQ(back.samples, w.samples);
}

TEST(Wav, RejectsGarbage) {
  const std::vector<std::uint8_t> junk = {'R', 'I', 'F', 'F', 0, 0};
  try {
    decode_wav(junk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AudioDecodeError);
  }
}

}  // namespace
}  // namespace gifts
