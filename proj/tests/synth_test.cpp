#include <gtest/gtest.h>

#include <filesystem>

#include "platecount/agar_io.hpp"
#include "platecount/postprocess.hpp"
#include "platecount/synth.hpp"
#include "test_support.hpp"

namespace platecount {
namespace {

SynthConfig small_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_samples = 8;
  return cfg;
}

TEST(Generate, NoSamples) {
  SynthConfig cfg;
  cfg.n_samples = 0;
  EXPECT_TRUE(generate(cfg).empty());
}

TEST(Generate, ZeroNoiseIsIdeal) {
  SynthConfig cfg = small_config(1);
  cfg.noise.score_model.score_sd = 0.0;
  for (const SynthSample& s : generate(cfg)) EXPECT_EQ(s.noisy_detections, s.ideal_detections);
}

TEST(Generate, Deterministic) {
  SynthConfig cfg = small_config(2);
  cfg.noise.jitter_frac = 0.1;
  cfg.noise.dropout_prob = 0.1;
  cfg.noise.spurious_rate = 2.0;
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].annotation, b[i].annotation);
    EXPECT_EQ(a[i].noisy_detections, b[i].noisy_detections);
  }
  cfg.seed = 3;
  EXPECT_NE(generate(cfg)[0].annotation, a[0].annotation);
}

TEST(Generate, IdealDetectionsMatchMicrobeLabels) {
  SynthConfig cfg = small_config(4);
  cfg.class_mix = {{ColonyClass::EColi, 1.0}, {ColonyClass::Defect, 0.3}};
  for (const SynthSample& s : generate(cfg)) {
    std::vector<Detection> expected;
    for (const Label& l : s.annotation.labels)
      if (is_microbe(l.cls)) expected.push_back({l.box, l.cls, 1.0});
    EXPECT_EQ(s.ideal_detections, expected);
    EXPECT_EQ(s.annotation.colonies_number, microbe_label_count(s.annotation));
  }
}

TEST(Generate, PlacementRespectsOverlapAndPlate) {
  SynthConfig cfg = small_config(5);
  cfg.counts.kind = CountKind::High;
  cfg.counts.high_max = 150;
  for (const SynthSample& s : generate(cfg)) {
    const auto& labels = s.annotation.labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      EXPECT_TRUE(contains(BBox{0, 0, 2048, 2048}, labels[i].box));
      for (std::size_t j = i + 1; j < labels.size(); ++j) EXPECT_LE(iou(labels[i].box, labels[j].box), 0.1);
    }
  }
}

TEST(Generate, OverCapIsUncountable) {
  SynthConfig cfg = small_config(6);
  cfg.n_samples = 2;
  cfg.counts.kind = CountKind::High;
  cfg.counts.high_min = 301;
  cfg.counts.high_max = 320;
  for (const SynthSample& s : generate(cfg)) {
    EXPECT_EQ(s.annotation.colonies_number, -1);
    EXPECT_EQ(status_of(s.annotation), CountabilityStatus::Uncountable);
  }
}

TEST(Generate, InfeasiblePlacement) {
  SynthConfig cfg = small_config(7);
  cfg.plate_extent = {200, 200};
  cfg.size = SizeProfile::Large;
  cfg.counts.kind = CountKind::High;
  cfg.max_attempts = 50;
  try {
    generate(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasiblePlacement);
  }
}

TEST(Generate, InvalidConfig) {
  SynthConfig cfg;
  cfg.noise.dropout_prob = 1.5;
  EXPECT_THROW(validate(cfg), Error);
  cfg = SynthConfig{};
  cfg.class_mix = {{ColonyClass::EColi, 0.0}};
  EXPECT_THROW(validate(cfg), Error);
}

TEST(Generate, ConfigJsonRoundTrip) {
  SynthConfig cfg = small_config(8);
  cfg.counts.kind = CountKind::Bimodal;
  cfg.counts.high_weight = 0.25;
  cfg.class_mix = {{ColonyClass::SAureus, 2.0}, {ColonyClass::CAlbicans, 1.0}};
  cfg.size = SizeProfile::Large;
  cfg.noise.spurious_rate = 1.5;
  cfg.noise.score_model.crowd_fraction = 0.3;
  EXPECT_EQ(to_json(synth_config_from_json(to_json(cfg))), to_json(cfg));
}

TEST(OracleIou, Examples) {
  const BBox a{0, 0, 10, 10};
  EXPECT_EQ(oracle_iou(a, a, 0.1), 1.0);
  EXPECT_EQ(oracle_iou(a, BBox{20, 20, 3, 3}, 0.1), 0.0);
  EXPECT_NEAR(oracle_iou(a, BBox{5, 0, 10, 10}, 0.1), 1.0 / 3.0, 1e-2);
  EXPECT_NEAR(oracle_iou(a, BBox{5, 0, 10, 10}, 0.01), 1.0 / 3.0, 1e-3);
}

TEST(OracleIou, ConvergesToIou) {
  testing::Rng rng(61);
  for (int i = 0; i < 200; ++i) {
    const BBox a = testing::random_box(rng, 50, 30);
    const BBox b = testing::random_box(rng, 50, 30);
    EXPECT_NEAR(oracle_iou(a, b, 0.01), iou(a, b), 1e-3);
  }
}

TEST(OracleMatching, Examples) {
  const std::vector<Label> gt = {{1, ColonyClass::EColi, {0, 0, 10, 10}, {}}, {2, ColonyClass::EColi, {50, 0, 10, 10}, {}}};
  std::vector<Detection> perfect;
  for (const Label& l : gt) perfect.push_back({l.box, l.cls, 1.0});
  EXPECT_EQ(oracle_best_matching(gt, perfect, 0.5), 2);
  EXPECT_EQ(oracle_best_matching(gt, {{{200, 200, 5, 5}, ColonyClass::EColi, 1.0}}, 0.5), 0);

  // Each detection overlaps both ground-truth boxes.
  const std::vector<Label> pair = {{1, ColonyClass::EColi, {0, 0, 10, 10}, {}}, {2, ColonyClass::EColi, {2, 0, 10, 10}, {}}};
  const std::vector<Detection> crossed = {{{1, 0, 10, 10}, ColonyClass::EColi, 0.9},
                                          {{1.5, 0, 10, 10}, ColonyClass::EColi, 0.8}};
  EXPECT_EQ(oracle_best_matching(pair, crossed, 0.6), 2);
}

TEST(OracleMatching, TooLarge) {
  std::vector<Label> gt(kOracleMaxBoxes + 1, Label{0, ColonyClass::EColi, {0, 0, 1, 1}, {}});
  try {
    oracle_best_matching(gt, {}, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(ProjectToWindows, MergeRecoversGroundTruth) {
  SynthConfig cfg = small_config(9);
  cfg.plate_extent = {1500, 1300};
  cfg.counts.kind = CountKind::Bimodal;
  NmsConfig nms;
  nms.method = NmsMethod::Hard;
  for (const SynthSample& s : generate(cfg)) {
    const TilingPlan plan = plan_test_windows(cfg.plate_extent);
    const auto merged = merge_windows(plan, project_to_windows(plan, s.ideal_detections));
    auto kept = area_priority_soft_nms(merged, nms);
    auto key = [](const Detection& a, const Detection& b) {
      return std::tie(a.box.x, a.box.y, a.box.w, a.box.h) < std::tie(b.box.x, b.box.y, b.box.w, b.box.h);
    };
    std::sort(kept.begin(), kept.end(), key);
    auto expected = s.ideal_detections;
    std::sort(expected.begin(), expected.end(), key);
    EXPECT_EQ(kept, expected);
  }
}

TEST(WriteDataset, FilesParse) {
  const auto dir = std::filesystem::temp_directory_path() / "platecount_synth_test";
  std::filesystem::remove_all(dir);
  SynthConfig cfg = small_config(10);
  cfg.n_samples = 3;
  write_synth_dataset(dir, cfg, generate(cfg));
  const LoadedDataset data = load_agar_directory(dir / "annotations", {Strictness::Strict});
  EXPECT_EQ(data.samples.size(), 3u);
  EXPECT_TRUE(data.errors.empty());
  for (const char* f : {"extents.csv", "detections_ideal.jsonl", "detections_noisy.jsonl", "plan.json",
                        "window_detections.jsonl", "synth_config.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace platecount
