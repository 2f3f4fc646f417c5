#pragma once

// Synthetic plates and simulated detector output, plus brute-force oracles
// used to check the geometry and matching code independently.

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "platecount/metrics.hpp"
#include "platecount/tiler.hpp"
#include "platecount/tuner.hpp"
#include "platecount/types.hpp"

namespace platecount {

enum class CountKind { Low, High, Bimodal };

struct CountDistribution {
  CountKind kind = CountKind::Low;
  long low_min = 4;
  long low_max = 38;
  long high_min = 50;
  long high_max = 300;
  double high_weight = 0.5;   // Bimodal: probability of drawing a high count
  double empty_weight = 0.0;  // probability of an empty plate
};

enum class SizeProfile {
  Small,  ///< sqrt(area) in [16, 128]
  Large,  ///< sqrt(area) in [64, 512]
};

struct ScoreModel {
  double score_sd = 0.05;
  double jitter_penalty = 1.0;  // score loss per unit of (1 - IoU) to the true box
  double spurious_min = 0.05;
  double spurious_max = 0.5;
  /// Plates with more true colonies than this get a share of low-confidence hits.
  long crowd_threshold = 50;
  double crowd_fraction = 0.0;
  double crowd_score_min = 0.3;
  double crowd_score_max = 0.45;
};

struct NoiseConfig {
  double jitter_frac = 0.0;
  double dropout_prob = 0.0;
  double spurious_rate = 0.0;  // mean false boxes per plate (Poisson)
  ScoreModel score_model;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  ImageExtent plate_extent{2048, 2048};
  long n_samples = 10;
  long first_sample_id = 1;
  CountDistribution counts;
  std::map<ColonyClass, double> class_mix;  // empty: the five microbes, equal weight
  SizeProfile size = SizeProfile::Small;
  NoiseConfig noise;
  double max_overlap_iou = 0.1;
  int max_attempts = 2000;  // placement tries per colony
};

void validate(const SynthConfig& cfg);

struct SynthSample {
  SampleAnnotation annotation;
  std::vector<Detection> ideal_detections;
  std::vector<Detection> noisy_detections;
};

/// Deterministic in cfg.seed; sample i draws from its own derived stream.
std::vector<SynthSample> generate(const SynthConfig& cfg);

SynthConfig synth_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SynthConfig& cfg);

/// Per-window output of a detector that sees every colony perfectly. A box is
/// reported in each window that fully contains it; a box that no window
/// contains is reported whole by the window showing most of it.
std::vector<WindowDetections> project_to_windows(const TilingPlan& plan,
                                                 const std::vector<Detection>& dets);

TuningDataset tuning_dataset(const std::vector<SynthSample>& samples, bool noisy = true);

/// Fraction of cells (of side grid_step, sampled at their centers) inside
/// both boxes over cells inside either.
double oracle_iou(const BBox& a, const BBox& b, double grid_step);

inline constexpr std::size_t kOracleMaxBoxes = 8;

/// Largest number of one-to-one same-class pairs with IoU >= threshold, by
/// exhaustive search. Throws TooLarge beyond kOracleMaxBoxes per side.
long oracle_best_matching(const std::vector<Label>& gt, const std::vector<Detection>& dets,
                          double iou_threshold);

/// Writes annotations/<id>.json, extents.csv, detections_ideal.jsonl,
/// detections_noisy.jsonl, plan.json (test windows) and window_detections.jsonl
/// (ideal detections projected per window).
void write_synth_dataset(const std::filesystem::path& dir, const SynthConfig& cfg,
                         const std::vector<SynthSample>& samples, int side = kDefaultPatchSide);

}  // namespace platecount
