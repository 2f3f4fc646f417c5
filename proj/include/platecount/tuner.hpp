#pragma once

// Threshold tuning for counting. Each (probability, NMS) pair is scored by the
// sMAPE and MAE of predicted colony totals; the pair with the lowest MAE among
// those whose sMAPE lies within a small band of the best sMAPE wins.
//
// The dual policy keeps two fitted pairs: a general one and an auxiliary one
// fitted on crowded plates. The auxiliary pair replaces the general result
// for any plate on which the general pair predicts more than switch_count
// colonies.

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "platecount/postprocess.hpp"

namespace platecount {

struct ThresholdPair {
  double prob_threshold = 0.5;
  double nms_threshold = 0.5;  // IoU threshold, or sigma for SoftGaussian

  friend bool operator==(const ThresholdPair&, const ThresholdPair&) = default;
};

enum class BandMode {
  Absolute,  ///< within `band` percentage points of the best sMAPE
  Relative,  ///< within `band` percent of the best sMAPE value
};

struct GridSpec {
  std::vector<double> prob_values;
  std::vector<double> nms_values;
  double tiebreak_band = 0.1;
  BandMode band_mode = BandMode::Absolute;
};

/// prob 0.05..0.95 step 0.05, nms 0.1..0.9 step 0.1.
GridSpec default_grid();
void validate(const GridSpec& grid);

struct TuningSample {
  long truth_total = 0;  // colonies_number; negative (uncountable) samples are ignored
  std::vector<Detection> raw;
};

using TuningDataset = std::vector<TuningSample>;

struct TunerOptions {
  NmsConfig nms;  // method, priority and score floor; thresholds come from the pair
  unsigned threads = 1;
};

FilterConfig filter_config(const ThresholdPair& pair, const NmsConfig& base);

struct PairScore {
  double smape = 0.0;
  double mae = 0.0;

  friend bool operator==(const PairScore&, const PairScore&) = default;
};

PairScore evaluate_pair(const ThresholdPair& pair, const TuningDataset& dataset,
                        const TunerOptions& options = {});

struct GridEntry {
  ThresholdPair pair;
  PairScore score;
};

struct GridSearchResult {
  ThresholdPair best;
  PairScore score;
  std::vector<GridEntry> table;  // prob-major, nms-minor
};

GridSearchResult grid_search(const GridSpec& grid, const TuningDataset& dataset,
                             const TunerOptions& options = {});

/// Tie-broken selection over an already evaluated table.
std::size_t select_best(const std::vector<GridEntry>& table, double band, BandMode mode);

inline constexpr long kDefaultSwitchCount = 50;

struct DualPolicy {
  ThresholdPair general;
  ThresholdPair auxiliary;
  long switch_count = kDefaultSwitchCount;

  friend bool operator==(const DualPolicy&, const DualPolicy&) = default;
};

/// general: fitted on all samples; auxiliary: fitted on samples whose true
/// count exceeds switch_count.
DualPolicy fit_dual_policy(const GridSpec& grid, const TuningDataset& dataset,
                           long switch_count = kDefaultSwitchCount, const TunerOptions& options = {});

std::vector<Detection> apply_dual_policy(const DualPolicy& policy, const std::vector<Detection>& raw,
                                         const NmsConfig& nms = {});

enum class PolicyMode { General, Auxiliary, Mixed };

PairScore evaluate_policy(const DualPolicy& policy, const TuningDataset& dataset, PolicyMode mode,
                          const NmsConfig& nms = {});

/// Persisted form: {method, priority, score_floor, prob_threshold,
/// nms_threshold, auxiliary?: {prob_threshold, nms_threshold}, switch_count}.
struct ThresholdConfig {
  NmsConfig nms;
  ThresholdPair general;
  std::optional<ThresholdPair> auxiliary;
  long switch_count = kDefaultSwitchCount;
};

nlohmann::json to_json(const ThresholdConfig& cfg);
ThresholdConfig threshold_config_from_json(const nlohmann::json& doc);

std::string_view method_name(NmsMethod m);
NmsMethod parse_method(std::string_view name);
std::string_view priority_name(NmsPriority p);
NmsPriority parse_priority(std::string_view name);

}  // namespace platecount
