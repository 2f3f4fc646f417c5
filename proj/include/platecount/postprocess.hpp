#pragma once

// Turning per-window detector output into whole-image predictions: shift and
// rescale every box back to image coordinates, then drop low-probability
// boxes and suppress duplicates with a soft-NMS whose retention order is
// driven by box area instead of score.

#include <map>
#include <vector>

#include "platecount/tiler.hpp"
#include "platecount/types.hpp"

namespace platecount {

struct WindowDetections {
  int window_index = 0;
  std::vector<Detection> detections;  // window-local coordinates
};

/// Concatenates window detections in image coordinates, clipped to the image.
/// Boxes left with zero area after clipping are dropped.
std::vector<Detection> merge_windows(const TilingPlan& plan,
                                     const std::vector<WindowDetections>& per_window,
                                     double patch_scale = 1.0);

enum class NmsMethod { Hard, SoftLinear, SoftGaussian };
enum class NmsPriority { Area, Score };

struct NmsConfig {
  NmsMethod method = NmsMethod::SoftGaussian;
  double iou_threshold = 0.5;  // Hard, SoftLinear
  double sigma = 0.5;          // SoftGaussian
  double score_floor = 0.001;
  NmsPriority priority = NmsPriority::Area;
};

void validate(const NmsConfig& cfg);

/// Per-class (soft-)NMS. Output is in retention order.
///
/// The next box kept is the remaining one with the largest area (ties: higher
/// score, then smaller x, then smaller y), or with the highest current score
/// when priority is Score. Every remaining box of the same class is then
/// decayed by its IoU u with the kept box:
///   Hard:         dropped when u >= iou_threshold
///   SoftLinear:   s *= (1 - u) when u >= iou_threshold
///   SoftGaussian: s *= exp(-u^2 / sigma)
/// and removed once its score is below score_floor.
std::vector<Detection> area_priority_soft_nms(const std::vector<Detection>& dets,
                                              const NmsConfig& cfg);

struct FilterConfig {
  double prob_threshold = 0.0;
  NmsConfig nms;
};

/// Drops detections scoring below prob_threshold, then runs NMS. Scores
/// decayed below prob_threshold during NMS are dropped as well.
std::vector<Detection> apply_filters(const std::vector<Detection>& dets, const FilterConfig& cfg);

ClassCounts predict_counts(const std::vector<Detection>& dets);

}  // namespace platecount
