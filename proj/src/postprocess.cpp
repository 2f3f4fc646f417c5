#include "platecount/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace platecount {

std::vector<Detection> merge_windows(const TilingPlan& plan,
                                     const std::vector<WindowDetections>& per_window,
                                     double patch_scale) {
  if (!(patch_scale > 0)) throw Error(ErrorCode::NonPositiveScale, "patch_scale must be positive");
  const BBox image{0.0, 0.0, static_cast<double>(plan.image.width),
                   static_cast<double>(plan.image.height)};
  std::vector<Detection> merged;
  for (const WindowDetections& wd : per_window) {
    if (wd.window_index < 0 || static_cast<std::size_t>(wd.window_index) >= plan.windows.size())
      throw Error(ErrorCode::UnknownWindowIndex, std::to_string(wd.window_index));
    const PatchWindow& window = plan.windows[static_cast<std::size_t>(wd.window_index)];
    for (const Detection& d : wd.detections) {
      Detection global = d;
      global.box = intersection(image, window_to_image(window, d.box, patch_scale));
      if (global.box.area() <= 0) continue;
      merged.push_back(global);
    }
  }
  return merged;
}

void validate(const NmsConfig& cfg) {
  if (!(cfg.iou_threshold >= 0.0 && cfg.iou_threshold <= 1.0))
    throw Error(ErrorCode::InvalidThreshold, "iou_threshold must lie in [0, 1]");
  if (cfg.method == NmsMethod::SoftGaussian && !(cfg.sigma > 0.0))
    throw Error(ErrorCode::InvalidThreshold, "sigma must be positive");
  if (!(cfg.score_floor >= 0.0 && cfg.score_floor <= 1.0))
    throw Error(ErrorCode::InvalidThreshold, "score_floor must lie in [0, 1]");
}

namespace {

bool higher_priority(const Detection& a, const Detection& b, NmsPriority priority) {
  const double area_a = a.box.area();
  const double area_b = b.box.area();
  if (priority == NmsPriority::Area) {
    if (area_a != area_b) return area_a > area_b;
    if (a.score != b.score) return a.score > b.score;
  } else {
    if (a.score != b.score) return a.score > b.score;
    if (area_a != area_b) return area_a > area_b;
  }
  return std::tie(a.box.x, a.box.y) < std::tie(b.box.x, b.box.y);
}

}  // namespace

std::vector<Detection> area_priority_soft_nms(const std::vector<Detection>& dets,
                                              const NmsConfig& cfg) {
  validate(cfg);
  std::vector<Detection> remaining = dets;
  std::erase_if(remaining, [&](const Detection& d) { return d.score < cfg.score_floor; });
  std::vector<Detection> kept;
  kept.reserve(remaining.size());

  while (!remaining.empty()) {
    auto best = std::min_element(remaining.begin(), remaining.end(),
                                 [&](const Detection& a, const Detection& b) {
                                   return higher_priority(a, b, cfg.priority);
                                 });
    const Detection top = *best;
    remaining.erase(best);
    kept.push_back(top);

    for (Detection& d : remaining) {
      if (d.cls != top.cls) continue;
      const double u = iou(top.box, d.box);
      switch (cfg.method) {
        case NmsMethod::Hard:
          if (u >= cfg.iou_threshold) d.score = -1.0;
          break;
        case NmsMethod::SoftLinear:
          if (u >= cfg.iou_threshold) d.score *= (1.0 - u);
          break;
        case NmsMethod::SoftGaussian:
          d.score *= std::exp(-(u * u) / cfg.sigma);
          break;
      }
    }
    std::erase_if(remaining, [&](const Detection& d) {
      return d.score < 0.0 || d.score < cfg.score_floor;
    });
  }
  return kept;
}

std::vector<Detection> apply_filters(const std::vector<Detection>& dets, const FilterConfig& cfg) {
  if (!(cfg.prob_threshold >= 0.0 && cfg.prob_threshold <= 1.0))
    throw Error(ErrorCode::InvalidThreshold, "prob_threshold must lie in [0, 1]");
  std::vector<Detection> confident;
  confident.reserve(dets.size());
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(confident),
               [&](const Detection& d) { return d.score >= cfg.prob_threshold; });
  NmsConfig nms = cfg.nms;
  nms.score_floor = std::max(nms.score_floor, cfg.prob_threshold);
  return area_priority_soft_nms(confident, nms);
}

ClassCounts predict_counts(const std::vector<Detection>& dets) {
  ClassCounts counts;
  for (const Detection& d : dets) ++counts[d.cls];
  return counts;
}

}  // namespace platecount
