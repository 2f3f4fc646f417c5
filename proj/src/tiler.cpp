#include "platecount/tiler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "platecount/json_format.hpp"

namespace platecount {
namespace {

struct IntRange {
  long lo;
  long hi;  // inclusive
};

/// Origins along one axis whose window [o, o+side) fully contains [b, b+w].
IntRange containing_origins(double b, double w, int length, int side) {
  const long max_origin = std::max(0, length - side);
  const long lo = std::max(0L, static_cast<long>(std::ceil(b + w - side)));
  const long hi = std::min(static_cast<long>(std::floor(b)), max_origin);
  return {lo, hi};
}

/// Origins along one axis whose window overlaps (b, b+w) with positive length.
IntRange overlapping_origins(double b, double w, int side) {
  return {static_cast<long>(std::floor(b - side)) + 1, static_cast<long>(std::ceil(b + w)) - 1};
}

bool fits_in_extent(const BBox& b, const ImageExtent& extent) {
  return b.x >= 0 && b.y >= 0 && b.right() <= extent.width && b.bottom() <= extent.height;
}

/// Enumerates, row by row, the origins whose window overlaps no box.
class FreeOriginScanner {
 public:
  FreeOriginScanner(const ImageExtent& extent, const std::vector<BBox>& boxes, int side)
      : max_x_(std::max(0, extent.width - side)), max_y_(std::max(0, extent.height - side)) {
    for (const BBox& b : boxes) {
      x_ranges_.push_back(overlapping_origins(b.x, b.w, side));
      y_ranges_.push_back(overlapping_origins(b.y, b.h, side));
    }
    // Rows between consecutive breakpoints share the same active box set.
    std::set<long> cuts = {0, max_y_ + 1};
    for (const IntRange& r : y_ranges_) {
      if (r.lo > 0 && r.lo <= max_y_) cuts.insert(r.lo);
      if (r.hi + 1 > 0 && r.hi + 1 <= max_y_) cuts.insert(r.hi + 1);
    }
    breakpoints_.assign(cuts.begin(), cuts.end());
  }

  /// Calls fn(y0, free x-intervals, band_end) for each band of identical rows.
  template <typename Fn>
  void for_each_band(Fn&& fn) const {
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
      const long y_begin = breakpoints_[i];
      const long y_end = breakpoints_[i + 1];  // exclusive
      std::vector<IntRange> blocked;
      for (std::size_t k = 0; k < y_ranges_.size(); ++k)
        if (y_ranges_[k].lo <= y_begin && y_begin <= y_ranges_[k].hi) blocked.push_back(x_ranges_[k]);
      fn(y_begin, y_end, free_intervals(std::move(blocked)));
    }
  }

  std::uint64_t count() const {
    std::uint64_t total = 0;
    for_each_band([&](long y_begin, long y_end, const std::vector<IntRange>& free) {
      std::uint64_t per_row = 0;
      for (const IntRange& r : free) per_row += static_cast<std::uint64_t>(r.hi - r.lo + 1);
      total += per_row * static_cast<std::uint64_t>(y_end - y_begin);
    });
    return total;
  }

 private:
  std::vector<IntRange> free_intervals(std::vector<IntRange> blocked) const {
    std::sort(blocked.begin(), blocked.end(),
              [](const IntRange& a, const IntRange& b) { return a.lo < b.lo; });
    std::vector<IntRange> free;
    long cursor = 0;
    for (const IntRange& r : blocked) {
      if (r.hi < cursor) continue;
      if (r.lo > cursor) free.push_back({cursor, std::min(r.lo - 1, max_x_)});
      cursor = std::max(cursor, r.hi + 1);
      if (cursor > max_x_) break;
    }
    if (cursor <= max_x_) free.push_back({cursor, max_x_});
    std::erase_if(free, [](const IntRange& r) { return r.hi < r.lo; });
    return free;
  }

  long max_x_;
  long max_y_;
  std::vector<IntRange> x_ranges_;
  std::vector<IntRange> y_ranges_;
  std::vector<long> breakpoints_;
};

/// Floyd's algorithm: k distinct values from [0, n), returned sorted.
std::vector<std::uint64_t> sample_distinct(std::uint64_t n, std::uint64_t k, std::mt19937_64& rng) {
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = n - k; j < n; ++j) {
    std::uniform_int_distribution<std::uint64_t> pick(0, j);
    const std::uint64_t t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

long uniform_in(const IntRange& r, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> dist(r.lo, r.hi);
  return dist(rng);
}

}  // namespace

PatchWindow make_window(const ImageExtent& extent, int x0, int y0, int side) {
  return {x0, y0, side, std::max(0, x0 + side - extent.width),
          std::max(0, y0 + side - extent.height)};
}

TilingPlan plan_train_patches(const ImageExtent& extent, const std::vector<BBox>& boxes,
                              std::uint64_t seed, double empty_fraction,
                              const TrainOptions& options) {
  const int side = options.side;
  if (extent.width <= 0 || extent.height <= 0 || side <= 0)
    throw Error(ErrorCode::InvalidGeometry, "extent and patch side must be positive");
  if (!(empty_fraction >= 0.0 && empty_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "empty_fraction must lie in [0, 1]");

  TilingPlan plan;
  plan.image = extent;
  plan.mode = TileMode::Train;
  plan.side = side;
  plan.overlap = 0;
  plan.seed = seed;
  plan.empty_fraction = empty_fraction;

  std::vector<IntRange> x_origins;
  std::vector<IntRange> y_origins;
  std::vector<bool> oversized(boxes.size(), false);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BBox& b = boxes[i];
    if (!is_valid(b) || !fits_in_extent(b, extent))
      throw Error(ErrorCode::InvalidGeometry, "box " + std::to_string(i) + " lies outside the image");
    x_origins.push_back(containing_origins(b.x, b.w, extent.width, side));
    y_origins.push_back(containing_origins(b.y, b.h, extent.height, side));
    oversized[i] = x_origins[i].lo > x_origins[i].hi || y_origins[i].lo > y_origins[i].hi;
    if (oversized[i] && options.oversize == OversizePolicy::Reject)
      throw Error(ErrorCode::OversizedBox,
                  "box " + std::to_string(i) + " does not fit in a " + std::to_string(side) +
                      " px patch");
  }

  std::mt19937_64 rng(seed);
  std::vector<bool> marked(boxes.size(), false);
  std::vector<std::size_t> unmarked(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) unmarked[i] = i;

  while (!unmarked.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, unmarked.size() - 1);
    const std::size_t chosen = unmarked[pick(rng)];
    const BBox& b = boxes[chosen];

    PatchWindow window;
    if (oversized[chosen]) {
      const auto c = b.center();
      const int x0 = std::clamp(static_cast<int>(std::lround(c.x() - side / 2.0)), 0,
                                std::max(0, extent.width - side));
      const int y0 = std::clamp(static_cast<int>(std::lround(c.y() - side / 2.0)), 0,
                                std::max(0, extent.height - side));
      window = make_window(extent, x0, y0, side);
      plan.warnings.push_back("box " + std::to_string(chosen) + " is larger than the patch; clipped");
      marked[chosen] = true;
    } else {
      const long x0 = uniform_in(x_origins[chosen], rng);
      const long y0 = uniform_in(y_origins[chosen], rng);
      window = make_window(extent, static_cast<int>(x0), static_cast<int>(y0), side);
    }
    plan.windows.push_back(window);

    const BBox bounds = window.bounds();
    for (std::size_t i = 0; i < boxes.size(); ++i)
      if (!marked[i] && contains(bounds, boxes[i])) marked[i] = true;
    std::erase_if(unmarked, [&](std::size_t i) { return marked[i]; });
  }

  const auto wanted =
      static_cast<std::uint64_t>(std::llround(empty_fraction * static_cast<double>(plan.windows.size())));
  if (wanted == 0) return plan;

  const FreeOriginScanner scanner(extent, boxes, side);
  const std::uint64_t available = scanner.count();
  const std::uint64_t take = std::min(wanted, available);
  if (take < wanted)
    plan.warnings.push_back(std::string(to_string(ErrorCode::NoEmptyRegion)) + ": requested " +
                            std::to_string(wanted) + " empty patches, only " +
                            std::to_string(available) + " available");
  if (take == 0) return plan;

  const std::vector<std::uint64_t> ranks = sample_distinct(available, take, rng);
  std::size_t next = 0;
  std::uint64_t seen = 0;
  scanner.for_each_band([&](long y_begin, long y_end, const std::vector<IntRange>& free) {
    for (long y = y_begin; y < y_end && next < ranks.size(); ++y) {
      for (const IntRange& r : free) {
        const auto width = static_cast<std::uint64_t>(r.hi - r.lo + 1);
        while (next < ranks.size() && ranks[next] < seen + width) {
          const long x = r.lo + static_cast<long>(ranks[next] - seen);
          plan.windows.push_back(make_window(extent, static_cast<int>(x), static_cast<int>(y), side));
          ++next;
        }
        seen += width;
      }
    }
  });
  plan.num_empty = take;
  return plan;
}

int grid_count(int length, int side, int stride) {
  if (length <= side) return 1;
  return (length - side + stride - 1) / stride + 1;
}

TilingPlan plan_test_windows(const ImageExtent& extent, int side, std::optional<int> overlap) {
  const int ov = overlap.value_or(side / 8);
  if (side <= 0 || ov < 0 || ov >= side)
    throw Error(ErrorCode::InvalidGeometry, "need side > overlap >= 0");
  if (extent.width <= 0 || extent.height <= 0)
    throw Error(ErrorCode::InvalidGeometry, "image extent must be positive");

  TilingPlan plan;
  plan.image = extent;
  plan.mode = TileMode::Test;
  plan.side = side;
  plan.overlap = ov;
  const int stride = side - ov;
  const int cols = grid_count(extent.width, side, stride);
  const int rows = grid_count(extent.height, side, stride);
  plan.windows.reserve(static_cast<std::size_t>(cols) * rows);
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < cols; ++i) plan.windows.push_back(make_window(extent, i * stride, j * stride, side));
  return plan;
}

std::vector<Label> clip_labels_to_window(const std::vector<Label>& labels,
                                         const PatchWindow& window, PartialPolicy policy,
                                         double min_fraction) {
  const BBox bounds = window.bounds();
  std::vector<Label> out;
  for (const Label& l : labels) {
    BBox kept;
    if (contains(bounds, l.box)) {
      kept = l.box;
    } else if (policy == PartialPolicy::ClipPartial) {
      const BBox clipped = intersection(bounds, l.box);
      if (clipped.area() <= 0 || clipped.area() < min_fraction * l.box.area()) continue;
      kept = clipped;
    } else {
      continue;
    }
    Label local = l;
    local.box = image_to_window(window, kept);
    out.push_back(std::move(local));
  }
  return out;
}

BBox window_to_image(const PatchWindow& window, const BBox& local_box, double patch_scale) {
  if (!(patch_scale > 0)) throw Error(ErrorCode::NonPositiveScale, "patch_scale must be positive");
  return transform_box(local_box, 1.0 / patch_scale, Eigen::Vector2d(window.x0, window.y0));
}

BBox image_to_window(const PatchWindow& window, const BBox& global_box, double patch_scale) {
  if (!(patch_scale > 0)) throw Error(ErrorCode::NonPositiveScale, "patch_scale must be positive");
  return transform_box(global_box, patch_scale,
                       Eigen::Vector2d(-patch_scale * window.x0, -patch_scale * window.y0));
}

nlohmann::json to_json(const TilingPlan& plan) {
  nlohmann::json windows = nlohmann::json::array();
  for (const PatchWindow& w : plan.windows) windows.push_back({w.x0, w.y0, w.side});
  nlohmann::json doc = {{"image_id", plan.image_id},
                        {"extent", {{"width", plan.image.width}, {"height", plan.image.height}}},
                        {"mode", plan.mode == TileMode::Train ? "train" : "test"},
                        {"side", plan.side},
                        {"windows", std::move(windows)}};
  if (plan.mode == TileMode::Test) {
    doc["overlap"] = plan.overlap;
  } else {
    doc["seed"] = plan.seed;
    doc["empty_fraction"] = real_json(plan.empty_fraction);
    doc["num_empty"] = plan.num_empty;
  }
  if (!plan.warnings.empty()) doc["warnings"] = plan.warnings;
  return doc;
}

TilingPlan plan_from_json(const nlohmann::json& doc) {
  try {
    TilingPlan plan;
    plan.image_id = doc.at("image_id").get<long>();
    plan.image = {doc.at("extent").at("width").get<int>(), doc.at("extent").at("height").get<int>()};
    const std::string mode = doc.at("mode").get<std::string>();
    if (mode != "train" && mode != "test") throw Error(ErrorCode::MalformedJson, "mode " + mode);
    plan.mode = mode == "train" ? TileMode::Train : TileMode::Test;
    plan.side = doc.value("side", kDefaultPatchSide);
    plan.overlap = doc.value("overlap", plan.mode == TileMode::Test ? plan.side / 8 : 0);
    plan.seed = doc.value("seed", std::uint64_t{0});
    plan.empty_fraction = doc.value("empty_fraction", 0.0);
    plan.num_empty = doc.value("num_empty", std::size_t{0});
    for (const auto& w : doc.at("windows")) {
      const int side = w.at(2).get<int>();
      plan.windows.push_back(make_window(plan.image, w.at(0).get<int>(), w.at(1).get<int>(), side));
    }
    plan.warnings = doc.value("warnings", std::vector<std::string>{});
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("tiling plan: ") + e.what());
  }
}

nlohmann::json manifest_json(const std::vector<TilingPlan>& plans) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TilingPlan& p : plans) arr.push_back(to_json(p));
  return {{"plans", std::move(arr)}};
}

std::vector<TilingPlan> plans_from_manifest(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("plans") || !doc["plans"].is_array())
    throw Error(ErrorCode::MalformedJson, "manifest needs a 'plans' array");
  std::vector<TilingPlan> plans;
  for (const auto& p : doc["plans"]) plans.push_back(plan_from_json(p));
  return plans;
}

}  // namespace platecount
