#pragma once

// Splitting whole-plate photos into square patches.
//
// Training patches are placed at random so that every annotated box is fully
// inside at least one patch, followed by a few patches that contain no box at
// all. Test windows form a regular grid with a fixed overlap; the image is
// treated as zero-padded on the right/bottom so every window is full size.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "platecount/types.hpp"

namespace platecount {

inline constexpr int kDefaultPatchSide = 512;
inline constexpr double kDefaultEmptyFraction = 0.05;

struct ImageExtent {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageExtent&, const ImageExtent&) = default;
};

struct PatchWindow {
  int x0 = 0;
  int y0 = 0;
  int side = kDefaultPatchSide;
  int pad_right = 0;
  int pad_bottom = 0;

  BBox bounds() const {
    return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(side),
            static_cast<double>(side)};
  }

  friend bool operator==(const PatchWindow&, const PatchWindow&) = default;
};

enum class TileMode { Train, Test };

struct TilingPlan {
  long image_id = 0;
  ImageExtent image;
  TileMode mode = TileMode::Test;
  int side = kDefaultPatchSide;
  int overlap = kDefaultPatchSide / 8;     // Test only
  std::uint64_t seed = 0;                  // Train only
  double empty_fraction = 0.0;             // Train only
  std::size_t num_empty = 0;               // trailing windows holding no box (Train only)
  std::vector<PatchWindow> windows;
  std::vector<std::string> warnings;

  friend bool operator==(const TilingPlan&, const TilingPlan&) = default;
};

enum class OversizePolicy {
  Reject,  ///< throw OversizedBox
  Center,  ///< center a window on the box; the box is clipped by it
};

struct TrainOptions {
  int side = kDefaultPatchSide;
  OversizePolicy oversize = OversizePolicy::Reject;
};

/// Window whose corner lies at `origin`, with padding filled in against `extent`.
PatchWindow make_window(const ImageExtent& extent, int x0, int y0, int side);

TilingPlan plan_train_patches(const ImageExtent& extent, const std::vector<BBox>& boxes,
                              std::uint64_t seed, double empty_fraction = kDefaultEmptyFraction,
                              const TrainOptions& options = {});

TilingPlan plan_test_windows(const ImageExtent& extent, int side = kDefaultPatchSide,
                             std::optional<int> overlap = std::nullopt);

/// Number of grid windows along one axis of length `length`.
int grid_count(int length, int side, int stride);

enum class PartialPolicy { FullContainmentOnly, ClipPartial };

inline constexpr double kMinClippedFraction = 0.25;

/// Labels visible in a window, in window-local coordinates.
std::vector<Label> clip_labels_to_window(const std::vector<Label>& labels,
                                         const PatchWindow& window, PartialPolicy policy,
                                         double min_fraction = kMinClippedFraction);

/// Maps a box detected on a (possibly resized) patch back to image coordinates.
/// `patch_scale` is network-input size over window side.
BBox window_to_image(const PatchWindow& window, const BBox& local_box, double patch_scale = 1.0);

/// Inverse of window_to_image.
BBox image_to_window(const PatchWindow& window, const BBox& global_box, double patch_scale = 1.0);

nlohmann::json to_json(const TilingPlan& plan);
TilingPlan plan_from_json(const nlohmann::json& doc);

/// Manifest holding several plans: {"plans": [...]}.
nlohmann::json manifest_json(const std::vector<TilingPlan>& plans);
std::vector<TilingPlan> plans_from_manifest(const nlohmann::json& doc);

}  // namespace platecount
