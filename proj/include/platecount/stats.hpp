#pragma once

// Dataset statistics: sample taxonomy per background, per-class instance
// counts, box-size buckets, spatial heatmaps and count histograms.

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "platecount/tiler.hpp"
#include "platecount/types.hpp"

namespace platecount {

struct StatusCounts {
  long empty = 0;
  long countable = 0;
  long uncountable = 0;

  friend bool operator==(const StatusCounts&, const StatusCounts&) = default;
};

/// Buckets by sqrt(w*h): below 128 | [128, 512] | above 512.
struct SizeBuckets {
  long below_128 = 0;
  long between_128_512 = 0;
  long above_512 = 0;

  long total() const { return below_128 + between_128_512 + above_512; }
  friend bool operator==(const SizeBuckets&, const SizeBuckets&) = default;
};

struct CountHistogram {
  int bucket_width = 10;
  std::map<long, long> buckets;  // bucket lower bound -> samples
  long n = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

struct DatasetSummary {
  std::map<BackgroundCategory, StatusCounts> per_background;
  std::array<long, kNumClasses> per_class_instances{};
  CountHistogram count_histogram;
  long total_annotations = 0;  // microbe-class labels only
  long total_labels = 0;       // including defects and contamination
  long n_samples = 0;
};

DatasetSummary summarize(const std::vector<SampleAnnotation>& samples, int bucket_width = 10);

SizeBuckets size_buckets(const std::vector<Label>& labels);
SizeBuckets size_buckets(const std::vector<SampleAnnotation>& samples);

enum class HeatmapMode { Center, Area };

struct Heatmap {
  Eigen::MatrixXd grid;  // rows = y cells, cols = x cells
  int resolution = 64;
  ColonyClass cls = ColonyClass::SAureus;
  double normalization_max = 0.0;
};

inline constexpr int kDefaultHeatmapResolution = 64;

/// Occupancy of `cls` boxes on a resolution x resolution grid spanning
/// `plate_extent`, divided by the maximum cell. A class with no instances
/// gives an all-zero grid with normalization_max 0.
Heatmap heatmap(const std::vector<std::vector<Label>>& labels_by_sample, ColonyClass cls,
                int resolution, const ImageExtent& plate_extent, HeatmapMode mode = HeatmapMode::Center);

enum class QuartileMethod {
  Exclusive,  ///< linear interpolation at (n+1)p, clamped to the data range
  Inclusive,  ///< linear interpolation at (n-1)p
};

double quantile(std::vector<double> values, double p, QuartileMethod method = QuartileMethod::Exclusive);

/// Histogram of raw counts, with quartiles.
CountHistogram count_histogram(const std::vector<long>& counts, int bucket_width = 10,
                               QuartileMethod method = QuartileMethod::Exclusive);

/// Histogram of colonies_number over countable samples, with quartiles.
CountHistogram count_histogram(const std::vector<SampleAnnotation>& samples, int bucket_width = 10,
                               QuartileMethod method = QuartileMethod::Exclusive);

nlohmann::json to_json(const DatasetSummary& summary);
nlohmann::json to_json(const SizeBuckets& buckets);
nlohmann::json to_json(const CountHistogram& histogram);
nlohmann::json to_json(const Heatmap& map);

/// bucket_start,bucket_end,samples
std::string histogram_csv(const CountHistogram& histogram);
/// One row per grid row, comma separated.
std::string heatmap_csv(const Heatmap& map);

}  // namespace platecount
