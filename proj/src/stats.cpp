#include "platecount/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "platecount/json_format.hpp"

namespace platecount {

SizeBuckets size_buckets(const std::vector<Label>& labels) {
  SizeBuckets b;
  for (const Label& l : labels) {
    if (!is_microbe(l.cls)) continue;
    const double side = std::sqrt(std::max(0.0, l.box.area()));
    if (side < 128.0)
      ++b.below_128;
    else if (side <= 512.0)
      ++b.between_128_512;
    else
      ++b.above_512;
  }
  return b;
}

SizeBuckets size_buckets(const std::vector<SampleAnnotation>& samples) {
  SizeBuckets total;
  for (const SampleAnnotation& s : samples) {
    const SizeBuckets b = size_buckets(s.labels);
    total.below_128 += b.below_128;
    total.between_128_512 += b.between_128_512;
    total.above_512 += b.above_512;
  }
  return total;
}

DatasetSummary summarize(const std::vector<SampleAnnotation>& samples, int bucket_width) {
  DatasetSummary out;
  for (BackgroundCategory b : kAllBackgrounds) out.per_background[b] = {};
  for (const SampleAnnotation& s : samples) {
    StatusCounts& sc = out.per_background[s.background];
    switch (status_of(s)) {
      case CountabilityStatus::Empty: ++sc.empty; break;
      case CountabilityStatus::Countable: ++sc.countable; break;
      case CountabilityStatus::Uncountable: ++sc.uncountable; break;
    }
    for (const Label& l : s.labels) {
      ++out.per_class_instances[index_of(l.cls)];
      ++out.total_labels;
      if (is_microbe(l.cls)) ++out.total_annotations;
    }
  }
  out.n_samples = static_cast<long>(samples.size());
  out.count_histogram = count_histogram(samples, bucket_width);
  return out;
}

Heatmap heatmap(const std::vector<std::vector<Label>>& labels_by_sample, ColonyClass cls,
                int resolution, const ImageExtent& plate_extent, HeatmapMode mode) {
  if (resolution < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 1");
  if (plate_extent.width <= 0 || plate_extent.height <= 0)
    throw Error(ErrorCode::InvalidGeometry, "plate extent must be positive");

  Heatmap map;
  map.resolution = resolution;
  map.cls = cls;
  map.grid = Eigen::MatrixXd::Zero(resolution, resolution);
  const double cell_w = static_cast<double>(plate_extent.width) / resolution;
  const double cell_h = static_cast<double>(plate_extent.height) / resolution;

  for (const auto& labels : labels_by_sample) {
    for (const Label& l : labels) {
      if (l.cls != cls) continue;
      if (mode == HeatmapMode::Center) {
        const auto c = l.box.center();
        const int col = std::clamp(static_cast<int>(std::floor(c.x() / cell_w)), 0, resolution - 1);
        const int row = std::clamp(static_cast<int>(std::floor(c.y() / cell_h)), 0, resolution - 1);
        map.grid(row, col) += 1.0;
        continue;
      }
      // Area mode: each cell gains the fraction of the cell covered by the box.
      const int c0 = std::clamp(static_cast<int>(std::floor(l.box.x / cell_w)), 0, resolution - 1);
      const int c1 = std::clamp(static_cast<int>(std::floor(l.box.right() / cell_w)), 0, resolution - 1);
      const int r0 = std::clamp(static_cast<int>(std::floor(l.box.y / cell_h)), 0, resolution - 1);
      const int r1 = std::clamp(static_cast<int>(std::floor(l.box.bottom() / cell_h)), 0, resolution - 1);
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          const BBox cell{c * cell_w, r * cell_h, cell_w, cell_h};
          map.grid(r, c) += intersection_area(cell, l.box) / cell.area();
        }
      }
    }
  }
  map.normalization_max = map.grid.maxCoeff();
  if (map.normalization_max > 0) map.grid /= map.normalization_max;
  return map;
}

double quantile(std::vector<double> values, double p, QuartileMethod method) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  // Zero-based fractional rank.
  double rank = method == QuartileMethod::Exclusive ? (n + 1.0) * p - 1.0 : (n - 1.0) * p;
  rank = std::clamp(rank, 0.0, n - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

CountHistogram count_histogram(const std::vector<long>& counts, int bucket_width,
                               QuartileMethod method) {
  if (bucket_width < 1) throw Error(ErrorCode::InvalidArgument, "bucket_width must be >= 1");
  CountHistogram h;
  h.bucket_width = bucket_width;
  std::vector<double> values;
  values.reserve(counts.size());
  for (long c : counts) {
    ++h.buckets[(c / bucket_width) * bucket_width];
    values.push_back(static_cast<double>(c));
  }
  h.n = static_cast<long>(values.size());
  h.q1 = quantile(values, 0.25, method);
  h.median = quantile(values, 0.5, method);
  h.q3 = quantile(values, 0.75, method);
  return h;
}

CountHistogram count_histogram(const std::vector<SampleAnnotation>& samples, int bucket_width,
                               QuartileMethod method) {
  std::vector<long> counts;
  for (const SampleAnnotation& s : samples)
    if (status_of(s) == CountabilityStatus::Countable) counts.push_back(s.colonies_number);
  return count_histogram(counts, bucket_width, method);
}

nlohmann::json to_json(const SizeBuckets& b) {
  return {{"below_128", b.below_128}, {"between_128_512", b.between_128_512}, {"above_512", b.above_512}};
}

nlohmann::json to_json(const CountHistogram& h) {
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& [start, n] : h.buckets)
    buckets.push_back({{"start", start}, {"end", start + h.bucket_width - 1}, {"samples", n}});
  return {{"bucket_width", h.bucket_width},
          {"buckets", std::move(buckets)},
          {"n", h.n},
          {"q1", real_json(h.q1)},
          {"median", real_json(h.median)},
          {"q3", real_json(h.q3)}};
}

nlohmann::json to_json(const DatasetSummary& s) {
  nlohmann::json per_background = nlohmann::json::object();
  for (const auto& [bg, sc] : s.per_background)
    per_background[std::string(canonical_name(bg))] = {
        {"empty", sc.empty}, {"countable", sc.countable}, {"uncountable", sc.uncountable}};
  nlohmann::json per_class = nlohmann::json::object();
  for (ColonyClass c : kAllClasses)
    per_class[std::string(canonical_name(c))] = s.per_class_instances[index_of(c)];
  return {{"n_samples", s.n_samples},
          {"per_background", std::move(per_background)},
          {"per_class_instances", std::move(per_class)},
          {"total_annotations", s.total_annotations},
          {"total_labels", s.total_labels},
          {"count_histogram", to_json(s.count_histogram)}};
}

nlohmann::json to_json(const Heatmap& map) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < map.grid.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < map.grid.cols(); ++c) row.push_back(real_json(map.grid(r, c)));
    rows.push_back(std::move(row));
  }
  return {{"class", std::string(canonical_name(map.cls))},
          {"resolution", map.resolution},
          {"normalization_max", real_json(map.normalization_max)},
          {"grid", std::move(rows)}};
}

std::string histogram_csv(const CountHistogram& h) {
  std::ostringstream out;
  out << "bucket_start,bucket_end,samples\n";
  for (const auto& [start, n] : h.buckets) out << start << ',' << start + h.bucket_width - 1 << ',' << n << '\n';
  return out.str();
}

std::string heatmap_csv(const Heatmap& map) {
  std::ostringstream out;
  for (Eigen::Index r = 0; r < map.grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < map.grid.cols(); ++c) {
      if (c) out << ',';
      out << round6(map.grid(r, c));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace platecount
