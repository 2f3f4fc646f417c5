#pragma once

// Detection files are JSON lines, one box per line:
//   {"class":"E.coli","h":..,"sample_id":..,"score":..,"w":..,"window_index":..,"x":..,"y":..}
// window_index is present only for window-local detections.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "platecount/postprocess.hpp"

namespace platecount {

struct DetectionRecord {
  long sample_id = 0;
  std::optional<int> window_index;
  Detection detection;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

nlohmann::json to_json(const DetectionRecord& record);
DetectionRecord record_from_json(const nlohmann::json& doc,
                                 const AliasTable& aliases = AliasTable::defaults());

std::vector<DetectionRecord> parse_detections_jsonl(std::string_view text,
                                                    const AliasTable& aliases = AliasTable::defaults());
std::string write_detections_jsonl(const std::vector<DetectionRecord>& records);

std::vector<DetectionRecord> read_detections_file(const std::filesystem::path& path);

/// Whole-image detections grouped by sample id.
std::map<long, std::vector<Detection>> group_by_sample(const std::vector<DetectionRecord>& records);

/// Window-local detections grouped by sample id, then window index.
std::map<long, std::vector<WindowDetections>> group_by_window(
    const std::vector<DetectionRecord>& records);

std::vector<DetectionRecord> to_records(long sample_id, const std::vector<Detection>& dets);

}  // namespace platecount
