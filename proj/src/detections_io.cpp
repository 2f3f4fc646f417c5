#include "platecount/detections_io.hpp"

#include <sstream>

#include "platecount/agar_io.hpp"
#include "platecount/json_format.hpp"

namespace platecount {

nlohmann::json to_json(const DetectionRecord& record) {
  const Detection& d = record.detection;
  nlohmann::json doc = {{"sample_id", record.sample_id},
                        {"class", std::string(canonical_name(d.cls))},
                        {"score", real_json(d.score)},
                        {"x", real_json(d.box.x)},
                        {"y", real_json(d.box.y)},
                        {"w", real_json(d.box.w)},
                        {"h", real_json(d.box.h)}};
  if (record.window_index) doc["window_index"] = *record.window_index;
  return doc;
}

DetectionRecord record_from_json(const nlohmann::json& doc, const AliasTable& aliases) {
  try {
    DetectionRecord r;
    r.sample_id = doc.at("sample_id").get<long>();
    if (doc.contains("window_index") && !doc["window_index"].is_null())
      r.window_index = doc["window_index"].get<int>();
    const std::string name = doc.at("class").get<std::string>();
    auto cls = aliases.find_class(name);
    if (!cls) throw Error(ErrorCode::UnknownClass, name);
    r.detection.cls = *cls;
    r.detection.score = doc.at("score").get<double>();
    if (!(r.detection.score >= 0.0 && r.detection.score <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "score outside [0, 1]");
    r.detection.box = {doc.at("x").get<double>(), doc.at("y").get<double>(),
                       doc.at("w").get<double>(), doc.at("h").get<double>()};
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("detection record: ") + e.what());
  }
}

std::vector<DetectionRecord> parse_detections_jsonl(std::string_view text,
                                                    const AliasTable& aliases) {
  std::vector<DetectionRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded())
      throw Error(ErrorCode::MalformedJson, "line " + std::to_string(line_no));
    out.push_back(record_from_json(doc, aliases));
  }
  return out;
}

std::string write_detections_jsonl(const std::vector<DetectionRecord>& records) {
  std::string out;
  for (const DetectionRecord& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<DetectionRecord> read_detections_file(const std::filesystem::path& path) {
  return parse_detections_jsonl(read_text_file(path));
}

std::map<long, std::vector<Detection>> group_by_sample(const std::vector<DetectionRecord>& records) {
  std::map<long, std::vector<Detection>> out;
  for (const DetectionRecord& r : records) out[r.sample_id].push_back(r.detection);
  return out;
}

std::map<long, std::vector<WindowDetections>> group_by_window(
    const std::vector<DetectionRecord>& records) {
  std::map<long, std::map<int, std::vector<Detection>>> nested;
  for (const DetectionRecord& r : records) {
    if (!r.window_index)
      throw Error(ErrorCode::UnknownWindowIndex,
                  "record for sample " + std::to_string(r.sample_id) + " has no window_index");
    nested[r.sample_id][*r.window_index].push_back(r.detection);
  }
  std::map<long, std::vector<WindowDetections>> out;
  for (auto& [sample, windows] : nested)
    for (auto& [index, dets] : windows) out[sample].push_back({index, std::move(dets)});
  return out;
}

std::vector<DetectionRecord> to_records(long sample_id, const std::vector<Detection>& dets) {
  std::vector<DetectionRecord> out;
  out.reserve(dets.size());
  for (const Detection& d : dets) out.push_back({sample_id, std::nullopt, d});
  return out;
}

}  // namespace platecount
