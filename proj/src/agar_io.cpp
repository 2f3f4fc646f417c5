#include "platecount/agar_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "platecount/json_format.hpp"

namespace platecount {
namespace {

using nlohmann::json;

const std::set<std::string>& known_sample_keys() {
  static const std::set<std::string> keys = {"background", "classes", "colonies_number",
                                             "labels", "sample_id"};
  return keys;
}

const std::set<std::string>& known_label_keys() {
  static const std::set<std::string> keys = {"id", "class", "height", "width", "x", "y"};
  return keys;
}

void report(const ParseOptions& options, std::vector<Warning>* warnings, ErrorCode code,
            const std::string& message) {
  if (options.strictness == Strictness::Strict) throw Error(code, message);
  if (warnings) warnings->push_back({code, message});
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::MissingField, key);
  return *it;
}

double require_number(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number()) throw Error(ErrorCode::MalformedJson, std::string(key) + " is not a number");
  return v.get<double>();
}

long require_integer(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number_integer())
    throw Error(ErrorCode::MalformedJson, std::string(key) + " is not an integer");
  return v.get<long>();
}

ColonyClass parse_class(const json& v, const AliasTable& aliases) {
  if (!v.is_string()) throw Error(ErrorCode::MalformedJson, "class name is not a string");
  auto c = aliases.find_class(v.get<std::string>());
  if (!c) throw Error(ErrorCode::UnknownClass, v.get<std::string>());
  return *c;
}

json number_json(double v) {
  // Integral coordinates stay integers so ground-truth files keep their original form.
  if (std::nearbyint(v) == v && std::abs(v) < 9e15) return json(static_cast<long>(v));
  return json(v);
}

}  // namespace

SampleAnnotation sample_from_json(const json& doc, const ParseOptions& options,
                                  std::vector<Warning>* warnings) {
  if (!doc.is_object()) throw Error(ErrorCode::MalformedJson, "top level is not an object");
  const AliasTable& aliases = *options.aliases;

  SampleAnnotation s;
  s.sample_id = require_integer(doc, "sample_id");

  const json& bg = require(doc, "background");
  if (!bg.is_string()) throw Error(ErrorCode::MalformedJson, "background is not a string");
  auto background = aliases.find_background(bg.get<std::string>());
  if (!background) throw Error(ErrorCode::UnknownBackground, bg.get<std::string>());
  s.background = *background;

  const json& classes = require(doc, "classes");
  if (!classes.is_array()) throw Error(ErrorCode::MalformedJson, "classes is not an array");
  for (const json& c : classes) s.classes.push_back(parse_class(c, aliases));

  s.colonies_number = require_integer(doc, "colonies_number");
  if (s.colonies_number < -1)
    throw Error(ErrorCode::MalformedJson, "colonies_number below -1");

  const json& labels = require(doc, "labels");
  if (!labels.is_array()) throw Error(ErrorCode::MalformedJson, "labels is not an array");
  std::set<long> seen_ids;
  for (const json& l : labels) {
    if (!l.is_object()) throw Error(ErrorCode::MalformedJson, "label is not an object");
    Label label;
    label.id = require_integer(l, "id");
    label.cls = parse_class(require(l, "class"), aliases);
    label.box = {require_number(l, "x"), require_number(l, "y"), require_number(l, "width"),
                 require_number(l, "height")};
    if (!is_valid(label.box))
      report(options, warnings, ErrorCode::InvalidBox,
             "label " + std::to_string(label.id) + " has non-positive size");
    if (!seen_ids.insert(label.id).second)
      report(options, warnings, ErrorCode::MalformedJson,
             "duplicate label id " + std::to_string(label.id));
    for (const auto& [key, value] : l.items()) {
      if (known_label_keys().count(key)) continue;
      report(options, warnings, ErrorCode::UnknownField, "label key '" + key + "'");
      label.extra[key] = value;
    }
    s.labels.push_back(std::move(label));
  }

  for (const auto& [key, value] : doc.items()) {
    if (known_sample_keys().count(key)) continue;
    report(options, warnings, ErrorCode::UnknownField, "key '" + key + "'");
    s.extra[key] = value;
  }

  const long microbes = microbe_label_count(s);
  if (s.colonies_number >= 0 && s.colonies_number != microbes)
    report(options, warnings, ErrorCode::CountMismatch,
           "colonies_number " + std::to_string(s.colonies_number) + " but " +
               std::to_string(microbes) + " microbe labels");
  return s;
}

SampleAnnotation parse_agar(std::string_view json_text, const ParseOptions& options,
                            std::vector<Warning>* warnings) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::MalformedJson, "not valid JSON");
  return sample_from_json(doc, options, warnings);
}

json to_json(const SampleAnnotation& sample) {
  json doc = sample.extra.is_object() ? sample.extra : json::object();
  doc["sample_id"] = sample.sample_id;
  doc["background"] = std::string(canonical_name(sample.background));
  doc["colonies_number"] = sample.colonies_number;
  json classes = json::array();
  for (ColonyClass c : sample.classes) classes.push_back(std::string(canonical_name(c)));
  doc["classes"] = std::move(classes);
  json labels = json::array();
  for (const Label& l : sample.labels) {
    json obj = l.extra.is_object() ? l.extra : json::object();
    obj["id"] = l.id;
    obj["class"] = std::string(canonical_name(l.cls));
    obj["x"] = number_json(l.box.x);
    obj["y"] = number_json(l.box.y);
    obj["width"] = number_json(l.box.w);
    obj["height"] = number_json(l.box.h);
    labels.push_back(std::move(obj));
  }
  doc["labels"] = std::move(labels);
  return doc;
}

std::string write_agar(const SampleAnnotation& sample) { return to_json(sample).dump(2) + "\n"; }

int coco_category_id(ColonyClass c) { return static_cast<int>(index_of(c)) + 1; }

json to_coco_json(const std::vector<SampleAnnotation>& samples,
                  const std::map<long, ImageExtent>& extents) {
  std::set<long> ids;
  for (const SampleAnnotation& s : samples)
    if (!ids.insert(s.sample_id).second)
      throw Error(ErrorCode::DuplicateSampleId, std::to_string(s.sample_id));

  json categories = json::array();
  for (ColonyClass c : kAllClasses) {
    categories.push_back({{"id", coco_category_id(c)},
                          {"name", std::string(canonical_name(c))},
                          {"supercategory", is_microbe(c) ? "microbe" : "other"}});
  }

  json images = json::array();
  json annotations = json::array();
  long next_annotation_id = 1;
  for (const SampleAnnotation& s : samples) {
    json image = {{"id", s.sample_id},
                  {"file_name", std::to_string(s.sample_id) + ".jpg"},
                  {"background", std::string(canonical_name(s.background))}};
    if (auto it = extents.find(s.sample_id); it != extents.end()) {
      image["width"] = it->second.width;
      image["height"] = it->second.height;
    }
    images.push_back(std::move(image));
    for (const Label& l : s.labels) {
      annotations.push_back({{"id", next_annotation_id++},
                             {"image_id", s.sample_id},
                             {"category_id", coco_category_id(l.cls)},
                             {"bbox", {number_json(l.box.x), number_json(l.box.y),
                                       number_json(l.box.w), number_json(l.box.h)}},
                             {"area", number_json(l.box.area())},
                             {"iscrowd", 0}});
    }
  }
  return {{"info", {{"description", "AGAR annotations"}}},
          {"images", std::move(images)},
          {"annotations", std::move(annotations)},
          {"categories", std::move(categories)}};
}

std::string to_coco(const std::vector<SampleAnnotation>& samples,
                    const std::map<long, ImageExtent>& extents) {
  return to_coco_json(samples, extents).dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

LoadedDataset load_agar_directory(const std::filesystem::path& dir, const ParseOptions& options) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  LoadedDataset out;
  for (const auto& file : files) {
    const std::string name = file.filename().string();
    try {
      std::vector<Warning> warnings;
      out.samples.push_back(parse_agar(read_text_file(file), options, &warnings));
      if (!warnings.empty()) out.warnings[name] = std::move(warnings);
    } catch (const Error& e) {
      out.errors[name] = e.what();
    }
  }
  return out;
}

}  // namespace platecount
