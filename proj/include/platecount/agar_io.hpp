#pragma once

// AGAR annotation files: one JSON object per Petri-dish photo with keys
// background, classes, colonies_number, labels[{id,class,height,width,x,y}],
// sample_id. colonies_number is -1 for uncountable plates.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "platecount/tiler.hpp"
#include "platecount/types.hpp"

namespace platecount {

enum class Strictness { Lenient, Strict };

struct ParseOptions {
  Strictness strictness = Strictness::Lenient;
  const AliasTable* aliases = &AliasTable::defaults();
};

/// Non-fatal findings collected while parsing in lenient mode.
struct Warning {
  ErrorCode code;
  std::string message;
};

SampleAnnotation parse_agar(std::string_view json_text, const ParseOptions& options = {},
                            std::vector<Warning>* warnings = nullptr);

SampleAnnotation sample_from_json(const nlohmann::json& doc, const ParseOptions& options = {},
                                  std::vector<Warning>* warnings = nullptr);

nlohmann::json to_json(const SampleAnnotation& sample);

/// Serialized with sorted keys and two-space indentation.
std::string write_agar(const SampleAnnotation& sample);

/// COCO-style document: images (with an extra "background" key), annotations
/// and the seven categories. Image sizes are included when `extents` has them.
nlohmann::json to_coco_json(const std::vector<SampleAnnotation>& samples,
                            const std::map<long, ImageExtent>& extents = {});
std::string to_coco(const std::vector<SampleAnnotation>& samples,
                    const std::map<long, ImageExtent>& extents = {});

/// COCO category id (1-based) for a class.
int coco_category_id(ColonyClass c);

struct LoadedDataset {
  std::vector<SampleAnnotation> samples;
  /// file name -> error text, for files that failed to parse.
  std::map<std::string, std::string> errors;
  std::map<std::string, std::vector<Warning>> warnings;
};

/// Parses every *.json file of a directory in file-name order.
LoadedDataset load_agar_directory(const std::filesystem::path& dir,
                                  const ParseOptions& options = {});

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace platecount
