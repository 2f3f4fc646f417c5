#include "platecount/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "platecount/agar_io.hpp"
#include "platecount/detections_io.hpp"
#include "platecount/json_format.hpp"
#include "platecount/metrics.hpp"
#include "platecount/postprocess.hpp"
#include "platecount/report.hpp"
#include "platecount/stats.hpp"
#include "platecount/synth.hpp"
#include "platecount/tiler.hpp"
#include "platecount/tuner.hpp"

namespace platecount::cli {
namespace {

using nlohmann::json;

/// Raised for contract violations that CLI11 cannot detect on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out_path;
  bool errors_json = false;
  bool strict = false;
};

void emit(const Common& common, std::ostream& out, const std::string& text) {
  if (common.out_path.empty() || common.out_path == "-")
    out << text;
  else
    write_text_file(common.out_path, text);
}

ParseOptions parse_options(const Common& common) {
  ParseOptions o;
  o.strictness = common.strict ? Strictness::Strict : Strictness::Lenient;
  return o;
}

/// Loads a directory of AGAR files; any unparsable file is a data error.
std::vector<SampleAnnotation> load_samples(const std::string& dir, const Common& common) {
  LoadedDataset data = load_agar_directory(dir, parse_options(common));
  if (!data.errors.empty()) {
    const auto& [file, message] = *data.errors.begin();
    throw Error(ErrorCode::MalformedJson, file + ": " + message);
  }
  return std::move(data.samples);
}

std::map<long, const SampleAnnotation*> index_samples(const std::vector<SampleAnnotation>& samples) {
  std::map<long, const SampleAnnotation*> by_id;
  for (const SampleAnnotation& s : samples)
    if (!by_id.emplace(s.sample_id, &s).second)
      throw Error(ErrorCode::DuplicateSampleId, std::to_string(s.sample_id));
  return by_id;
}

NmsConfig nms_from_flags(const std::string& method, const std::string& priority, double floor) {
  NmsConfig nms;
  nms.method = parse_method(method);
  nms.priority = parse_priority(priority);
  nms.score_floor = floor;
  return nms;
}

GridSpec parse_grid(const std::string& spec) {
  GridSpec grid = default_grid();
  if (spec.empty()) return grid;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw UsageError("grid part '" + part + "' needs key=start:stop:step");
    const std::string key = normalize_name(part.substr(0, eq));
    const std::vector<double> values = parse_range(part.substr(eq + 1));
    if (key == "prob")
      grid.prob_values = values;
    else if (key == "nms")
      grid.nms_values = values;
    else
      throw UsageError("unknown grid key '" + key + "'");
  }
  return grid;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& dir, const Common& common, std::ostream& out) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::Io, dir + " is not a directory");
  const LoadedDataset data = load_agar_directory(dir, parse_options(common));
  std::size_t n_warnings = 0;
  for (const auto& [file, ws] : data.warnings) n_warnings += ws.size();
  if (common.errors_json) {
    json warnings = json::object();
    for (const auto& [file, ws] : data.warnings) {
      json arr = json::array();
      for (const Warning& w : ws) arr.push_back({{"code", std::string(to_string(w.code))}, {"message", w.message}});
      warnings[file] = std::move(arr);
    }
    json doc = {{"samples", data.samples.size()}, {"errors", data.errors}, {"warnings", std::move(warnings)}};
    emit(common, out, doc.dump(2) + "\n");
  } else {
    std::ostringstream text;
    for (const auto& [file, message] : data.errors) text << "error " << file << ": " << message << '\n';
    for (const auto& [file, ws] : data.warnings)
      for (const Warning& w : ws) text << "warning " << file << ": " << to_string(w.code) << ": " << w.message << '\n';
    text << data.samples.size() << " samples, " << data.errors.size() << " errors, " << n_warnings
         << " warnings\n";
    emit(common, out, text.str());
  }
  return data.errors.empty() ? kExitOk : kExitDataError;
}

int cmd_convert(const std::string& to, const std::string& dir, const std::string& extents_path,
                const Common& common, std::ostream& out) {
  if (normalize_name(to) != "coco") throw UsageError("--to supports only 'coco'");
  const std::vector<SampleAnnotation> samples = load_samples(dir, common);
  std::map<long, ImageExtent> extents;
  if (!extents_path.empty()) extents = parse_extents_csv(read_text_file(extents_path));
  emit(common, out, to_coco(samples, extents));
  return kExitOk;
}

struct TileArgs {
  std::string mode = "test";
  std::uint64_t seed = 0;
  double empty_fraction = kDefaultEmptyFraction;
  int side = kDefaultPatchSide;
  int overlap = -1;
  int width = 0;
  int height = 0;
  long image_id = 0;
  std::string extents_path;
  std::string annotations;
  std::string oversize = "reject";
};

int cmd_tile(const TileArgs& a, const Common& common, std::ostream& out) {
  const std::string mode = normalize_name(a.mode);
  if (mode != "train" && mode != "test") throw UsageError("--mode must be train or test");
  const std::optional<int> overlap = a.overlap >= 0 ? std::optional<int>(a.overlap) : std::nullopt;

  std::map<long, ImageExtent> extents;
  if (!a.extents_path.empty()) {
    extents = parse_extents_csv(read_text_file(a.extents_path));
  } else if (a.width > 0 && a.height > 0) {
    extents[a.image_id] = {a.width, a.height};
  } else {
    throw UsageError("give --width/--height or --extents");
  }

  std::map<long, std::vector<BBox>> boxes;
  if (!a.annotations.empty()) {
    for (const SampleAnnotation& s : load_samples(a.annotations, common)) {
      auto& list = boxes[s.sample_id];
      for (const Label& l : s.labels) list.push_back(l.box);
    }
  } else if (mode == "train") {
    throw UsageError("train mode needs --annotations");
  }

  TrainOptions train;
  train.side = a.side;
  const std::string oversize = normalize_name(a.oversize);
  if (oversize == "center")
    train.oversize = OversizePolicy::Center;
  else if (oversize != "reject")
    throw UsageError("--oversize must be reject or center");

  std::vector<TilingPlan> plans;
  for (const auto& [id, extent] : extents) {
    TilingPlan plan;
    if (mode == "test") {
      plan = plan_test_windows(extent, a.side, overlap);
    } else {
      auto it = boxes.find(id);
      const std::vector<BBox> none;
      plan = plan_train_patches(extent, it == boxes.end() ? none : it->second,
                                a.seed ^ static_cast<std::uint64_t>(id), a.empty_fraction, train);
      plan.seed = a.seed ^ static_cast<std::uint64_t>(id);
    }
    plan.image_id = id;
    plans.push_back(std::move(plan));
  }
  emit(common, out, manifest_json(plans).dump(2) + "\n");
  return kExitOk;
}

struct MergeArgs {
  std::string plan;
  std::string detections;
  std::string thresholds;
  bool dual = false;
  double patch_scale = 1.0;
};

int cmd_merge(const MergeArgs& a, const Common& common, std::ostream& out) {
  const std::vector<TilingPlan> plans = plans_from_manifest(json::parse(read_text_file(a.plan)));
  std::map<long, const TilingPlan*> plan_by_id;
  for (const TilingPlan& p : plans) plan_by_id[p.image_id] = &p;

  const auto grouped = group_by_window(read_detections_file(a.detections));
  for (const auto& [id, windows] : grouped)
    if (!plan_by_id.count(id))
      throw Error(ErrorCode::MissingSample, "no tiling plan for sample " + std::to_string(id));

  std::optional<ThresholdConfig> thresholds;
  if (!a.thresholds.empty()) thresholds = threshold_config_from_json(json::parse(read_text_file(a.thresholds)));
  if (a.dual && (!thresholds || !thresholds->auxiliary))
    throw UsageError("--dual needs a thresholds file with an auxiliary pair");

  std::vector<DetectionRecord> records;
  for (const auto& [id, plan] : plan_by_id) {
    auto it = grouped.find(id);
    if (it == grouped.end()) continue;
    std::vector<Detection> merged = merge_windows(*plan, it->second, a.patch_scale);
    if (thresholds) {
      if (a.dual) {
        const DualPolicy policy{thresholds->general, *thresholds->auxiliary, thresholds->switch_count};
        merged = apply_dual_policy(policy, merged, thresholds->nms);
      } else {
        merged = apply_filters(merged, filter_config(thresholds->general, thresholds->nms));
      }
    }
    for (auto& r : to_records(id, merged)) records.push_back(std::move(r));
  }
  emit(common, out, write_detections_jsonl(records));
  return kExitOk;
}

int cmd_eval_detection(const std::string& gt_dir, const std::string& pred, const std::string& iou_set,
                       bool coco101, const std::string& format, const Common& common, std::ostream& out) {
  const std::vector<SampleAnnotation> samples = load_samples(gt_dir, common);
  const auto by_id = index_samples(samples);
  std::map<long, std::vector<Label>> gt;
  for (const SampleAnnotation& s : samples)
    if (status_of(s) != CountabilityStatus::Uncountable) gt[s.sample_id] = s.labels;

  std::map<long, std::vector<Detection>> dets;
  for (auto& [id, d] : group_by_sample(read_detections_file(pred))) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::MissingSample, "predictions for unknown sample " + std::to_string(id));
    if (status_of(*it->second) == CountabilityStatus::Uncountable) continue;
    dets[id] = std::move(d);
  }
  const APReport report = map_report(gt, dets, parse_range(iou_set),
                                     coco101 ? ApIntegration::Coco101 : ApIntegration::Trapezoid);
  if (normalize_name(format) == "text")
    emit(common, out, format_ap_table(report));
  else
    emit(common, out, to_json(report).dump(2) + "\n");
  return kExitOk;
}

int cmd_eval_counting(const std::string& gt_dir, const std::string& pred, const std::string& thresholds_path,
                      bool dual, const std::string& format, const Common& common, std::ostream& out) {
  const std::vector<SampleAnnotation> samples = load_samples(gt_dir, common);
  const auto by_id = index_samples(samples);
  auto dets = group_by_sample(read_detections_file(pred));
  for (const auto& [id, d] : dets)
    if (!by_id.count(id)) throw Error(ErrorCode::MissingSample, "predictions for unknown sample " + std::to_string(id));

  std::optional<ThresholdConfig> thresholds;
  if (!thresholds_path.empty())
    thresholds = threshold_config_from_json(json::parse(read_text_file(thresholds_path)));
  if (dual && (!thresholds || !thresholds->auxiliary))
    throw UsageError("--dual needs a thresholds file with an auxiliary pair");

  std::vector<CountPair> pairs;
  std::vector<CountabilityStatus> statuses;
  std::vector<long> predicted_totals;
  for (const SampleAnnotation& s : samples) {
    std::vector<Detection> kept = dets.count(s.sample_id) ? dets[s.sample_id] : std::vector<Detection>{};
    if (thresholds) {
      if (dual)
        kept = apply_dual_policy({thresholds->general, *thresholds->auxiliary, thresholds->switch_count}, kept,
                                 thresholds->nms);
      else
        kept = apply_filters(kept, filter_config(thresholds->general, thresholds->nms));
    }
    const ClassCounts predicted = predict_counts(kept);
    statuses.push_back(status_of(s));
    predicted_totals.push_back(predicted.microbe_total());
    if (s.colonies_number >= 0) pairs.push_back({s.colonies_number, count_labels(s.labels), predicted});
  }
  const CountReport report = count_report(pairs);
  if (normalize_name(format) == "text") {
    emit(common, out, format_count_table(report));
  } else {
    json doc = to_json(report);
    doc["countability"] = to_json(countability_report(statuses, predicted_totals));
    emit(common, out, doc.dump(2) + "\n");
  }
  return kExitOk;
}

struct TuneArgs {
  std::string gt;
  std::string pred;
  std::string grid;
  std::string method = "gaussian";
  std::string priority = "area";
  double score_floor = 0.001;
  double band = 0.1;
  bool relative_band = false;
  bool dual = false;
  long switch_count = kDefaultSwitchCount;
};

int cmd_tune(const TuneArgs& a, const Common& common, std::ostream& out) {
  const std::vector<SampleAnnotation> samples = load_samples(a.gt, common);
  index_samples(samples);
  auto dets = group_by_sample(read_detections_file(a.pred));

  TuningDataset dataset;
  for (const SampleAnnotation& s : samples) {
    if (s.colonies_number < 0) continue;
    dataset.push_back({s.colonies_number, dets.count(s.sample_id) ? dets[s.sample_id] : std::vector<Detection>{}});
  }
  GridSpec grid = parse_grid(a.grid);
  grid.tiebreak_band = a.band;
  grid.band_mode = a.relative_band ? BandMode::Relative : BandMode::Absolute;

  TunerOptions options;
  options.nms = nms_from_flags(a.method, a.priority, a.score_floor);
  options.threads = thread_cap();

  ThresholdConfig cfg;
  cfg.nms = options.nms;
  cfg.switch_count = a.switch_count;
  if (a.dual) {
    const DualPolicy policy = fit_dual_policy(grid, dataset, a.switch_count, options);
    cfg.general = policy.general;
    cfg.auxiliary = policy.auxiliary;
  } else {
    cfg.general = grid_search(grid, dataset, options).best;
  }
  emit(common, out, to_json(cfg).dump(2) + "\n");
  return kExitOk;
}

struct StatsArgs {
  std::string annotations;
  int bucket_width = 10;
  std::string heatmap_class;
  int resolution = kDefaultHeatmapResolution;
  int plate_width = 0;
  int plate_height = 0;
  std::string heatmap_mode = "center";
  std::string format = "json";
};

int cmd_stats(const StatsArgs& a, const Common& common, std::ostream& out) {
  const std::vector<SampleAnnotation> samples = load_samples(a.annotations, common);
  const DatasetSummary summary = summarize(samples, a.bucket_width);
  const SizeBuckets buckets = size_buckets(samples);

  std::optional<Heatmap> map;
  if (!a.heatmap_class.empty()) {
    auto cls = AliasTable::defaults().find_class(a.heatmap_class);
    if (!cls) throw UsageError("unknown class '" + a.heatmap_class + "'");
    if (a.plate_width <= 0 || a.plate_height <= 0) throw UsageError("heatmap needs --plate-width/--plate-height");
    const std::string mode = normalize_name(a.heatmap_mode);
    if (mode != "center" && mode != "area") throw UsageError("--heatmap-mode must be center or area");
    std::vector<std::vector<Label>> labels;
    for (const SampleAnnotation& s : samples) labels.push_back(s.labels);
    map = heatmap(labels, *cls, a.resolution, {a.plate_width, a.plate_height},
                  mode == "area" ? HeatmapMode::Area : HeatmapMode::Center);
  }

  if (normalize_name(a.format) == "csv") {
    std::ostringstream text;
    text << "bucket,boxes\nbelow_128," << buckets.below_128 << "\nbetween_128_512," << buckets.between_128_512
         << "\nabove_512," << buckets.above_512 << "\n\n";
    text << histogram_csv(summary.count_histogram);
    if (map) text << '\n' << heatmap_csv(*map);
    emit(common, out, text.str());
  } else {
    json doc = {{"summary", to_json(summary)}, {"size_buckets", to_json(buckets)}};
    if (map) doc["heatmap"] = to_json(*map);
    emit(common, out, doc.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
              int side, std::ostream& out) {
  SynthConfig cfg;
  if (!config_path.empty()) cfg = synth_config_from_json(json::parse(read_text_file(config_path)));
  if (seed) cfg.seed = *seed;
  const std::vector<SynthSample> samples = generate(cfg);
  write_synth_dataset(out_dir, cfg, samples, side);
  out << samples.size() << " samples written to " << out_dir << '\n';
  return kExitOk;
}

}  // namespace

std::vector<double> parse_range(const std::string& spec) {
  std::stringstream ss(spec);
  std::string part;
  std::vector<double> parts;
  while (std::getline(ss, part, ':')) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size()) throw UsageError("bad range '" + spec + "'");
    parts.push_back(v);
  }
  if (parts.size() == 1) return {parts[0]};
  if (parts.size() != 3) throw UsageError("range '" + spec + "' must be start:stop:step");
  try {
    return threshold_range(parts[0], parts[1], parts[2]);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::map<long, ImageExtent> parse_extents_csv(const std::string& text) {
  std::map<long, ImageExtent> out;
  std::stringstream ss(text);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    long id = 0;
    int w = 0;
    int h = 0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream row(line);
    if (!(row >> id >> c1 >> w >> c2 >> h) || c1 != ',' || c2 != ',') {
      if (first) {
        first = false;
        continue;
      }
      throw Error(ErrorCode::MalformedJson, "bad extents row '" + line + "'");
    }
    first = false;
    out[id] = {w, h};
  }
  return out;
}

unsigned thread_cap() {
  if (const char* env = std::getenv("PLATE_PIPELINE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Colony counting by detection: annotations, tiling, merging, metrics and tuning",
               "platecount"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--errors-json", common.errors_json, "Report data errors as JSON");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-o,--out", common.out_path, "Output file (default: stdout)");
    sub->add_flag("--strict", common.strict, "Reject count mismatches and unknown fields");
  };

  std::string validate_dir;
  auto* validate = app.add_subcommand("validate", "Parse every AGAR JSON file of a directory");
  validate->add_option("dir", validate_dir, "Annotation directory")->required();
  add_common(validate);

  std::string convert_to = "coco";
  std::string convert_dir;
  std::string convert_extents;
  auto* convert = app.add_subcommand("convert", "Convert AGAR annotations to COCO");
  convert->add_option("--to", convert_to, "Target format")->required();
  convert->add_option("--annotations,dir", convert_dir, "Annotation directory")->required();
  convert->add_option("--extents", convert_extents, "CSV of sample_id,width,height");
  add_common(convert);

  TileArgs tile_args;
  auto* tile = app.add_subcommand("tile", "Plan training patches or test windows");
  tile->add_option("--mode", tile_args.mode, "train or test")->required();
  tile->add_option("--seed", tile_args.seed, "Random seed (train)");
  tile->add_option("--empty-fraction", tile_args.empty_fraction, "Empty patches per covering patch (train)");
  tile->add_option("--side", tile_args.side, "Patch side in pixels");
  tile->add_option("--overlap", tile_args.overlap, "Window overlap in pixels (test; default side/8)");
  tile->add_option("--width", tile_args.width, "Image width");
  tile->add_option("--height", tile_args.height, "Image height");
  tile->add_option("--image-id", tile_args.image_id, "Image id for --width/--height");
  tile->add_option("--extents", tile_args.extents_path, "CSV of sample_id,width,height");
  tile->add_option("--annotations", tile_args.annotations, "Annotation directory (train)");
  tile->add_option("--oversize", tile_args.oversize, "reject or center");
  add_common(tile);

  MergeArgs merge_args;
  auto* merge = app.add_subcommand("merge", "Merge window detections and filter them");
  merge->add_option("--plan", merge_args.plan, "Tiling manifest")->required();
  merge->add_option("--detections", merge_args.detections, "Window-local detections JSONL")->required();
  merge->add_option("--thresholds", merge_args.thresholds, "Threshold config JSON");
  merge->add_flag("--dual", merge_args.dual, "Use the general/auxiliary policy");
  merge->add_option("--patch-scale", merge_args.patch_scale, "Network input size over window side");
  add_common(merge);

  std::string ed_gt;
  std::string ed_pred;
  std::string ed_iou = "0.5:0.95:0.05";
  bool ed_coco101 = false;
  std::string ed_format = "json";
  auto* eval_det = app.add_subcommand("eval-detection", "AP per IoU threshold and class");
  eval_det->add_option("--gt", ed_gt, "Annotation directory")->required();
  eval_det->add_option("--pred", ed_pred, "Whole-image detections JSONL")->required();
  eval_det->add_option("--iou-set", ed_iou, "start:stop:step");
  eval_det->add_flag("--coco101", ed_coco101, "101-point interpolated AP instead of trapezoid");
  eval_det->add_option("--format", ed_format, "json or text");
  add_common(eval_det);

  std::string ec_gt;
  std::string ec_pred;
  std::string ec_thresholds;
  bool ec_dual = false;
  std::string ec_format = "json";
  auto* eval_count = app.add_subcommand("eval-counting", "MAE, cMAE and sMAPE of predicted counts");
  eval_count->add_option("--gt", ec_gt, "Annotation directory")->required();
  eval_count->add_option("--pred", ec_pred, "Whole-image detections JSONL")->required();
  eval_count->add_option("--thresholds", ec_thresholds, "Filter predictions with this config first");
  eval_count->add_flag("--dual", ec_dual, "Use the general/auxiliary policy");
  eval_count->add_option("--format", ec_format, "json or text");
  add_common(eval_count);

  TuneArgs tune_args;
  auto* tune = app.add_subcommand("tune", "Grid-search probability and NMS thresholds");
  tune->add_option("--gt", tune_args.gt, "Annotation directory")->required();
  tune->add_option("--pred", tune_args.pred, "Unfiltered whole-image detections JSONL")->required();
  tune->add_option("--grid", tune_args.grid, "prob=start:stop:step,nms=start:stop:step");
  tune->add_option("--method", tune_args.method, "hard, linear or gaussian");
  tune->add_option("--priority", tune_args.priority, "area or score");
  tune->add_option("--score-floor", tune_args.score_floor, "Drop boxes decayed below this score");
  tune->add_option("--band", tune_args.band, "sMAPE tie band");
  tune->add_flag("--relative-band", tune_args.relative_band, "Band is a percentage of the best sMAPE");
  tune->add_flag("--dual", tune_args.dual, "Also fit the auxiliary pair");
  tune->add_option("--switch-count", tune_args.switch_count, "Auxiliary switch count");
  add_common(tune);

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->add_option("--annotations,dir", stats_args.annotations, "Annotation directory")->required();
  stats->add_option("--bucket-width", stats_args.bucket_width, "Count histogram bucket width");
  stats->add_option("--heatmap-class", stats_args.heatmap_class, "Class for the spatial heatmap");
  stats->add_option("--resolution", stats_args.resolution, "Heatmap cells per axis");
  stats->add_option("--plate-width", stats_args.plate_width, "Plate width for the heatmap");
  stats->add_option("--plate-height", stats_args.plate_height, "Plate height for the heatmap");
  stats->add_option("--heatmap-mode", stats_args.heatmap_mode, "center or area");
  stats->add_option("--format", stats_args.format, "json or csv");
  add_common(stats);

  std::string synth_config;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  int synth_side = kDefaultPatchSide;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--config", synth_config, "Synthetic dataset config JSON");
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Override the config seed");
  synth->add_option("--side", synth_side, "Test window side");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_dir, common, out);
    if (convert->parsed()) return cmd_convert(convert_to, convert_dir, convert_extents, common, out);
    if (tile->parsed()) return cmd_tile(tile_args, common, out);
    if (merge->parsed()) return cmd_merge(merge_args, common, out);
    if (eval_det->parsed()) return cmd_eval_detection(ed_gt, ed_pred, ed_iou, ed_coco101, ed_format, common, out);
    if (eval_count->parsed())
      return cmd_eval_counting(ec_gt, ec_pred, ec_thresholds, ec_dual, ec_format, common, out);
    if (tune->parsed()) return cmd_tune(tune_args, common, out);
    if (stats->parsed()) return cmd_stats(stats_args, common, out);
    if (synth->parsed()) return cmd_synth(synth_config, synth_out, synth_seed, synth_side, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    if (common.errors_json)
      err << json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << '\n';
    else
      err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const nlohmann::json::exception& e) {
    if (common.errors_json)
      err << json{{"error", "MalformedJson"}, {"message", e.what()}}.dump() << '\n';
    else
      err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace platecount::cli
