// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "platecount/agar_io.hpp"
#include "platecount/cli.hpp"
#include "platecount/metrics.hpp"
#include "platecount/postprocess.hpp"
#include "platecount/stats.hpp"
#include "platecount/synth.hpp"
#include "platecount/tiler.hpp"
#include "platecount/tuner.hpp"
#include "test_support.hpp"
#include "tuner_oracle.hpp"

namespace platecount {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

Verdict pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Outcome::Fail, std::move(d)}; }

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

NmsConfig hard_nms(double threshold = 0.5) {
  NmsConfig c;
  c.method = NmsMethod::Hard;
  c.iou_threshold = threshold;
  return c;
}

// 1 ---------------------------------------------------------------------------
Verdict iou_oracle() {
  const auto t0 = Clock::now();
  testing::Rng rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const BBox a = testing::random_box(rng, 60, 40);
    const BBox b = testing::random_box(rng, 60, 40);
    worst = std::max(worst, std::abs(iou(a, b) - oracle_iou(a, b, 0.01)));
  }
  const double elapsed = seconds_since(t0);
  const std::string d = fmt("max |iou - oracle| = %.2e over 1000 pairs in %.2f s", worst, elapsed);
  return worst <= 1e-3 && elapsed < 5.0 ? pass(d) : fail(d);
}

// 2 ---------------------------------------------------------------------------
Verdict counting_metrics() {
  struct Case {
    const char* name;
    double got;
    double want;
  };
  Eigen::MatrixXi zero = Eigen::MatrixXi::Zero(10, 5);
  Eigen::MatrixXi per_class = zero;
  per_class.col(0).head(5).setOnes();
  per_class.col(1).head(2).setOnes();
  per_class.col(3).head(3).setOnes();

  std::vector<CountPair> misclassified(4);
  for (CountPair& c : misclassified) {
    c.truth_total = 3;
    c.truth[ColonyClass::SAureus] = 3;
    c.predicted[ColonyClass::SAureus] = 3;
  }
  misclassified[2].predicted[ColonyClass::SAureus] = 2;
  misclassified[2].predicted[ColonyClass::BSubtilis] = 1;
  const CountReport mis = count_report(misclassified);

  const std::vector<Case> cases = {
      {"mae identical", mae(std::vector<long>{7, 0, 12}, std::vector<long>{7, 0, 12}), 0.0},
      {"mae [10,20]/[12,17]", mae(std::vector<long>{10, 20}, std::vector<long>{12, 17}), 2.5},
      {"mae [0]/[3]", mae(std::vector<long>{0}, std::vector<long>{3}), 3.0},
      {"smape identical", smape(std::vector<long>{7, 0, 12}, std::vector<long>{7, 0, 12}), 0.0},
      {"smape [0]/[0]", smape(std::vector<long>{0}, std::vector<long>{0}), 0.0},
      {"smape [50]/[40]", smape(std::vector<long>{50}, std::vector<long>{40}), 100.0 / 9.0},
      {"smape [0,4]/[0,0]", smape(std::vector<long>{0, 4}, std::vector<long>{0, 0}), 50.0},
      {"cmae exact", cmae(zero, zero), 0.0},
      {"cmae {0.5,0.2,0,0.3,0}", cmae(zero, per_class), 1.0},
      {"misclassified mae", mis.mae, 0.0},
      {"misclassified cmae", mis.cmae, 2.0 / 4.0},
  };
  for (const Case& c : cases)
    if (std::abs(c.got - c.want) > 1e-9) return fail(fmt("%s: got %.12g want %.12g", c.name, c.got, c.want));
  return pass(fmt("%zu hand-computed fixtures within 1e-9", cases.size()));
}

// 3 ---------------------------------------------------------------------------
Verdict ap_sanity() {
  const auto t0 = Clock::now();
  SynthConfig cfg;
  cfg.seed = 303;
  cfg.n_samples = 50;
  cfg.noise.jitter_frac = 0.1;
  cfg.noise.score_model.score_sd = 0.05;
  const auto samples = generate(cfg);

  std::map<long, std::vector<Label>> gt;
  std::map<long, std::vector<Detection>> perfect;
  std::map<long, std::vector<Detection>> jittered;
  for (const SynthSample& s : samples) {
    const long id = s.annotation.sample_id;
    gt[id] = s.annotation.labels;
    perfect[id] = s.ideal_detections;
    jittered[id] = s.noisy_detections;
  }
  const APReport p = map_report(gt, perfect);
  const APReport e = map_report(gt, {});
  const APReport j = map_report(gt, jittered);
  const double elapsed = seconds_since(t0);

  for (std::size_t t = 0; t < p.thresholds.size(); ++t)
    if (p.per_iou[t] != 1.0) return fail(fmt("perfect detector AP %.6f at IoU %.2f", p.per_iou[t], p.thresholds[t]));
  for (double v : e.per_iou)
    if (v != 0.0) return fail(fmt("empty detector AP %.6f", v));
  const std::string d = fmt("perfect 1.0, empty 0.0, jittered AP50 %.4f > AP95 %.4f; %.2f s", j.per_iou.front(),
                            j.per_iou.back(), elapsed);
  return j.per_iou.front() > j.per_iou.back() && elapsed < 10.0 ? pass(d) : fail(d);
}

// 4 ---------------------------------------------------------------------------
Verdict tiling_completeness() {
  SynthConfig cfg;
  cfg.seed = 404;
  cfg.n_samples = 100;
  cfg.counts.kind = CountKind::Bimodal;
  cfg.counts.high_max = 200;
  long boxes = 0;
  long windows = 0;
  testing::Rng extent_rng(405);
  for (const SynthSample& s : generate(cfg)) {
    std::vector<BBox> gt;
    for (const Label& l : s.annotation.labels) gt.push_back(l.box);
    const TilingPlan train = plan_train_patches(cfg.plate_extent, gt, 7 + static_cast<std::uint64_t>(s.annotation.sample_id));
    for (const BBox& b : gt) {
      bool inside = false;
      for (const PatchWindow& w : train.windows) inside = inside || contains(w.bounds(), b);
      if (!inside) return fail(fmt("sample %ld: box not contained in any training patch", s.annotation.sample_id));
    }
    boxes += static_cast<long>(gt.size());

    // Test grids over varied extents: every pixel covered, neighbors overlap by 64.
    const ImageExtent extent{static_cast<int>(testing::uniform_int(extent_rng, 300, 4000)),
                             static_cast<int>(testing::uniform_int(extent_rng, 300, 4000))};
    const TilingPlan test = plan_test_windows(extent, 512, 64);
    std::set<int> xs;
    std::set<int> ys;
    for (const PatchWindow& w : test.windows) {
      xs.insert(w.x0);
      ys.insert(w.y0);
    }
    for (const auto* axis : {&xs, &ys}) {
      const int length = axis == &xs ? extent.width : extent.height;
      int covered_to = 0;
      int prev = -1;
      for (int o : *axis) {
        if (o > covered_to) return fail(fmt("gap before window origin %d", o));
        if (prev >= 0 && prev + 512 - o != 64) return fail(fmt("overlap %d between origins %d and %d", prev + 512 - o, prev, o));
        covered_to = o + 512;
        prev = o;
      }
      if (covered_to < length) return fail(fmt("coverage ends at %d of %d", covered_to, length));
    }
    if (xs.size() * ys.size() != test.windows.size()) return fail("test windows do not form a grid");
    windows += static_cast<long>(test.windows.size());
  }
  return pass(fmt("%ld boxes covered on 100 plates; %ld test windows with exact 64 px overlap", boxes, windows));
}

// 5 ---------------------------------------------------------------------------
Verdict zero_noise_round_trip() {
  const auto t0 = Clock::now();
  SynthConfig cfg;
  cfg.seed = 505;
  cfg.n_samples = 100;
  cfg.counts.kind = CountKind::Bimodal;
  cfg.counts.high_weight = 0.3;
  cfg.counts.empty_weight = 0.05;
  cfg.noise.score_model.score_sd = 0.0;
  FilterConfig filter;
  filter.nms = hard_nms(0.5);

  std::vector<long> truth;
  std::vector<long> predicted;
  for (const SynthSample& s : generate(cfg)) {
    const TilingPlan plan = plan_test_windows(cfg.plate_extent);
    const auto per_window = project_to_windows(plan, s.ideal_detections);
    const auto kept = apply_filters(merge_windows(plan, per_window), filter);
    const ClassCounts got = predict_counts(kept);
    if (got != count_labels(s.annotation.labels))
      return fail(fmt("sample %ld: per-class counts differ", s.annotation.sample_id));
    truth.push_back(s.annotation.colonies_number);
    predicted.push_back(got.microbe_total());
  }
  const double s = smape(truth, predicted);
  const double m = mae(truth, predicted);
  const double elapsed = seconds_since(t0);
  const std::string d = fmt("sMAPE %.3f%%, MAE %.3f on 100 plates in %.2f s", s, m, elapsed);
  return s == 0.0 && m == 0.0 && elapsed < 30.0 ? pass(d) : fail(d);
}

// 6 ---------------------------------------------------------------------------
Verdict area_priority() {
  const Detection a{{0, 0, 20, 20}, ColonyClass::EColi, 0.6};
  const Detection b{{5, 5, 10, 10}, ColonyClass::EColi, 0.9};
  NmsConfig cfg = hard_nms(0.2);
  const auto by_area = area_priority_soft_nms({a, b}, cfg);
  cfg.priority = NmsPriority::Score;
  const auto by_score = area_priority_soft_nms({a, b}, cfg);
  if (by_area.size() != 1 || !(by_area[0] == a)) return fail("area priority did not keep the larger box alone");
  if (by_score.size() != 1 || !(by_score[0] == b)) return fail("score priority did not keep the confident box alone");
  return pass("priority=Area keeps A (area 400), priority=Score keeps B (score 0.9)");
}

// 7 ---------------------------------------------------------------------------
Verdict tuner_correctness() {
  TuningDataset data;
  for (long truth : {4L, 9L, 15L, 22L, 38L}) {
    TuningSample s;
    s.truth_total = truth;
    for (long i = 0; i < truth; ++i)
      s.raw.push_back({{30.0 * static_cast<double>(i), 0, 20, 20}, ColonyClass::EColi, 0.9});
    s.raw.push_back({{0, 500, 20, 20}, ColonyClass::EColi, 0.3});
    data.push_back(s);
  }
  GridSpec grid;
  grid.prob_values = threshold_range(0.1, 0.9, 0.1);
  grid.nms_values = threshold_range(0.1, 0.9, 0.1);
  TunerOptions options;
  options.nms = hard_nms();
  const GridSearchResult r = grid_search(grid, data, options);
  const ThresholdPair oracle = testing::brute_force_best(grid, data, options.nms);
  if (!(r.best == oracle))
    return fail(fmt("grid_search (%.2f, %.2f) vs exhaustive (%.2f, %.2f)", r.best.prob_threshold,
                    r.best.nms_threshold, oracle.prob_threshold, oracle.nms_threshold));
  if (std::abs(r.best.prob_threshold - 0.4) > 1e-12 || r.score.smape != 0.0)
    return fail(fmt("expected prob 0.4 with sMAPE 0, got %.2f / %.4f", r.best.prob_threshold, r.score.smape));

  const std::vector<GridEntry> band = {{{0.3, 0.5}, {5.00, 3.0}}, {{0.4, 0.5}, {5.05, 2.0}}};
  const std::vector<GridEntry> outside = {{{0.3, 0.5}, {5.00, 3.0}}, {{0.4, 0.5}, {5.15, 2.0}}};
  if (select_best(band, 0.1, BandMode::Absolute) != 1) return fail("5.05%/MAE 2 did not win inside the 0.1 band");
  if (select_best(outside, 0.1, BandMode::Absolute) != 0) return fail("5.15% won despite lying outside the band");
  return pass("spurious-box fixture picks (0.4, 0.1) = exhaustive argmin; 0.1-point band prefers lower MAE");
}

// 8 ---------------------------------------------------------------------------
Verdict double_thresholding() {
  SynthConfig cfg;
  cfg.seed = 808;
  cfg.n_samples = 80;
  cfg.counts.kind = CountKind::Bimodal;
  cfg.counts.high_weight = 0.15;
  cfg.counts.high_min = 80;
  cfg.counts.high_max = 200;
  cfg.noise.spurious_rate = 4.0;
  cfg.noise.score_model.score_sd = 0.03;
  cfg.noise.score_model.spurious_min = 0.35;
  cfg.noise.score_model.spurious_max = 0.5;
  cfg.noise.score_model.crowd_threshold = 50;
  cfg.noise.score_model.crowd_fraction = 0.3;
  cfg.noise.score_model.crowd_score_min = 0.15;
  cfg.noise.score_model.crowd_score_max = 0.3;
  const TuningDataset data = tuning_dataset(generate(cfg));

  TunerOptions options;
  options.nms = hard_nms();
  const DualPolicy policy = fit_dual_policy(default_grid(), data, kDefaultSwitchCount, options);
  const PairScore general = evaluate_policy(policy, data, PolicyMode::General, options.nms);
  const PairScore auxiliary = evaluate_policy(policy, data, PolicyMode::Auxiliary, options.nms);
  const PairScore mixed = evaluate_policy(policy, data, PolicyMode::Mixed, options.nms);
  const std::string d = fmt("sMAPE mixed %.3f%% <= general %.3f%%, auxiliary %.3f%% >= mixed (general p=%.2f, aux p=%.2f)",
                            mixed.smape, general.smape, auxiliary.smape, policy.general.prob_threshold,
                            policy.auxiliary.prob_threshold);
  if (!(policy.auxiliary.prob_threshold < policy.general.prob_threshold))
    return fail("fixture is degenerate: auxiliary threshold not below general; " + d);
  return mixed.smape <= general.smape && auxiliary.smape >= mixed.smape ? pass(d) : fail(d);
}

// 9 ---------------------------------------------------------------------------
Verdict agar_statistics() {
  const char* dir = std::getenv("AGAR_ANNOTATIONS_DIR");
  if (!dir || !std::filesystem::is_directory(dir))
    return {Outcome::Skip, "AGAR annotations not found; set AGAR_ANNOTATIONS_DIR to the directory of per-sample JSON files"};
  std::ostringstream out;
  std::ostringstream err;
  if (cli::run({"stats", "--annotations", dir}, out, err) != 0) return fail("stats failed: " + err.str());
  const json doc = json::parse(out.str());
  const long total = doc["summary"]["total_annotations"].get<long>();
  const json& b = doc["size_buckets"];
  const SizeBuckets buckets{b["below_128"].get<long>(), b["between_128_512"].get<long>(), b["above_512"].get<long>()};
  const double q1 = doc["summary"]["count_histogram"]["q1"].get<double>();
  const double q3 = doc["summary"]["count_histogram"]["q3"].get<double>();
  const std::string d = fmt("annotations %ld, buckets (%ld; %ld; %ld), IQR [%g, %g]", total, buckets.below_128,
                            buckets.between_128_512, buckets.above_512, q1, q3);
  const bool ok = total == 336442 && buckets == SizeBuckets{154630, 180173, 1639} && q1 == 4.0 && q3 == 38.0;
  return ok ? pass(d) : fail(d);
}

// 10 --------------------------------------------------------------------------
std::string coco_schema_error(const json& doc) {
  for (const char* key : {"images", "annotations", "categories"})
    if (!doc.contains(key) || !doc[key].is_array()) return std::string("missing array ") + key;
  std::set<long> category_ids;
  for (const json& c : doc["categories"]) {
    if (!c.contains("id") || !c["id"].is_number_integer() || !c.contains("name") || !c["name"].is_string())
      return "category needs integer id and string name";
    if (!category_ids.insert(c["id"].get<long>()).second) return "duplicate category id";
  }
  if (category_ids.size() != kNumClasses) return "expected 7 categories";
  std::set<long> image_ids;
  for (const json& im : doc["images"]) {
    if (!im.contains("id") || !im["id"].is_number_integer() || !im.contains("file_name") || !im["file_name"].is_string())
      return "image needs integer id and file_name";
    if (!im.contains("background") || !im["background"].is_string()) return "image lacks background";
    if (!image_ids.insert(im["id"].get<long>()).second) return "duplicate image id";
  }
  std::set<long> annotation_ids;
  for (const json& a : doc["annotations"]) {
    for (const char* key : {"id", "image_id", "category_id", "iscrowd"})
      if (!a.contains(key) || !a[key].is_number_integer()) return std::string("annotation lacks integer ") + key;
    if (!annotation_ids.insert(a["id"].get<long>()).second) return "duplicate annotation id";
    if (!image_ids.count(a["image_id"].get<long>())) return "annotation references unknown image";
    if (!category_ids.count(a["category_id"].get<long>())) return "annotation references unknown category";
    const json& bbox = a["bbox"];
    if (!bbox.is_array() || bbox.size() != 4) return "bbox must have 4 numbers";
    for (const json& v : bbox)
      if (!v.is_number()) return "bbox must have 4 numbers";
    if (!a.contains("area") || std::abs(a["area"].get<double>() - bbox[2].get<double>() * bbox[3].get<double>()) > 1e-6)
      return "area differs from w*h";
  }
  return {};
}

Verdict format_round_trip() {
  testing::Rng rng(1010);
  std::vector<SampleAnnotation> samples;
  for (long i = 0; i < 1000; ++i) {
    const SampleAnnotation s = testing::random_sample(rng, i + 1);
    const SampleAnnotation once = parse_agar(write_agar(s), {Strictness::Strict});
    const SampleAnnotation twice = parse_agar(write_agar(once), {Strictness::Strict});
    if (!(once == s) || !(twice == s)) return fail(fmt("fixture %ld differs after round trip", i));
    samples.push_back(s);
  }
  const json coco = json::parse(to_coco(samples));
  const std::string problem = coco_schema_error(coco);
  if (!problem.empty()) return fail("COCO export: " + problem);
  std::size_t labels = 0;
  for (const SampleAnnotation& s : samples) labels += s.labels.size();
  if (coco["annotations"].size() != labels) return fail("COCO annotation count differs from label count");
  return pass(fmt("1000 fixtures round-trip exactly; COCO export of %zu annotations passes the schema check", labels));
}

}  // namespace
}  // namespace platecount

int main() {
  using namespace platecount;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"IoU oracle equivalence", iou_oracle},
      {"counting-metric exactness", counting_metrics},
      {"AP sanity", ap_sanity},
      {"tiling completeness", tiling_completeness},
      {"zero-noise round trip", zero_noise_round_trip},
      {"area-priority NMS", area_priority},
      {"tuner correctness", tuner_correctness},
      {"double-thresholding direction", double_thresholding},
      {"AGAR dataset statistics", agar_statistics},
      {"format round trip", format_round_trip},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    std::printf("%s [%zu] %s: %s\n", tag, i + 1, criteria[i].first, v.detail.c_str());
    failures += v.outcome == Outcome::Fail;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
