#include "platecount/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "platecount/agar_io.hpp"
#include "platecount/detections_io.hpp"
#include "platecount/json_format.hpp"

namespace platecount {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::bernoulli_distribution(p)(rng);
}

std::pair<double, double> side_range(SizeProfile p) {
  return p == SizeProfile::Small ? std::pair{16.0, 128.0} : std::pair{64.0, 512.0};
}

std::map<ColonyClass, double> effective_mix(const SynthConfig& cfg) {
  if (!cfg.class_mix.empty()) return cfg.class_mix;
  std::map<ColonyClass, double> mix;
  for (ColonyClass c : kMicrobeClasses) mix[c] = 1.0;
  return mix;
}

ColonyClass draw_class(std::mt19937_64& rng, const std::vector<ColonyClass>& classes,
                       const std::vector<double>& weights) {
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return classes[pick(rng)];
}

long draw_count(std::mt19937_64& rng, const CountDistribution& d) {
  if (chance(rng, d.empty_weight)) return 0;
  bool high = d.kind == CountKind::High;
  if (d.kind == CountKind::Bimodal) high = chance(rng, d.high_weight);
  const long lo = high ? d.high_min : d.low_min;
  const long hi = high ? d.high_max : d.low_max;
  return std::uniform_int_distribution<long>(lo, hi)(rng);
}

BBox draw_box(std::mt19937_64& rng, const SynthConfig& cfg) {
  const auto [min_side, max_side] = side_range(cfg.size);
  const double side = std::exp(uniform(rng, std::log(min_side), std::log(max_side)));
  const double aspect = uniform(rng, 0.8, 1.25);
  const double w = std::clamp(std::round(side * std::sqrt(aspect)), 1.0,
                              static_cast<double>(cfg.plate_extent.width));
  const double h = std::clamp(std::round(side / std::sqrt(aspect)), 1.0,
                              static_cast<double>(cfg.plate_extent.height));
  // Centers fall inside the dish: the ellipse inscribed in the plate extent.
  const double rx = cfg.plate_extent.width / 2.0;
  const double ry = cfg.plate_extent.height / 2.0;
  double cx = 0.0;
  double cy = 0.0;
  do {
    cx = uniform(rng, -1.0, 1.0);
    cy = uniform(rng, -1.0, 1.0);
  } while (cx * cx + cy * cy > 1.0);
  const double x = std::clamp(std::round(rx + cx * rx - w / 2.0), 0.0, cfg.plate_extent.width - w);
  const double y = std::clamp(std::round(ry + cy * ry - h / 2.0), 0.0, cfg.plate_extent.height - h);
  return {x, y, w, h};
}

BBox jitter(std::mt19937_64& rng, const BBox& b, double frac, const ImageExtent& extent) {
  if (frac <= 0.0) return b;
  BBox out{b.x + uniform(rng, -frac, frac) * b.w, b.y + uniform(rng, -frac, frac) * b.h,
           b.w * (1.0 + uniform(rng, -frac, frac)), b.h * (1.0 + uniform(rng, -frac, frac))};
  const BBox image{0, 0, static_cast<double>(extent.width), static_cast<double>(extent.height)};
  out = intersection(image, out);
  return is_valid(out) ? out : b;
}

double true_score(std::mt19937_64& rng, const ScoreModel& m, double box_iou, bool crowded) {
  if (crowded && chance(rng, m.crowd_fraction)) return uniform(rng, m.crowd_score_min, m.crowd_score_max);
  double s = 1.0 - m.jitter_penalty * (1.0 - box_iou);
  if (m.score_sd > 0.0) s += std::normal_distribution<double>(0.0, m.score_sd)(rng);
  return std::clamp(s, 0.0, 1.0);
}

SynthSample generate_one(const SynthConfig& cfg, long index) {
  std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(index))));
  const auto mix = effective_mix(cfg);
  std::vector<ColonyClass> classes;
  std::vector<double> weights;
  for (const auto& [c, w] : mix) {
    classes.push_back(c);
    weights.push_back(w);
  }

  SynthSample out;
  SampleAnnotation& ann = out.annotation;
  ann.sample_id = cfg.first_sample_id + index;
  ann.background = kAllBackgrounds[std::uniform_int_distribution<std::size_t>(0, 3)(rng)];

  const long n = draw_count(rng, cfg.counts);
  std::vector<ColonyClass> drawn;
  for (long i = 0; i < n; ++i) drawn.push_back(draw_class(rng, classes, weights));
  const long microbes = std::count_if(drawn.begin(), drawn.end(), is_microbe);

  std::set<ColonyClass> inoculated;
  for (ColonyClass c : drawn)
    if (is_microbe(c)) inoculated.insert(c);
  ann.classes.assign(inoculated.begin(), inoculated.end());

  if (microbes > kUncountableCap) {
    ann.colonies_number = -1;
    return out;
  }
  ann.colonies_number = microbes;

  for (long i = 0; i < n; ++i) {
    BBox box;
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt >= cfg.max_attempts)
        throw Error(ErrorCode::InfeasiblePlacement,
                    "sample " + std::to_string(ann.sample_id) + ": cannot place colony " +
                        std::to_string(i + 1) + " of " + std::to_string(n));
      box = draw_box(rng, cfg);
      const bool clear = std::none_of(ann.labels.begin(), ann.labels.end(), [&](const Label& l) {
        return iou(l.box, box) > cfg.max_overlap_iou;
      });
      if (clear) break;
    }
    ann.labels.push_back({i + 1, drawn[static_cast<std::size_t>(i)], box, nlohmann::json::object()});
  }

  const NoiseConfig& noise = cfg.noise;
  const bool crowded = microbes > noise.score_model.crowd_threshold;
  for (const Label& l : ann.labels) {
    if (!is_microbe(l.cls)) continue;
    out.ideal_detections.push_back({l.box, l.cls, 1.0});
    if (chance(rng, noise.dropout_prob)) continue;
    const BBox noisy_box = jitter(rng, l.box, noise.jitter_frac, cfg.plate_extent);
    const double score = true_score(rng, noise.score_model, iou(noisy_box, l.box), crowded);
    out.noisy_detections.push_back({noisy_box, l.cls, score});
  }

  if (noise.spurious_rate > 0.0) {
    const long spurious = std::poisson_distribution<long>(noise.spurious_rate)(rng);
    std::vector<ColonyClass> microbe_classes;
    std::vector<double> microbe_weights;
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (!is_microbe(classes[k])) continue;
      microbe_classes.push_back(classes[k]);
      microbe_weights.push_back(weights[k]);
    }
    for (long k = 0; k < spurious && !microbe_classes.empty(); ++k) {
      const ColonyClass c = draw_class(rng, microbe_classes, microbe_weights);
      const BBox box = draw_box(rng, cfg);
      const double score = uniform(rng, noise.score_model.spurious_min, noise.score_model.spurious_max);
      out.noisy_detections.push_back({box, c, score});
    }
  }
  return out;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 1]");
  };
  prob(cfg.counts.high_weight, "high_weight");
  prob(cfg.counts.empty_weight, "empty_weight");
  prob(cfg.noise.dropout_prob, "dropout_prob");
  prob(cfg.noise.score_model.crowd_fraction, "crowd_fraction");
  prob(cfg.max_overlap_iou, "max_overlap_iou");
  if (cfg.n_samples < 0) throw Error(ErrorCode::InvalidArgument, "n_samples must be >= 0");
  if (cfg.plate_extent.width <= 0 || cfg.plate_extent.height <= 0)
    throw Error(ErrorCode::InvalidGeometry, "plate extent must be positive");
  if (cfg.counts.low_min < 0 || cfg.counts.low_max < cfg.counts.low_min || cfg.counts.high_min < 0 ||
      cfg.counts.high_max < cfg.counts.high_min)
    throw Error(ErrorCode::InvalidArgument, "count ranges must be non-negative and ordered");
  if (cfg.noise.jitter_frac < 0.0 || cfg.noise.spurious_rate < 0.0 || cfg.noise.score_model.score_sd < 0.0)
    throw Error(ErrorCode::InvalidArgument, "noise parameters must be non-negative");
  double total = 0.0;
  for (const auto& [c, w] : cfg.class_mix) {
    if (w < 0.0) throw Error(ErrorCode::InvalidArgument, "class weights must be non-negative");
    total += w;
  }
  if (!cfg.class_mix.empty() && !(total > 0.0))
    throw Error(ErrorCode::InvalidArgument, "class weights are all zero");
}

std::vector<SynthSample> generate(const SynthConfig& cfg) {
  validate(cfg);
  std::vector<SynthSample> out;
  out.reserve(static_cast<std::size_t>(cfg.n_samples));
  for (long i = 0; i < cfg.n_samples; ++i) out.push_back(generate_one(cfg, i));
  return out;
}

std::vector<WindowDetections> project_to_windows(const TilingPlan& plan,
                                                 const std::vector<Detection>& dets) {
  std::vector<WindowDetections> per_window(plan.windows.size());
  for (std::size_t w = 0; w < plan.windows.size(); ++w) per_window[w].window_index = static_cast<int>(w);

  for (const Detection& d : dets) {
    bool reported = false;
    std::size_t best = 0;
    double best_visible = -1.0;
    for (std::size_t w = 0; w < plan.windows.size(); ++w) {
      const BBox bounds = plan.windows[w].bounds();
      if (contains(bounds, d.box)) {
        per_window[w].detections.push_back({image_to_window(plan.windows[w], d.box), d.cls, d.score});
        reported = true;
      }
      const double visible = intersection_area(bounds, d.box);
      if (visible > best_visible) {
        best_visible = visible;
        best = w;
      }
    }
    if (!reported && !plan.windows.empty())
      per_window[best].detections.push_back({image_to_window(plan.windows[best], d.box), d.cls, d.score});
  }
  std::erase_if(per_window, [](const WindowDetections& w) { return w.detections.empty(); });
  return per_window;
}

TuningDataset tuning_dataset(const std::vector<SynthSample>& samples, bool noisy) {
  TuningDataset out;
  out.reserve(samples.size());
  for (const SynthSample& s : samples)
    out.push_back({s.annotation.colonies_number, noisy ? s.noisy_detections : s.ideal_detections});
  return out;
}

double oracle_iou(const BBox& a, const BBox& b, double grid_step) {
  if (!(grid_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid_step must be positive");
  // Rectangles rasterize separably: a cell is inside a box iff its center is
  // inside along both axes, so 2D cell counts are products of 1D counts.
  struct AxisCounts {
    long in_a = 0;
    long in_b = 0;
    long in_both = 0;
  };
  auto count_axis = [grid_step](double a0, double a1, double b0, double b1) {
    AxisCounts c;
    const double origin = std::min(a0, b0);
    const double end = std::max(a1, b1);
    const auto cells = static_cast<long>(std::ceil((end - origin) / grid_step));
    for (long i = 0; i < cells; ++i) {
      const double center = origin + (static_cast<double>(i) + 0.5) * grid_step;
      const bool ina = center >= a0 && center < a1;
      const bool inb = center >= b0 && center < b1;
      c.in_a += ina;
      c.in_b += inb;
      c.in_both += ina && inb;
    }
    return c;
  };
  const AxisCounts cx = count_axis(a.x, a.right(), b.x, b.right());
  const AxisCounts cy = count_axis(a.y, a.bottom(), b.y, b.bottom());
  const double both = static_cast<double>(cx.in_both) * static_cast<double>(cy.in_both);
  const double area_a = static_cast<double>(cx.in_a) * static_cast<double>(cy.in_a);
  const double area_b = static_cast<double>(cx.in_b) * static_cast<double>(cy.in_b);
  const double either = area_a + area_b - both;
  return either > 0.0 ? both / either : 0.0;
}

long oracle_best_matching(const std::vector<Label>& gt, const std::vector<Detection>& dets,
                          double iou_threshold) {
  if (gt.size() > kOracleMaxBoxes || dets.size() > kOracleMaxBoxes)
    throw Error(ErrorCode::TooLarge, "oracle handles at most 8 boxes per side");
  std::vector<std::vector<bool>> feasible(dets.size(), std::vector<bool>(gt.size(), false));
  for (std::size_t d = 0; d < dets.size(); ++d)
    for (std::size_t g = 0; g < gt.size(); ++g)
      feasible[d][g] = dets[d].cls == gt[g].cls && iou(gt[g].box, dets[d].box) >= iou_threshold;

  std::vector<bool> used(gt.size(), false);
  std::function<long(std::size_t)> best_from = [&](std::size_t d) -> long {
    if (d == dets.size()) return 0;
    long best = best_from(d + 1);  // leave detection d unmatched
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (used[g] || !feasible[d][g]) continue;
      used[g] = true;
      best = std::max(best, 1 + best_from(d + 1));
      used[g] = false;
    }
    return best;
  };
  return best_from(0);
}

SynthConfig synth_config_from_json(const nlohmann::json& doc) {
  try {
    SynthConfig cfg;
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("plate_extent"))
      cfg.plate_extent = {doc["plate_extent"].at("width").get<int>(), doc["plate_extent"].at("height").get<int>()};
    cfg.n_samples = doc.value("n_samples", cfg.n_samples);
    cfg.first_sample_id = doc.value("first_sample_id", cfg.first_sample_id);
    if (doc.contains("count_distribution")) {
      const auto& c = doc["count_distribution"];
      const std::string kind = normalize_name(c.value("kind", std::string("low")));
      if (kind == "low") cfg.counts.kind = CountKind::Low;
      else if (kind == "high") cfg.counts.kind = CountKind::High;
      else if (kind == "bimodal") cfg.counts.kind = CountKind::Bimodal;
      else throw Error(ErrorCode::InvalidArgument, "count_distribution.kind '" + kind + "'");
      cfg.counts.low_min = c.value("low_min", cfg.counts.low_min);
      cfg.counts.low_max = c.value("low_max", cfg.counts.low_max);
      cfg.counts.high_min = c.value("high_min", cfg.counts.high_min);
      cfg.counts.high_max = c.value("high_max", cfg.counts.high_max);
      cfg.counts.high_weight = c.value("high_weight", cfg.counts.high_weight);
      cfg.counts.empty_weight = c.value("empty_weight", cfg.counts.empty_weight);
    }
    if (doc.contains("class_mix")) {
      for (const auto& [name, w] : doc["class_mix"].items()) {
        auto c = AliasTable::defaults().find_class(name);
        if (!c) throw Error(ErrorCode::UnknownClass, name);
        cfg.class_mix[*c] = w.get<double>();
      }
    }
    const std::string size = normalize_name(doc.value("size_profile", std::string("small")));
    if (size == "small") cfg.size = SizeProfile::Small;
    else if (size == "large") cfg.size = SizeProfile::Large;
    else throw Error(ErrorCode::InvalidArgument, "size_profile '" + size + "'");
    if (doc.contains("noise")) {
      const auto& n = doc["noise"];
      cfg.noise.jitter_frac = n.value("jitter_frac", cfg.noise.jitter_frac);
      cfg.noise.dropout_prob = n.value("dropout_prob", cfg.noise.dropout_prob);
      cfg.noise.spurious_rate = n.value("spurious_rate", cfg.noise.spurious_rate);
      if (n.contains("score_model")) {
        const auto& m = n["score_model"];
        ScoreModel& sm = cfg.noise.score_model;
        sm.score_sd = m.value("score_sd", sm.score_sd);
        sm.jitter_penalty = m.value("jitter_penalty", sm.jitter_penalty);
        sm.spurious_min = m.value("spurious_min", sm.spurious_min);
        sm.spurious_max = m.value("spurious_max", sm.spurious_max);
        sm.crowd_threshold = m.value("crowd_threshold", sm.crowd_threshold);
        sm.crowd_fraction = m.value("crowd_fraction", sm.crowd_fraction);
        sm.crowd_score_min = m.value("crowd_score_min", sm.crowd_score_min);
        sm.crowd_score_max = m.value("crowd_score_max", sm.crowd_score_max);
      }
    }
    cfg.max_overlap_iou = doc.value("max_overlap_iou", cfg.max_overlap_iou);
    cfg.max_attempts = doc.value("max_attempts", cfg.max_attempts);
    validate(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("synth config: ") + e.what());
  }
}

nlohmann::json to_json(const SynthConfig& cfg) {
  const char* kinds[] = {"low", "high", "bimodal"};
  nlohmann::json mix = nlohmann::json::object();
  for (const auto& [c, w] : effective_mix(cfg)) mix[std::string(canonical_name(c))] = real_json(w);
  const ScoreModel& sm = cfg.noise.score_model;
  return {{"seed", cfg.seed},
          {"plate_extent", {{"width", cfg.plate_extent.width}, {"height", cfg.plate_extent.height}}},
          {"n_samples", cfg.n_samples},
          {"first_sample_id", cfg.first_sample_id},
          {"count_distribution",
           {{"kind", kinds[static_cast<int>(cfg.counts.kind)]},
            {"low_min", cfg.counts.low_min},
            {"low_max", cfg.counts.low_max},
            {"high_min", cfg.counts.high_min},
            {"high_max", cfg.counts.high_max},
            {"high_weight", real_json(cfg.counts.high_weight)},
            {"empty_weight", real_json(cfg.counts.empty_weight)}}},
          {"class_mix", std::move(mix)},
          {"size_profile", cfg.size == SizeProfile::Small ? "small" : "large"},
          {"noise",
           {{"jitter_frac", real_json(cfg.noise.jitter_frac)},
            {"dropout_prob", real_json(cfg.noise.dropout_prob)},
            {"spurious_rate", real_json(cfg.noise.spurious_rate)},
            {"score_model",
             {{"score_sd", real_json(sm.score_sd)},
              {"jitter_penalty", real_json(sm.jitter_penalty)},
              {"spurious_min", real_json(sm.spurious_min)},
              {"spurious_max", real_json(sm.spurious_max)},
              {"crowd_threshold", sm.crowd_threshold},
              {"crowd_fraction", real_json(sm.crowd_fraction)},
              {"crowd_score_min", real_json(sm.crowd_score_min)},
              {"crowd_score_max", real_json(sm.crowd_score_max)}}}}},
          {"max_overlap_iou", real_json(cfg.max_overlap_iou)},
          {"max_attempts", cfg.max_attempts}};
}

void write_synth_dataset(const std::filesystem::path& dir, const SynthConfig& cfg,
                         const std::vector<SynthSample>& samples, int side) {
  std::filesystem::create_directories(dir / "annotations");
  std::string extents = "sample_id,width,height\n";
  std::vector<DetectionRecord> ideal;
  std::vector<DetectionRecord> noisy;
  std::vector<DetectionRecord> windowed;
  std::vector<TilingPlan> plans;
  for (const SynthSample& s : samples) {
    const long id = s.annotation.sample_id;
    write_text_file(dir / "annotations" / (std::to_string(id) + ".json"), write_agar(s.annotation));
    extents += std::to_string(id) + ',' + std::to_string(cfg.plate_extent.width) + ',' +
               std::to_string(cfg.plate_extent.height) + '\n';
    for (auto& r : to_records(id, s.ideal_detections)) ideal.push_back(r);
    for (auto& r : to_records(id, s.noisy_detections)) noisy.push_back(r);

    TilingPlan plan = plan_test_windows(cfg.plate_extent, side);
    plan.image_id = id;
    for (const WindowDetections& wd : project_to_windows(plan, s.ideal_detections))
      for (const Detection& d : wd.detections) windowed.push_back({id, wd.window_index, d});
    plans.push_back(std::move(plan));
  }
  write_text_file(dir / "extents.csv", extents);
  write_text_file(dir / "detections_ideal.jsonl", write_detections_jsonl(ideal));
  write_text_file(dir / "detections_noisy.jsonl", write_detections_jsonl(noisy));
  write_text_file(dir / "window_detections.jsonl", write_detections_jsonl(windowed));
  write_text_file(dir / "plan.json", manifest_json(plans).dump(2) + "\n");
  write_text_file(dir / "synth_config.json", to_json(cfg).dump(2) + "\n");
}

}  // namespace platecount
