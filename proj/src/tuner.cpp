#include "platecount/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <thread>
#include <tuple>

#include "platecount/json_format.hpp"
#include "platecount/metrics.hpp"

namespace platecount {
namespace {

void check_increasing(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, std::string(name) + " is empty");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1]))
      throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be strictly increasing");
}

PairScore score_counts(const std::vector<long>& truth, const std::vector<long>& pred) {
  return {smape(truth, pred), mae(truth, pred)};
}

TuningDataset countable_only(const TuningDataset& dataset) {
  TuningDataset out;
  for (const TuningSample& s : dataset)
    if (s.truth_total >= 0) out.push_back(s);
  if (out.empty()) throw Error(ErrorCode::EmptyDataset, "no countable samples");
  return out;
}

}  // namespace

GridSpec default_grid() {
  GridSpec g;
  g.prob_values = threshold_range(0.05, 0.95, 0.05);
  g.nms_values = threshold_range(0.1, 0.9, 0.1);
  return g;
}

void validate(const GridSpec& grid) {
  check_increasing(grid.prob_values, "prob_values");
  check_increasing(grid.nms_values, "nms_values");
  if (grid.prob_values.front() < 0.0 || grid.prob_values.back() > 1.0)
    throw Error(ErrorCode::InvalidThreshold, "prob_values must lie in [0, 1]");
  if (!(grid.tiebreak_band >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative tiebreak band");
}

FilterConfig filter_config(const ThresholdPair& pair, const NmsConfig& base) {
  FilterConfig cfg;
  cfg.prob_threshold = pair.prob_threshold;
  cfg.nms = base;
  if (base.method == NmsMethod::SoftGaussian)
    cfg.nms.sigma = pair.nms_threshold;
  else
    cfg.nms.iou_threshold = pair.nms_threshold;
  return cfg;
}

PairScore evaluate_pair(const ThresholdPair& pair, const TuningDataset& dataset,
                        const TunerOptions& options) {
  const FilterConfig cfg = filter_config(pair, options.nms);
  std::vector<long> truth;
  std::vector<long> pred;
  for (const TuningSample& s : dataset) {
    if (s.truth_total < 0) continue;
    truth.push_back(s.truth_total);
    pred.push_back(predict_counts(apply_filters(s.raw, cfg)).microbe_total());
  }
  if (truth.empty()) throw Error(ErrorCode::EmptyDataset, "no countable samples");
  return score_counts(truth, pred);
}

std::size_t select_best(const std::vector<GridEntry>& table, double band, BandMode mode) {
  if (table.empty()) throw Error(ErrorCode::EmptyInput, "empty grid");
  double best_smape = std::numeric_limits<double>::infinity();
  for (const GridEntry& e : table) best_smape = std::min(best_smape, e.score.smape);
  const double width = mode == BandMode::Absolute ? band : best_smape * band / 100.0;

  std::size_t best = table.size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double gap = table[i].score.smape - best_smape;
    if (gap != 0.0 && !(gap < width)) continue;
    if (best == table.size() || table[i].score.mae < table[best].score.mae) {
      best = i;
      continue;
    }
    if (table[i].score.mae > table[best].score.mae) continue;
    const ThresholdPair& a = table[i].pair;
    const ThresholdPair& b = table[best].pair;
    if (std::tie(a.prob_threshold, a.nms_threshold) < std::tie(b.prob_threshold, b.nms_threshold)) best = i;
  }
  return best;
}

GridSearchResult grid_search(const GridSpec& grid, const TuningDataset& dataset,
                             const TunerOptions& options) {
  validate(grid);
  const TuningDataset usable = countable_only(dataset);

  GridSearchResult result;
  for (double p : grid.prob_values)
    for (double n : grid.nms_values) result.table.push_back({{p, n}, {}});

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < result.table.size(); i = next++) {
      try {
        result.table[i].score = evaluate_pair(result.table[i].pair, usable, options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads,
                                                           static_cast<unsigned>(result.table.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  const std::size_t best = select_best(result.table, grid.tiebreak_band, grid.band_mode);
  result.best = result.table[best].pair;
  result.score = result.table[best].score;
  return result;
}

DualPolicy fit_dual_policy(const GridSpec& grid, const TuningDataset& dataset, long switch_count,
                           const TunerOptions& options) {
  if (switch_count < 0) throw Error(ErrorCode::InvalidArgument, "switch_count must be >= 0");
  TuningDataset crowded;
  for (const TuningSample& s : dataset)
    if (s.truth_total > switch_count) crowded.push_back(s);
  if (crowded.empty())
    throw Error(ErrorCode::NoHighCountSamples,
                "no sample with more than " + std::to_string(switch_count) + " colonies");
  DualPolicy policy;
  policy.switch_count = switch_count;
  policy.general = grid_search(grid, dataset, options).best;
  policy.auxiliary = grid_search(grid, crowded, options).best;
  return policy;
}

std::vector<Detection> apply_dual_policy(const DualPolicy& policy, const std::vector<Detection>& raw,
                                         const NmsConfig& nms) {
  std::vector<Detection> general = apply_filters(raw, filter_config(policy.general, nms));
  if (predict_counts(general).microbe_total() <= policy.switch_count) return general;
  return apply_filters(raw, filter_config(policy.auxiliary, nms));
}

PairScore evaluate_policy(const DualPolicy& policy, const TuningDataset& dataset, PolicyMode mode,
                          const NmsConfig& nms) {
  std::vector<long> truth;
  std::vector<long> pred;
  for (const TuningSample& s : dataset) {
    if (s.truth_total < 0) continue;
    std::vector<Detection> kept;
    switch (mode) {
      case PolicyMode::General: kept = apply_filters(s.raw, filter_config(policy.general, nms)); break;
      case PolicyMode::Auxiliary: kept = apply_filters(s.raw, filter_config(policy.auxiliary, nms)); break;
      case PolicyMode::Mixed: kept = apply_dual_policy(policy, s.raw, nms); break;
    }
    truth.push_back(s.truth_total);
    pred.push_back(predict_counts(kept).microbe_total());
  }
  if (truth.empty()) throw Error(ErrorCode::EmptyDataset, "no countable samples");
  return score_counts(truth, pred);
}

std::string_view method_name(NmsMethod m) {
  switch (m) {
    case NmsMethod::Hard: return "hard";
    case NmsMethod::SoftLinear: return "linear";
    case NmsMethod::SoftGaussian: return "gaussian";
  }
  return "?";
}

NmsMethod parse_method(std::string_view name) {
  const std::string n = normalize_name(name);
  if (n == "hard") return NmsMethod::Hard;
  if (n == "linear" || n == "soft-linear") return NmsMethod::SoftLinear;
  if (n == "gaussian" || n == "soft-gaussian") return NmsMethod::SoftGaussian;
  throw Error(ErrorCode::InvalidArgument, "unknown NMS method '" + std::string(name) + "'");
}

std::string_view priority_name(NmsPriority p) { return p == NmsPriority::Area ? "area" : "score"; }

NmsPriority parse_priority(std::string_view name) {
  const std::string n = normalize_name(name);
  if (n == "area") return NmsPriority::Area;
  if (n == "score") return NmsPriority::Score;
  throw Error(ErrorCode::InvalidArgument, "unknown NMS priority '" + std::string(name) + "'");
}

nlohmann::json to_json(const ThresholdConfig& cfg) {
  nlohmann::json doc = {{"method", std::string(method_name(cfg.nms.method))},
                        {"priority", std::string(priority_name(cfg.nms.priority))},
                        {"score_floor", real_json(cfg.nms.score_floor)},
                        {"prob_threshold", real_json(cfg.general.prob_threshold)},
                        {"nms_threshold", real_json(cfg.general.nms_threshold)},
                        {"switch_count", cfg.switch_count}};
  if (cfg.auxiliary)
    doc["auxiliary"] = {{"prob_threshold", real_json(cfg.auxiliary->prob_threshold)},
                        {"nms_threshold", real_json(cfg.auxiliary->nms_threshold)}};
  return doc;
}

ThresholdConfig threshold_config_from_json(const nlohmann::json& doc) {
  try {
    ThresholdConfig cfg;
    cfg.nms.method = parse_method(doc.at("method").get<std::string>());
    cfg.nms.priority = parse_priority(doc.value("priority", std::string("area")));
    cfg.nms.score_floor = doc.value("score_floor", cfg.nms.score_floor);
    cfg.general = {doc.at("prob_threshold").get<double>(), doc.at("nms_threshold").get<double>()};
    if (doc.contains("auxiliary") && !doc["auxiliary"].is_null()) {
      const auto& aux = doc["auxiliary"];
      cfg.auxiliary = ThresholdPair{aux.at("prob_threshold").get<double>(),
                                    aux.at("nms_threshold").get<double>()};
    }
    cfg.switch_count = doc.value("switch_count", kDefaultSwitchCount);
    // Fail early on out-of-range values.
    validate(filter_config(cfg.general, cfg.nms).nms);
    if (cfg.auxiliary) validate(filter_config(*cfg.auxiliary, cfg.nms).nms);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("threshold config: ") + e.what());
  }
}

}  // namespace platecount
