#include "platecount/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace platecount {

std::vector<Match> match_detections(const std::vector<Label>& gt, const std::vector<Detection>& dets,
                                    double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw Error(ErrorCode::InvalidThreshold, "iou_threshold must lie in (0, 1]");

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<bool> taken(gt.size(), false);
  std::vector<Match> matches;
  matches.reserve(dets.size());
  for (std::size_t di : order) {
    const Detection& d = dets[di];
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
      if (taken[gi] || gt[gi].cls != d.cls) continue;
      const double u = iou(gt[gi].box, d.box);
      if (u >= iou_threshold && u > best_iou) {
        best_iou = u;
        best = gi;
      }
    }
    if (best) taken[*best] = true;
    matches.push_back({di, best});
  }
  return matches;
}

MatchOutcome tally(const std::vector<Match>& matches, std::size_t num_gt) {
  MatchOutcome out;
  for (const Match& m : matches) (m.gt_index ? out.tp : out.fp) += 1;
  out.fn = static_cast<long>(num_gt) - out.tp;
  return out;
}

std::vector<PRPoint> pr_curve(const std::vector<SampleView>& samples, double iou_threshold) {
  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> scored;
  long total_gt = 0;
  for (const SampleView& s : samples) {
    total_gt += static_cast<long>(s.gt->size());
    for (const Match& m : match_detections(*s.gt, *s.dets, iou_threshold))
      scored.push_back({(*s.dets)[m.det_index].score, m.gt_index.has_value()});
  }
  if (scored.empty()) return {PRPoint{}};

  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });
  std::vector<PRPoint> curve;
  long tp = 0;
  long fp = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    (scored[i].tp ? tp : fp) += 1;
    if (i + 1 < scored.size() && scored[i + 1].score == scored[i].score) continue;
    PRPoint p;
    p.recall = total_gt > 0 ? static_cast<double>(tp) / static_cast<double>(total_gt) : 0.0;
    p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    p.score_cutoff = scored[i].score;
    curve.push_back(p);
  }
  return curve;
}

std::vector<PRPoint> pr_curve(const std::vector<Label>& gt, const std::vector<Detection>& dets,
                              double iou_threshold) {
  return pr_curve(std::vector<SampleView>{{&gt, &dets}}, iou_threshold);
}

double average_precision(const std::vector<PRPoint>& curve, ApIntegration method) {
  if (curve.empty()) throw Error(ErrorCode::EmptyInput, "empty precision/recall curve");
  std::vector<PRPoint> pts = curve;
  std::stable_sort(pts.begin(), pts.end(),
                   [](const PRPoint& a, const PRPoint& b) { return a.recall < b.recall; });

  if (method == ApIntegration::Coco101) {
    // Interpolated precision: best precision at any recall >= r.
    std::vector<double> envelope(pts.size());
    double running = 0.0;
    for (std::size_t i = pts.size(); i-- > 0;) {
      running = std::max(running, pts[i].precision);
      envelope[i] = running;
    }
    double sum = 0.0;
    std::size_t k = 0;
    for (int r = 0; r <= 100; ++r) {
      const double recall = r / 100.0;
      while (k < pts.size() && pts[k].recall < recall - 1e-12) ++k;
      if (k < pts.size()) sum += envelope[k];
    }
    return std::clamp(sum / 101.0, 0.0, 1.0);
  }

  double area = 0.0;
  double prev_recall = 0.0;
  double prev_precision = pts.front().precision;
  for (const PRPoint& p : pts) {
    area += (p.recall - prev_recall) * (p.precision + prev_precision) / 2.0;
    prev_recall = p.recall;
    prev_precision = p.precision;
  }
  return std::clamp(area, 0.0, 1.0);
}

std::vector<double> threshold_range(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start)
    throw Error(ErrorCode::InvalidArgument, "threshold range needs step > 0 and stop >= start");
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) out.push_back(std::round((start + i * step) * 1e10) / 1e10);
  return out;
}

std::vector<double> default_iou_thresholds() { return threshold_range(0.50, 0.95, 0.05); }

APReport map_report(const std::map<long, std::vector<Label>>& gt_by_sample,
                    const std::map<long, std::vector<Detection>>& dets_by_sample,
                    const std::vector<double>& thresholds, ApIntegration method) {
  if (thresholds.empty()) throw Error(ErrorCode::EmptyInput, "no IoU thresholds");
  for (const auto& [id, dets] : dets_by_sample)
    if (!gt_by_sample.count(id))
      throw Error(ErrorCode::MissingSample, "predictions for unknown sample " + std::to_string(id));

  // Split each sample by class once.
  using PerClass = std::array<std::vector<Label>, kNumClasses>;
  using PerClassDets = std::array<std::vector<Detection>, kNumClasses>;
  std::vector<PerClass> gt_split;
  std::vector<PerClassDets> det_split;
  std::array<long, kNumClasses> num_gt{};
  for (const auto& [id, labels] : gt_by_sample) {
    PerClass g;
    for (const Label& l : labels) {
      g[index_of(l.cls)].push_back(l);
      ++num_gt[index_of(l.cls)];
    }
    PerClassDets d;
    if (auto it = dets_by_sample.find(id); it != dets_by_sample.end())
      for (const Detection& det : it->second) d[index_of(det.cls)].push_back(det);
    gt_split.push_back(std::move(g));
    det_split.push_back(std::move(d));
  }

  APReport report;
  report.thresholds = thresholds;
  report.per_iou.assign(thresholds.size(), 0.0);
  for (ColonyClass c : kAllClasses) {
    const std::size_t ci = index_of(c);
    if (num_gt[ci] == 0) continue;
    std::vector<SampleView> views;
    for (std::size_t s = 0; s < gt_split.size(); ++s) views.push_back({&gt_split[s][ci], &det_split[s][ci]});
    ClassAP cap;
    cap.num_gt = num_gt[ci];
    for (double t : thresholds) cap.per_iou.push_back(average_precision(pr_curve(views, t), method));
    cap.mean = std::accumulate(cap.per_iou.begin(), cap.per_iou.end(), 0.0) /
               static_cast<double>(cap.per_iou.size());
    report.per_class[c] = std::move(cap);
  }
  if (!report.per_class.empty()) {
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      double sum = 0.0;
      for (const auto& [c, cap] : report.per_class) sum += cap.per_iou[t];
      report.per_iou[t] = sum / static_cast<double>(report.per_class.size());
    }
  }
  report.mean = std::accumulate(report.per_iou.begin(), report.per_iou.end(), 0.0) /
                static_cast<double>(report.per_iou.size());
  return report;
}

CountMatrix microbe_count_matrix(const std::vector<ClassCounts>& counts) {
  CountMatrix m(static_cast<Eigen::Index>(counts.size()), static_cast<Eigen::Index>(kNumMicrobes));
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t k = 0; k < kNumMicrobes; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = counts[i][kMicrobeClasses[k]];
  return m;
}

CountReport count_report(const std::vector<CountPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no countable samples");
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::Matrix<long, Eigen::Dynamic, 1> truth(n);
  Eigen::Matrix<long, Eigen::Dynamic, 1> pred(n);
  std::vector<ClassCounts> truth_classes;
  std::vector<ClassCounts> pred_classes;
  for (Eigen::Index i = 0; i < n; ++i) {
    const CountPair& p = pairs[static_cast<std::size_t>(i)];
    truth(i) = p.truth_total;
    pred(i) = p.predicted.microbe_total();
    truth_classes.push_back(p.truth);
    pred_classes.push_back(p.predicted);
  }
  const CountMatrix truth_m = microbe_count_matrix(truth_classes);
  const CountMatrix pred_m = microbe_count_matrix(pred_classes);

  CountReport report;
  report.n_samples = static_cast<long>(n);
  report.mae = mae(truth, pred);
  report.smape = smape(truth, pred);
  for (std::size_t k = 0; k < kNumMicrobes; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    report.per_class_mae[kMicrobeClasses[k]] = mae(truth_m.col(col), pred_m.col(col));
  }
  report.cmae = cmae(truth_m, pred_m);
  return report;
}

CountabilityStatus classify_predicted_count(long predicted_total) {
  if (predicted_total <= 0) return CountabilityStatus::Empty;
  if (predicted_total > kUncountableCap) return CountabilityStatus::Uncountable;
  return CountabilityStatus::Countable;
}

CountabilityReport countability_report(const std::vector<CountabilityStatus>& truth_status,
                                       const std::vector<long>& predicted_totals) {
  if (truth_status.size() != predicted_totals.size())
    throw Error(ErrorCode::LengthMismatch, "status and prediction vectors differ in length");
  CountabilityReport r;
  for (std::size_t i = 0; i < truth_status.size(); ++i) {
    const CountabilityStatus predicted = classify_predicted_count(predicted_totals[i]);
    if (truth_status[i] == CountabilityStatus::Empty) {
      ++r.empty_samples;
      if (predicted != CountabilityStatus::Empty) ++r.empty_with_predictions;
    } else if (truth_status[i] == CountabilityStatus::Uncountable) {
      ++r.uncountable_samples;
      if (predicted != CountabilityStatus::Uncountable) ++r.uncountable_under_cap;
    }
  }
  if (r.empty_samples > 0)
    r.empty_false_positive_rate = static_cast<double>(r.empty_with_predictions) / r.empty_samples;
  if (r.uncountable_samples > 0)
    r.uncountable_under_cap_rate = static_cast<double>(r.uncountable_under_cap) / r.uncountable_samples;
  return r;
}

}  // namespace platecount
