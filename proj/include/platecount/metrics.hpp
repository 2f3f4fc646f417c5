#pragma once

// Detection metrics (IoU-thresholded matching, precision/recall curves,
// average precision) and counting metrics (MAE, sMAPE, cMAE).

#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "platecount/types.hpp"

namespace platecount {

// ---------------------------------------------------------------------------
// Detection

struct MatchOutcome {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;

  MatchOutcome& operator+=(const MatchOutcome& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const MatchOutcome&, const MatchOutcome&) = default;
};

struct Match {
  std::size_t det_index = 0;
  std::optional<std::size_t> gt_index;

  friend bool operator==(const Match&, const Match&) = default;
};

/// Greedy matching in descending score order (ties: lower index first). Each
/// detection takes the unmatched same-class ground-truth box with the highest
/// IoU, provided that IoU >= iou_threshold. Result is in processing order.
std::vector<Match> match_detections(const std::vector<Label>& gt, const std::vector<Detection>& dets,
                                    double iou_threshold);

MatchOutcome tally(const std::vector<Match>& matches, std::size_t num_gt);

struct PRPoint {
  double recall = 0.0;
  double precision = 1.0;
  double score_cutoff = std::numeric_limits<double>::infinity();

  friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

/// One sample's ground truth and predictions, viewed without copying.
struct SampleView {
  const std::vector<Label>* gt;
  const std::vector<Detection>* dets;
};

/// Precision/recall at every distinct score cutoff, highest cutoff first.
/// Matching runs per sample; tallies are pooled. With no detections the
/// curve is the single point (recall 0, precision 1).
std::vector<PRPoint> pr_curve(const std::vector<SampleView>& samples, double iou_threshold);
std::vector<PRPoint> pr_curve(const std::vector<Label>& gt, const std::vector<Detection>& dets,
                              double iou_threshold);

enum class ApIntegration { Trapezoid, Coco101 };

/// Area under the precision/recall curve over recall in [0, 1]. The start is
/// closed with the precision of the lowest-recall point; recall beyond the
/// curve's maximum contributes nothing.
double average_precision(const std::vector<PRPoint>& curve,
                         ApIntegration method = ApIntegration::Trapezoid);

/// start:stop:step, inclusive of stop within a small tolerance.
std::vector<double> threshold_range(double start, double stop, double step);
std::vector<double> default_iou_thresholds();

struct ClassAP {
  std::vector<double> per_iou;  // aligned with APReport::thresholds
  double mean = 0.0;
  long num_gt = 0;
};

struct APReport {
  std::vector<double> thresholds;
  std::vector<double> per_iou;  // mean over classes that have ground truth
  double mean = 0.0;
  std::map<ColonyClass, ClassAP> per_class;  // only classes with ground truth
};

/// AP per class and IoU threshold with detections pooled over samples. Ground
/// truth samples without an entry in `dets_by_sample` count as having no
/// predictions; predictions for unknown samples raise MissingSample.
APReport map_report(const std::map<long, std::vector<Label>>& gt_by_sample,
                    const std::map<long, std::vector<Detection>>& dets_by_sample,
                    const std::vector<double>& thresholds = default_iou_thresholds(),
                    ApIntegration method = ApIntegration::Trapezoid);

// ---------------------------------------------------------------------------
// Counting

namespace detail {
template <typename A, typename B>
void check_count_vectors(const Eigen::DenseBase<A>& truth, const Eigen::DenseBase<B>& pred) {
  if (truth.size() != pred.size()) throw Error(ErrorCode::LengthMismatch, "count vectors differ in length");
  if (truth.size() == 0) throw Error(ErrorCode::EmptyInput, "no samples");
}
}  // namespace detail

/// (1/N) * sum |x_i - x~_i|
template <typename A, typename B>
double mae(const Eigen::DenseBase<A>& truth, const Eigen::DenseBase<B>& pred) {
  detail::check_count_vectors(truth, pred);
  const Eigen::ArrayXd t = truth.derived().template cast<double>().array();
  const Eigen::ArrayXd p = pred.derived().template cast<double>().array();
  return (t - p).abs().mean();
}

/// (100/N) * sum |x_i - x~_i| / |x_i + x~_i|, in percent; a term with
/// x_i = x~_i = 0 contributes 0.
template <typename A, typename B>
double smape(const Eigen::DenseBase<A>& truth, const Eigen::DenseBase<B>& pred) {
  detail::check_count_vectors(truth, pred);
  const Eigen::ArrayXd t = truth.derived().template cast<double>().array();
  const Eigen::ArrayXd p = pred.derived().template cast<double>().array();
  if ((t < 0).any() || (p < 0).any()) throw Error(ErrorCode::InvalidArgument, "negative count");
  const Eigen::ArrayXd denom = (t + p).abs();
  const Eigen::ArrayXd terms = (denom > 0).select((t - p).abs() / denom.max(1e-300), 0.0);
  return 100.0 * terms.mean();
}

/// Sum over columns (one per microbe class) of the per-column MAE.
template <typename A, typename B>
double cmae(const Eigen::MatrixBase<A>& truth_by_class, const Eigen::MatrixBase<B>& pred_by_class) {
  if (truth_by_class.rows() != pred_by_class.rows() || truth_by_class.cols() != pred_by_class.cols())
    throw Error(ErrorCode::LengthMismatch, "per-class count matrices differ in shape");
  double total = 0.0;
  for (Eigen::Index m = 0; m < truth_by_class.cols(); ++m)
    total += mae(truth_by_class.col(m), pred_by_class.col(m));
  return total;
}

inline double mae(const std::vector<long>& truth, const std::vector<long>& pred) {
  return mae(Eigen::Map<const Eigen::Matrix<long, Eigen::Dynamic, 1>>(truth.data(), static_cast<Eigen::Index>(truth.size())),
             Eigen::Map<const Eigen::Matrix<long, Eigen::Dynamic, 1>>(pred.data(), static_cast<Eigen::Index>(pred.size())));
}

inline double smape(const std::vector<long>& truth, const std::vector<long>& pred) {
  return smape(Eigen::Map<const Eigen::Matrix<long, Eigen::Dynamic, 1>>(truth.data(), static_cast<Eigen::Index>(truth.size())),
               Eigen::Map<const Eigen::Matrix<long, Eigen::Dynamic, 1>>(pred.data(), static_cast<Eigen::Index>(pred.size())));
}

using CountMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

/// Truth and predicted counts for one sample.
struct CountPair {
  long truth_total = 0;       // colonies_number
  ClassCounts truth;          // from labels
  ClassCounts predicted;
};

struct CountReport {
  long n_samples = 0;
  double mae = 0.0;
  double smape = 0.0;
  double cmae = 0.0;
  std::map<ColonyClass, double> per_class_mae;  // the five microbe classes
  int num_microbe_classes = static_cast<int>(kNumMicrobes);
};

/// MAE/sMAPE on microbe totals and cMAE over the five microbe classes.
CountReport count_report(const std::vector<CountPair>& pairs);

/// N x 5 matrix of microbe counts, one row per sample.
CountMatrix microbe_count_matrix(const std::vector<ClassCounts>& counts);

/// Countability implied by a predicted colony total.
CountabilityStatus classify_predicted_count(long predicted_total);

/// How predicted totals behave on plates annotated as empty or uncountable.
struct CountabilityReport {
  long empty_samples = 0;
  long empty_with_predictions = 0;     // false positives on empty plates
  long uncountable_samples = 0;
  long uncountable_under_cap = 0;      // predicted at most 300 colonies
  double empty_false_positive_rate = 0.0;
  double uncountable_under_cap_rate = 0.0;
};

CountabilityReport countability_report(const std::vector<CountabilityStatus>& truth_status,
                                       const std::vector<long>& predicted_totals);

}  // namespace platecount
