#include "platecount/report.hpp"

#include <cstdio>
#include <sstream>

#include "platecount/json_format.hpp"

namespace platecount {
namespace {

std::string threshold_key(double t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

std::string cell(double v, int width = 12, int precision = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%*.*f", width, precision, v);
  return buf;
}

std::string head(std::string_view name, int width = 12) {
  std::string s(name);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), ' ');
  return s;
}

}  // namespace

nlohmann::json to_json(const APReport& report) {
  nlohmann::json per_iou = nlohmann::json::object();
  for (std::size_t t = 0; t < report.thresholds.size(); ++t)
    per_iou[threshold_key(report.thresholds[t])] = real_json(report.per_iou[t]);
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [cls, cap] : report.per_class) {
    nlohmann::json by_iou = nlohmann::json::object();
    for (std::size_t t = 0; t < report.thresholds.size(); ++t)
      by_iou[threshold_key(report.thresholds[t])] = real_json(cap.per_iou[t]);
    per_class[std::string(canonical_name(cls))] = {
        {"per_iou", std::move(by_iou)}, {"mean", real_json(cap.mean)}, {"num_gt", cap.num_gt}};
  }
  return {{"per_iou", std::move(per_iou)},
          {"mean", real_json(report.mean)},
          {"per_class", std::move(per_class)}};
}

nlohmann::json to_json(const CountReport& report) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [cls, v] : report.per_class_mae) per_class[std::string(canonical_name(cls))] = real_json(v);
  return {{"n_samples", report.n_samples},
          {"mae", real_json(report.mae)},
          {"smape", real_json(report.smape)},
          {"cmae", real_json(report.cmae)},
          {"per_class_mae", std::move(per_class)},
          {"K", report.num_microbe_classes}};
}

nlohmann::json to_json(const CountabilityReport& r) {
  return {{"empty_samples", r.empty_samples},
          {"empty_with_predictions", r.empty_with_predictions},
          {"empty_false_positive_rate", real_json(r.empty_false_positive_rate)},
          {"uncountable_samples", r.uncountable_samples},
          {"uncountable_under_cap", r.uncountable_under_cap},
          {"uncountable_under_cap_rate", real_json(r.uncountable_under_cap_rate)}};
}

std::string format_ap_table(const APReport& report) {
  std::ostringstream out;
  out << head("IoU", 6);
  for (const auto& [cls, cap] : report.per_class) out << head(canonical_name(cls), 14);
  out << head("mean", 10) << '\n';
  for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
    out << head(threshold_key(report.thresholds[t]), 6);
    for (const auto& [cls, cap] : report.per_class) out << cell(100.0 * cap.per_iou[t], 14);
    out << cell(100.0 * report.per_iou[t], 10) << '\n';
  }
  out << head("mAP", 6);
  for (const auto& [cls, cap] : report.per_class) out << cell(100.0 * cap.mean, 14);
  out << cell(100.0 * report.mean, 10) << '\n';
  return out.str();
}

std::string format_count_table(const CountReport& report) {
  std::ostringstream out;
  out << head("", 8);
  for (const auto& [cls, v] : report.per_class_mae) out << head(canonical_name(cls), 14);
  out << head("altogether", 16) << '\n';
  out << head("MAE", 8);
  for (const auto& [cls, v] : report.per_class_mae) out << cell(v, 14);
  char overall[48];
  std::snprintf(overall, sizeof overall, "%.2f (%.2f)", report.mae, report.cmae);
  out << head(overall, 16) << '\n';
  out << head("sMAPE", 8) << head("", 14 * static_cast<int>(report.per_class_mae.size()))
      << cell(report.smape, 15) << "%\n";
  out << "N = " << report.n_samples << '\n';
  return out.str();
}

}  // namespace platecount
