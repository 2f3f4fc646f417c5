#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "platecount/metrics.hpp"

namespace platecount {

nlohmann::json to_json(const APReport& report);
nlohmann::json to_json(const CountReport& report);
nlohmann::json to_json(const CountabilityReport& report);

/// Aligned table: one row per IoU threshold, one column per class plus the
/// class mean, values in percent.
std::string format_ap_table(const APReport& report);

/// Rows MAE / sMAPE per microbe class plus the overall column with cMAE.
std::string format_count_table(const CountReport& report);

}  // namespace platecount
