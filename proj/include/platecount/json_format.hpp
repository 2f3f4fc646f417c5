#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <nlohmann/json.hpp>

namespace platecount {

/// Rounds to 6 significant digits so emitted files diff cleanly.
inline double round6(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

/// JSON number for a real value at 6 significant digits; non-finite -> null.
inline nlohmann::json real_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round6(v);
}

}  // namespace platecount
