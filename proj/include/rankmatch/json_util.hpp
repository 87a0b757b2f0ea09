#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <string>

namespace rankmatch {

/// JSON value for a double, rounded to 10 significant digits so emitted
/// files diff stably across runs; infinities become the strings "inf" /
/// "-inf" because JSON numbers cannot carry them portably.
inline nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return std::strtod(buf, nullptr);
}

/// Formats with 10 significant digits; infinities as "inf" / "-inf".
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace rankmatch
