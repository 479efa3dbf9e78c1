#include "geomprobe/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>

#include "geomprobe/errors.hpp"

namespace geomprobe {

double round_half_away(double v, int decimals) {
  double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  if (decimals <= 0) return format_rounded_int(v);

  double scale = std::pow(10.0, decimals);
  double scaled = v * scale;
  if (std::abs(scaled) >= 9.0e15) {
    // Out of exact integer range; fall back to std::to_chars fixed.
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
  }
  long long n = std::llround(scaled);  // rounds half away from zero
  bool neg = n < 0;
  unsigned long long mag = neg ? static_cast<unsigned long long>(-n) : static_cast<unsigned long long>(n);
  unsigned long long unit = 1;
  for (int i = 0; i < decimals; ++i) unit *= 10;
  std::string frac = std::to_string(mag % unit);
  frac.insert(frac.begin(), decimals - frac.size(), '0');
  std::string out = neg ? "-" : "";
  out += std::to_string(mag / unit);
  out += '.';
  out += frac;
  return out;
}

std::string format_rounded_int(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  return std::to_string(std::llround(v));
}

std::string format_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace geomprobe
