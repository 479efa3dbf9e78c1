#include "geomprobe/measurement.hpp"

#include <cmath>

#include "geomprobe/errors.hpp"

namespace geomprobe {

std::string to_string(Unit u) {
  switch (u) {
    case Unit::centimeters: return "cm";
    case Unit::degrees: return "deg";
    case Unit::dimensionless: return "";
    case Unit::centimeters_per_pixel: return "cm/px";
  }
  return "";
}

void validate(const Measurement& m, const std::string& where) {
  if (!std::isfinite(m.value)) throw ValidationError(where + ": value is not finite");
  if (!std::isfinite(m.sigma)) throw ValidationError(where + ": sigma is not finite");
  if (m.sigma < 0) throw ValidationError(where + ": sigma must be >= 0");
}

namespace {
void require_same_unit(const Measurement& a, const Measurement& b, const char* op) {
  if (a.unit != b.unit) {
    throw ValidationError(std::string(op) + ": unit mismatch (" + to_string(a.unit) + " vs " +
                          to_string(b.unit) + ")");
  }
}
}  // namespace

Measurement add(const Measurement& a, const Measurement& b) {
  require_same_unit(a, b, "add");
  return {a.value + b.value, std::hypot(a.sigma, b.sigma), a.unit};
}

Measurement subtract(const Measurement& a, const Measurement& b) {
  require_same_unit(a, b, "subtract");
  return {a.value - b.value, std::hypot(a.sigma, b.sigma), a.unit};
}

Measurement scale(const Measurement& m, double factor) {
  return {m.value * factor, m.sigma * std::abs(factor), m.unit};
}

}  // namespace geomprobe
