#pragma once

#include <string>

namespace geomprobe {

enum class Unit { centimeters, degrees, dimensionless, centimeters_per_pixel };

std::string to_string(Unit u);

// A scalar with a Gaussian one-sigma uncertainty. Errors on distinct
// measurements are assumed independent throughout, so sums and differences
// combine sigmas in quadrature.
struct Measurement {
  double value = 0.0;
  double sigma = 0.0;
  Unit unit = Unit::dimensionless;
};

// Throws ValidationError unless value and sigma are finite and sigma >= 0.
// `where` names the offending quantity in the message.
void validate(const Measurement& m, const std::string& where);

// Quadrature arithmetic; mismatched units throw ValidationError.
Measurement add(const Measurement& a, const Measurement& b);
Measurement subtract(const Measurement& a, const Measurement& b);

// Multiply by an exact (error-free) factor.
Measurement scale(const Measurement& m, double factor);

}  // namespace geomprobe
