#include "geomprobe/target_constant.hpp"

#include <charconv>
#include <cmath>

#include "geomprobe/errors.hpp"

namespace geomprobe {

TargetConstant TargetConstant::integer(long long n) { return rational_sqrt(n, 1, 1); }

TargetConstant TargetConstant::rational(long long num, long long den) {
  return rational_sqrt(num, den, 1);
}

TargetConstant TargetConstant::rational_sqrt(long long num, long long den, long long radicand) {
  if (den <= 0) throw ValidationError("TargetConstant: denominator must be positive");
  if (radicand < 1) throw ValidationError("TargetConstant: radicand must be >= 1");
  TargetConstant c;
  c.kind_ = Kind::rational_sqrt;
  c.num_ = num;
  c.den_ = den;
  c.rad_ = radicand;
  return c;
}

TargetConstant TargetConstant::golden() {
  TargetConstant c;
  c.kind_ = Kind::golden;
  return c;
}

TargetConstant TargetConstant::inverse_golden() {
  TargetConstant c;
  c.kind_ = Kind::inverse_golden;
  return c;
}

double TargetConstant::value() const {
  switch (kind_) {
    case Kind::golden:
      return (1.0 + std::sqrt(5.0)) / 2.0;
    case Kind::inverse_golden:
      return 2.0 / (1.0 + std::sqrt(5.0));
    case Kind::rational_sqrt:
      break;
  }
  double v = static_cast<double>(num_) / static_cast<double>(den_);
  if (rad_ != 1) v *= std::sqrt(static_cast<double>(rad_));
  return v;
}

std::string TargetConstant::text() const {
  if (kind_ == Kind::golden) return "phi";
  if (kind_ == Kind::inverse_golden) return "1/phi";

  std::string ratio;
  if (den_ == 1) {
    ratio = std::to_string(num_);
  } else {
    ratio = std::to_string(num_) + "/" + std::to_string(den_);
  }
  if (rad_ == 1) return ratio;
  std::string root = "sqrt(" + std::to_string(rad_) + ")";
  if (num_ == 1 && den_ == 1) return root;
  if (den_ == 1) return ratio + "*" + root;
  return "(" + ratio + ")*" + root;
}

std::string TargetConstant::decimal(int significant) const {
  if (significant < 1) significant = 1;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value(), std::chars_format::general, significant);
  return std::string(buf, res.ptr);
}

}  // namespace geomprobe
