#pragma once

#include <string>

namespace geomprobe {

// An exact symbolic hypothesis target of the form (p/q)*sqrt(d), plus the
// golden ratio and its inverse as special symbols. Values are evaluated to
// IEEE double only when asked for, never cached, so no rounding compounds
// before a comparison.
class TargetConstant {
public:
  TargetConstant() = default;

  static TargetConstant integer(long long n);
  static TargetConstant rational(long long num, long long den);
  // (num/den) * sqrt(radicand)
  static TargetConstant rational_sqrt(long long num, long long den, long long radicand);
  static TargetConstant golden();          // (1 + sqrt 5) / 2
  static TargetConstant inverse_golden();  // 2 / (1 + sqrt 5)

  double value() const;

  // Symbolic rendering: "3", "16/3", "sqrt(2)", "(32/9)*sqrt(2)", "phi", "1/phi".
  std::string text() const;

  // Decimal rendering with the given number of significant digits.
  std::string decimal(int significant = 12) const;

  bool is_golden() const { return kind_ == Kind::golden; }
  bool is_inverse_golden() const { return kind_ == Kind::inverse_golden; }

private:
  enum class Kind { rational_sqrt, golden, inverse_golden };
  Kind kind_ = Kind::rational_sqrt;
  long long num_ = 1;
  long long den_ = 1;
  long long rad_ = 1;
};

}  // namespace geomprobe
