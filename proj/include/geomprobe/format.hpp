#pragma once

#include <string>

namespace geomprobe {

// Locale-independent numeric rendering. All report and file output goes
// through these helpers so runs are byte-identical across environments.

// Fixed-point with `decimals` digits, rounding half away from zero.
std::string format_fixed(double v, int decimals);

// Shortest decimal string that round-trips the double exactly.
std::string format_shortest(double v);

// Integer rendering of a rounded value (half away from zero).
std::string format_rounded_int(double v);

// Half-away-from-zero rounding to `decimals` digits, as a value.
double round_half_away(double v, int decimals);

}  // namespace geomprobe
