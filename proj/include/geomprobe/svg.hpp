#pragma once

#include <string>
#include <vector>

#include "geomprobe/survey.hpp"

namespace geomprobe {

struct SvgResult {
  std::string document;
  std::vector<std::string> warnings;  // requested constructs that could not be drawn
};

// Renders requested construct families over the site plan:
//   kiva-circles            every circle feature with coordinates
//   golden-rect             rectangle at the origin from the module width (dimensions only)
//   equilateral:ID1,ID2     triangle erected on the segment between two point features
//   square-circles:ID       square of the feature's length plus its inscribed and
//                           circumscribed circles, centered on the feature
//   unit-lines              legend of module-width fractions (1, 1/2, 1/3, 3/8)
// The survey frame is y-up; the document flips it with a declared transform.
// Unknown family names throw ValidationError; feasible draws always produce
// the same bytes for the same inputs.
SvgResult render_overlay(const SurveySite& site, const std::vector<std::string>& draws);

}  // namespace geomprobe
