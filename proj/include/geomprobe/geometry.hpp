#pragma once

#include <array>
#include <cstdint>

#include "geomprobe/measurement.hpp"

namespace geomprobe {

// Planar point with an isotropic positional one-sigma uncertainty.
struct Point2D {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;
};

// a / b with first-order error propagation:
//   sigma = |a/b| * sqrt((sa/a)^2 + (sb/b)^2)
// Inputs must share a unit; the result is dimensionless.
// b.value == 0 throws NumericError; a.value == 0 with sa > 0 is fine
// (the a term of the propagation is then sa/|b|).
Measurement ratio(const Measurement& a, const Measurement& b);

// Euclidean distance in cm; sigma = sqrt(sp^2 + sq^2). Coincident points
// return 0 with the combined sigma.
Measurement distance(const Point2D& p, const Point2D& q);

// Interior angle at `vertex` between the rays toward p and q, in degrees,
// range [0, 180], with first-order propagation of all three point sigmas.
// A zero-length arm throws NumericError.
Measurement angle_at(const Point2D& vertex, const Point2D& p, const Point2D& q);

// Apex of the equilateral triangle erected on A->B, on the left of the
// directed base (counterclockwise positive). Apex sigma combines the
// endpoint sigmas in quadrature.
Point2D construct_equilateral(const Point2D& a, const Point2D& b);

struct GoldenRectangle {
  std::array<Point2D, 4> corners;  // counterclockwise, corner 0 at origin
  double width = 0.0;
  double length = 0.0;      // width * phi
  double arc_radius = 0.0;  // compass arc from the base midpoint: sqrt(5)/2 * width
};

// Rectangle of the given width whose long side runs along orientation_deg
// (degrees counterclockwise from +x) starting at origin.
GoldenRectangle construct_golden_rectangle(double width, const Point2D& origin,
                                           double orientation_deg);

struct SquareCircles {
  double inscribed_radius = 0.0;      // side / 2
  double circumscribed_radius = 0.0;  // side * sqrt(2) / 2
};

SquareCircles inscribed_circumscribed(double side);

// Monte Carlo cross-checks of the first-order propagation: resample inputs
// from their Gaussians and return the sample mean and standard deviation of
// the statistic. Deterministic for a fixed seed.
Measurement ratio_mc(const Measurement& a, const Measurement& b, std::uint64_t seed,
                     int samples = 100000);
Measurement distance_mc(const Point2D& p, const Point2D& q, std::uint64_t seed,
                        int samples = 100000);
Measurement angle_at_mc(const Point2D& vertex, const Point2D& p, const Point2D& q,
                        std::uint64_t seed, int samples = 100000);

}  // namespace geomprobe
