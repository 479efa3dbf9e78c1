#include "geomprobe/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "geomprobe/errors.hpp"

namespace geomprobe {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

void require_finite_point(const Point2D& p, const char* name) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw ValidationError(std::string(name) + ": coordinates must be finite");
  }
  if (!(std::isfinite(p.sigma) && p.sigma >= 0)) {
    throw ValidationError(std::string(name) + ": sigma must be finite and >= 0");
  }
}

double interior_angle_rad(double ux, double uy, double vx, double vy) {
  double cross = ux * vy - uy * vx;
  double dot = ux * vx + uy * vy;
  return std::abs(std::atan2(cross, dot));
}

}  // namespace

Measurement ratio(const Measurement& a, const Measurement& b) {
  validate(a, "ratio numerator");
  validate(b, "ratio denominator");
  if (a.unit != b.unit) throw ValidationError("ratio: unit mismatch");
  if (b.value == 0) throw NumericError("ratio: division by zero");
  double v = a.value / b.value;
  // Written as sqrt((sa/b)^2 + (v*sb/b)^2) so a.value == 0 needs no special case.
  double sigma = std::hypot(a.sigma / b.value, v * b.sigma / b.value);
  return {v, sigma, Unit::dimensionless};
}

Measurement distance(const Point2D& p, const Point2D& q) {
  require_finite_point(p, "distance p");
  require_finite_point(q, "distance q");
  double d = std::hypot(q.x - p.x, q.y - p.y);
  return {d, std::hypot(p.sigma, q.sigma), Unit::centimeters};
}

Measurement angle_at(const Point2D& vertex, const Point2D& p, const Point2D& q) {
  require_finite_point(vertex, "angle vertex");
  require_finite_point(p, "angle p");
  require_finite_point(q, "angle q");
  double ux = p.x - vertex.x, uy = p.y - vertex.y;
  double vx = q.x - vertex.x, vy = q.y - vertex.y;
  double lu2 = ux * ux + uy * uy;
  double lv2 = vx * vx + vy * vy;
  if (lu2 == 0 || lv2 == 0) throw NumericError("angle_at: zero-length arm");

  double theta = interior_angle_rad(ux, uy, vx, vy);

  // Gradient of the ray direction angle w.r.t. each endpoint has magnitude
  // 1/|arm|; the vertex shifts both rays, so its gradient is the difference
  // of the two perpendicular-over-length-squared vectors.
  double wx = -vy / lv2 + uy / lu2;
  double wy = vx / lv2 - ux / lu2;
  double var = p.sigma * p.sigma / lu2 + q.sigma * q.sigma / lv2 +
               vertex.sigma * vertex.sigma * (wx * wx + wy * wy);
  return {theta * kDegPerRad, std::sqrt(var) * kDegPerRad, Unit::degrees};
}

Point2D construct_equilateral(const Point2D& a, const Point2D& b) {
  require_finite_point(a, "equilateral A");
  require_finite_point(b, "equilateral B");
  double dx = b.x - a.x, dy = b.y - a.y;
  if (dx == 0 && dy == 0) throw NumericError("construct_equilateral: zero-length base");
  double h = std::sqrt(3.0) / 2.0;
  // Midpoint plus the left normal of A->B scaled to the triangle height.
  Point2D apex;
  apex.x = a.x + dx / 2.0 - dy * h;
  apex.y = a.y + dy / 2.0 + dx * h;
  apex.sigma = std::hypot(a.sigma, b.sigma);
  return apex;
}

GoldenRectangle construct_golden_rectangle(double width, const Point2D& origin,
                                           double orientation_deg) {
  if (!(std::isfinite(width) && width > 0)) {
    throw ValidationError("construct_golden_rectangle: width must be positive");
  }
  require_finite_point(origin, "golden rectangle origin");
  double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  double length = width * phi;
  double t = orientation_deg / kDegPerRad;
  double ux = std::cos(t), uy = std::sin(t);    // long-side direction
  double nx = -uy, ny = ux;                     // left normal, short side

  GoldenRectangle r;
  r.width = width;
  r.length = length;
  r.arc_radius = std::sqrt(5.0) / 2.0 * width;
  r.corners[0] = {origin.x, origin.y, origin.sigma};
  r.corners[1] = {origin.x + length * ux, origin.y + length * uy, origin.sigma};
  r.corners[2] = {origin.x + length * ux + width * nx, origin.y + length * uy + width * ny,
                  origin.sigma};
  r.corners[3] = {origin.x + width * nx, origin.y + width * ny, origin.sigma};
  return r;
}

SquareCircles inscribed_circumscribed(double side) {
  if (!(std::isfinite(side) && side > 0)) {
    throw ValidationError("inscribed_circumscribed: side must be positive");
  }
  return {side / 2.0, side * std::sqrt(2.0) / 2.0};
}

namespace {

struct SampleStats {
  double mean = 0.0;
  double sd = 0.0;
};

template <typename Fn>
SampleStats mc_stats(std::uint64_t seed, int samples, Fn&& draw) {
  if (samples < 2) throw ValidationError("Monte Carlo mode needs at least 2 samples");
  std::mt19937_64 rng(seed);
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    double v = draw(rng);
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / samples;
  double var = sum2 / samples - mean * mean;
  return {mean, std::sqrt(var > 0 ? var : 0.0)};
}

}  // namespace

Measurement ratio_mc(const Measurement& a, const Measurement& b, std::uint64_t seed, int samples) {
  validate(a, "ratio_mc numerator");
  validate(b, "ratio_mc denominator");
  if (b.value == 0) throw NumericError("ratio_mc: division by zero");
  std::normal_distribution<double> na(a.value, a.sigma), nb(b.value, b.sigma);
  auto st = mc_stats(seed, samples, [&](std::mt19937_64& rng) { return na(rng) / nb(rng); });
  return {st.mean, st.sd, Unit::dimensionless};
}

Measurement distance_mc(const Point2D& p, const Point2D& q, std::uint64_t seed, int samples) {
  require_finite_point(p, "distance_mc p");
  require_finite_point(q, "distance_mc q");
  std::normal_distribution<double> unitn(0.0, 1.0);
  auto st = mc_stats(seed, samples, [&](std::mt19937_64& rng) {
    double px = p.x + p.sigma * unitn(rng), py = p.y + p.sigma * unitn(rng);
    double qx = q.x + q.sigma * unitn(rng), qy = q.y + q.sigma * unitn(rng);
    return std::hypot(qx - px, qy - py);
  });
  return {st.mean, st.sd, Unit::centimeters};
}

Measurement angle_at_mc(const Point2D& vertex, const Point2D& p, const Point2D& q,
                        std::uint64_t seed, int samples) {
  require_finite_point(vertex, "angle_at_mc vertex");
  require_finite_point(p, "angle_at_mc p");
  require_finite_point(q, "angle_at_mc q");
  std::normal_distribution<double> unitn(0.0, 1.0);
  auto st = mc_stats(seed, samples, [&](std::mt19937_64& rng) {
    double vx0 = vertex.x + vertex.sigma * unitn(rng);
    double vy0 = vertex.y + vertex.sigma * unitn(rng);
    double px = p.x + p.sigma * unitn(rng), py = p.y + p.sigma * unitn(rng);
    double qx = q.x + q.sigma * unitn(rng), qy = q.y + q.sigma * unitn(rng);
    return interior_angle_rad(px - vx0, py - vy0, qx - vx0, qy - vy0) * kDegPerRad;
  });
  return {st.mean, st.sd, Unit::degrees};
}

}  // namespace geomprobe
