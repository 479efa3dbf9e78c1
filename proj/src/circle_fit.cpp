#include "geomprobe/circle_fit.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <utility>

#include "geomprobe/errors.hpp"

namespace geomprobe {

Measurement calibrate_scale(double pixel_length, const Measurement& ground_length) {
  if (!(std::isfinite(pixel_length) && pixel_length > 0)) {
    throw ValidationError("calibrate_scale: pixel length must be positive and finite");
  }
  validate(ground_length, "calibrate_scale ground length");
  if (ground_length.unit != Unit::centimeters) {
    throw ValidationError("calibrate_scale: ground length must be in cm");
  }
  if (ground_length.value <= 0) {
    throw ValidationError("calibrate_scale: ground length must be positive");
  }
  double scale = ground_length.value / pixel_length;
  double sigma = scale * (ground_length.sigma / ground_length.value);
  return {scale, sigma, Unit::centimeters_per_pixel};
}

namespace {

struct CircleParams {
  double cx, cy, r;
};

double sse_at(const std::vector<DigitizedPoint>& pts, const CircleParams& c) {
  double s = 0.0;
  for (const DigitizedPoint& p : pts) {
    double d = std::hypot(p.x_px - c.cx, p.y_px - c.cy) - c.r;
    s += d * d;
  }
  return s;
}

// Algebraic fit through the centroid. Collinear input makes the system singular.
CircleParams kasa_init(const std::vector<DigitizedPoint>& pts) {
  size_t n = pts.size();
  double mx = 0.0, my = 0.0;
  for (const DigitizedPoint& p : pts) {
    mx += p.x_px;
    my += p.y_px;
  }
  mx /= n;
  my /= n;

  double suu = 0, suv = 0, svv = 0, suuu = 0, svvv = 0, suvv = 0, svuu = 0;
  for (const DigitizedPoint& p : pts) {
    double u = p.x_px - mx, v = p.y_px - my;
    suu += u * u;
    suv += u * v;
    svv += v * v;
    suuu += u * u * u;
    svvv += v * v * v;
    suvv += u * v * v;
    svuu += v * u * u;
  }
  double det = suu * svv - suv * suv;
  double norm = suu + svv;
  if (norm == 0 || std::abs(det) <= 1e-12 * norm * norm) {
    throw NumericError("fit_circle: points are collinear or coincident");
  }
  double b1 = (suuu + suvv) / 2.0;
  double b2 = (svvv + svuu) / 2.0;
  double uc = (b1 * svv - b2 * suv) / det;
  double vc = (b2 * suu - b1 * suv) / det;
  double r = std::sqrt(uc * uc + vc * vc + (suu + svv) / static_cast<double>(n));
  return {mx + uc, my + vc, r};
}

}  // namespace

CircleEstimate fit_circle(const DigitizedSet& set) {
  const std::vector<DigitizedPoint>& pts = set.points;
  if (pts.size() < 3) throw ValidationError("fit_circle: need at least 3 points");
  for (const DigitizedPoint& p : pts) {
    if (!(std::isfinite(p.x_px) && std::isfinite(p.y_px))) {
      throw ValidationError("fit_circle: non-finite point");
    }
  }

  CircleParams c = kasa_init(pts);
  double sse = sse_at(pts, c);
  double lambda = 1e-3;
  int iterations = 0;
  bool converged = false;

  for (; iterations < 100 && !converged; ++iterations) {
    // Normal equations for the radial residuals.
    double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
    double g0 = 0, g1 = 0, g2 = 0;
    for (const DigitizedPoint& p : pts) {
      double dx = p.x_px - c.cx, dy = p.y_px - c.cy;
      double d = std::hypot(dx, dy);
      if (d == 0) throw NumericError("fit_circle: point coincides with circle center");
      double jx = -dx / d, jy = -dy / d;
      double res = d - c.r;
      a00 += jx * jx;
      a01 += jx * jy;
      a02 += -jx;
      a11 += jy * jy;
      a12 += -jy;
      a22 += 1;
      g0 += jx * res;
      g1 += jy * res;
      g2 += -res;
    }

    bool stepped = false;
    for (int tries = 0; tries < 50; ++tries) {
      double m00 = a00 + lambda * a00, m11 = a11 + lambda * a11, m22 = a22 + lambda * a22;
      double m01 = a01, m02 = a02, m12 = a12;
      double det = m00 * (m11 * m22 - m12 * m12) - m01 * (m01 * m22 - m12 * m02) +
                   m02 * (m01 * m12 - m11 * m02);
      if (det == 0 || !std::isfinite(det)) {
        lambda *= 10;
        continue;
      }
      double d0 = -(g0 * (m11 * m22 - m12 * m12) - m01 * (g1 * m22 - m12 * g2) +
                    m02 * (g1 * m12 - m11 * g2)) /
                  det;
      double d1 = -(m00 * (g1 * m22 - g2 * m12) - g0 * (m01 * m22 - m12 * m02) +
                    m02 * (m01 * g2 - g1 * m02)) /
                  det;
      double d2 = -(m00 * (m11 * g2 - g1 * m12) - m01 * (m01 * g2 - g1 * m02) +
                    g0 * (m01 * m12 - m11 * m02)) /
                  det;
      CircleParams trial{c.cx + d0, c.cy + d1, c.r + d2};
      double trial_sse = sse_at(pts, trial);
      if (trial_sse <= sse) {
        double step = std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
        c = trial;
        sse = trial_sse;
        lambda = std::max(lambda / 2.0, 1e-12);
        stepped = true;
        if (step < 1e-10 * std::abs(c.r)) converged = true;
        break;
      }
      lambda *= 10;
    }
    if (!stepped) {
      converged = true;  // no downhill step exists; already at the minimum
    }
  }
  if (!converged) {
    throw NumericError("fit_circle: no convergence after " + std::to_string(iterations) +
                       " iterations");
  }
  if (!(c.r > 0) || !std::isfinite(c.r)) {
    throw NumericError("fit_circle: degenerate radius");
  }

  CircleEstimate est;
  est.feature_id = set.feature_id;
  est.pass_id = set.pass_id;
  est.cx_px = c.cx;
  est.cy_px = c.cy;
  est.radius_px = c.r;
  est.rms_residual_px = std::sqrt(sse / static_cast<double>(pts.size()));
  est.n_points = static_cast<int>(pts.size());
  est.iterations = iterations;
  return est;
}

AggregatedCircle aggregate_passes(std::span<const CircleEstimate> passes,
                                  const Measurement& scale) {
  if (passes.size() < 2) {
    throw ValidationError(
        "aggregate_passes: need at least 2 passes; scatter is undefined for a single pass");
  }
  for (const CircleEstimate& e : passes) {
    if (e.feature_id != passes[0].feature_id) {
      throw ValidationError("aggregate_passes: passes cover different features");
    }
  }
  validate(scale, "aggregate_passes scale");
  if (scale.unit != Unit::centimeters_per_pixel) {
    throw ValidationError("aggregate_passes: scale must be in cm/px");
  }
  if (scale.value <= 0) throw ValidationError("aggregate_passes: scale must be positive");

  int n = static_cast<int>(passes.size());
  double mr = 0, mcx = 0, mcy = 0;
  for (const CircleEstimate& e : passes) {
    mr += e.radius_px;
    mcx += e.cx_px;
    mcy += e.cy_px;
  }
  mr /= n;
  mcx /= n;
  mcy /= n;
  double ssr = 0, ssx = 0, ssy = 0;
  for (const CircleEstimate& e : passes) {
    ssr += (e.radius_px - mr) * (e.radius_px - mr);
    ssx += (e.cx_px - mcx) * (e.cx_px - mcx);
    ssy += (e.cy_px - mcy) * (e.cy_px - mcy);
  }
  double sd_r_px = std::sqrt(ssr / (n - 1));

  AggregatedCircle out;
  out.feature_id = passes[0].feature_id;
  out.radius = {mr * scale.value,
                std::hypot(scale.value * sd_r_px, mr * scale.sigma),
                Unit::centimeters};
  out.cx_cm = mcx * scale.value;
  out.cy_cm = mcy * scale.value;
  out.center_sigma_cm = scale.value * std::sqrt((ssx + ssy) / (2.0 * (n - 1)));
  out.n_passes = n;
  return out;
}

namespace {

double parse_csv_double(const std::string& field, int line_no, const char* what) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ParseError("points csv line " + std::to_string(line_no) + ": bad " + what + " '" +
                     field + "'");
  }
  return v;
}

}  // namespace

std::vector<DigitizedSet> load_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open points csv: " + path);

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("points csv is empty: " + path);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "feature_id,pass_id,x_px,y_px") {
    throw ParseError("points csv line 1: expected header feature_id,pass_id,x_px,y_px");
  }

  std::vector<DigitizedSet> sets;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 4) {
      throw ParseError("points csv line " + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError("points csv line " + std::to_string(line_no) + ": empty id field");
    }
    DigitizedPoint p{parse_csv_double(fields[2], line_no, "x_px"),
                     parse_csv_double(fields[3], line_no, "y_px")};

    DigitizedSet* target = nullptr;
    for (DigitizedSet& s : sets) {
      if (s.feature_id == fields[0] && s.pass_id == fields[1]) {
        target = &s;
        break;
      }
    }
    if (target == nullptr) {
      sets.push_back({fields[0], fields[1], {}});
      target = &sets.back();
    }
    target->points.push_back(p);
  }
  return sets;
}

}  // namespace geomprobe
