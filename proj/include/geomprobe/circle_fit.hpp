#pragma once

#include <span>
#include <string>
#include <vector>

#include "geomprobe/geometry.hpp"
#include "geomprobe/measurement.hpp"

namespace geomprobe {

struct DigitizedPoint {
  double x_px = 0.0;
  double y_px = 0.0;
};

// One digitizing pass over one feature in one image.
struct DigitizedSet {
  std::string feature_id;
  std::string pass_id;
  std::vector<DigitizedPoint> points;
};

struct CircleEstimate {
  std::string feature_id;
  std::string pass_id;
  double cx_px = 0.0;
  double cy_px = 0.0;
  double radius_px = 0.0;
  double rms_residual_px = 0.0;
  int n_points = 0;
  int iterations = 0;
};

struct AggregatedCircle {
  std::string feature_id;
  Measurement radius;  // cm
  double cx_cm = 0.0;
  double cy_cm = 0.0;
  double center_sigma_cm = 0.0;  // isotropic, per axis
  int n_passes = 0;
};

// Pixel size from a reference length seen in the image.
Measurement calibrate_scale(double pixel_length, const Measurement& ground_length);

// Least-squares circle through digitized rim points: algebraic fit for the
// starting guess, then damped Gauss-Newton on the radial residuals.
CircleEstimate fit_circle(const DigitizedSet& set);

// Combine repeated passes over the same feature into one calibrated radius.
// The scatter between passes is the measurement error; the scale calibration
// error enters in quadrature.
AggregatedCircle aggregate_passes(std::span<const CircleEstimate> passes,
                                  const Measurement& scale);

// CSV with header feature_id,pass_id,x_px,y_px; rows grouped in first-appearance order.
std::vector<DigitizedSet> load_points_csv(const std::string& path);

}  // namespace geomprobe
