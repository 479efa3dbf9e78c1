#include "geomprobe/stats.hpp"

#include <cmath>

#include "geomprobe/errors.hpp"

namespace geomprobe {

double chi2_sf(double x, int dof) {
  if (dof < 1) throw ValidationError("chi2_sf: dof must be >= 1");
  if (!(std::isfinite(x) && x >= 0)) throw ValidationError("chi2_sf: x must be finite and >= 0");

  // Closed-form tail built up from the 1- or 2-dof base:
  //   Q(x; k) = Q(x; k-2) + (x/2)^((k-2)/2) e^(-x/2) / Gamma(k/2)
  double q = (dof % 2 == 1) ? std::erfc(std::sqrt(x / 2.0)) : std::exp(-x / 2.0);
  for (int k = (dof % 2 == 1) ? 3 : 4; k <= dof; k += 2) {
    q += std::pow(x / 2.0, (k - 2) / 2.0) * std::exp(-x / 2.0) / std::tgamma(k / 2.0);
  }
  return q < 0 ? 0.0 : (q > 1 ? 1.0 : q);
}

double chi2_sf_1dof(double x) { return chi2_sf(x, 1); }

TestResult test_equal(const Measurement& m1, const Measurement& m2) {
  validate(m1, "test_equal first");
  validate(m2, "test_equal second");
  if (m1.unit != m2.unit) throw ValidationError("test_equal: unit mismatch");

  TestResult r;
  r.observed = m1;
  r.reference = m2;
  r.dof = 1;
  double var = m1.sigma * m1.sigma + m2.sigma * m2.sigma;
  if (var == 0) {
    r.degenerate = true;
    r.chi2 = 0.0;
    r.p = m1.value == m2.value ? 1.0 : 0.0;
    return r;
  }
  double d = m1.value - m2.value;
  r.chi2 = d * d / var;
  r.p = chi2_sf_1dof(r.chi2);
  return r;
}

TestResult test_against_constant(const Measurement& m, const TargetConstant& c) {
  validate(m, "test_against_constant");
  if (m.unit != Unit::dimensionless && m.unit != Unit::degrees) {
    throw ValidationError("test_against_constant: measurement must be dimensionless or degrees");
  }

  TestResult r;
  r.observed = m;
  r.target = c;
  r.dof = 1;
  double cv = c.value();
  if (m.sigma == 0) {
    r.degenerate = true;
    r.chi2 = 0.0;
    r.p = m.value == cv ? 1.0 : 0.0;
    return r;
  }
  double d = m.value - cv;
  r.chi2 = d * d / (m.sigma * m.sigma);
  r.p = chi2_sf_1dof(r.chi2);
  return r;
}

TestResult test_consistency(std::span<const Measurement> group) {
  if (group.size() < 2) throw ValidationError("test_consistency: need at least 2 measurements");
  for (const Measurement& m : group) validate(m, "test_consistency member");
  for (size_t i = 1; i < group.size(); ++i) {
    if (group[i].unit != group[0].unit) throw ValidationError("test_consistency: unit mismatch");
  }

  int n = static_cast<int>(group.size());
  double value_mean = 0.0;
  for (const Measurement& m : group) value_mean += m.value;
  value_mean /= n;
  double ss = 0.0;
  for (const Measurement& m : group) ss += (m.value - value_mean) * (m.value - value_mean);
  double sample_sd = std::sqrt(ss / (n - 1));

  TestResult r;
  r.dof = n - 1;

  bool any_zero_sigma = false;
  for (const Measurement& m : group) any_zero_sigma |= m.sigma == 0;
  if (any_zero_sigma) {
    bool all_equal = true;
    for (const Measurement& m : group) all_equal &= m.value == group[0].value;
    r.degenerate = true;
    r.chi2 = 0.0;
    r.p = all_equal ? 1.0 : 0.0;
    r.observed = {value_mean, sample_sd, group[0].unit};
    return r;
  }

  double wsum = 0.0, wvsum = 0.0;
  for (const Measurement& m : group) {
    double w = 1.0 / (m.sigma * m.sigma);
    wsum += w;
    wvsum += w * m.value;
  }
  double mean = wvsum / wsum;
  double chi2 = 0.0;
  for (const Measurement& m : group) {
    double z = (m.value - mean) / m.sigma;
    chi2 += z * z;
  }
  r.chi2 = chi2;
  r.p = chi2_sf(chi2, n - 1);
  r.observed = {mean, sample_sd, group[0].unit};
  return r;
}

BonferroniPlan bonferroni(double alpha, int k) {
  if (!(alpha > 0 && alpha < 1)) throw ValidationError("bonferroni: alpha must be in (0, 1)");
  if (k < 1) throw ValidationError("bonferroni: k must be >= 1");
  return {alpha, k, alpha / k};
}

Measurement scatter_average(std::span<const Measurement> values, Weighting weighting,
                            ScatterMode mode) {
  if (values.size() < 2) throw ValidationError("scatter_average: need at least 2 values");
  for (const Measurement& m : values) validate(m, "scatter_average member");
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i].unit != values[0].unit) throw ValidationError("scatter_average: unit mismatch");
  }

  int n = static_cast<int>(values.size());

  bool equal_sigmas = true;
  for (const Measurement& m : values) equal_sigmas &= m.sigma == values[0].sigma;
  // Equal sigmas make the weights cancel algebraically; take the unweighted
  // path so the two modes agree bit for bit.
  bool weighted = weighting == Weighting::inverse_variance && !equal_sigmas;

  if (weighted) {
    for (const Measurement& m : values) {
      if (m.sigma == 0) {
        throw ValidationError("scatter_average: inverse-variance weighting needs nonzero sigmas");
      }
    }
    double wsum = 0.0, wvsum = 0.0;
    for (const Measurement& m : values) {
      double w = 1.0 / (m.sigma * m.sigma);
      wsum += w;
      wvsum += w * m.value;
    }
    double mean = wvsum / wsum;
    double wss = 0.0;
    for (const Measurement& m : values) {
      double w = 1.0 / (m.sigma * m.sigma);
      wss += w * (m.value - mean) * (m.value - mean);
    }
    double var = wss / wsum;
    if (mode == ScatterMode::sample) var *= static_cast<double>(n) / (n - 1);
    return {mean, std::sqrt(var), values[0].unit};
  }

  double mean = 0.0;
  for (const Measurement& m : values) mean += m.value;
  mean /= n;
  double ss = 0.0;
  for (const Measurement& m : values) ss += (m.value - mean) * (m.value - mean);
  double var = mode == ScatterMode::sample ? ss / (n - 1) : ss / n;
  return {mean, std::sqrt(var), values[0].unit};
}

}  // namespace geomprobe
