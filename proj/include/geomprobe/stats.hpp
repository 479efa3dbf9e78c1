#pragma once

#include <optional>
#include <span>

#include "geomprobe/measurement.hpp"
#include "geomprobe/target_constant.hpp"

namespace geomprobe {

enum class Decision { not_rejected, rejected };

struct TestResult {
  double chi2 = 0.0;
  int dof = 1;
  double p = 1.0;
  Measurement observed;
  std::optional<Measurement> reference;   // second measurement, for equality tests
  std::optional<TargetConstant> target;   // exact constant, for constant tests
  // True when every sigma involved is zero: p is then an exact-match
  // indicator in {0, 1} rather than a chi-square tail.
  bool degenerate = false;

  Decision decide(double alpha) const {
    return p < alpha ? Decision::rejected : Decision::not_rejected;
  }
};

struct BonferroniPlan {
  double alpha = 0.05;
  int k = 1;
  double alpha_prime = 0.05;
};

// Survival function of the chi-square distribution for integer dof >= 1.
// dof 1 uses erfc directly (absolute error well under 1e-10); higher dof
// by the closed-form series over the dof-1 or dof-2 base case.
double chi2_sf(double x, int dof);
double chi2_sf_1dof(double x);

// Two-sided test of equal underlying quantities:
// chi2 = (v1-v2)^2 / (s1^2+s2^2), 1 dof.
TestResult test_equal(const Measurement& m1, const Measurement& m2);

// Test of a measurement against an exact constant:
// chi2 = (v-c)^2 / s^2, 1 dof. The measurement must be dimensionless for
// ratio targets or in degrees for angle targets.
TestResult test_against_constant(const Measurement& m, const TargetConstant& c);

// N-way test of a common underlying value (dof n-1). The observed field of
// the result carries the inverse-variance common mean, with the sample
// standard deviation of the values as its sigma.
TestResult test_consistency(std::span<const Measurement> group);

BonferroniPlan bonferroni(double alpha, int k);

enum class Weighting { unweighted, inverse_variance };
enum class ScatterMode { population, sample };  // divisor n vs n-1

// Mean of the values with the scatter of the values (not the standard error
// of the mean) as its sigma. Inverse-variance weighting with equal sigmas
// reduces to the unweighted computation exactly.
Measurement scatter_average(std::span<const Measurement> values,
                            Weighting weighting = Weighting::unweighted,
                            ScatterMode mode = ScatterMode::population);

}  // namespace geomprobe
