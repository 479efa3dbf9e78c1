#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geomprobe/measurement.hpp"
#include "geomprobe/stats.hpp"
#include "geomprobe/survey.hpp"
#include "geomprobe/target_constant.hpp"

namespace geomprobe {

enum class HypothesisKind { ratio, consistency, angle };

struct FeatureRef {
  std::string id;
  Level level = Level::as_measured;
};

// One declared geometric claim: a length ratio against an exact constant, an
// N-way equality, or an interior angle against a reference angle in degrees.
struct Hypothesis {
  std::string id;
  std::string description;
  HypothesisKind kind = HypothesisKind::ratio;
  std::vector<Source> sources;
  FeatureRef numerator;    // ratio
  FeatureRef denominator;  // ratio
  std::vector<FeatureRef> group;          // consistency
  std::array<std::string, 3> points{};    // angle; vertex is points[1]
  TargetConstant target = TargetConstant::integer(1);
};

struct HypothesisOutcome {
  std::string hypothesis_id;
  Source source = Source::aerial;
  bool skipped = false;
  std::string skip_reason;
  TestResult test;
};

struct BatteryReport {
  std::vector<HypothesisOutcome> outcomes;  // sorted by (hypothesis_id, source)
  BonferroniPlan plan{0.05, 1, 0.05};
  int tests_run = 0;
  int tests_skipped = 0;
  int rejections = 0;  // p < alpha_prime among run tests
  bool empty = false;  // nothing could be run
};

// The built-in catalog: every ratio, equality, and angle claim the toolkit
// ships with. Angle entries need per-feature coordinates and report
// themselves skipped on datasets without any.
std::vector<Hypothesis> builtin_catalog();

// User-defined ratio hypotheses:
//   [{"id": ..., "numerator": <selector>, "denominator": <selector>,
//     "target": {"p":int,"q":int,"d":int} | "phi", "source": "aerial"|"ground"|"both"}]
// A selector is a feature id string or {"id": ..., "level": "asMeasured"|"atGround"}.
std::vector<Hypothesis> load_catalog(const std::filesystem::path& path);

// Missing features, sources, or coordinates make an outcome skipped-with-
// reason; only malformed hypotheses throw.
HypothesisOutcome evaluate_hypothesis(const SurveySite& site, const Hypothesis& h, Source source);

BatteryReport run_battery(const SurveySite& site, std::span<const Hypothesis> catalog, double alpha,
                          std::optional<Source> only_source = std::nullopt);

struct UnitTerm {
  std::string feature_id;
  Level level = Level::as_measured;
  TargetConstant multiplier = TargetConstant::integer(1);
  bool resolved = false;
  Measurement scaled;        // multiplier * base length
  double unit_value = 0.0;   // scaled.value / divisor
  std::optional<double> reference_cm;  // published reference column, where available
  std::optional<double> deviation;     // |scaled - reference| / reference
  bool flagged = false;                // deviation above 2%
};

struct UnitEstimate {
  Source source = Source::aerial;
  Weighting weighting = Weighting::unweighted;
  int divisor = 64;
  std::vector<UnitTerm> terms;
  Measurement x;     // scatter average of the resolved scaled terms
  Measurement unit;  // x / divisor, value and sigma both
};

// Common-unit estimate: each term scales one site length by an exact
// multiplier so that all terms predict the same module width X; the base
// unit is X divided by 64. Terms that do not resolve for the requested
// source stay in the table unresolved.
UnitEstimate estimate_unit(const SurveySite& site, Source source,
                           Weighting weighting = Weighting::unweighted);

// Published reference column for the per-term table, when the site ships
// with one.
std::optional<std::vector<double>> reference_column(const std::string& site_name, Source source);

struct QuantogramResult {
  double q_best = 0.0;
  double score_best = 0.0;
  std::vector<std::pair<double, double>> curve;  // (q, score) over the grid
};

// Cosine quantogram over an inclusive uniform grid of candidate quanta:
//   s(q) = sqrt(2/N) * sum_i cos(2 pi eps_i / q)
// with eps_i the residual of length i to its nearest multiple of q.
// Ties in the argmax go to the smallest q.
QuantogramResult quantogram_scan(std::span<const Measurement> lengths, double q_min = 10.0,
                                 double q_max = 60.0, int steps = 2000);

}  // namespace geomprobe
