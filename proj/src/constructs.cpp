#include "geomprobe/constructs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "geomprobe/errors.hpp"
#include "geomprobe/geometry.hpp"

namespace geomprobe {

namespace {

const std::vector<Source> kBothSources{Source::aerial, Source::ground};

Hypothesis ratio_hypothesis(std::string id, std::string description, FeatureRef num,
                            FeatureRef den, TargetConstant target,
                            std::vector<Source> sources = kBothSources) {
  Hypothesis h;
  h.id = std::move(id);
  h.description = std::move(description);
  h.kind = HypothesisKind::ratio;
  h.sources = std::move(sources);
  h.numerator = std::move(num);
  h.denominator = std::move(den);
  h.target = target;
  return h;
}

Hypothesis angle_hypothesis(std::string id, std::string description, std::string p0,
                            std::string vertex, std::string p2, int degrees) {
  Hypothesis h;
  h.id = std::move(id);
  h.description = std::move(description);
  h.kind = HypothesisKind::angle;
  h.sources = {Source::aerial};
  h.points = {std::move(p0), std::move(vertex), std::move(p2)};
  h.target = TargetConstant::integer(degrees);
  return h;
}

}  // namespace

std::vector<Hypothesis> builtin_catalog() {
  const FeatureRef width{"outer_d_width", Level::as_measured};
  std::vector<Hypothesis> catalog;

  catalog.push_back(ratio_hypothesis(
      "length-width-golden", "plaza length over width against the golden ratio",
      {"south_wall_length", Level::as_measured}, width, TargetConstant::golden()));
  catalog.push_back(ratio_hypothesis(
      "bc-centers-b-south-4-3", "kiva B-C center spacing over kiva B south-wall distance",
      {"kiva_bc_centers", Level::as_measured}, {"kiva_b_center_south_wall", Level::as_measured},
      TargetConstant::rational(4, 3)));

  catalog.push_back(ratio_hypothesis(
      "kiva-a-walls-4-3", "kiva A outer over inner radius, ground level",
      {"kiva_a_outer", Level::at_ground}, {"kiva_a_inner", Level::at_ground},
      TargetConstant::rational(4, 3)));
  catalog.push_back(ratio_hypothesis(
      "kiva-b-walls-sqrt2", "kiva B outer over inner radius",
      {"kiva_b_outer", Level::as_measured}, {"kiva_b_inner", Level::as_measured},
      TargetConstant::rational_sqrt(1, 1, 2)));
  catalog.push_back(ratio_hypothesis(
      "kiva-c-walls-sqrt2", "kiva C outer over inner radius",
      {"kiva_c_outer", Level::as_measured}, {"kiva_c_inner", Level::as_measured},
      TargetConstant::rational_sqrt(1, 1, 2)));
  catalog.push_back(ratio_hypothesis(
      "kiva-d-walls-sqrt2", "kiva D outer over inner radius",
      {"kiva_d_outer", Level::as_measured}, {"kiva_d_inner", Level::as_measured},
      TargetConstant::rational_sqrt(1, 1, 2)));

  catalog.push_back(ratio_hypothesis(
      "width-kiva-a-outer-16-3", "module width over kiva A outer radius, ground level", width,
      {"kiva_a_outer", Level::at_ground}, TargetConstant::rational(16, 3)));
  catalog.push_back(ratio_hypothesis(
      "width-kiva-a-inner-64-9", "module width over kiva A inner radius, ground level", width,
      {"kiva_a_inner", Level::at_ground}, TargetConstant::rational(64, 9)));
  catalog.push_back(ratio_hypothesis(
      "width-kiva-d-outer-6", "module width over kiva D outer radius", width,
      {"kiva_d_outer", Level::as_measured}, TargetConstant::integer(6)));

  catalog.push_back(ratio_hypothesis(
      "width-b-sw-2", "module width over kiva B wall to SW corner", width,
      {"kiva_b_sw_corner", Level::as_measured}, TargetConstant::integer(2)));
  catalog.push_back(ratio_hypothesis(
      "width-c-se-2", "module width over kiva C wall to SE corner", width,
      {"kiva_c_se_corner", Level::as_measured}, TargetConstant::integer(2)));
  catalog.push_back(ratio_hypothesis(
      "width-d-se-3", "module width over kiva D wall to SE corner", width,
      {"kiva_d_se_corner", Level::as_measured}, TargetConstant::integer(3)));
  catalog.push_back(ratio_hypothesis(
      "width-d-center-se-2", "module width over kiva D center to SE corner", width,
      {"kiva_d_center_se_corner", Level::as_measured}, TargetConstant::integer(2)));
  catalog.push_back(ratio_hypothesis(
      "width-b-wall-south-3", "module width over kiva B wall to south wall", width,
      {"kiva_b_outer_south_wall", Level::as_measured}, TargetConstant::integer(3)));
  catalog.push_back(ratio_hypothesis(
      "width-bc-gap-3", "module width over the kiva B to C wall gap", width,
      {"kiva_bc_gap", Level::as_measured}, TargetConstant::integer(3)));
  catalog.push_back(ratio_hypothesis(
      "width-shrine-a-2", "module width over sun shrine to kiva A center", width,
      {"sun_shrine_kiva_a_center", Level::as_measured}, TargetConstant::integer(2)));
  catalog.push_back(ratio_hypothesis(
      "width-a-south-2", "module width over kiva A center to south wall", width,
      {"kiva_a_center_south_wall", Level::as_measured}, TargetConstant::integer(2)));

  Hypothesis consistency;
  consistency.id = "inner-radii-abc-equal";
  consistency.description = "inner radii of kivas A, B, C share one true value, ground level";
  consistency.kind = HypothesisKind::consistency;
  consistency.sources = kBothSources;
  consistency.group = {{"kiva_a_inner", Level::at_ground},
                       {"kiva_b_inner", Level::as_measured},
                       {"kiva_c_inner", Level::as_measured}};
  catalog.push_back(consistency);

  catalog.push_back(angle_hypothesis("plaza-corner-angle-45",
                                     "diagonal from the SW corner splits the corner at 45 degrees",
                                     "corner_se", "corner_sw", "corner_nw", 45));
  catalog.push_back(angle_hypothesis("kiva-b-d-right-angle",
                                     "SW corner and kiva D subtend a right angle at kiva B",
                                     "corner_sw", "kiva_b_center", "kiva_d_center", 90));
  catalog.push_back(angle_hypothesis("shrine-kivas-equilateral-60",
                                     "kivas B and D subtend 60 degrees at the sun shrine",
                                     "kiva_b_center", "sun_shrine", "kiva_d_center", 60));
  catalog.push_back(angle_hypothesis("basin-corners-right-angle",
                                     "north corners subtend a right angle at the pecked basin",
                                     "corner_nw", "pecked_basin", "corner_ne", 90));
  return catalog;
}

namespace {

std::optional<Measurement> try_resolve(const SurveySite& site, const FeatureRef& ref,
                                       Source source, std::string& reason) {
  try {
    return resolve_length(site, ref.id, source, ref.level);
  } catch (const ValidationError& e) {
    reason = e.what();
    return std::nullopt;
  }
}

HypothesisOutcome skipped_outcome(const Hypothesis& h, Source source, std::string reason) {
  HypothesisOutcome o;
  o.hypothesis_id = h.id;
  o.source = source;
  o.skipped = true;
  o.skip_reason = std::move(reason);
  return o;
}

}  // namespace

HypothesisOutcome evaluate_hypothesis(const SurveySite& site, const Hypothesis& h, Source source) {
  if (std::find(h.sources.begin(), h.sources.end(), source) == h.sources.end()) {
    return skipped_outcome(h, source, "hypothesis not declared for the " + to_string(source) +
                                          " source");
  }

  HypothesisOutcome o;
  o.hypothesis_id = h.id;
  o.source = source;

  std::string reason;
  switch (h.kind) {
    case HypothesisKind::ratio: {
      std::optional<Measurement> num = try_resolve(site, h.numerator, source, reason);
      if (!num) return skipped_outcome(h, source, reason);
      std::optional<Measurement> den = try_resolve(site, h.denominator, source, reason);
      if (!den) return skipped_outcome(h, source, reason);
      try {
        o.test = test_against_constant(ratio(*num, *den), h.target);
      } catch (const NumericError& e) {
        return skipped_outcome(h, source, e.what());
      }
      return o;
    }
    case HypothesisKind::consistency: {
      std::vector<Measurement> group;
      for (const FeatureRef& ref : h.group) {
        std::optional<Measurement> m = try_resolve(site, ref, source, reason);
        if (!m) return skipped_outcome(h, source, reason);
        group.push_back(*m);
      }
      o.test = test_consistency(group);
      return o;
    }
    case HypothesisKind::angle: {
      Point2D pts[3];
      for (int i = 0; i < 3; ++i) {
        const Feature* f = site.find_feature(h.points[i]);
        if (f == nullptr) {
          return skipped_outcome(h, source, "feature '" + h.points[i] + "' not in site");
        }
        if (!f->xy_cm) {
          return skipped_outcome(h, source, "no coordinates for '" + h.points[i] + "'");
        }
        pts[i] = {(*f->xy_cm)[0], (*f->xy_cm)[1], f->xy_sigma_cm.value_or(0.0)};
      }
      try {
        o.test = test_against_constant(angle_at(pts[1], pts[0], pts[2]), h.target);
      } catch (const NumericError& e) {
        return skipped_outcome(h, source, e.what());
      }
      return o;
    }
  }
  throw ValidationError("evaluate_hypothesis: unknown hypothesis kind");
}

BatteryReport run_battery(const SurveySite& site, std::span<const Hypothesis> catalog,
                          double alpha, std::optional<Source> only_source) {
  if (catalog.empty()) throw ValidationError("run_battery: empty catalog");
  if (!(alpha > 0 && alpha < 1)) throw ValidationError("run_battery: alpha must be in (0, 1)");

  BatteryReport report;
  for (const Hypothesis& h : catalog) {
    for (Source s : h.sources) {
      if (only_source && s != *only_source) continue;
      report.outcomes.push_back(evaluate_hypothesis(site, h, s));
    }
  }
  std::sort(report.outcomes.begin(), report.outcomes.end(),
            [](const HypothesisOutcome& a, const HypothesisOutcome& b) {
              if (a.hypothesis_id != b.hypothesis_id) return a.hypothesis_id < b.hypothesis_id;
              return static_cast<int>(a.source) < static_cast<int>(b.source);
            });

  for (const HypothesisOutcome& o : report.outcomes) {
    if (o.skipped) {
      ++report.tests_skipped;
    } else {
      ++report.tests_run;
    }
  }
  report.empty = report.tests_run == 0;
  if (report.empty) {
    report.plan = {alpha, 0, alpha};
  } else {
    report.plan = bonferroni(alpha, report.tests_run);
    for (const HypothesisOutcome& o : report.outcomes) {
      if (!o.skipped && o.test.p < report.plan.alpha_prime) ++report.rejections;
    }
  }
  return report;
}

namespace {

struct UnitTermSpec {
  const char* feature_id;
  Level level;
  TargetConstant multiplier;
};

std::vector<UnitTermSpec> unit_term_specs() {
  return {
      {"outer_d_width", Level::as_measured, TargetConstant::integer(1)},
      {"south_wall_length", Level::as_measured, TargetConstant::inverse_golden()},
      {"kiva_a_inner", Level::at_ground, TargetConstant::rational(64, 9)},
      {"kiva_b_inner", Level::as_measured, TargetConstant::rational(64, 9)},
      {"kiva_c_inner", Level::as_measured, TargetConstant::rational(64, 9)},
      {"kiva_d_inner", Level::as_measured, TargetConstant::rational_sqrt(6, 1, 2)},
      {"kiva_a_outer", Level::at_ground, TargetConstant::rational(16, 3)},
      {"kiva_b_outer", Level::as_measured, TargetConstant::rational_sqrt(32, 9, 2)},
      {"kiva_c_outer", Level::as_measured, TargetConstant::rational_sqrt(32, 9, 2)},
      {"kiva_d_outer", Level::as_measured, TargetConstant::integer(6)},
      {"kiva_b_sw_corner", Level::as_measured, TargetConstant::integer(2)},
      {"kiva_c_se_corner", Level::as_measured, TargetConstant::integer(2)},
      {"kiva_d_se_corner", Level::as_measured, TargetConstant::integer(3)},
      {"kiva_b_outer_south_wall", Level::as_measured, TargetConstant::integer(3)},
      {"kiva_d_center_se_corner", Level::as_measured, TargetConstant::integer(2)},
      {"kiva_bc_gap", Level::as_measured, TargetConstant::integer(3)},
      {"sun_shrine_kiva_a_center", Level::as_measured, TargetConstant::integer(2)},
      {"kiva_a_center_south_wall", Level::as_measured, TargetConstant::integer(2)},
  };
}

}  // namespace

std::optional<std::vector<double>> reference_column(const std::string& site_name, Source source) {
  if (site_name != "sun_temple") return std::nullopt;
  if (source == Source::aerial) {
    return std::vector<double>{1948, 1978, 1920, 1947, 1927, 1936, 1906, 1921, 1977,
                               1992, 1948, 1942, 2013, 1974, 1968, 1959, 1944, 1934};
  }
  return std::vector<double>{1943, 1977, 1913, 1920, 1899, 1921, 1884, 1926,
                             1994, 2004, 1944, 1920, 1965, 2004, 1996, 1929};
}

UnitEstimate estimate_unit(const SurveySite& site, Source source, Weighting weighting) {
  UnitEstimate est;
  est.source = source;
  est.weighting = weighting;

  std::vector<Measurement> resolved;
  for (const UnitTermSpec& spec : unit_term_specs()) {
    UnitTerm term;
    term.feature_id = spec.feature_id;
    term.level = spec.level;
    term.multiplier = spec.multiplier;
    try {
      Measurement base = resolve_length(site, spec.feature_id, source, spec.level);
      term.scaled = scale(base, spec.multiplier.value());
      term.unit_value = term.scaled.value / est.divisor;
      term.resolved = true;
      resolved.push_back(term.scaled);
    } catch (const ValidationError&) {
      term.resolved = false;
    }
    est.terms.push_back(term);
  }
  if (resolved.size() < 2) {
    throw ValidationError("estimate_unit: fewer than 2 terms resolve for the " +
                          to_string(source) + " source");
  }

  if (std::optional<std::vector<double>> column = reference_column(site.name(), source)) {
    for (size_t i = 0; i < est.terms.size() && i < column->size(); ++i) {
      UnitTerm& term = est.terms[i];
      if (!term.resolved) continue;
      term.reference_cm = (*column)[i];
      term.deviation = std::abs(term.scaled.value - *term.reference_cm) / *term.reference_cm;
      term.flagged = *term.deviation > 0.02;
    }
  }

  est.x = scatter_average(resolved, weighting, ScatterMode::population);
  est.unit = scale(est.x, 1.0 / est.divisor);
  return est;
}

QuantogramResult quantogram_scan(std::span<const Measurement> lengths, double q_min, double q_max,
                                 int steps) {
  if (lengths.size() < 5) throw ValidationError("quantogram_scan: need at least 5 lengths");
  if (!(q_min > 0) || !(q_max > q_min)) {
    throw ValidationError("quantogram_scan: need 0 < q_min < q_max");
  }
  if (steps < 2) throw ValidationError("quantogram_scan: need at least 2 grid steps");
  for (const Measurement& m : lengths) {
    validate(m, "quantogram_scan length");
    if (m.value <= 0) throw ValidationError("quantogram_scan: lengths must be positive");
  }

  const double n = static_cast<double>(lengths.size());
  const double amp = std::sqrt(2.0 / n);
  QuantogramResult result;
  result.curve.reserve(steps);
  for (int i = 0; i < steps; ++i) {
    double q = q_min + i * (q_max - q_min) / (steps - 1);
    double sum = 0.0;
    for (const Measurement& m : lengths) {
      double eps = std::remainder(m.value, q);
      sum += std::cos(2.0 * std::numbers::pi * eps / q);
    }
    double score = amp * sum;
    result.curve.emplace_back(q, score);
    if (i == 0 || score > result.score_best) {
      result.q_best = q;
      result.score_best = score;
    }
  }
  return result;
}

namespace {

using json = nlohmann::ordered_json;

FeatureRef parse_selector(const json& j, const std::string& where) {
  if (j.is_string()) return {j.get<std::string>(), Level::as_measured};
  if (!j.is_object()) throw ValidationError(where + ": selector must be a string or object");
  FeatureRef ref;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "id" && it.key() != "level") {
      throw ValidationError(where + ": unknown selector key '" + it.key() + "'");
    }
  }
  if (!j.contains("id") || !j["id"].is_string()) {
    throw ValidationError(where + ": selector needs a string 'id'");
  }
  ref.id = j["id"].get<std::string>();
  if (j.contains("level")) {
    std::string level = j["level"].get<std::string>();
    if (level == "asMeasured") {
      ref.level = Level::as_measured;
    } else if (level == "atGround") {
      ref.level = Level::at_ground;
    } else {
      throw ValidationError(where + ": level must be asMeasured or atGround");
    }
  }
  return ref;
}

TargetConstant parse_target(const json& j, const std::string& where) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "phi") return TargetConstant::golden();
    if (s == "1/phi") return TargetConstant::inverse_golden();
    throw ValidationError(where + ": unknown target '" + s + "'");
  }
  if (!j.is_object()) throw ValidationError(where + ": target must be 'phi' or {p, q, d}");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "p" && it.key() != "q" && it.key() != "d") {
      throw ValidationError(where + ": unknown target key '" + it.key() + "'");
    }
  }
  if (!j.contains("p") || !j["p"].is_number_integer() || !j.contains("q") ||
      !j["q"].is_number_integer()) {
    throw ValidationError(where + ": target needs integer p and q");
  }
  long long p = j["p"].get<long long>();
  long long q = j["q"].get<long long>();
  long long d = 1;
  if (j.contains("d")) {
    if (!j["d"].is_number_integer()) throw ValidationError(where + ": target d must be integer");
    d = j["d"].get<long long>();
  }
  return TargetConstant::rational_sqrt(p, q, d);
}

}  // namespace

std::vector<Hypothesis> load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open catalog file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("catalog file " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw ValidationError("catalog file must be a JSON array");

  std::vector<Hypothesis> catalog;
  for (const json& j : doc) {
    if (!j.is_object()) throw ValidationError("catalog entries must be objects");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      if (k != "id" && k != "numerator" && k != "denominator" && k != "target" && k != "source") {
        throw ValidationError("catalog entry: unknown key '" + k + "'");
      }
    }
    if (!j.contains("id") || !j["id"].is_string()) {
      throw ValidationError("catalog entry needs a string 'id'");
    }
    Hypothesis h;
    h.id = j["id"].get<std::string>();
    const std::string where = "catalog entry '" + h.id + "'";
    if (!j.contains("numerator") || !j.contains("denominator") || !j.contains("target")) {
      throw ValidationError(where + ": needs numerator, denominator, and target");
    }
    h.kind = HypothesisKind::ratio;
    h.numerator = parse_selector(j["numerator"], where);
    h.denominator = parse_selector(j["denominator"], where);
    h.target = parse_target(j["target"], where);
    std::string source = j.contains("source") ? j["source"].get<std::string>() : "both";
    if (source == "aerial") {
      h.sources = {Source::aerial};
    } else if (source == "ground") {
      h.sources = {Source::ground};
    } else if (source == "both") {
      h.sources = kBothSources;
    } else {
      throw ValidationError(where + ": source must be aerial, ground, or both");
    }
    h.description = h.numerator.id + " over " + h.denominator.id + " against " + h.target.text();
    for (const Hypothesis& prev : catalog) {
      if (prev.id == h.id) throw ValidationError("duplicate catalog id '" + h.id + "'");
    }
    catalog.push_back(std::move(h));
  }
  return catalog;
}

}  // namespace geomprobe
