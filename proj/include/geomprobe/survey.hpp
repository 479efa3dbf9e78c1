#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "geomprobe/measurement.hpp"

namespace geomprobe {

enum class Source { aerial, ground };
enum class Level { as_measured, at_ground };

std::string to_string(Source s);
std::string to_string(Level l);

enum class FeatureKind { point, circle, span };

std::string to_string(FeatureKind k);

// One named site feature. Circles carry a radius measurement, spans a
// distance; points may carry no measurement at all and exist for their
// coordinates. A feature may be present in one survey source or both.
struct Feature {
  std::string id;
  FeatureKind kind = FeatureKind::span;
  std::optional<Measurement> aerial;
  std::optional<Measurement> ground;
  std::optional<std::array<double, 2>> xy_cm;  // site frame, y up
  std::optional<double> xy_sigma_cm;           // isotropic positional sigma
};

// Additive correction applied when a measurement is requested at ground
// level (e.g. a radius taken at the top of an inward-sloping wall). The
// correction is treated as exact: it shifts the value, not the sigma.
struct Adjustment {
  std::string id;  // feature it applies to
  double delta_cm = 0.0;
  std::string note;
};

// Derived scalar defined as the sum or difference of two feature
// measurements, with sigmas combined in quadrature.
struct DerivedSpanRule {
  std::string id;
  std::string lhs;
  std::string rhs;
  char op = '-';  // '+' or '-'
};

class SurveySite {
public:
  SurveySite() = default;
  SurveySite(std::string name, std::optional<double> scale_cm_per_px, std::vector<Feature> features,
             std::vector<Adjustment> adjustments, std::vector<DerivedSpanRule> derived);

  const std::string& name() const { return name_; }
  const std::optional<double>& scale_cm_per_px() const { return scale_cm_per_px_; }
  const std::vector<Feature>& features() const { return features_; }
  const std::vector<Adjustment>& adjustments() const { return adjustments_; }
  const std::vector<DerivedSpanRule>& derived() const { return derived_; }

  const Feature* find_feature(const std::string& id) const;
  const DerivedSpanRule* find_derived(const std::string& id) const;

private:
  std::string name_;
  std::optional<double> scale_cm_per_px_;
  std::vector<Feature> features_;
  std::vector<Adjustment> adjustments_;
  std::vector<DerivedSpanRule> derived_;
};

// Parses and fully validates a survey file. Unknown JSON fields, duplicate
// ids, dangling references, and invalid measurements are all rejected, with
// the offending field or feature named in the error.
SurveySite load_site(const std::filesystem::path& path);

// Canonical serialization; load followed by save is idempotent.
std::string save_site(const SurveySite& site);
void save_site(const SurveySite& site, const std::filesystem::path& path);

// Feature measurement lookup. at_ground applies declared adjustments to the
// value (sigma unchanged: corrections are exact); as_measured never consults
// adjustments. Missing feature or missing source throws ValidationError.
Measurement resolve_measurement(const SurveySite& site, const std::string& feature_id,
                                Source source, Level level);

// Evaluates a derived rule for one source; operands resolve as measured.
Measurement evaluate_derived_span(const SurveySite& site, const DerivedSpanRule& rule,
                                  Source source);

// Lookup across both namespaces: plain features resolve at the given level,
// derived ids via their rule.
Measurement resolve_length(const SurveySite& site, const std::string& id, Source source,
                           Level level);

}  // namespace geomprobe
