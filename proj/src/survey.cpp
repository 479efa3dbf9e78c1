#include "geomprobe/survey.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geomprobe/errors.hpp"

namespace geomprobe {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Source s) { return s == Source::aerial ? "aerial" : "ground"; }

std::string to_string(Level l) { return l == Level::as_measured ? "asMeasured" : "atGround"; }

std::string to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::point: return "point";
    case FeatureKind::circle: return "circle";
    case FeatureKind::span: return "span";
  }
  return "span";
}

SurveySite::SurveySite(std::string name, std::optional<double> scale_cm_per_px,
                       std::vector<Feature> features, std::vector<Adjustment> adjustments,
                       std::vector<DerivedSpanRule> derived)
    : name_(std::move(name)),
      scale_cm_per_px_(scale_cm_per_px),
      features_(std::move(features)),
      adjustments_(std::move(adjustments)),
      derived_(std::move(derived)) {
  if (name_.empty()) throw ValidationError("site name must be nonempty");
  if (scale_cm_per_px_ && !(std::isfinite(*scale_cm_per_px_) && *scale_cm_per_px_ > 0)) {
    throw ValidationError("scale_cm_per_px must be finite and positive");
  }

  std::set<std::string> ids;
  for (const Feature& f : features_) {
    if (f.id.empty()) throw ValidationError("feature with empty id");
    if (!ids.insert(f.id).second) throw ValidationError("duplicate feature id '" + f.id + "'");
    if (f.aerial) validate(*f.aerial, "feature '" + f.id + "' (aerial)");
    if (f.ground) validate(*f.ground, "feature '" + f.id + "' (ground)");
    if (!f.aerial && !f.ground && !f.xy_cm) {
      throw ValidationError("feature '" + f.id + "' has neither a measurement nor coordinates");
    }
    if (f.xy_cm) {
      if (!std::isfinite((*f.xy_cm)[0]) || !std::isfinite((*f.xy_cm)[1])) {
        throw ValidationError("feature '" + f.id + "': xy_cm must be finite");
      }
    }
    if (f.xy_sigma_cm) {
      if (!f.xy_cm) throw ValidationError("feature '" + f.id + "': xy_sigma_cm without xy_cm");
      if (!(std::isfinite(*f.xy_sigma_cm) && *f.xy_sigma_cm >= 0)) {
        throw ValidationError("feature '" + f.id + "': xy_sigma_cm must be finite and >= 0");
      }
    }
  }

  for (const Adjustment& a : adjustments_) {
    if (!ids.count(a.id)) {
      throw ValidationError("adjustment references unknown feature '" + a.id + "'");
    }
    if (!std::isfinite(a.delta_cm)) {
      throw ValidationError("adjustment for '" + a.id + "': delta_cm must be finite");
    }
  }

  std::set<std::string> derived_ids;
  for (const DerivedSpanRule& r : derived_) {
    if (r.id.empty()) throw ValidationError("derived rule with empty id");
    if (ids.count(r.id)) {
      throw ValidationError("derived id '" + r.id + "' collides with a feature id");
    }
    if (!derived_ids.insert(r.id).second) {
      throw ValidationError("duplicate derived id '" + r.id + "'");
    }
    if (r.op != '+' && r.op != '-') {
      throw ValidationError("derived '" + r.id + "': operator must be '+' or '-'");
    }
    for (const std::string* ref : {&r.lhs, &r.rhs}) {
      if (!ids.count(*ref)) {
        throw ValidationError("derived '" + r.id + "' references unknown feature '" + *ref + "'");
      }
    }
  }
}

const Feature* SurveySite::find_feature(const std::string& id) const {
  for (const Feature& f : features_) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

const DerivedSpanRule* SurveySite::find_derived(const std::string& id) const {
  for (const DerivedSpanRule& r : derived_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

namespace {

void reject_unknown_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ValidationError(where + ": unknown field '" + item.key() + "'");
  }
}

double require_number(const ordered_json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + ": field '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

std::string require_string(const ordered_json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ValidationError(where + ": field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

Measurement parse_measurement(const ordered_json& obj, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": measurement must be an object");
  reject_unknown_keys(obj, {"value", "sigma", "unit"}, where);
  Measurement m;
  m.value = require_number(obj, "value", where);
  m.sigma = require_number(obj, "sigma", where);
  std::string unit = require_string(obj, "unit", where);
  if (unit != "cm") throw ValidationError(where + ": unit must be \"cm\", got \"" + unit + "\"");
  m.unit = Unit::centimeters;
  return m;
}

FeatureKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "point") return FeatureKind::point;
  if (s == "circle") return FeatureKind::circle;
  if (s == "span") return FeatureKind::span;
  throw ValidationError(where + ": kind must be point, circle, or span; got \"" + s + "\"");
}

DerivedSpanRule parse_derived_expr(const std::string& id, const std::string& expr) {
  const std::string where = "derived '" + id + "'";
  DerivedSpanRule rule;
  rule.id = id;
  size_t pos = expr.find(" + ");
  if (pos != std::string::npos) {
    rule.op = '+';
  } else {
    pos = expr.find(" - ");
    if (pos == std::string::npos) {
      throw ValidationError(where + ": expr must be of the form \"A + B\" or \"A - B\"");
    }
    rule.op = '-';
  }
  rule.lhs = expr.substr(0, pos);
  rule.rhs = expr.substr(pos + 3);
  if (rule.lhs.empty() || rule.rhs.empty()) {
    throw ValidationError(where + ": expr operands must be nonempty");
  }
  return rule;
}

ordered_json number_or_int(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) {
    return static_cast<long long>(v);
  }
  return v;
}

}  // namespace

SurveySite load_site(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open survey file: " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("survey file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("survey file: top level must be an object");
  reject_unknown_keys(j, {"site", "scale_cm_per_px", "features", "adjustments", "derived"},
                      "survey file");

  std::string name = require_string(j, "site", "survey file");

  std::optional<double> scale;
  if (j.contains("scale_cm_per_px") && !j.at("scale_cm_per_px").is_null()) {
    if (!j.at("scale_cm_per_px").is_number()) {
      throw ValidationError("survey file: scale_cm_per_px must be a number or null");
    }
    scale = j.at("scale_cm_per_px").get<double>();
  }

  if (!j.contains("features") || !j.at("features").is_array()) {
    throw ValidationError("survey file: missing features array");
  }

  std::vector<Feature> features;
  size_t index = 0;
  for (const auto& fj : j.at("features")) {
    const std::string fallback = "features[" + std::to_string(index) + "]";
    if (!fj.is_object()) throw ValidationError(fallback + ": must be an object");
    std::string where = fj.contains("id") && fj.at("id").is_string()
                            ? "feature '" + fj.at("id").get<std::string>() + "'"
                            : fallback;
    reject_unknown_keys(fj, {"id", "kind", "measurements", "xy_cm", "xy_sigma_cm"}, where);
    Feature f;
    f.id = require_string(fj, "id", where);
    f.kind = parse_kind(require_string(fj, "kind", where), where);
    if (fj.contains("measurements") && !fj.at("measurements").is_null()) {
      const auto& mj = fj.at("measurements");
      if (!mj.is_object()) throw ValidationError(where + ": measurements must be an object");
      reject_unknown_keys(mj, {"aerial", "ground"}, where + ".measurements");
      if (mj.contains("aerial") && !mj.at("aerial").is_null()) {
        f.aerial = parse_measurement(mj.at("aerial"), where + ".measurements.aerial");
      }
      if (mj.contains("ground") && !mj.at("ground").is_null()) {
        f.ground = parse_measurement(mj.at("ground"), where + ".measurements.ground");
      }
    }
    if (fj.contains("xy_cm") && !fj.at("xy_cm").is_null()) {
      const auto& xy = fj.at("xy_cm");
      if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number()) {
        throw ValidationError(where + ": xy_cm must be [x, y]");
      }
      f.xy_cm = {{xy[0].get<double>(), xy[1].get<double>()}};
    }
    if (fj.contains("xy_sigma_cm") && !fj.at("xy_sigma_cm").is_null()) {
      if (!fj.at("xy_sigma_cm").is_number()) {
        throw ValidationError(where + ": xy_sigma_cm must be a number or null");
      }
      f.xy_sigma_cm = fj.at("xy_sigma_cm").get<double>();
    }
    features.push_back(std::move(f));
    ++index;
  }

  std::vector<Adjustment> adjustments;
  if (j.contains("adjustments") && !j.at("adjustments").is_null()) {
    if (!j.at("adjustments").is_array()) {
      throw ValidationError("survey file: adjustments must be an array");
    }
    for (const auto& aj : j.at("adjustments")) {
      if (!aj.is_object()) throw ValidationError("adjustments: entries must be objects");
      std::string where = aj.contains("id") && aj.at("id").is_string()
                              ? "adjustment for '" + aj.at("id").get<std::string>() + "'"
                              : "adjustment";
      reject_unknown_keys(aj, {"id", "delta_cm", "note"}, where);
      Adjustment a;
      a.id = require_string(aj, "id", where);
      a.delta_cm = require_number(aj, "delta_cm", where);
      if (aj.contains("note")) a.note = require_string(aj, "note", where);
      adjustments.push_back(std::move(a));
    }
  }

  std::vector<DerivedSpanRule> derived;
  if (j.contains("derived") && !j.at("derived").is_null()) {
    if (!j.at("derived").is_array()) throw ValidationError("survey file: derived must be an array");
    for (const auto& dj : j.at("derived")) {
      if (!dj.is_object()) throw ValidationError("derived: entries must be objects");
      std::string where = dj.contains("id") && dj.at("id").is_string()
                              ? "derived '" + dj.at("id").get<std::string>() + "'"
                              : "derived rule";
      reject_unknown_keys(dj, {"id", "expr"}, where);
      std::string id = require_string(dj, "id", where);
      std::string expr = require_string(dj, "expr", where);
      derived.push_back(parse_derived_expr(id, expr));
    }
  }

  return SurveySite(std::move(name), scale, std::move(features), std::move(adjustments),
                    std::move(derived));
}

std::string save_site(const SurveySite& site) {
  ordered_json j;
  j["site"] = site.name();
  if (site.scale_cm_per_px()) {
    j["scale_cm_per_px"] = number_or_int(*site.scale_cm_per_px());
  } else {
    j["scale_cm_per_px"] = nullptr;
  }

  j["features"] = ordered_json::array();
  for (const Feature& f : site.features()) {
    ordered_json fj;
    fj["id"] = f.id;
    fj["kind"] = to_string(f.kind);
    ordered_json mj;
    for (const auto& [key, m] : {std::pair{"aerial", &f.aerial}, std::pair{"ground", &f.ground}}) {
      if (*m) {
        ordered_json one;
        one["value"] = number_or_int((*m)->value);
        one["sigma"] = number_or_int((*m)->sigma);
        one["unit"] = "cm";
        mj[key] = one;
      } else {
        mj[key] = nullptr;
      }
    }
    fj["measurements"] = mj;
    if (f.xy_cm) {
      fj["xy_cm"] = ordered_json::array({number_or_int((*f.xy_cm)[0]), number_or_int((*f.xy_cm)[1])});
    } else {
      fj["xy_cm"] = nullptr;
    }
    if (f.xy_sigma_cm) {
      fj["xy_sigma_cm"] = number_or_int(*f.xy_sigma_cm);
    } else {
      fj["xy_sigma_cm"] = nullptr;
    }
    j["features"].push_back(fj);
  }

  j["adjustments"] = ordered_json::array();
  for (const Adjustment& a : site.adjustments()) {
    ordered_json aj;
    aj["id"] = a.id;
    aj["delta_cm"] = number_or_int(a.delta_cm);
    aj["note"] = a.note;
    j["adjustments"].push_back(aj);
  }

  j["derived"] = ordered_json::array();
  for (const DerivedSpanRule& r : site.derived()) {
    ordered_json dj;
    dj["id"] = r.id;
    dj["expr"] = r.lhs + " " + r.op + " " + r.rhs;
    j["derived"].push_back(dj);
  }

  return j.dump(2) + "\n";
}

void save_site(const SurveySite& site, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write survey file: " + path.string());
  out << save_site(site);
}

Measurement resolve_measurement(const SurveySite& site, const std::string& feature_id,
                                Source source, Level level) {
  const Feature* f = site.find_feature(feature_id);
  if (!f) throw ValidationError("unknown feature '" + feature_id + "'");
  const std::optional<Measurement>& m = source == Source::aerial ? f->aerial : f->ground;
  if (!m) {
    throw ValidationError("feature '" + feature_id + "' has no " + to_string(source) +
                          " measurement");
  }
  Measurement out = *m;
  if (level == Level::at_ground) {
    for (const Adjustment& a : site.adjustments()) {
      if (a.id == feature_id) out.value += a.delta_cm;
    }
  }
  return out;
}

Measurement evaluate_derived_span(const SurveySite& site, const DerivedSpanRule& rule,
                                  Source source) {
  Measurement lhs = resolve_measurement(site, rule.lhs, source, Level::as_measured);
  Measurement rhs = resolve_measurement(site, rule.rhs, source, Level::as_measured);
  return rule.op == '+' ? add(lhs, rhs) : subtract(lhs, rhs);
}

Measurement resolve_length(const SurveySite& site, const std::string& id, Source source,
                           Level level) {
  if (site.find_feature(id)) return resolve_measurement(site, id, source, level);
  if (const DerivedSpanRule* rule = site.find_derived(id)) {
    return evaluate_derived_span(site, *rule, source);
  }
  throw ValidationError("unknown feature or derived id '" + id + "'");
}

}  // namespace geomprobe
