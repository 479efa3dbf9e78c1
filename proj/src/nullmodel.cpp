#include "geomprobe/nullmodel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <random>
#include <string>
#include <thread>

#include <json.hpp>

#include "geomprobe/errors.hpp"

namespace geomprobe {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

void check_range(const Range& r, double min_lo, const char* name) {
  if (!(std::isfinite(r.lo) && std::isfinite(r.hi))) {
    throw ValidationError(std::string("prior: ") + name + " must be finite");
  }
  if (r.lo > r.hi) throw ValidationError(std::string("prior: ") + name + " has lo > hi");
  if (r.lo < min_lo) throw ValidationError(std::string("prior: ") + name + " is out of range");
}

void check_fraction(const Range& r, const char* name) {
  check_range(r, 0.0, name);
  if (r.hi > 1.0) throw ValidationError(std::string("prior: ") + name + " must lie within [0, 1]");
}

double draw(const Range& r, std::mt19937_64& rng) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

double noise(double sigma, std::mt19937_64& rng) {
  if (sigma == 0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

struct Layout {
  double w = 0, len = 0;
  double ri[4] = {0, 0, 0, 0};
  double ro[4] = {0, 0, 0, 0};
  double ax = 0, ay = 0, bx = 0, by = 0, cx = 0, cy = 0, dx = 0, dy = 0;
  double shx = 0, shy = 0;
};

bool contained(double x, double y, double ro, double margin, double len, double w) {
  return x >= ro + margin && x <= len - ro - margin && y >= ro + margin && y <= w - ro - margin;
}

constexpr int kA = 0, kB = 1, kC = 2, kD = 3;

std::optional<Layout> draw_layout(const NullPrior& prior, std::mt19937_64& rng) {
  Layout g;
  g.w = draw(prior.width_cm, rng);
  g.len = draw(prior.aspect_ratio, rng) * g.w;
  for (int k = 0; k < 4; ++k) g.ri[k] = draw(prior.kiva_inner_radius_cm[k], rng);
  for (int k = 0; k < 4; ++k) g.ro[k] = draw(prior.wall_ratio, rng) * g.ri[k];

  const PlacementPrior& pl = prior.placement;
  double m = prior.margin_cm;
  double band = 0.3 * g.w;
  g.ax = -(m + g.ro[kA] + draw(pl.kiva_a_x, rng) * band);
  g.ay = draw(pl.kiva_a_y, rng) * g.w;
  g.bx = draw(pl.kiva_b_x, rng) * g.len;
  g.by = draw(pl.kiva_b_y, rng) * g.w;
  g.cx = draw(pl.kiva_c_x, rng) * g.len;
  g.cy = draw(pl.kiva_c_y, rng) * g.w;
  g.dx = g.len + m + g.ro[kD] + draw(pl.kiva_d_x, rng) * band;
  g.dy = draw(pl.kiva_d_y, rng) * g.w;
  g.shx = -(m + draw(pl.shrine_x, rng) * band);
  g.shy = -(m + draw(pl.shrine_y, rng) * band);

  if (!contained(g.bx, g.by, g.ro[kB], m, g.len, g.w)) return std::nullopt;
  if (!contained(g.cx, g.cy, g.ro[kC], m, g.len, g.w)) return std::nullopt;
  if (g.bx >= g.cx) return std::nullopt;
  if (std::hypot(g.cx - g.bx, g.cy - g.by) < g.ro[kB] + g.ro[kC] + m) return std::nullopt;
  return g;
}

// The prior is hopeless when even its most favorable corner (largest
// rectangle, smallest kivas) admits no valid placement of B and C.
void check_feasible_corner(const NullPrior& prior) {
  double w = prior.width_cm.hi;
  double len = prior.aspect_ratio.hi * w;
  double m = prior.margin_cm;
  double ro_b = prior.wall_ratio.lo * prior.kiva_inner_radius_cm[kB].lo;
  double ro_c = prior.wall_ratio.lo * prior.kiva_inner_radius_cm[kC].lo;

  auto window = [m](const Range& frac, double ro, double extent, double& lo, double& hi) {
    lo = std::max(frac.lo, extent > 0 ? (ro + m) / extent : 1.0);
    hi = std::min(frac.hi, extent > 0 ? 1.0 - (ro + m) / extent : 0.0);
    return lo <= hi;
  };

  const PlacementPrior& pl = prior.placement;
  double bx_lo, bx_hi, by_lo, by_hi, cx_lo, cx_hi, cy_lo, cy_hi;
  bool ok = window(pl.kiva_b_x, ro_b, len, bx_lo, bx_hi) &&
            window(pl.kiva_b_y, ro_b, w, by_lo, by_hi) &&
            window(pl.kiva_c_x, ro_c, len, cx_lo, cx_hi) &&
            window(pl.kiva_c_y, ro_c, w, cy_lo, cy_hi);
  if (ok) ok = bx_lo < cx_hi;
  if (ok) {
    double dx = (cx_hi - bx_lo) * len;
    double dy = std::max(std::abs(cy_hi - by_lo), std::abs(by_hi - cy_lo)) * w;
    ok = std::hypot(dx, dy) >= ro_b + ro_c + m;
  }
  if (!ok) {
    throw InfeasiblePriorError(
        "prior admits no valid kiva B/C placement even at its most favorable corner");
  }
}

struct TrueFeature {
  const char* id;
  FeatureKind kind;
  double value;
};

std::vector<TrueFeature> true_features(const Layout& g) {
  double bc = std::hypot(g.cx - g.bx, g.cy - g.by);
  double d_se = std::hypot(g.dx - g.len, g.dy);
  return {
      {"kiva_a_inner", FeatureKind::circle, g.ri[kA]},
      {"kiva_a_outer", FeatureKind::circle, g.ro[kA]},
      {"kiva_b_inner", FeatureKind::circle, g.ri[kB]},
      {"kiva_b_outer", FeatureKind::circle, g.ro[kB]},
      {"kiva_c_inner", FeatureKind::circle, g.ri[kC]},
      {"kiva_c_outer", FeatureKind::circle, g.ro[kC]},
      {"kiva_d_inner", FeatureKind::circle, g.ri[kD]},
      {"kiva_d_outer", FeatureKind::circle, g.ro[kD]},
      {"south_wall_length", FeatureKind::span, g.len},
      {"outer_d_width", FeatureKind::span, g.w},
      {"kiva_bc_gap", FeatureKind::span, bc - g.ro[kB] - g.ro[kC]},
      {"kiva_bc_centers", FeatureKind::span, bc},
      {"kiva_b_center_south_wall", FeatureKind::span, g.by},
      {"kiva_b_sw_corner", FeatureKind::span, std::hypot(g.bx, g.by) - g.ro[kB]},
      {"kiva_c_se_corner", FeatureKind::span, std::hypot(g.cx - g.len, g.cy) - g.ro[kC]},
      {"kiva_d_se_corner", FeatureKind::span, d_se - g.ro[kD]},
      {"kiva_d_center_se_corner", FeatureKind::span, d_se},
      {"sun_shrine_kiva_a_center", FeatureKind::span,
       std::hypot(g.ax - g.shx, g.ay - g.shy)},
      {"kiva_a_center_south_wall", FeatureKind::span, g.ay},
  };
}

}  // namespace

void validate_prior(const NullPrior& prior) {
  check_range(prior.width_cm, 1e-9, "width_cm");
  check_range(prior.aspect_ratio, 1e-9, "aspect_ratio");
  static const char* radius_names[4] = {"kiva_a radius", "kiva_b radius", "kiva_c radius",
                                        "kiva_d radius"};
  for (int k = 0; k < 4; ++k) check_range(prior.kiva_inner_radius_cm[k], 1e-9, radius_names[k]);
  check_range(prior.wall_ratio, 1.0, "wall_ratio");
  if (!(std::isfinite(prior.margin_cm) && prior.margin_cm >= 0)) {
    throw ValidationError("prior: margin_cm must be nonnegative");
  }
  check_range(prior.relative_sigma, 0.0, "relative_sigma");
  if (prior.relative_sigma.hi >= 1.0) {
    throw ValidationError("prior: relative_sigma must stay below 1");
  }
  if (prior.max_attempts < 1) throw ValidationError("prior: max_attempts must be >= 1");
  check_fraction(prior.placement.kiva_a_x, "placement.kiva_a_x");
  check_fraction(prior.placement.kiva_a_y, "placement.kiva_a_y");
  check_fraction(prior.placement.kiva_b_x, "placement.kiva_b_x");
  check_fraction(prior.placement.kiva_b_y, "placement.kiva_b_y");
  check_fraction(prior.placement.kiva_c_x, "placement.kiva_c_x");
  check_fraction(prior.placement.kiva_c_y, "placement.kiva_c_y");
  check_fraction(prior.placement.kiva_d_x, "placement.kiva_d_x");
  check_fraction(prior.placement.kiva_d_y, "placement.kiva_d_y");
  check_fraction(prior.placement.shrine_x, "placement.shrine_x");
  check_fraction(prior.placement.shrine_y, "placement.shrine_y");
}

SurveySite sample_null_site(const NullPrior& prior, std::uint64_t seed) {
  validate_prior(prior);
  check_feasible_corner(prior);

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < prior.max_attempts; ++attempt) {
    std::optional<Layout> layout = draw_layout(prior, rng);
    if (!layout) continue;

    std::vector<Feature> features;
    bool positive = true;
    for (const TrueFeature& tf : true_features(*layout)) {
      Feature f;
      f.id = tf.id;
      f.kind = tf.kind;
      // The shrine-derived spans are observable from the air only; synthetic
      // sites keep the same source schema as shipped surveys so batteries
      // run the same test count.
      bool aerial_only = f.id == "sun_shrine_kiva_a_center" || f.id == "kiva_a_center_south_wall";
      for (Source s : {Source::aerial, Source::ground}) {
        if (s == Source::ground && aerial_only) continue;
        double rel = draw(prior.relative_sigma, rng);
        double sigma = rel * tf.value;
        double value = tf.value + noise(sigma, rng);
        if (value <= 0) positive = false;
        Measurement m{value, sigma, Unit::centimeters};
        (s == Source::aerial ? f.aerial : f.ground) = m;
      }
      features.push_back(std::move(f));
    }
    if (!positive) continue;

    return SurveySite("null_trial", std::nullopt, std::move(features), {},
                      {{"kiva_b_outer_south_wall", "kiva_b_center_south_wall", "kiva_b_outer",
                        '-'}});
  }
  throw InfeasiblePriorError("rejection sampling exhausted " +
                             std::to_string(prior.max_attempts) + " attempts");
}

int count_hits(const BatteryReport& report, const HitRule& rule) {
  int hits = 0;
  for (const HypothesisOutcome& o : report.outcomes) {
    if (!o.skipped && o.test.p >= rule.threshold) ++hits;
  }
  return hits;
}

NullReport estimate_fpr(const NullPrior& prior, std::span<const Hypothesis> catalog,
                        const HitRule& rule, long n_trials, std::uint64_t seed,
                        std::optional<int> observed, int threads) {
  if (n_trials < 1) throw ValidationError("estimate_fpr: n_trials must be >= 1");
  if (threads < 1) throw ValidationError("estimate_fpr: threads must be >= 1");
  if (!std::isfinite(rule.threshold)) {
    throw ValidationError("estimate_fpr: threshold must be finite");
  }
  validate_prior(prior);
  check_feasible_corner(prior);

  NullReport report;
  report.n_trials = n_trials;
  report.seed = seed;
  report.rule = rule;
  report.observed = observed;
  report.hits.assign(n_trials, 0);
  std::vector<int> runnable(n_trials, 0);

  auto worker = [&](long first) {
    for (long t = first; t < n_trials; t += threads) {
      SurveySite site = sample_null_site(prior, mix_seed(seed, static_cast<std::uint64_t>(t)));
      BatteryReport battery = run_battery(site, catalog, 0.05);
      report.hits[t] = count_hits(battery, rule);
      runnable[t] = battery.tests_run;
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          worker(t);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  report.max_possible = *std::max_element(runnable.begin(), runnable.end());
  report.histogram.assign(report.max_possible + 1, 0);
  double total = 0.0;
  for (int h : report.hits) {
    ++report.histogram[h];
    total += h;
  }
  report.mean_hits = total / static_cast<double>(n_trials);

  if (observed) {
    long tail = 0;
    for (int h : report.hits) {
      if (h >= *observed) ++tail;
    }
    double n = static_cast<double>(n_trials);
    double phat = static_cast<double>(tail) / n;
    report.tail_probability = phat;
    const double z = 1.959963984540054;
    double denom = 1.0 + z * z / n;
    double center = (phat + z * z / (2 * n)) / denom;
    double half = z * std::sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom;
    report.ci_low = std::max(0.0, center - half);
    report.ci_high = std::min(1.0, center + half);
  }
  return report;
}

namespace {

using json = nlohmann::ordered_json;

Range parse_range(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError("prior: " + name + " must be a [lo, hi] number pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

NullPrior load_prior(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open prior file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("prior file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ValidationError("prior file must be a JSON object");

  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    if (k != "width_cm" && k != "aspect_ratio" && k != "kiva_inner_radius_cm" &&
        k != "wall_ratio" && k != "margin_cm" && k != "relative_sigma" && k != "max_attempts" &&
        k != "placement") {
      throw ValidationError("prior: unknown key '" + k + "'");
    }
  }
  for (const char* req : {"width_cm", "aspect_ratio", "kiva_inner_radius_cm", "wall_ratio",
                          "relative_sigma"}) {
    if (!doc.contains(req)) throw ValidationError(std::string("prior: missing key '") + req + "'");
  }

  NullPrior prior;
  prior.width_cm = parse_range(doc["width_cm"], "width_cm");
  prior.aspect_ratio = parse_range(doc["aspect_ratio"], "aspect_ratio");

  const json& radii = doc["kiva_inner_radius_cm"];
  if (!radii.is_object()) throw ValidationError("prior: kiva_inner_radius_cm must be an object");
  static const char* kiva_keys[4] = {"kiva_a", "kiva_b", "kiva_c", "kiva_d"};
  for (auto it = radii.begin(); it != radii.end(); ++it) {
    if (std::find_if(std::begin(kiva_keys), std::end(kiva_keys), [&](const char* k) {
          return it.key() == k;
        }) == std::end(kiva_keys)) {
      throw ValidationError("prior: unknown kiva key '" + it.key() + "'");
    }
  }
  for (int k = 0; k < 4; ++k) {
    if (!radii.contains(kiva_keys[k])) {
      throw ValidationError(std::string("prior: missing radius range for ") + kiva_keys[k]);
    }
    prior.kiva_inner_radius_cm[k] =
        parse_range(radii[kiva_keys[k]], std::string("kiva_inner_radius_cm.") + kiva_keys[k]);
  }

  prior.wall_ratio = parse_range(doc["wall_ratio"], "wall_ratio");
  if (doc.contains("margin_cm")) {
    if (!doc["margin_cm"].is_number()) throw ValidationError("prior: margin_cm must be a number");
    prior.margin_cm = doc["margin_cm"].get<double>();
  }
  prior.relative_sigma = parse_range(doc["relative_sigma"], "relative_sigma");
  if (doc.contains("max_attempts")) {
    if (!doc["max_attempts"].is_number_integer()) {
      throw ValidationError("prior: max_attempts must be an integer");
    }
    prior.max_attempts = doc["max_attempts"].get<int>();
  }

  if (doc.contains("placement")) {
    const json& pl = doc["placement"];
    if (!pl.is_object()) throw ValidationError("prior: placement must be an object");
    struct Slot {
      const char* key;
      Range* range;
    };
    Slot slots[] = {
        {"kiva_a_x", &prior.placement.kiva_a_x}, {"kiva_a_y", &prior.placement.kiva_a_y},
        {"kiva_b_x", &prior.placement.kiva_b_x}, {"kiva_b_y", &prior.placement.kiva_b_y},
        {"kiva_c_x", &prior.placement.kiva_c_x}, {"kiva_c_y", &prior.placement.kiva_c_y},
        {"kiva_d_x", &prior.placement.kiva_d_x}, {"kiva_d_y", &prior.placement.kiva_d_y},
        {"shrine_x", &prior.placement.shrine_x}, {"shrine_y", &prior.placement.shrine_y},
    };
    for (auto it = pl.begin(); it != pl.end(); ++it) {
      bool known = false;
      for (const Slot& s : slots) known |= it.key() == s.key;
      if (!known) throw ValidationError("prior: unknown placement key '" + it.key() + "'");
    }
    for (const Slot& s : slots) {
      if (pl.contains(s.key)) {
        *s.range = parse_range(pl[s.key], std::string("placement.") + s.key);
      }
    }
  }

  validate_prior(prior);
  return prior;
}

}  // namespace geomprobe
