#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geomprobe/circle_fit.hpp"
#include "geomprobe/constructs.hpp"
#include "geomprobe/errors.hpp"
#include "geomprobe/nullmodel.hpp"
#include "geomprobe/report.hpp"
#include "geomprobe/stats.hpp"
#include "geomprobe/survey.hpp"
#include "geomprobe/svg.hpp"

namespace {

using namespace geomprobe;

// Bad arguments that CLI11 cannot catch itself (e.g. an id that is not in
// the catalog). Exits 1 like any other usage error.
struct UsageError {
  std::string message;
};

struct CommonOpts {
  std::string site_path;
  std::string source = "both";
  double alpha = 0.05;
  std::string format = "markdown";
  std::string out_path;
};

TableFormat parse_format(const std::string& name) {
  return name == "csv" ? TableFormat::csv : TableFormat::markdown;
}

std::optional<Source> parse_source_filter(const std::string& name) {
  if (name == "aerial") return Source::aerial;
  if (name == "ground") return Source::ground;
  return std::nullopt;
}

std::vector<Source> selected_sources(const std::string& name) {
  if (name == "aerial") return {Source::aerial};
  if (name == "ground") return {Source::ground};
  return {Source::aerial, Source::ground};
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw ParseError("cannot open output file: " + out_path);
  file << text;
  file.flush();
  if (!file) throw ParseError("cannot write output file: " + out_path);
}

void add_site_option(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--site", opts.site_path, "survey site file")
      ->required()
      ->check(CLI::ExistingFile);
}

void add_source_option(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--source", opts.source, "survey source to evaluate")
      ->check(CLI::IsMember({"aerial", "ground", "both"}))
      ->capture_default_str();
}

void add_output_options(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--format", opts.format, "output table format")
      ->check(CLI::IsMember({"markdown", "csv"}))
      ->capture_default_str();
  sub->add_option("--out", opts.out_path, "write the report to a file instead of stdout");
}

std::vector<Hypothesis> pick_catalog(const std::string& catalog_path) {
  if (catalog_path.empty()) return builtin_catalog();
  return load_catalog(catalog_path);
}

std::vector<UnitEstimate> unit_estimates(const SurveySite& site, const std::string& source,
                                         Weighting weighting) {
  std::vector<UnitEstimate> units;
  std::string first_error;
  for (Source s : selected_sources(source)) {
    try {
      units.push_back(estimate_unit(site, s, weighting));
    } catch (const ValidationError& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (units.empty()) throw ValidationError(first_error);
  return units;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geomprobe: geometric construct detection and base-unit estimation "
               "for archaeological survey data"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* fit = app.add_subcommand("fit", "fit circles to digitized rim points");
  std::string points_path;
  double ref_px = 0.0;
  double ref_cm = 0.0;
  double ref_sigma_cm = 0.0;
  fit->add_option("--points", points_path, "CSV of digitized points")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--ref-px", ref_px, "reference length in pixels")
      ->required()
      ->check(CLI::PositiveNumber);
  fit->add_option("--ref-cm", ref_cm, "reference length on the ground, cm")
      ->required()
      ->check(CLI::PositiveNumber);
  fit->add_option("--ref-sigma-cm", ref_sigma_cm, "uncertainty of the reference length, cm")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_output_options(fit, opts);
  fit->callback([&] {
    Measurement scale =
        calibrate_scale(ref_px, Measurement{ref_cm, ref_sigma_cm, Unit::centimeters});
    std::vector<DigitizedSet> sets = load_points_csv(points_path);
    std::vector<CircleEstimate> passes;
    passes.reserve(sets.size());
    for (const DigitizedSet& set : sets) passes.push_back(fit_circle(set));
    std::vector<std::string> order;
    std::map<std::string, std::vector<CircleEstimate>> groups;
    for (const CircleEstimate& pass : passes) {
      if (groups.find(pass.feature_id) == groups.end()) order.push_back(pass.feature_id);
      groups[pass.feature_id].push_back(pass);
    }
    std::vector<AggregatedCircle> circles;
    for (const std::string& id : order) {
      const std::vector<CircleEstimate>& group = groups[id];
      if (group.size() < 2) {
        std::cerr << "geomprobe: feature '" << id << "' has a single pass; no aggregate\n";
        continue;
      }
      circles.push_back(aggregate_passes(group, scale));
    }
    write_output(emit_fit_report(passes, circles, parse_format(opts.format)), opts.out_path);
  });

  auto* test = app.add_subcommand("test", "evaluate one hypothesis from the catalog");
  std::string test_id;
  std::string test_catalog_path;
  test->add_option("--id", test_id, "hypothesis id")->required();
  test->add_option("--catalog", test_catalog_path, "hypothesis catalog file")
      ->check(CLI::ExistingFile);
  add_site_option(test, opts);
  add_source_option(test, opts);
  test->add_option("--alpha", opts.alpha, "significance level")->capture_default_str();
  add_output_options(test, opts);
  test->callback([&] {
    SurveySite site = load_site(opts.site_path);
    std::vector<Hypothesis> catalog = pick_catalog(test_catalog_path);
    const Hypothesis* match = nullptr;
    for (const Hypothesis& h : catalog) {
      if (h.id == test_id) {
        match = &h;
        break;
      }
    }
    if (match == nullptr) throw UsageError{"unknown hypothesis id '" + test_id + "'"};
    BatteryReport report = run_battery(site, std::span<const Hypothesis>(match, 1), opts.alpha,
                                       parse_source_filter(opts.source));
    write_output(emit_battery(report, parse_format(opts.format)), opts.out_path);
  });

  auto* battery = app.add_subcommand("battery", "run the full hypothesis battery on a site");
  std::string battery_catalog_path;
  battery->add_option("--catalog", battery_catalog_path,
                      "hypothesis catalog file replacing the built-in catalog")
      ->check(CLI::ExistingFile);
  add_site_option(battery, opts);
  add_source_option(battery, opts);
  battery->add_option("--alpha", opts.alpha, "significance level")->capture_default_str();
  add_output_options(battery, opts);
  battery->callback([&] {
    SurveySite site = load_site(opts.site_path);
    std::vector<Hypothesis> catalog = pick_catalog(battery_catalog_path);
    BatteryReport report =
        run_battery(site, catalog, opts.alpha, parse_source_filter(opts.source));
    std::vector<UnitEstimate> units;
    for (Source s : selected_sources(opts.source)) {
      try {
        units.push_back(estimate_unit(site, s));
      } catch (const ValidationError&) {
      }
    }
    write_output(emit_tables(site, report, units, parse_format(opts.format)), opts.out_path);
  });

  auto* unit = app.add_subcommand("unit", "estimate the common base unit of a site");
  std::string weighting_name = "unweighted";
  unit->add_option("--weighting", weighting_name, "scatter average weighting")
      ->check(CLI::IsMember({"unweighted", "inverse-variance"}))
      ->capture_default_str();
  add_site_option(unit, opts);
  add_source_option(unit, opts);
  add_output_options(unit, opts);
  unit->callback([&] {
    SurveySite site = load_site(opts.site_path);
    Weighting weighting = weighting_name == "inverse-variance" ? Weighting::inverse_variance
                                                               : Weighting::unweighted;
    std::vector<UnitEstimate> units = unit_estimates(site, opts.source, weighting);
    write_output(emit_unit_report(units, parse_format(opts.format)), opts.out_path);
  });

  auto* quant = app.add_subcommand("quantogram", "cosine quantogram scan over the unit terms");
  std::string quant_source = "aerial";
  double q_min = 0.0;
  double q_max = 0.0;
  int steps = 2000;
  quant->add_option("--source", quant_source, "survey source to scan")
      ->check(CLI::IsMember({"aerial", "ground"}))
      ->capture_default_str();
  auto* qmin_opt = quant->add_option("--qmin", q_min, "smallest candidate quantum, cm")
                       ->check(CLI::PositiveNumber);
  auto* qmax_opt = quant->add_option("--qmax", q_max, "largest candidate quantum, cm")
                       ->check(CLI::PositiveNumber);
  quant->add_option("--steps", steps, "grid steps between qmin and qmax")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_site_option(quant, opts);
  add_output_options(quant, opts);
  quant->callback([&] {
    SurveySite site = load_site(opts.site_path);
    Source source = quant_source == "ground" ? Source::ground : Source::aerial;
    UnitEstimate est = estimate_unit(site, source);
    std::vector<Measurement> lengths;
    for (const UnitTerm& term : est.terms) {
      if (!term.resolved) continue;
      lengths.push_back(Measurement{term.unit_value, term.scaled.sigma / est.divisor,
                                    Unit::centimeters});
    }
    double lo = qmin_opt->count() > 0 ? q_min : est.unit.value / 2.0;
    double hi = qmax_opt->count() > 0 ? q_max : est.unit.value * 2.0;
    QuantogramResult result = quantogram_scan(lengths, lo, hi, steps);
    write_output(emit_quantogram(result, parse_format(opts.format)), opts.out_path);
  });

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo null model for the battery");
  std::string prior_path;
  std::string sim_catalog_path;
  std::string sim_site_path;
  long trials = 1000;
  std::uint64_t seed = 12345;
  double threshold = HitRule{}.threshold;
  int threads = 1;
  simulate->add_option("--prior", prior_path, "null prior configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--catalog", sim_catalog_path,
                       "hypothesis catalog file replacing the built-in catalog")
      ->check(CLI::ExistingFile);
  simulate->add_option("--site", sim_site_path,
                       "observed site; its hit count is compared against the null")
      ->check(CLI::ExistingFile);
  simulate->add_option("--trials", trials, "number of synthetic sites")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--seed", seed, "master seed")->capture_default_str();
  simulate->add_option("--threshold", threshold, "p-value at or above which a test counts as a hit")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  simulate->add_option("--threads", threads, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_output_options(simulate, opts);
  simulate->callback([&] {
    NullPrior prior = load_prior(prior_path);
    std::vector<Hypothesis> catalog = pick_catalog(sim_catalog_path);
    HitRule rule{threshold};
    std::optional<int> observed;
    if (!sim_site_path.empty()) {
      SurveySite site = load_site(sim_site_path);
      observed = count_hits(run_battery(site, catalog, 0.05), rule);
    }
    NullReport report = estimate_fpr(prior, catalog, rule, trials, seed, observed, threads);
    write_output(emit_null_report(report, parse_format(opts.format)), opts.out_path);
  });

  auto* render = app.add_subcommand("render", "render construct overlays as SVG");
  std::vector<std::string> draws;
  render->add_option("--draw", draws,
                     "overlay family: kiva-circles, golden-rect, unit-lines, "
                     "equilateral:ID1,ID2, square-circles:ID")
      ->required();
  add_site_option(render, opts);
  render->add_option("--out", opts.out_path, "write the SVG to a file instead of stdout");
  render->callback([&] {
    SurveySite site = load_site(opts.site_path);
    SvgResult result = render_overlay(site, draws);
    for (const std::string& warning : result.warnings) {
      std::cerr << "geomprobe: warning: " << warning << "\n";
    }
    write_output(result.document, opts.out_path);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "geomprobe: " << e.message << "\n";
    return 1;
  } catch (const InfeasiblePriorError& e) {
    std::cerr << "geomprobe: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "geomprobe: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "geomprobe: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "geomprobe: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
