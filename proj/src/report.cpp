#include "geomprobe/report.hpp"

#include <utility>

#include "geomprobe/errors.hpp"
#include "geomprobe/format.hpp"
#include "geomprobe/stats.hpp"

namespace geomprobe {

namespace {

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string render(const std::vector<Table>& tables, TableFormat format) {
  std::string out;
  for (size_t t = 0; t < tables.size(); ++t) {
    const Table& table = tables[t];
    if (t > 0) out += '\n';
    if (format == TableFormat::markdown) {
      out += "## " + table.title + "\n\n";
      out += '|';
      for (const std::string& h : table.header) out += ' ' + h + " |";
      out += "\n|";
      for (size_t i = 0; i < table.header.size(); ++i) out += " --- |";
      out += '\n';
      for (const std::vector<std::string>& row : table.rows) {
        out += '|';
        for (const std::string& cell : row) out += ' ' + cell + " |";
        out += '\n';
      }
    } else {
      out += "# section: " + table.title + '\n';
      for (size_t i = 0; i < table.header.size(); ++i) {
        if (i > 0) out += ',';
        out += csv_cell(table.header[i]);
      }
      out += '\n';
      for (const std::vector<std::string>& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
          if (i > 0) out += ',';
          out += csv_cell(row[i]);
        }
        out += '\n';
      }
    }
  }
  return out;
}

std::string meas_int(const Measurement& m) {
  return format_rounded_int(m.value) + " ± " + format_rounded_int(m.sigma);
}

std::string meas_fixed(const Measurement& m, int decimals) {
  return format_fixed(m.value, decimals) + " ± " + format_fixed(m.sigma, decimals);
}

std::string observed_cell(const Measurement& m) {
  switch (m.unit) {
    case Unit::centimeters:
      return meas_int(m);
    case Unit::degrees:
      return meas_fixed(m, 1);
    case Unit::centimeters_per_pixel:
      return meas_fixed(m, 4);
    case Unit::dimensionless:
      break;
  }
  return meas_fixed(m, 3);
}

std::string weighting_name(Weighting w) {
  return w == Weighting::unweighted ? "unweighted" : "inverse-variance";
}

Table survey_table(const SurveySite& site) {
  Table t;
  t.title = "survey measurements (" + site.name() + ")";
  t.header = {"feature", "kind", "aerial (cm)", "ground (cm)", "p equal"};
  for (const Feature& f : site.features()) {
    std::vector<std::string> row;
    row.push_back(f.id);
    row.push_back(to_string(f.kind));
    row.push_back(f.aerial ? meas_int(*f.aerial) : "-");
    row.push_back(f.ground ? meas_int(*f.ground) : "-");
    if (f.aerial && f.ground) {
      row.push_back(format_fixed(test_equal(*f.aerial, *f.ground).p, 2));
    } else {
      row.push_back("-");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table ratio_table(const BatteryReport& battery) {
  Table t;
  t.title = "wall ratios";
  t.header = {"kiva", "source", "outer/inner", "target", "p"};
  const std::pair<const char*, const char*> ids[] = {{"kiva-a-walls-4-3", "A"},
                                                     {"kiva-b-walls-sqrt2", "B"},
                                                     {"kiva-c-walls-sqrt2", "C"},
                                                     {"kiva-d-walls-sqrt2", "D"}};
  for (const auto& [id, kiva] : ids) {
    for (const HypothesisOutcome& o : battery.outcomes) {
      if (o.hypothesis_id != id || o.skipped) continue;
      t.rows.push_back({kiva, to_string(o.source), meas_fixed(o.test.observed, 3),
                        o.test.target ? o.test.target->text() : "-", format_fixed(o.test.p, 2)});
    }
  }
  return t;
}

Table battery_summary(const BatteryReport& battery) {
  Table t;
  t.title = "battery summary";
  t.header = {"quantity", "value"};
  t.rows.push_back({"alpha", format_shortest(battery.plan.alpha)});
  t.rows.push_back({"tests run (k)", std::to_string(battery.tests_run)});
  t.rows.push_back({"tests skipped", std::to_string(battery.tests_skipped)});
  t.rows.push_back({"alpha' = alpha/k", battery.empty ? "-" : format_fixed(battery.plan.alpha_prime, 5)});
  t.rows.push_back({"rejections at alpha'", std::to_string(battery.rejections)});
  if (battery.empty) t.rows.push_back({"note", "no tests could be run"});
  return t;
}

Table battery_table(const BatteryReport& battery) {
  Table t;
  t.title = "battery results";
  t.header = {"hypothesis", "source", "observed", "target", "chi2", "dof", "p", "decision"};
  for (const HypothesisOutcome& o : battery.outcomes) {
    std::vector<std::string> row;
    row.push_back(o.hypothesis_id);
    row.push_back(to_string(o.source));
    if (o.skipped) {
      row.insert(row.end(), {"-", "-", "-", "-", "-", "skipped: " + o.skip_reason});
    } else {
      row.push_back(observed_cell(o.test.observed));
      row.push_back(o.test.target ? o.test.target->text() : "equal");
      row.push_back(format_fixed(o.test.chi2, 2));
      row.push_back(std::to_string(o.test.dof));
      row.push_back(format_fixed(o.test.p, 2));
      std::string decision =
          o.test.p < battery.plan.alpha_prime && !battery.empty ? "REJECT" : "ok";
      if (o.test.degenerate) decision += " (degenerate)";
      row.push_back(decision);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<Table> unit_tables(const UnitEstimate& unit) {
  std::string source_name = to_string(unit.source);
  Table terms;
  terms.title = "unit estimate terms (" + source_name + " survey)";
  terms.header = {"term",           "level",     "multiplier",    "scaled (cm)",
                  "unit (cm)",      "reference (cm)", "deviation", "flag"};
  for (const UnitTerm& term : unit.terms) {
    std::vector<std::string> row;
    row.push_back(term.feature_id);
    row.push_back(to_string(term.level));
    row.push_back(term.multiplier.text());
    if (term.resolved) {
      row.push_back(meas_int(term.scaled));
      row.push_back(format_fixed(term.unit_value, 2));
    } else {
      row.insert(row.end(), {"-", "-"});
    }
    row.push_back(term.reference_cm ? format_rounded_int(*term.reference_cm) : "-");
    row.push_back(term.deviation ? format_fixed(*term.deviation * 100.0, 2) + "%" : "-");
    row.push_back(term.flagged ? "DEVIATES" : "");
    terms.rows.push_back(std::move(row));
  }

  Table summary;
  summary.title = "unit summary (" + source_name + " survey)";
  summary.header = {"quantity", "value"};
  int resolved = 0;
  std::vector<Measurement> scaled;
  for (const UnitTerm& term : unit.terms) {
    if (term.resolved) {
      ++resolved;
      scaled.push_back(term.scaled);
    }
  }
  summary.rows.push_back({"weighting", weighting_name(unit.weighting)});
  summary.rows.push_back({"resolved terms", std::to_string(resolved)});
  summary.rows.push_back({"X (cm)", meas_fixed(unit.x, 1)});
  summary.rows.push_back({"L = X/" + std::to_string(unit.divisor) + " (cm)",
                          meas_fixed(unit.unit, 2)});
  Weighting alt = unit.weighting == Weighting::unweighted ? Weighting::inverse_variance
                                                          : Weighting::unweighted;
  try {
    Measurement alt_x = scatter_average(scaled, alt, ScatterMode::population);
    summary.rows.push_back(
        {"alternative " + weighting_name(alt) + " X (cm)", meas_fixed(alt_x, 1)});
    summary.rows.push_back(
        {"note", "the reported X uses the " + weighting_name(unit.weighting) +
                     " scatter of the terms; the alternative weighting is shown because the two "
                     "disagree and the choice is not derivable from the reference values"});
  } catch (const ValidationError&) {
  }
  return {std::move(terms), std::move(summary)};
}

Table deviations_table(std::span<const UnitEstimate> units) {
  Table t;
  t.title = "deviations from published reference values";
  t.header = {"source", "term", "computed (cm)", "reference (cm)", "deviation", "note"};
  for (const UnitEstimate& unit : units) {
    for (const UnitTerm& term : unit.terms) {
      if (!term.flagged) continue;
      std::string note;
      if (term.feature_id == "kiva_d_inner") {
        note = "multiplier encoded as 6*sqrt(2); the published label 6/sqrt(2) disagrees with "
               "its own reference column by a factor of 2";
      }
      t.rows.push_back({to_string(unit.source), term.feature_id,
                        format_rounded_int(term.scaled.value),
                        format_rounded_int(term.reference_cm.value_or(0.0)),
                        format_fixed(*term.deviation * 100.0, 2) + "%", note});
    }
  }
  return t;
}

}  // namespace

ReportBundle build_report(const SurveySite& site, double alpha) {
  ReportBundle bundle;
  std::vector<Hypothesis> catalog = builtin_catalog();
  bundle.battery = run_battery(site, catalog, alpha);
  for (Source source : {Source::aerial, Source::ground}) {
    try {
      bundle.units.push_back(estimate_unit(site, source));
    } catch (const ValidationError&) {
    }
  }
  return bundle;
}

std::string emit_tables(const SurveySite& site, const BatteryReport& battery,
                        std::span<const UnitEstimate> units, TableFormat format) {
  std::vector<Table> tables;
  tables.push_back(survey_table(site));
  tables.push_back(ratio_table(battery));
  tables.push_back(battery_summary(battery));
  tables.push_back(battery_table(battery));
  for (const UnitEstimate& unit : units) {
    for (Table& t : unit_tables(unit)) tables.push_back(std::move(t));
  }
  tables.push_back(deviations_table(units));
  return render(tables, format);
}

std::string emit_battery(const BatteryReport& battery, TableFormat format) {
  std::vector<Table> tables;
  tables.push_back(battery_summary(battery));
  tables.push_back(battery_table(battery));
  return render(tables, format);
}

std::string emit_unit_report(std::span<const UnitEstimate> units, TableFormat format) {
  std::vector<Table> tables;
  for (const UnitEstimate& unit : units) {
    for (Table& t : unit_tables(unit)) tables.push_back(std::move(t));
  }
  tables.push_back(deviations_table(units));
  return render(tables, format);
}

std::string emit_null_report(const NullReport& report, TableFormat format) {
  std::vector<Table> tables;

  if (format == TableFormat::csv) {
    Table trials;
    trials.title = "null model trials";
    trials.header = {"trial", "hits"};
    for (size_t i = 0; i < report.hits.size(); ++i) {
      trials.rows.push_back({std::to_string(i), std::to_string(report.hits[i])});
    }
    tables.push_back(std::move(trials));
  }

  Table summary;
  summary.title = "null model summary";
  summary.header = {"quantity", "value"};
  summary.rows.push_back({"trials", std::to_string(report.n_trials)});
  summary.rows.push_back({"seed", std::to_string(report.seed)});
  summary.rows.push_back({"hit threshold (p >=)", format_shortest(report.rule.threshold)});
  summary.rows.push_back({"tests per trial", std::to_string(report.max_possible)});
  summary.rows.push_back({"mean hits", format_fixed(report.mean_hits, 4)});
  summary.rows.push_back({"observed hits", report.observed ? std::to_string(*report.observed) : "-"});
  summary.rows.push_back({"P(hits >= observed)",
                          report.tail_probability ? format_fixed(*report.tail_probability, 4) : "-"});
  summary.rows.push_back(
      {"95% CI low", report.ci_low ? format_fixed(*report.ci_low, 4) : "-"});
  summary.rows.push_back(
      {"95% CI high", report.ci_high ? format_fixed(*report.ci_high, 4) : "-"});
  tables.push_back(std::move(summary));

  Table hist;
  hist.title = "hit histogram";
  hist.header = {"hits", "trials"};
  for (size_t h = 0; h < report.histogram.size(); ++h) {
    hist.rows.push_back({std::to_string(h), std::to_string(report.histogram[h])});
  }
  tables.push_back(std::move(hist));

  return render(tables, format);
}

std::string emit_fit_report(std::span<const CircleEstimate> passes,
                            std::span<const AggregatedCircle> aggregates, TableFormat format) {
  std::vector<Table> tables;

  Table fits;
  fits.title = "fitted passes";
  fits.header = {"feature", "pass", "points", "center x (px)", "center y (px)",
                 "radius (px)", "rms residual (px)", "iterations"};
  for (const CircleEstimate& e : passes) {
    fits.rows.push_back({e.feature_id, e.pass_id, std::to_string(e.n_points),
                         format_fixed(e.cx_px, 2), format_fixed(e.cy_px, 2),
                         format_fixed(e.radius_px, 2), format_fixed(e.rms_residual_px, 3),
                         std::to_string(e.iterations)});
  }
  tables.push_back(std::move(fits));

  Table agg;
  agg.title = "aggregated circles";
  agg.header = {"feature", "passes", "radius (cm)", "center x (cm)", "center y (cm)",
                "center sigma (cm)"};
  for (const AggregatedCircle& a : aggregates) {
    agg.rows.push_back({a.feature_id, std::to_string(a.n_passes), meas_fixed(a.radius, 1),
                        format_fixed(a.cx_cm, 1), format_fixed(a.cy_cm, 1),
                        format_fixed(a.center_sigma_cm, 1)});
  }
  tables.push_back(std::move(agg));

  return render(tables, format);
}

std::string emit_quantogram(const QuantogramResult& result, TableFormat format) {
  std::vector<Table> tables;

  Table summary;
  summary.title = "quantogram summary";
  summary.header = {"quantity", "value"};
  summary.rows.push_back({"best quantum (cm)", format_fixed(result.q_best, 4)});
  summary.rows.push_back({"score", format_fixed(result.score_best, 4)});
  summary.rows.push_back({"grid points", std::to_string(result.curve.size())});
  if (!result.curve.empty()) {
    summary.rows.push_back({"grid min (cm)", format_fixed(result.curve.front().first, 4)});
    summary.rows.push_back({"grid max (cm)", format_fixed(result.curve.back().first, 4)});
  }
  tables.push_back(std::move(summary));

  if (format == TableFormat::csv) {
    Table curve;
    curve.title = "quantogram curve";
    curve.header = {"q (cm)", "score"};
    for (const auto& [q, score] : result.curve) {
      curve.rows.push_back({format_fixed(q, 6), format_fixed(score, 6)});
    }
    tables.push_back(std::move(curve));
  }

  return render(tables, format);
}

}  // namespace geomprobe
