#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geomprobe/circle_fit.hpp"
#include "geomprobe/constructs.hpp"
#include "geomprobe/nullmodel.hpp"
#include "geomprobe/survey.hpp"

namespace geomprobe {

enum class TableFormat { markdown, csv };

struct ReportBundle {
  BatteryReport battery;
  std::vector<UnitEstimate> units;
  std::optional<NullReport> null_report;
};

// Runs the built-in catalog and the unit estimate for every source that
// resolves enough terms.
ReportBundle build_report(const SurveySite& site, double alpha);

// All analysis tables as one deterministic text document: survey
// measurements with equality p-values, wall ratios, the battery listing,
// per-term unit tables, and a deviations section naming every term whose
// recomputed value disagrees with its published reference value by more
// than the 2% flag threshold. Rounding happens here and nowhere earlier;
// the two formats carry identical cell contents.
std::string emit_tables(const SurveySite& site, const BatteryReport& battery,
                        std::span<const UnitEstimate> units, TableFormat format);

// The battery summary and results sections alone, for single-hypothesis runs.
std::string emit_battery(const BatteryReport& battery, TableFormat format);

// The per-term unit tables and the deviations section alone.
std::string emit_unit_report(std::span<const UnitEstimate> units, TableFormat format);

std::string emit_null_report(const NullReport& report, TableFormat format);

std::string emit_fit_report(std::span<const CircleEstimate> passes,
                            std::span<const AggregatedCircle> aggregates, TableFormat format);

std::string emit_quantogram(const QuantogramResult& result, TableFormat format);

}  // namespace geomprobe
