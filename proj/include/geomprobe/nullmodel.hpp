#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "geomprobe/constructs.hpp"
#include "geomprobe/survey.hpp"

namespace geomprobe {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Placement fractions for the synthetic layout. Kivas B and C sit inside the
// rectangle at (x * length, y * width); kivas A and D sit in bands outside
// the west and east walls, offset by their x fraction of 0.3 * width; the
// shrine sits southwest of the SW corner.
struct PlacementPrior {
  Range kiva_a_x{0.0, 1.0}, kiva_a_y{0.25, 0.75};
  Range kiva_b_x{0.2, 0.45}, kiva_b_y{0.3, 0.7};
  Range kiva_c_x{0.55, 0.8}, kiva_c_y{0.3, 0.7};
  Range kiva_d_x{0.0, 1.0}, kiva_d_y{0.25, 0.75};
  Range shrine_x{0.0, 1.0}, shrine_y{0.0, 1.0};
};

// Geometry-free null: rectangular sites with four circular structures placed
// without any intentional proportion. Every range is sampled uniformly.
struct NullPrior {
  Range width_cm{0, 0};
  Range aspect_ratio{0, 0};
  std::array<Range, 4> kiva_inner_radius_cm{};  // A, B, C, D
  Range wall_ratio{0, 0};
  double margin_cm = 30.0;
  Range relative_sigma{0, 0};
  int max_attempts = 1000;
  PlacementPrior placement;
};

NullPrior load_prior(const std::filesystem::path& path);
void validate_prior(const NullPrior& prior);

// Deterministic for a fixed seed. Draws are rejected until the layout
// satisfies containment and non-overlap; a prior that cannot satisfy them
// even at its most favorable corner, or that exhausts max_attempts, throws
// InfeasiblePriorError.
SurveySite sample_null_site(const NullPrior& prior, std::uint64_t seed);

// A test counts as a hit when its p-value does not fall below the threshold,
// i.e. the measurement is consistent with the target at that level. The
// default corresponds to agreement within two sigma.
struct HitRule {
  double threshold = 0.045500263896358396;
};

int count_hits(const BatteryReport& report, const HitRule& rule);

struct NullReport {
  long n_trials = 0;
  std::uint64_t seed = 0;
  HitRule rule;
  int max_possible = 0;         // tests runnable per synthetic site
  std::vector<int> hits;        // per trial
  std::vector<long> histogram;  // index = hit count
  double mean_hits = 0.0;
  std::optional<int> observed;
  std::optional<double> tail_probability;  // P(hits >= observed) under the null
  std::optional<double> ci_low;            // Wilson 95% interval on that probability
  std::optional<double> ci_high;
};

// Per-trial RNG streams are derived from (seed, trial index), so any thread
// count produces bit-identical reports.
NullReport estimate_fpr(const NullPrior& prior, std::span<const Hypothesis> catalog,
                        const HitRule& rule, long n_trials, std::uint64_t seed,
                        std::optional<int> observed = std::nullopt, int threads = 1);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace geomprobe
