#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbdtc/anneal.hpp"
#include "dbdtc/geometry.hpp"
#include "dbdtc/population.hpp"
#include "dbdtc/rng.hpp"
#include "dbdtc/tactical.hpp"

namespace dbdtc {

/// Pre-selection of N* = M* n units so that the configuration built on them
/// has exactly M* columns. Conditional on the selected sub-population the
/// design is a minimum configuration with c = 1, so every unit of U ends up
/// in the final sample with probability (N*/N)(1/M*) = n/N.
struct CompressionPlan {
  std::uint64_t N = 0;
  std::uint64_t n = 0;
  std::uint64_t M_star = 0;
  std::uint64_t N_star = 0;
  /// Selected units, sorted population indices. Empty for arithmetic-only plans.
  std::vector<std::uint32_t> units;
  std::uint64_t seed = 0;
  bool conditional = true;

  /// W_i = M* n / N, the equal LPM selection probability.
  double weight() const { return static_cast<double>(N_star) / static_cast<double>(N); }
  Rational selection_probability() const {
    return {static_cast<std::int64_t>(N_star), static_cast<std::int64_t>(N)};
  }
  Rational conditional_inclusion() const { return {1, static_cast<std::int64_t>(M_star)}; }
  Rational unconditional_inclusion() const { return selection_probability() * conditional_inclusion(); }
};

/// Plan sizes without selecting units. M* defaults to floor(N/n); throws
/// unless 1 <= M* <= floor(N/n).
CompressionPlan compression_arithmetic(std::uint64_t N, std::uint64_t n,
                                       std::optional<std::uint64_t> M_star = std::nullopt);

/// Selects U* with the local pivotal method at equal probabilities N*/N.
CompressionPlan compress_lpm(const Geometry& geo, std::size_t n, std::optional<std::uint64_t> M_star, Rng& rng);

enum class InitMethod { cyclic, lpm };

struct PipelineOptions {
  std::size_t n = 0;
  InitMethod init = InitMethod::lpm;
  std::uint64_t iterations = 0;
  std::optional<double> initial_temperature;
  std::optional<double> cooling_rate;
  bool metropolis = false;
  std::size_t workers = 1;
  std::size_t threads = 1;
  /// Compress automatically when the minimum M exceeds this.
  std::uint64_t compress_ceiling = 100'000;
  bool compress = false;
  std::optional<std::uint64_t> M_star;
  /// Scales the default M* = floor(N/n) down, in (0, 1].
  double compress_ratio = 1.0;
  std::size_t cache_threshold = Geometry::kDefaultCacheThreshold;
};

/// An optimized configuration together with the map from its unit indices
/// to population indices (identity unless compressed).
struct DesignResult {
  TacticalConfiguration configuration;
  std::vector<std::uint32_t> units;
  std::optional<CompressionPlan> compression;
  double initial_energy = 0.0;
  double best_energy = 0.0;
  AnnealSchedule schedule;
  AnnealCounters counters;
  std::vector<TrajectoryPoint> trajectory;

  /// Columns as sorted population indices.
  std::vector<Sample> global_columns() const;
  /// One column chosen uniformly, as population indices.
  Sample draw(Rng& rng) const;
};

/// Initialization, schedule and annealing, preceded by compression when
/// requested or when M exceeds the ceiling. Randomness comes from named
/// sub-streams of `seed` ("compress", "init", "schedule", "anneal").
DesignResult build_dbdtc(const Population& pop, const PipelineOptions& options, std::uint64_t seed);

struct StratumResult {
  std::string label;
  std::vector<std::uint32_t> units;  // population indices of the stratum
  std::size_t n = 0;
  DesignResult design;               // indices relative to the stratum
};

/// Independent designs per stratum; the combined sample is the union of one
/// draw per stratum.
struct StratifiedResult {
  std::vector<StratumResult> strata;

  Sample draw(Rng& rng) const;
  std::size_t sample_size() const;
  /// Per-unit inclusion probability n_h / N_h.
  std::vector<double> inclusion(std::size_t N) const;
};

/// Seed of stratum `label`, independent of the order strata are processed in.
std::uint64_t stratum_seed(std::uint64_t seed, const std::string& label);

/// Throws when the population has no strata, a stratum lacks a size, or
/// n_h > N_h.
StratifiedResult stratified_run(const Population& pop, const std::map<std::string, std::size_t>& sizes,
                                const PipelineOptions& options, std::uint64_t seed);

}  // namespace dbdtc
