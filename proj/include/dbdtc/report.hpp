#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dbdtc/anneal.hpp"
#include "dbdtc/metrics.hpp"
#include "dbdtc/population.hpp"
#include "dbdtc/scale.hpp"

namespace dbdtc {

inline constexpr int kFormatVersion = 1;

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

/// Header `iteration,expected_energy,best_energy,temperature`.
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryPoint> points);

/// Provenance attached to every report row and document.
struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;
  std::string config_hash;  // FNV-1a of the configuration text, hex
};

std::string hex_hash(std::string_view text);

/// One row per (design, metric): design,mode,metric,mean,sd,count,seed,
/// iterations,config_hash,format_version. Estimator rows use metric names
/// `rmse:<target>`, `rrmse:<target>` and `coverage:<target>`.
void write_metrics_csv_header(std::ostream& out);
void write_metrics_csv_rows(std::ostream& out, const MetricsReport& report, const Provenance& prov);

/// Per-sample metric values (one row per sample): design,sample,weight,
/// energy,sb,lb_variant,bd. `prefix` is written verbatim before every line,
/// e.g. "p,n," for the header and "5,50," for the rows of a sweep cell.
void write_sample_rows_header(std::ostream& out, std::string_view prefix = {});
void write_sample_rows(std::ostream& out, const MetricsReport& report, std::string_view prefix = {});

nlohmann::json to_json(const MetricsReport& report, const Provenance& prov);
nlohmann::json to_json(const AnnealCounters& counters);
nlohmann::json to_json(const AnnealSchedule& schedule);

/// M*, N*, the selected ids (or, above `id_limit` units, the seed needed
/// to reproduce the selection) and the inclusion identity as fractions.
nlohmann::json to_json(const CompressionPlan& plan, const Population& pop, std::size_t id_limit = 100'000);

std::string rational_string(const Rational& r);

}  // namespace dbdtc
