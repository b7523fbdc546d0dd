#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbdtc/geometry.hpp"
#include "dbdtc/population.hpp"
#include "dbdtc/tactical.hpp"

namespace dbdtc {

/// pi_i = n / N for every unit.
std::vector<double> equal_inclusion(std::size_t N, std::size_t n);

/// || sum_{i in s} x_i / pi_i - sum_U x_i ||.
double balance_deviation(std::span<const std::uint32_t> sample, const Population& pop, std::span<const double> pi);

/// (1/n) sum_{i in s} (v_i - 1)^2 with v_i the total inclusion probability
/// of the units whose nearest sample unit is i.
double spatial_balance(std::span<const std::uint32_t> sample, const Geometry& geo, std::span<const double> pi);

/// Local balance (variant). For sample unit i with Voronoi region R_i,
/// r_i = sum_{j in R_i} pi_j x_j - v_i x_i; the measure is
/// (1/n) sum_i ||r_i|| / (1 + mean Phi). Reported as `lb_variant`.
double local_balance(std::span<const std::uint32_t> sample, const Population& pop, const Geometry& geo,
                     std::span<const double> pi);

/// Horvitz-Thompson total sum_{i in s} y_i / pi_i. Throws when a sampled
/// unit has pi_i <= 0.
double ht_total(std::span<const std::uint32_t> sample, std::span<const double> y, std::span<const double> pi);

/// Local-mean variance estimate: sum_{i in s} k/(k-1) (a_i - mean of a over
/// G_i)^2 with a_i = y_i / pi_i and G_i = i plus its k-1 nearest sampled
/// neighbours. Requires k >= 2 and n >= k.
double local_mean_variance(std::span<const std::uint32_t> sample, std::span<const double> y,
                           std::span<const double> pi, std::size_t k, const Geometry& geo);

/// Two-sided normal quantile for a nominal coverage level (0.95 -> 1.959964).
double normal_critical_value(double level);

struct SampleMetrics {
  double energy = 0.0;
  double sb = 0.0;
  double lb = 0.0;
  double bd = 0.0;
};

SampleMetrics sample_metrics(std::span<const std::uint32_t> sample, const Population& pop, const Geometry& geo,
                             std::span<const double> pi);

struct TargetVariable {
  std::string name;
  std::vector<double> values;
};

struct EstimatorRow {
  std::string target;
  double total = 0.0;          // true population total X
  double mean_estimate = 0.0;  // E[X-hat]
  double rmse = 0.0;
  /// RMSE / X; absent when X == 0 (then only rmse is meaningful).
  std::optional<double> rrmse;
  double coverage = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;
};

struct MetricsReport {
  std::string design;
  /// "support": exact expectation over the distinct samples of a design;
  /// "replicates": Monte Carlo over independent draws.
  std::string mode;
  std::size_t sample_size = 0;
  std::vector<SampleMetrics> rows;
  std::vector<double> weights;  // probabilities, summing to 1
  MetricSummary energy;
  MetricSummary sb;
  MetricSummary lb;
  MetricSummary bd;
  std::vector<EstimatorRow> estimators;
  double nominal_level = 0.95;
  std::size_t neighbors = 2;
};

struct EvaluationOptions {
  double nominal_level = 0.95;
  std::size_t neighbors = 2;
  /// Per-unit inclusion probabilities; n/N for every unit when absent.
  std::optional<std::vector<double>> inclusion;
};

/// Exact evaluation over a design's support (probabilities m(d)/M).
MetricsReport evaluate_support(const DesignSupport& support, const Population& pop, const Geometry& geo,
                               std::span<const TargetVariable> targets, const EvaluationOptions& options = {});

/// Exact evaluation over explicit samples and probabilities (e.g. the N
/// windows of a circular design, each with probability 1/N).
MetricsReport evaluate_weighted(std::span<const Sample> samples, std::span<const double> probabilities,
                                const Population& pop, const Geometry& geo, std::span<const TargetVariable> targets,
                                const EvaluationOptions& options = {});

/// Monte Carlo evaluation over equally weighted replicate samples.
MetricsReport evaluate_replicates(std::span<const Sample> samples, const Population& pop, const Geometry& geo,
                                  std::span<const TargetVariable> targets, const EvaluationOptions& options = {});

/// The aux columns of a population as target variables.
std::vector<TargetVariable> aux_targets(const Population& pop);
/// The target columns of a population.
std::vector<TargetVariable> population_targets(const Population& pop);

}  // namespace dbdtc
