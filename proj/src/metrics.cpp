#include "dbdtc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "dbdtc/energy.hpp"

namespace dbdtc {

namespace {

void check_pi(std::span<const double> pi, std::size_t N) {
  if (pi.size() != N) throw std::invalid_argument("inclusion probability vector must have length N");
}

// Sum of pi over each sample unit's Voronoi region, in sample order.
std::vector<double> region_mass(std::span<const std::uint32_t> sample, std::span<const std::uint32_t> owner,
                                std::span<const double> pi, std::vector<std::size_t>& slot_of) {
  slot_of.assign(owner.size(), 0);
  for (std::size_t s = 0; s < sample.size(); ++s) slot_of[sample[s]] = s;
  std::vector<double> v(sample.size(), 0.0);
  for (std::size_t j = 0; j < owner.size(); ++j) v[slot_of[owner[j]]] += pi[j];
  return v;
}

double sb_from(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += (x - 1.0) * (x - 1.0);
  return s / static_cast<double>(v.size());
}

double lb_from(std::span<const std::uint32_t> sample, std::span<const std::uint32_t> owner,
               const std::vector<std::size_t>& slot_of, std::span<const double> v, const Population& pop,
               const Geometry& geo, std::span<const double> pi) {
  const std::size_t p = pop.dimension();
  std::vector<double> r(sample.size() * p, 0.0);
  for (std::size_t j = 0; j < owner.size(); ++j) {
    const std::size_t s = slot_of[owner[j]];
    const auto x = pop.row(j);
    for (std::size_t d = 0; d < p; ++d) r[s * p + d] += pi[j] * x[d];
  }
  double total = 0.0;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    const auto x = pop.row(sample[s]);
    double sq = 0.0;
    for (std::size_t d = 0; d < p; ++d) {
      const double e = r[s * p + d] - v[s] * x[d];
      sq += e * e;
    }
    total += std::sqrt(sq);
  }
  return total / static_cast<double>(sample.size()) / (1.0 + geo.mean_phi());
}

// Groups G_i (i plus k-1 nearest sampled neighbours) as sample positions.
std::vector<std::vector<std::size_t>> neighbor_groups(std::span<const std::uint32_t> sample, std::size_t k,
                                                      const Geometry& geo) {
  std::vector<std::vector<std::size_t>> groups(sample.size());
  std::vector<std::pair<double, std::uint32_t>> cand;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    cand.clear();
    for (std::size_t t = 0; t < sample.size(); ++t) {
      if (t != s) cand.emplace_back(geo.distance(sample[s], sample[t]), static_cast<std::uint32_t>(t));
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end(),
                      [&](const auto& x, const auto& y) {
                        if (x.first != y.first) return x.first < y.first;
                        return sample[x.second] < sample[y.second];
                      });
    groups[s].push_back(s);
    for (std::size_t t = 0; t + 1 < k; ++t) groups[s].push_back(cand[t].second);
  }
  return groups;
}

double lmv_from(std::span<const std::uint32_t> sample, std::span<const double> y, std::span<const double> pi,
                std::size_t k, const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<double> a(sample.size());
  for (std::size_t s = 0; s < sample.size(); ++s) a[s] = y[sample[s]] / pi[sample[s]];
  const double factor = static_cast<double>(k) / static_cast<double>(k - 1);
  double v = 0.0;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    double mean = 0.0;
    for (std::size_t t : groups[s]) mean += a[t];
    mean /= static_cast<double>(groups[s].size());
    v += factor * (a[s] - mean) * (a[s] - mean);
  }
  return v;
}

MetricSummary summarize(const std::vector<SampleMetrics>& rows, std::span<const double> w,
                        double SampleMetrics::*field) {
  double mean = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) mean += w[k] * (rows[k].*field);
  double var = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double d = (rows[k].*field) - mean;
    var += w[k] * d * d;
  }
  return {mean, std::sqrt(var)};
}

MetricsReport evaluate(std::span<const Sample> samples, std::vector<double> weights, std::string mode,
                       const Population& pop, const Geometry& geo, std::span<const TargetVariable> targets,
                       const EvaluationOptions& options) {
  if (samples.empty()) throw std::invalid_argument("cannot evaluate an empty design");
  if (options.neighbors < 2) throw std::invalid_argument("local mean variance needs k >= 2");
  const std::size_t N = pop.size();
  const std::size_t n = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != n) throw std::invalid_argument("all samples of a design must have the same size");
  }
  for (const auto& t : targets) {
    if (t.values.size() != N) throw std::invalid_argument("target '" + t.name + "' must have length N");
  }
  const std::vector<double> pi = options.inclusion ? *options.inclusion : equal_inclusion(N, n);
  check_pi(pi, N);
  const double z = normal_critical_value(options.nominal_level);

  MetricsReport report;
  report.mode = std::move(mode);
  report.sample_size = n;
  report.nominal_level = options.nominal_level;
  report.neighbors = options.neighbors;
  report.rows.reserve(samples.size());

  std::vector<double> totals;
  for (const auto& t : targets) {
    double x = 0.0;
    for (double v : t.values) x += v;
    totals.push_back(x);
  }
  std::vector<double> sq_err(targets.size(), 0.0);
  std::vector<double> mean_est(targets.size(), 0.0);
  std::vector<double> covered(targets.size(), 0.0);

  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    report.rows.push_back(sample_metrics(s, pop, geo, pi));
    if (targets.empty()) continue;
    const bool have_variance = n >= options.neighbors;
    std::vector<std::vector<std::size_t>> groups;
    if (have_variance) groups = neighbor_groups(s, options.neighbors, geo);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const double est = ht_total(s, targets[t].values, pi);
      const double err = est - totals[t];
      const double var = have_variance ? lmv_from(s, targets[t].values, pi, options.neighbors, groups) : 0.0;
      const double slack = 1e-12 * std::max(1.0, std::abs(totals[t]));
      sq_err[t] += weights[k] * err * err;
      mean_est[t] += weights[k] * est;
      if (std::abs(err) <= z * std::sqrt(var) + slack) covered[t] += weights[k];
    }
  }
  report.energy = summarize(report.rows, weights, &SampleMetrics::energy);
  report.sb = summarize(report.rows, weights, &SampleMetrics::sb);
  report.lb = summarize(report.rows, weights, &SampleMetrics::lb);
  report.bd = summarize(report.rows, weights, &SampleMetrics::bd);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    EstimatorRow row;
    row.target = targets[t].name;
    row.total = totals[t];
    row.mean_estimate = mean_est[t];
    row.rmse = std::sqrt(sq_err[t]);
    if (totals[t] != 0.0) row.rrmse = row.rmse / std::abs(totals[t]);
    row.coverage = std::min(1.0, covered[t]);
    report.estimators.push_back(std::move(row));
  }
  report.weights = std::move(weights);
  return report;
}

}  // namespace

std::vector<double> equal_inclusion(std::size_t N, std::size_t n) {
  if (N == 0 || n > N) throw std::invalid_argument("equal_inclusion requires n <= N, N >= 1");
  return std::vector<double>(N, static_cast<double>(n) / static_cast<double>(N));
}

double balance_deviation(std::span<const std::uint32_t> sample, const Population& pop, std::span<const double> pi) {
  check_pi(pi, pop.size());
  const std::size_t p = pop.dimension();
  std::vector<double> diff(p, 0.0);
  for (std::uint32_t i : sample) {
    if (!(pi[i] > 0.0)) throw std::invalid_argument("sampled unit has zero inclusion probability");
    const auto x = pop.row(i);
    for (std::size_t d = 0; d < p; ++d) diff[d] += x[d] / pi[i];
  }
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto x = pop.row(i);
    for (std::size_t d = 0; d < p; ++d) diff[d] -= x[d];
  }
  double sq = 0.0;
  for (double d : diff) sq += d * d;
  return std::sqrt(sq);
}

double spatial_balance(std::span<const std::uint32_t> sample, const Geometry& geo, std::span<const double> pi) {
  check_pi(pi, geo.size());
  const auto owner = voronoi_assign(geo, sample);
  std::vector<std::size_t> slot_of;
  const auto v = region_mass(sample, owner, pi, slot_of);
  return sb_from(v);
}

double local_balance(std::span<const std::uint32_t> sample, const Population& pop, const Geometry& geo,
                     std::span<const double> pi) {
  check_pi(pi, pop.size());
  const auto owner = voronoi_assign(geo, sample);
  std::vector<std::size_t> slot_of;
  const auto v = region_mass(sample, owner, pi, slot_of);
  return lb_from(sample, owner, slot_of, v, pop, geo, pi);
}

double ht_total(std::span<const std::uint32_t> sample, std::span<const double> y, std::span<const double> pi) {
  if (y.size() != pi.size()) throw std::invalid_argument("target and inclusion vectors differ in length");
  double total = 0.0;
  for (std::uint32_t i : sample) {
    if (i >= y.size()) throw std::out_of_range("sampled unit out of range");
    if (!(pi[i] > 0.0)) throw std::invalid_argument("sampled unit has zero inclusion probability");
    total += y[i] / pi[i];
  }
  return total;
}

double local_mean_variance(std::span<const std::uint32_t> sample, std::span<const double> y,
                           std::span<const double> pi, std::size_t k, const Geometry& geo) {
  if (k < 2) throw std::invalid_argument("local mean variance needs k >= 2");
  if (sample.size() < k) throw std::invalid_argument("local mean variance needs n >= k");
  if (y.size() != geo.size() || pi.size() != geo.size()) throw std::invalid_argument("vectors must have length N");
  for (std::uint32_t i : sample) {
    if (!(pi[i] > 0.0)) throw std::invalid_argument("sampled unit has zero inclusion probability");
  }
  Sample sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto groups = neighbor_groups(sorted, k, geo);
  return lmv_from(sorted, y, pi, k, groups);
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("nominal level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - (1.0 - level) / 2.0);
}

SampleMetrics sample_metrics(std::span<const std::uint32_t> sample, const Population& pop, const Geometry& geo,
                             std::span<const double> pi) {
  check_pi(pi, pop.size());
  SampleMetrics m;
  m.energy = sample_energy(sample, geo);
  const auto owner = voronoi_assign(geo, sample);
  std::vector<std::size_t> slot_of;
  const auto v = region_mass(sample, owner, pi, slot_of);
  m.sb = sb_from(v);
  m.lb = lb_from(sample, owner, slot_of, v, pop, geo, pi);
  m.bd = balance_deviation(sample, pop, pi);
  return m;
}

MetricsReport evaluate_support(const DesignSupport& support, const Population& pop, const Geometry& geo,
                               std::span<const TargetVariable> targets, const EvaluationOptions& options) {
  if (support.size() == 0) throw std::invalid_argument("cannot evaluate an empty support");
  std::vector<double> w;
  w.reserve(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    w.push_back(static_cast<double>(support.multiplicity[k]) / static_cast<double>(support.M));
  }
  return evaluate(support.samples, std::move(w), "support", pop, geo, targets, options);
}

MetricsReport evaluate_weighted(std::span<const Sample> samples, std::span<const double> probabilities,
                                const Population& pop, const Geometry& geo, std::span<const TargetVariable> targets,
                                const EvaluationOptions& options) {
  if (samples.size() != probabilities.size()) throw std::invalid_argument("one probability per sample required");
  double total = 0.0;
  for (double p : probabilities) total += p;
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("design probabilities must sum to 1");
  return evaluate(samples, {probabilities.begin(), probabilities.end()}, "support", pop, geo, targets, options);
}

MetricsReport evaluate_replicates(std::span<const Sample> samples, const Population& pop, const Geometry& geo,
                                  std::span<const TargetVariable> targets, const EvaluationOptions& options) {
  if (samples.empty()) throw std::invalid_argument("cannot evaluate zero replicates");
  std::vector<double> w(samples.size(), 1.0 / static_cast<double>(samples.size()));
  return evaluate(samples, std::move(w), "replicates", pop, geo, targets, options);
}

std::vector<TargetVariable> aux_targets(const Population& pop) {
  std::vector<TargetVariable> out;
  for (std::size_t k = 0; k < pop.dimension(); ++k) out.push_back({pop.aux_names()[k], pop.column(k)});
  return out;
}

std::vector<TargetVariable> population_targets(const Population& pop) {
  std::vector<TargetVariable> out;
  for (std::size_t k = 0; k < pop.target_count(); ++k) out.push_back({pop.target_names()[k], pop.target(k)});
  return out;
}

}  // namespace dbdtc
