#include "dbdtc/scale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dbdtc/samplers.hpp"

namespace dbdtc {

CompressionPlan compression_arithmetic(std::uint64_t N, std::uint64_t n, std::optional<std::uint64_t> M_star) {
  if (n == 0 || n > N) throw std::invalid_argument("compression requires 1 <= n <= N");
  const std::uint64_t max_m = N / n;
  const std::uint64_t m = M_star.value_or(max_m);
  if (m < 1 || m > max_m) {
    throw std::invalid_argument("M* must lie in [1, floor(N/n)] = [1, " + std::to_string(max_m) + "]");
  }
  CompressionPlan plan;
  plan.N = N;
  plan.n = n;
  plan.M_star = m;
  plan.N_star = m * n;
  return plan;
}

CompressionPlan compress_lpm(const Geometry& geo, std::size_t n, std::optional<std::uint64_t> M_star, Rng& rng) {
  CompressionPlan plan = compression_arithmetic(geo.size(), n, M_star);
  const std::vector<double> probs(geo.size(), plan.weight());
  plan.units = lpm(probs, geo, rng);
  if (plan.units.size() != plan.N_star) throw std::logic_error("compression selected the wrong number of units");
  return plan;
}

std::vector<Sample> DesignResult::global_columns() const {
  std::vector<Sample> out;
  out.reserve(configuration.size());
  for (std::size_t k = 0; k < configuration.size(); ++k) {
    Sample s;
    for (std::uint32_t u : configuration.column(k)) s.push_back(units[u]);
    std::sort(s.begin(), s.end());
    out.push_back(std::move(s));
  }
  return out;
}

Sample DesignResult::draw(Rng& rng) const {
  const auto col = configuration.column(uniform_index(rng, configuration.size()));
  Sample s;
  s.reserve(col.size());
  for (std::uint32_t u : col) s.push_back(units[u]);
  std::sort(s.begin(), s.end());
  return s;
}

DesignResult build_dbdtc(const Population& pop, const PipelineOptions& options, std::uint64_t seed) {
  const std::size_t N = pop.size();
  const std::size_t n = options.n;
  const MinParams mp = min_params(N, n);

  std::optional<CompressionPlan> plan;
  std::optional<Population> reduced;
  std::vector<std::uint32_t> units;
  const bool compress = options.compress || options.M_star.has_value() || mp.M > options.compress_ceiling;
  if (compress) {
    if (!(options.compress_ratio > 0.0 && options.compress_ratio <= 1.0)) {
      throw std::invalid_argument("compress ratio must lie in (0, 1]");
    }
    std::optional<std::uint64_t> m = options.M_star;
    if (!m) {
      m = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(options.compress_ratio *
                                                                            static_cast<double>(N / n))));
    }
    const Geometry full(pop, options.cache_threshold);
    Rng rng = make_stream(seed, "compress");
    plan = compress_lpm(full, n, m, rng);
    plan->seed = seed;
    units = plan->units;
    reduced = pop.subset(units);
  } else {
    units.resize(N);
    for (std::size_t i = 0; i < N; ++i) units[i] = static_cast<std::uint32_t>(i);
  }
  const Population& work = reduced ? *reduced : pop;
  const Geometry geo(work, options.cache_threshold);

  Rng init_rng = make_stream(seed, "init");
  TacticalConfiguration initial = options.init == InitMethod::lpm ? init_by_lpm(geo, n, init_rng)
                                                                  : cyclic_init(work.size(), n, std::nullopt, init_rng);

  Rng schedule_rng = make_stream(seed, "schedule");
  AnnealSchedule schedule;
  if (!options.initial_temperature || !options.cooling_rate) {
    schedule = default_schedule(initial, geo, options.iterations, schedule_rng);
  }
  schedule.iterations = options.iterations;
  if (options.initial_temperature) schedule.initial_temperature = *options.initial_temperature;
  if (options.cooling_rate) schedule.cooling_rate = *options.cooling_rate;
  schedule.metropolis = options.metropolis;

  AnnealResult res = anneal(std::move(initial), geo, schedule, seed, options.workers, options.threads);
  return {std::move(res.best), std::move(units), std::move(plan), res.initial_energy, res.best_energy,
          res.schedule, res.counters, std::move(res.trajectory)};
}

Sample StratifiedResult::draw(Rng& rng) const {
  Sample out;
  for (const auto& s : strata) {
    const Sample local = s.design.draw(rng);
    for (std::uint32_t u : local) out.push_back(s.units[u]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t StratifiedResult::sample_size() const {
  std::size_t n = 0;
  for (const auto& s : strata) n += s.n;
  return n;
}

std::vector<double> StratifiedResult::inclusion(std::size_t N) const {
  std::vector<double> pi(N, 0.0);
  for (const auto& s : strata) {
    const double p = static_cast<double>(s.n) / static_cast<double>(s.units.size());
    for (std::uint32_t u : s.units) pi[u] = p;
  }
  return pi;
}

std::uint64_t stratum_seed(std::uint64_t seed, const std::string& label) {
  Rng rng = make_stream(seed, "stratum:" + label);
  return rng();
}

StratifiedResult stratified_run(const Population& pop, const std::map<std::string, std::size_t>& sizes,
                                const PipelineOptions& options, std::uint64_t seed) {
  if (!pop.strata()) throw std::invalid_argument("population has no stratum labels");
  std::map<std::string, std::vector<std::uint32_t>> members;
  for (std::size_t i = 0; i < pop.size(); ++i) members[(*pop.strata())[i]].push_back(static_cast<std::uint32_t>(i));
  for (const auto& [label, n_h] : sizes) {
    if (!members.count(label)) throw std::invalid_argument("sample size given for unknown stratum '" + label + "'");
  }
  StratifiedResult out;
  for (auto& [label, units] : members) {
    const auto it = sizes.find(label);
    if (it == sizes.end()) throw std::invalid_argument("no sample size for stratum '" + label + "'");
    const std::size_t n_h = it->second;
    if (n_h == 0 || n_h > units.size()) {
      throw std::invalid_argument("stratum '" + label + "' needs 1 <= n_h <= N_h (n_h = " + std::to_string(n_h) +
                                  ", N_h = " + std::to_string(units.size()) + ")");
    }
    PipelineOptions local = options;
    local.n = n_h;
    DesignResult design = build_dbdtc(pop.subset(units), local, stratum_seed(seed, label));
    out.strata.push_back({label, units, n_h, std::move(design)});
  }
  return out;
}

}  // namespace dbdtc
