#include "dbdtc/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dbdtc {

namespace {

constexpr double kProbEps = 1e-9;

// Validates an inclusion vector and returns its integral total.
std::size_t integral_size(std::span<const double> probs, const char* who) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= -kProbEps && p <= 1.0 + kProbEps)) {
      throw std::invalid_argument(std::string(who) + " probabilities must lie in [0, 1]");
    }
    total += p;
  }
  const double rounded = std::round(total);
  if (std::abs(total - rounded) > 1e-9 * std::max(1.0, total)) {
    throw std::invalid_argument(std::string(who) + " probabilities must sum to an integer");
  }
  return static_cast<std::size_t>(rounded);
}

// Pivotal update of a pair: afterwards at least one of the two is 0 or 1
// and both marginals are preserved in expectation.
void pivot(double& pi, double& pj, double u) {
  const double sum = pi + pj;
  if (sum < 1.0) {
    if (u * sum < pj) {
      pi = 0.0;
      pj = sum;
    } else {
      pi = sum;
      pj = 0.0;
    }
  } else if (u * (2.0 - sum) < 1.0 - pj) {
    pi = 1.0;
    pj = sum - 1.0;
  } else {
    pi = sum - 1.0;
    pj = 1.0;
  }
}

void check_size(const Sample& out, std::size_t n, const char* who) {
  if (out.size() != n) {
    throw std::runtime_error(std::string(who) + " produced " + std::to_string(out.size()) + " units, expected " +
                             std::to_string(n));
  }
}

}  // namespace

Sample srs(std::size_t N, std::size_t n, Rng& rng) {
  if (n == 0 || n > N) throw std::invalid_argument("srs requires 1 <= n <= N");
  // Partial Fisher-Yates over an index array.
  std::vector<std::uint32_t> idx(N);
  std::iota(idx.begin(), idx.end(), 0U);
  for (std::size_t t = 0; t < n; ++t) std::swap(idx[t], idx[t + uniform_index(rng, N - t)]);
  Sample out(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(out.begin(), out.end());
  return out;
}

Sample systematic_at(const Population& pop, std::size_t order_key, std::size_t n, double start) {
  const std::size_t N = pop.size();
  if (n == 0 || n > N) throw std::invalid_argument("systematic requires 1 <= n <= N");
  if (order_key >= pop.dimension()) throw std::invalid_argument("systematic order key out of range");
  if (!(start > 0.0 && start <= 1.0)) throw std::invalid_argument("systematic start must lie in (0, 1]");
  std::vector<std::uint32_t> order(N);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return pop.value(a, order_key) < pop.value(b, order_key);
  });
  const double step = static_cast<double>(N) / static_cast<double>(n);
  Sample out;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    auto pos = static_cast<long long>(std::ceil((start + static_cast<double>(t)) * step - 1e-12));
    pos = std::clamp<long long>(pos, 1, static_cast<long long>(N));
    out.push_back(order[static_cast<std::size_t>(pos - 1)]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.size() != n) throw std::logic_error("systematic selection produced duplicate positions");
  return out;
}

Sample systematic(const Population& pop, std::size_t order_key, std::size_t n, Rng& rng) {
  return systematic_at(pop, order_key, n, 1.0 - uniform01(rng));
}

Sample lpm(std::span<const double> probs, const Geometry& geo, Rng& rng) {
  const std::size_t N = probs.size();
  if (N != geo.size()) throw std::invalid_argument("lpm probabilities must cover every unit of the geometry");
  const std::size_t n = integral_size(probs, "lpm");

  std::vector<double> p(probs.begin(), probs.end());
  Sample out;
  out.reserve(n);
  std::vector<std::uint32_t> pool;
  pool.reserve(N);
  for (std::uint32_t i = 0; i < N; ++i) {
    if (p[i] >= 1.0 - kProbEps) {
      out.push_back(i);
    } else if (p[i] > kProbEps) {
      pool.push_back(i);
    }
  }
  // Position of each unit inside `pool` for O(1) removal.
  std::vector<std::uint32_t> where(N, 0);
  for (std::uint32_t k = 0; k < pool.size(); ++k) where[pool[k]] = k;
  auto remove = [&](std::uint32_t unit) {
    const std::uint32_t k = where[unit];
    pool[k] = pool.back();
    where[pool[k]] = k;
    pool.pop_back();
  };

  while (pool.size() >= 2) {
    const std::uint32_t i = pool[uniform_index(rng, pool.size())];
    std::uint32_t j = i;
    double best = 0.0;
    const auto row = geo.cached_row(i);
    for (std::uint32_t cand : pool) {
      if (cand == i) continue;
      const double d = row.empty() ? geo.distance(i, cand) : row[cand];
      if (j == i || d < best || (d == best && cand < j)) {
        j = cand;
        best = d;
      }
    }
    pivot(p[i], p[j], uniform01(rng));
    for (std::uint32_t unit : {i, j}) {
      if (p[unit] <= kProbEps) {
        remove(unit);
      } else if (p[unit] >= 1.0 - kProbEps) {
        out.push_back(unit);
        remove(unit);
      }
    }
  }
  // A lone survivor carries the rounding residue of an integral total.
  if (pool.size() == 1 && out.size() < n) out.push_back(pool.front());
  std::sort(out.begin(), out.end());
  check_size(out, n, "lpm");
  return out;
}

Sample systematic_pps(std::span<const double> probs, Rng& rng) {
  const std::size_t n = integral_size(probs, "systematic");
  const std::size_t N = probs.size();
  std::size_t certain = 0;
  std::size_t last = N;  // last unit with a fractional probability
  for (std::size_t i = 0; i < N; ++i) {
    if (probs[i] >= 1.0 - kProbEps) {
      ++certain;
    } else if (probs[i] > kProbEps) {
      last = i;
    }
  }
  // Thresholds u, u+1, ... against the running sum of the fractional
  // probabilities; each slice is shorter than 1, so no unit is hit twice.
  // The last slice ends at the exact remaining size to absorb rounding.
  const double m = static_cast<double>(n - std::min(n, certain));
  double threshold = last < N ? uniform01(rng) : 0.0;
  double cum = 0.0;
  Sample out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < N; ++i) {
    const double p = probs[i];
    if (p >= 1.0 - kProbEps) {
      out.push_back(i);
    } else if (p > kProbEps) {
      cum = i == last ? m : cum + p;
      if (threshold < cum) {
        out.push_back(i);
        threshold += 1.0;
      }
    }
  }
  check_size(out, n, "systematic");
  return out;
}

TacticalConfiguration init_by_sampling(std::size_t N, std::size_t n, const SampleGenerator& generator, Rng& rng,
                                       const InitObserver& observer) {
  const MinParams mp = min_params(N, n);
  const std::size_t M = mp.M;
  std::vector<std::size_t> budget(N, mp.c);
  std::vector<double> probs(N);
  std::vector<Sample> columns;
  columns.reserve(M);
  for (std::size_t k = 1; k <= M; ++k) {
    const std::size_t remaining = M - k + 1;
    const double share = 1.0 / static_cast<double>(remaining);
    std::size_t budget_sum = 0;
    bool forced = true;
    for (std::size_t i = 0; i < N; ++i) {
      // A unit whose budget exceeds the columns left was skipped while it
      // was certain; the generator broke the design.
      if (budget[i] > remaining) {
        throw std::runtime_error("sample generator skipped certainty unit " + std::to_string(i + 1) +
                                 " at step " + std::to_string(k - 1));
      }
      budget_sum += budget[i];
      probs[i] = budget[i] == remaining ? 1.0 : static_cast<double>(budget[i]) * share;
      forced = forced && (budget[i] == 0 || budget[i] == remaining);
    }
    if (budget_sum != n * remaining) {
      throw std::logic_error("budget invariant broken at step " + std::to_string(k));
    }
    if (observer) observer(k, probs);

    Sample d;
    if (forced) {
      for (std::uint32_t i = 0; i < N; ++i) {
        if (budget[i] == remaining) d.push_back(i);
      }
    } else {
      d = generator(probs, rng);
      if (!std::is_sorted(d.begin(), d.end())) std::sort(d.begin(), d.end());
    }
    if (d.size() != n) {
      throw std::runtime_error("sample generator returned " + std::to_string(d.size()) + " units at step " +
                               std::to_string(k) + ", expected " + std::to_string(n));
    }
    for (std::size_t t = 0; t < d.size(); ++t) {
      const std::uint32_t i = d[t];
      if (i >= N || (t > 0 && d[t - 1] == i) || budget[i] == 0) {
        throw std::runtime_error("sample generator selected unit " + std::to_string(i + 1) +
                                 " without remaining budget at step " + std::to_string(k));
      }
      --budget[i];
    }
    columns.push_back(std::move(d));
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (budget[i] != 0) {
      throw std::runtime_error("sample generator skipped certainty unit " + std::to_string(i + 1) + " at step " +
                               std::to_string(M));
    }
  }
  return TacticalConfiguration(N, n, std::move(columns));
}

TacticalConfiguration init_by_lpm(const Geometry& geo, std::size_t n, Rng& rng) {
  return init_by_sampling(
      geo.size(), n, [&geo](std::span<const double> probs, Rng& r) { return lpm(probs, geo, r); }, rng);
}

}  // namespace dbdtc
