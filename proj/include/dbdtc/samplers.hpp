#pragma once

#include <functional>
#include <span>

#include "dbdtc/geometry.hpp"
#include "dbdtc/population.hpp"
#include "dbdtc/rng.hpp"
#include "dbdtc/tactical.hpp"

namespace dbdtc {

/// Uniform random n-subset of 0..N-1, sorted. Requires 1 <= n <= N.
Sample srs(std::size_t N, std::size_t n, Rng& rng);

/// Ordered systematic sampling with a fractional interval: units sorted by
/// aux column `order_key` (ties by index), start u in (0, 1], positions
/// ceil((u + t) N / n) for t = 0..n-1. Any (N, n) is legal.
Sample systematic(const Population& pop, std::size_t order_key, std::size_t n, Rng& rng);

/// Deterministic core of systematic() for a given start u in (0, 1].
Sample systematic_at(const Population& pop, std::size_t order_key, std::size_t n, double start);

/// Local pivotal method. Repeatedly pairs a random undecided unit with its
/// nearest undecided neighbour (ties by smallest index) and applies the
/// pivotal update until every unit is 0 or 1. Sample size equals the sum of
/// `probs`, which must be integral within 1e-9.
Sample lpm(std::span<const double> probs, const Geometry& geo, Rng& rng);

/// Systematic sampling with unequal probabilities (unit order, one uniform
/// start): unit i is taken when a point of u, u+1, ... falls in its slice
/// of the cumulated probabilities. Marginals equal `probs`; O(N) and no
/// geometry, which makes it a cheap generator for init_by_sampling.
Sample systematic_pps(std::span<const double> probs, Rng& rng);

/// Fixed-size sampler respecting the given inclusion probabilities.
using SampleGenerator = std::function<Sample(std::span<const double> probs, Rng& rng)>;

/// Called once per column with the step index k (1-based) and the
/// inclusion probabilities handed to the generator.
using InitObserver = std::function<void(std::size_t k, std::span<const double> probs)>;

/// Builds a minimum configuration column by column: remaining budgets b_k
/// (b_0 = c), probabilities b_k / (M - k + 1), one generated sample per
/// column. When every probability is 0 or 1 the forced sample is used
/// directly. Throws std::runtime_error when the generator returns a sample
/// of the wrong size or selects a unit with no remaining budget.
TacticalConfiguration init_by_sampling(std::size_t N, std::size_t n, const SampleGenerator& generator, Rng& rng,
                                       const InitObserver& observer = {});

/// init_by_sampling with lpm over `geo` as generator.
TacticalConfiguration init_by_lpm(const Geometry& geo, std::size_t n, Rng& rng);

}  // namespace dbdtc
