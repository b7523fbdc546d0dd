#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dbdtc/anneal.hpp"
#include "dbdtc/geometry.hpp"
#include "dbdtc/rng.hpp"
#include "dbdtc/tactical.hpp"

namespace dbdtc {

/// The N contiguous windows of length n of a circular ordering; window k
/// holds order[k], ..., order[k+n-1] (indices mod N), returned sorted.
std::vector<Sample> circular_windows(std::span<const std::uint32_t> order, std::size_t n);

/// Annealer for the circular design: the state is a permutation of the
/// units and the objective is the mean energy of its N windows. Moves swap
/// the units at two random positions. Only windows holding exactly one of
/// the two positions change; their pairwise sums are patched from prefix
/// sums of ||x_w - x_j|| - ||x_u - x_j|| along the affected stretch, O(n)
/// per move. Acceptance mirrors Annealer.
class CircularAnnealer {
 public:
  struct Move {
    std::size_t p = 0;
    std::size_t q = 0;
  };

  CircularAnnealer(std::vector<std::uint32_t> order, std::size_t n, const Geometry& geo, AnnealSchedule schedule,
                   std::uint64_t seed);

  /// Two distinct uniform positions. Empty when N < 2.
  std::optional<Move> propose();

  /// Change of the summed window energies if the move were applied.
  double move_delta(const Move& move) const;

  StepOutcome step(const Move& move);
  void run();

  std::span<const std::uint32_t> order() const noexcept { return order_; }
  std::vector<std::uint32_t> best_order() const { return best_is_current_ ? order_ : best_order_; }
  double expected_energy() const noexcept { return total_ / static_cast<double>(order_.size()); }
  double best_energy() const noexcept { return best_energy_; }
  double initial_energy() const noexcept { return initial_energy_; }
  std::vector<double> window_energies() const;
  const AnnealCounters& counters() const noexcept { return counters_; }
  const AnnealSchedule& schedule() const noexcept { return schedule_; }
  const std::vector<TrajectoryPoint>& trajectory() const noexcept { return recorder_.points(); }

  void resync();

 private:
  struct WindowChange {
    std::size_t window;
    double phi;
    double pair;
  };

  double window_energy(std::size_t k) const;
  void collect_changes(const Move& move) const;
  void recompute_windows();
  TrajectoryPoint point() const;

  std::vector<std::uint32_t> order_;
  std::size_t n_;
  const Geometry* geo_;
  AnnealSchedule schedule_;
  Rng rng_;
  std::vector<double> phi_sum_;
  std::vector<double> pair_sum_;  // ordered pairs, i.e. twice the unordered sum
  double total_ = 0.0;
  std::vector<std::uint32_t> best_order_;
  bool best_is_current_ = true;
  double best_energy_ = 0.0;
  double initial_energy_ = 0.0;
  double temperature_ = 0.0;
  AnnealCounters counters_;
  std::uint64_t accepted_since_resync_ = 0;
  TrajectoryRecorder recorder_;
  mutable std::vector<WindowChange> changes_;
  mutable std::vector<double> prefix_;
};

/// T0 from 1000 random position swaps on `order`, scaled as for
/// default_schedule().
AnnealSchedule default_circular_schedule(std::span<const std::uint32_t> order, std::size_t n, const Geometry& geo,
                                         std::uint64_t iterations, Rng& rng);

struct CircularResult {
  std::vector<std::uint32_t> best_order;
  double initial_energy = 0.0;
  double best_energy = 0.0;
  AnnealSchedule schedule;
  AnnealCounters counters;
  std::vector<TrajectoryPoint> trajectory;
};

/// Random initial ordering from `seed` unless one is given.
CircularResult circular_anneal(const Geometry& geo, std::size_t n, const AnnealSchedule& schedule, std::uint64_t seed,
                               std::optional<std::vector<std::uint32_t>> initial = std::nullopt);

/// Uniformly random ordering of 0..N-1.
std::vector<std::uint32_t> random_order(std::size_t N, Rng& rng);

}  // namespace dbdtc
