#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dbdtc/energy.hpp"
#include "dbdtc/geometry.hpp"
#include "dbdtc/rng.hpp"
#include "dbdtc/tactical.hpp"

namespace dbdtc {

/// Geometric cooling: T <- alpha * T after every iteration.
struct AnnealSchedule {
  std::uint64_t iterations = 0;
  double initial_temperature = 1.0;
  double cooling_rate = 1.0;
  /// Classical Metropolis acceptance instead of the best-state rule.
  bool metropolis = false;

  /// Throws std::invalid_argument unless T0 > 0 and 0 < alpha <= 1.
  void check() const;
};

/// Cooling rate that takes T0 down to 1e-8 * T0 after `iterations` steps.
double default_cooling_rate(std::uint64_t iterations);

/// T0 from the median |change of expected energy| over 1000 random
/// admissible probe swaps on D, divided by ln 2, so a median worsening is
/// accepted with probability 1/2 at the start.
AnnealSchedule default_schedule(const TacticalConfiguration& D, const Geometry& geo, std::uint64_t iterations,
                                Rng& rng);

struct Proposal {
  std::size_t a = 0;
  std::size_t b = 0;
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  bool admissible = false;
};

/// Random unit from column a and from column b; admissible iff the
/// interchange keeps both columns duplicate-free.
Proposal propose_pair(const TacticalConfiguration& D, std::size_t a, std::size_t b, Rng& rng);

/// Uniform column pair a != b, then propose_pair. Empty when M < 2.
std::optional<Proposal> propose(const TacticalConfiguration& D, Rng& rng);

enum class StepOutcome { inadmissible, new_best, kept, rejected };

struct AnnealCounters {
  std::uint64_t iterations = 0;
  std::uint64_t proposed = 0;
  std::uint64_t admissible = 0;
  std::uint64_t accepted = 0;
  std::uint64_t new_best = 0;
  std::uint64_t recomputes = 0;
  std::size_t max_delta_terms = 0;
};

struct TrajectoryPoint {
  std::uint64_t iteration = 0;
  double expected_energy = 0.0;
  double best_energy = 0.0;
  double temperature = 0.0;
};

/// Keeps at most `limit` points of a run of known length: iteration 0,
/// every stride-th iteration, and the last one.
class TrajectoryRecorder {
 public:
  static constexpr std::size_t kMaxRows = 10000;

  explicit TrajectoryRecorder(std::uint64_t iterations, std::size_t limit = kMaxRows);
  void offer(const TrajectoryPoint& point);
  void finish(const TrajectoryPoint& point);
  const std::vector<TrajectoryPoint>& points() const noexcept { return points_; }

 private:
  std::uint64_t stride_;
  std::vector<TrajectoryPoint> points_;
};

/// Simulated annealing over admissible interchanges of a tactical
/// configuration. Holds the current state, its energy ledger and the best
/// state seen. The geometry must outlive the annealer.
///
/// Acceptance follows the best-state rule: a swap reaching a new best is
/// kept; otherwise a swap that does not lower the energy is undone when
/// U(0,1) >= exp(-dE/T); anything else is kept. The temperature cools after
/// every iteration, inadmissible ones included.
class Annealer {
 public:
  static constexpr std::uint64_t kRecomputeEvery = 1'000'000;
  static constexpr double kDriftTolerance = 1e-7;

  Annealer(TacticalConfiguration initial, const Geometry& geo, AnnealSchedule schedule, std::uint64_t seed);

  std::optional<Proposal> propose() { return dbdtc::propose(current_, rng_); }

  /// One iteration with the internal generator.
  StepOutcome step(const Proposal& proposal) { return step(proposal, rng_); }

  /// One iteration drawing the acceptance uniform from `rng`.
  StepOutcome step(const Proposal& proposal, Rng& rng);

  /// W disjoint random column pairs, one proposal each, evaluated against
  /// the sweep-start state at a fixed temperature and merged in pair order.
  /// Per-pair generators are seeded before work starts, so the result does
  /// not depend on `threads`. Counts W iterations and cools by alpha^W.
  /// Requires M >= 4 and 1 <= W <= floor(M/2).
  void parallel_sweep(std::size_t workers, std::size_t threads = 1);

  struct SweepRecord {
    Proposal proposal;
    std::uint64_t pair_seed = 0;
    StepOutcome outcome = StepOutcome::inadmissible;
  };
  const std::vector<SweepRecord>& last_sweep() const noexcept { return last_sweep_; }

  /// Runs the schedule's iterations; sweeps of `workers` pairs when
  /// workers > 1, single steps otherwise.
  void run(std::size_t workers = 1, std::size_t threads = 1);

  const TacticalConfiguration& current() const noexcept { return current_; }
  TacticalConfiguration best() const { return best_is_current_ ? current_ : *best_; }
  double expected_energy() const noexcept { return ledger_.expected(); }
  double best_energy() const noexcept { return best_energy_; }
  double initial_energy() const noexcept { return initial_energy_; }
  double temperature() const noexcept { return temperature_; }
  const EnergyLedger& ledger() const noexcept { return ledger_; }
  const AnnealCounters& counters() const noexcept { return counters_; }
  const AnnealSchedule& schedule() const noexcept { return schedule_; }
  const std::vector<TrajectoryPoint>& trajectory() const noexcept { return recorder_.points(); }

  /// Full recomputation of the ledger; throws std::runtime_error when the
  /// incremental total drifted more than kDriftTolerance (relative).
  void resync();

 private:
  bool reject(double delta_expected, Rng& rng) const;
  void apply(const Proposal& p, const SwapDelta& delta);
  void snapshot_best_if_current();
  void after_accept();
  TrajectoryPoint point() const;

  TacticalConfiguration current_;
  const Geometry* geo_;
  AnnealSchedule schedule_;
  Rng rng_;
  EnergyLedger ledger_;
  std::optional<TacticalConfiguration> best_;
  bool best_is_current_ = true;
  double best_energy_ = 0.0;
  double initial_energy_ = 0.0;
  double temperature_ = 0.0;
  AnnealCounters counters_;
  std::uint64_t accepted_since_resync_ = 0;
  TrajectoryRecorder recorder_;
  std::vector<SweepRecord> last_sweep_;
};

struct AnnealResult {
  TacticalConfiguration best;
  double initial_energy = 0.0;
  double best_energy = 0.0;
  AnnealSchedule schedule;
  AnnealCounters counters;
  std::vector<TrajectoryPoint> trajectory;
};

/// Convenience wrapper: construct, run, collect.
AnnealResult anneal(TacticalConfiguration initial, const Geometry& geo, const AnnealSchedule& schedule,
                    std::uint64_t seed, std::size_t workers = 1, std::size_t threads = 1);

}  // namespace dbdtc
