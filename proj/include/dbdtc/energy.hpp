#pragma once

#include <span>
#include <vector>

#include "dbdtc/geometry.hpp"
#include "dbdtc/tactical.hpp"

namespace dbdtc {

/// Energy distance between the empirical distribution of a sample and the
/// population: 2 * mean(Phi over sample) - mean(Phi over U) - mean pairwise
/// distance within the sample (zero diagonal included). O(n^2).
double sample_energy(std::span<const std::uint32_t> sample, const Geometry& geo);

/// As above; throws std::invalid_argument unless |sample| == n.
double sample_energy(std::span<const std::uint32_t> sample, const Geometry& geo, std::size_t n);

/// Per-column energies of a configuration and their total.
class EnergyLedger {
 public:
  EnergyLedger() = default;
  explicit EnergyLedger(std::vector<double> per_sample);

  std::size_t size() const noexcept { return per_sample_.size(); }
  double operator[](std::size_t k) const { return per_sample_[k]; }
  std::span<const double> per_sample() const noexcept { return per_sample_; }
  double total() const noexcept { return total_; }
  double expected() const noexcept { return per_sample_.empty() ? 0.0 : total_ / static_cast<double>(size()); }

  /// Adds per-column changes. The total moves by `delta_total`, which the
  /// caller computed independently (equal to delta_a + delta_b up to
  /// rounding), so the objective tracks the accepted swap deltas exactly.
  void patch(std::size_t a, double delta_a, std::size_t b, double delta_b, double delta_total);

  /// Per-column changes whose sum is taken as the total change.
  void patch(std::size_t a, double delta_a, std::size_t b, double delta_b) {
    patch(a, delta_a, b, delta_b, delta_a + delta_b);
  }

 private:
  std::vector<double> per_sample_;
  double total_ = 0.0;
};

/// Column energies of D; expected() is the design objective.
EnergyLedger expected_energy(const TacticalConfiguration& D, const Geometry& geo);

/// Change of the total energy sum_k E(d_k) when u (in column a) and v (in
/// column b) trade places. Only units in exactly one of the two columns,
/// other than u and v, contribute; `terms` counts them (one
/// ||x_i - x_u|| - ||x_i - x_v|| evaluation each, at most 2(n-1)).
struct SwapDelta {
  double total = 0.0;
  std::size_t terms = 0;
  double only_a = 0.0;  // sum over a \ b \ {u} of ||x_i - x_u|| - ||x_i - x_v||
  double only_b = 0.0;  // same over b \ a \ {v}
};

/// Throws std::invalid_argument for an inadmissible swap.
SwapDelta delta_swap(const TacticalConfiguration& D, std::size_t a, std::size_t b, std::uint32_t u, std::uint32_t v,
                     const Geometry& geo);

/// Split of a swap's energy change between the two columns, for patching a
/// ledger. delta_a + delta_b equals delta_swap(...).total up to rounding.
struct ColumnDeltas {
  double delta_a = 0.0;
  double delta_b = 0.0;
};

ColumnDeltas column_deltas(const TacticalConfiguration& D, std::size_t a, std::size_t b, std::uint32_t u,
                           std::uint32_t v, const Geometry& geo, const SwapDelta& swap);

}  // namespace dbdtc
