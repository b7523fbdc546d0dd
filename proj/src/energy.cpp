#include "dbdtc/energy.hpp"

#include <stdexcept>
#include <string>

namespace dbdtc {

double sample_energy(std::span<const std::uint32_t> sample, const Geometry& geo) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("sample_energy requires a non-empty sample");
  const auto phi = geo.phi();
  double phi_sum = 0.0;
  double pair_sum = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::uint32_t i = sample[s];
    phi_sum += phi[i];
    double row = 0.0;
    for (std::size_t t = s + 1; t < n; ++t) row += geo.distance(i, sample[t]);
    pair_sum += row;
  }
  const double nn = static_cast<double>(n);
  return 2.0 * phi_sum / nn - geo.mean_phi() - 2.0 * pair_sum / (nn * nn);
}

double sample_energy(std::span<const std::uint32_t> sample, const Geometry& geo, std::size_t n) {
  if (sample.size() != n) {
    throw std::invalid_argument("sample has " + std::to_string(sample.size()) + " units, expected " +
                                std::to_string(n));
  }
  return sample_energy(sample, geo);
}

EnergyLedger::EnergyLedger(std::vector<double> per_sample) : per_sample_(std::move(per_sample)) {
  for (double e : per_sample_) total_ += e;
}

void EnergyLedger::patch(std::size_t a, double delta_a, std::size_t b, double delta_b, double delta_total) {
  per_sample_[a] += delta_a;
  per_sample_[b] += delta_b;
  total_ += delta_total;
}

EnergyLedger expected_energy(const TacticalConfiguration& D, const Geometry& geo) {
  if (geo.size() != D.population_size()) throw std::invalid_argument("geometry does not match configuration");
  std::vector<double> energies(D.size());
  for (std::size_t k = 0; k < D.size(); ++k) energies[k] = sample_energy(D.column(k), geo);
  return EnergyLedger(std::move(energies));
}

SwapDelta delta_swap(const TacticalConfiguration& D, std::size_t a, std::size_t b, std::uint32_t u, std::uint32_t v,
                     const Geometry& geo) {
  if (!D.admissible(a, b, u, v)) throw std::invalid_argument("delta_swap called with an inadmissible swap");
  SwapDelta out;
  const auto row_u = geo.cached_row(u);
  const auto row_v = geo.cached_row(v);
  auto term = [&](std::uint32_t i) {
    if (!row_u.empty()) return row_u[i] - row_v[i];
    return geo.distance(i, u) - geo.distance(i, v);
  };
  for (std::uint32_t i : D.column(a)) {
    if (i == u || D.contains(i, b)) continue;
    out.only_a += term(i);
    ++out.terms;
  }
  for (std::uint32_t i : D.column(b)) {
    if (i == v || D.contains(i, a)) continue;
    out.only_b += term(i);
    ++out.terms;
  }
  const double n = static_cast<double>(D.sample_size());
  out.total = 2.0 * (out.only_a - out.only_b) / (n * n);
  return out;
}

ColumnDeltas column_deltas(const TacticalConfiguration& D, std::size_t a, std::size_t b, std::uint32_t u,
                           std::uint32_t v, const Geometry& geo, const SwapDelta& swap) {
  // Units shared by both columns cancel in the total but not per column.
  double shared = 0.0;
  for (std::uint32_t i : D.column(a)) {
    if (i != u && D.contains(i, b)) shared += geo.distance(i, u) - geo.distance(i, v);
  }
  const double n = static_cast<double>(D.sample_size());
  const auto phi = geo.phi();
  const double phi_shift = 2.0 * (phi[v] - phi[u]) / n;
  return {phi_shift + 2.0 * (swap.only_a + shared) / (n * n), -phi_shift - 2.0 * (swap.only_b + shared) / (n * n)};
}

}  // namespace dbdtc
