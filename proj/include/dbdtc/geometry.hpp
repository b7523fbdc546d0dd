#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dbdtc/population.hpp"

namespace dbdtc {

/// Euclidean distances between population units plus the per-unit mean
/// distance Phi_i = (1/N) sum_k ||x_i - x_k||.
///
/// For N <= cache_threshold the full N x N matrix is held in memory;
/// otherwise distances are recomputed on demand and Phi is accumulated in
/// streaming passes with O(N) extra memory. Read-only after construction.
class Geometry {
 public:
  static constexpr std::size_t kDefaultCacheThreshold = 4000;

  explicit Geometry(const Population& pop, std::size_t cache_threshold = kDefaultCacheThreshold);

  std::size_t size() const noexcept { return size_; }
  std::size_t dimension() const noexcept { return dim_; }
  bool cached() const noexcept { return !matrix_.empty(); }

  /// Unchecked; hot path of the optimizers.
  double distance(std::uint32_t i, std::uint32_t j) const noexcept {
    if (!matrix_.empty()) return matrix_[static_cast<std::size_t>(i) * size_ + j];
    return compute(i, j);
  }

  /// Bounds-checked variant; throws std::out_of_range.
  double checked_distance(std::size_t i, std::size_t j) const;

  /// Row i of the cached matrix, empty when running on demand.
  std::span<const double> cached_row(std::uint32_t i) const noexcept {
    if (matrix_.empty()) return {};
    return {matrix_.data() + static_cast<std::size_t>(i) * size_, size_};
  }

  std::span<const double> phi() const noexcept { return phi_; }
  double mean_phi() const noexcept { return mean_phi_; }
  std::span<const double> point(std::uint32_t i) const noexcept { return {aux_.data() + i * dim_, dim_}; }

 private:
  double compute(std::uint32_t i, std::uint32_t j) const noexcept {
    const double* a = aux_.data() + static_cast<std::size_t>(i) * dim_;
    const double* b = aux_.data() + static_cast<std::size_t>(j) * dim_;
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = a[k] - b[k];
      s += d * d;
    }
    return std::sqrt(s);
  }

  std::size_t size_;
  std::size_t dim_;
  std::vector<double> aux_;
  std::vector<double> matrix_;
  std::vector<double> phi_;
  double mean_phi_ = 0.0;
};

/// Phi vector of a population (see Geometry).
std::vector<double> phi(const Population& pop, std::size_t cache_threshold = Geometry::kDefaultCacheThreshold);

/// For every population unit, the sample unit nearest to it. Ties go to the
/// smallest unit index. Requires a non-empty sample.
std::vector<std::uint32_t> voronoi_assign(const Geometry& geo, std::span<const std::uint32_t> sample);

/// The k-1 sampled units nearest to sampled unit i, excluding i itself,
/// ordered by distance then by unit index. Throws when k > |sample|, k == 0
/// or i is not in the sample.
std::vector<std::uint32_t> nearest_sampled_neighbors(const Geometry& geo, std::span<const std::uint32_t> sample,
                                                     std::uint32_t i, std::size_t k);

}  // namespace dbdtc
