#include "dbdtc/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace dbdtc {

Geometry::Geometry(const Population& pop, std::size_t cache_threshold)
    : size_(pop.size()), dim_(pop.dimension()), aux_(pop.aux().begin(), pop.aux().end()), phi_(pop.size(), 0.0) {
  const auto n = static_cast<std::uint32_t>(size_);
  if (size_ <= cache_threshold) {
    matrix_.assign(size_ * size_, 0.0);
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) {
        const double d = compute(i, j);
        matrix_[static_cast<std::size_t>(i) * size_ + j] = d;
        matrix_[static_cast<std::size_t>(j) * size_ + i] = d;
      }
    }
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::uint32_t k = 0; k < n; ++k) s += distance(i, k);
    phi_[i] = s / static_cast<double>(size_);
  }
  double total = 0.0;
  for (double v : phi_) total += v;
  mean_phi_ = total / static_cast<double>(size_);
}

double Geometry::checked_distance(std::size_t i, std::size_t j) const {
  if (i >= size_ || j >= size_) throw std::out_of_range("unit index out of range");
  return distance(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
}

std::vector<double> phi(const Population& pop, std::size_t cache_threshold) {
  const Geometry geo(pop, cache_threshold);
  return {geo.phi().begin(), geo.phi().end()};
}

std::vector<std::uint32_t> voronoi_assign(const Geometry& geo, std::span<const std::uint32_t> sample) {
  if (sample.empty()) throw std::invalid_argument("voronoi_assign requires a non-empty sample");
  const auto N = static_cast<std::uint32_t>(geo.size());
  std::vector<std::uint32_t> owner(N);
  for (std::uint32_t j = 0; j < N; ++j) {
    std::uint32_t best = sample[0];
    double best_d = geo.distance(j, best);
    for (std::size_t s = 1; s < sample.size(); ++s) {
      const std::uint32_t cand = sample[s];
      const double d = geo.distance(j, cand);
      if (d < best_d || (d == best_d && cand < best)) {
        best = cand;
        best_d = d;
      }
    }
    owner[j] = best;
  }
  return owner;
}

std::vector<std::uint32_t> nearest_sampled_neighbors(const Geometry& geo, std::span<const std::uint32_t> sample,
                                                     std::uint32_t i, std::size_t k) {
  if (k == 0 || k > sample.size()) throw std::invalid_argument("neighbor count k must be in [1, |sample|]");
  if (std::find(sample.begin(), sample.end(), i) == sample.end()) {
    throw std::invalid_argument("unit is not in the sample");
  }
  std::vector<std::pair<double, std::uint32_t>> cand;
  cand.reserve(sample.size());
  for (std::uint32_t j : sample) {
    if (j != i) cand.emplace_back(geo.distance(i, j), j);
  }
  const std::size_t want = k - 1;
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(want), cand.end());
  std::vector<std::uint32_t> out;
  out.reserve(want);
  for (std::size_t t = 0; t < want; ++t) out.push_back(cand[t].second);
  return out;
}

}  // namespace dbdtc
