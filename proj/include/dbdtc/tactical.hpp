#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "dbdtc/rng.hpp"

namespace dbdtc {

using Rational = boost::rational<std::int64_t>;
using Sample = std::vector<std::uint32_t>;

/// Smallest tactical configuration for (N, n): M = N/g columns, each unit
/// in c = n/g of them, g = gcd(N, n).
struct MinParams {
  std::uint64_t g = 0;
  std::uint64_t M = 0;
  std::uint64_t c = 0;
};

MinParams min_params(std::uint64_t N, std::uint64_t n);

/// First problem found by validate(); `ok()` when there is none.
struct Violation {
  enum class Kind { none, shape, index_range, duplicate_unit, column_sum, row_sum };
  Kind kind = Kind::none;
  std::size_t column = 0;
  std::size_t unit = 0;
  std::string message;

  bool ok() const noexcept { return kind == Kind::none; }
};

/// Checks column sizes, unit ranges, duplicates inside a column and row
/// sums (every unit in the same number of columns).
Violation validate(std::size_t N, std::size_t n, std::span<const Sample> columns);

/// Same checks on a dense N x M 0/1 matrix given row by row.
Violation validate_matrix(const std::vector<std::vector<std::uint8_t>>& rows, std::size_t n);

/// N x M incidence matrix with column sums n and row sums c. Columns are kept
/// as sorted unit lists; membership tests are O(1) through a bitset when
/// N*M is moderate, O(c) through per-unit column lists otherwise.
class TacticalConfiguration {
 public:
  /// Throws std::invalid_argument describing the first violation.
  TacticalConfiguration(std::size_t N, std::size_t n, std::vector<Sample> columns);

  std::size_t population_size() const noexcept { return N_; }
  std::size_t sample_size() const noexcept { return n_; }
  std::size_t size() const noexcept { return M_; }
  std::size_t multiplicity() const noexcept { return c_; }

  std::span<const std::uint32_t> column(std::size_t k) const noexcept { return {units_.data() + k * n_, n_}; }
  std::vector<Sample> columns() const;

  bool contains(std::uint32_t unit, std::size_t col) const noexcept {
    if (!bits_.empty()) {
      const std::size_t bit = static_cast<std::size_t>(unit) * M_ + col;
      return (bits_[bit >> 6] >> (bit & 63)) & 1U;
    }
    const std::uint32_t* cols = unit_columns_.data() + static_cast<std::size_t>(unit) * c_;
    for (std::size_t t = 0; t < c_; ++t) {
      if (cols[t] == col) return true;
    }
    return false;
  }

  /// Whether moving u from column a to b and v from b to a keeps a valid
  /// configuration: d_ua = d_vb = 1 and d_ub = d_va = 0, a != b.
  bool admissible(std::size_t a, std::size_t b, std::uint32_t u, std::uint32_t v) const noexcept;

  /// Performs the interchange. Throws std::invalid_argument if inadmissible.
  void swap_units(std::size_t a, std::size_t b, std::uint32_t u, std::uint32_t v);

  /// Dense 0/1 rows, for display and tests on small instances.
  std::vector<std::vector<std::uint8_t>> membership_matrix() const;

  friend bool operator==(const TacticalConfiguration& x, const TacticalConfiguration& y) {
    return x.N_ == y.N_ && x.n_ == y.n_ && x.units_ == y.units_;
  }

 private:
  void set_member(std::uint32_t unit, std::size_t col, bool value);
  void replace_in_column(std::size_t col, std::uint32_t old_unit, std::uint32_t new_unit);

  std::size_t N_;
  std::size_t n_;
  std::size_t M_;
  std::size_t c_;
  std::vector<std::uint32_t> units_;         // M x n, each column sorted
  std::vector<std::uint64_t> bits_;          // N x M membership, dense mode
  std::vector<std::uint32_t> unit_columns_;  // N x c column lists, sparse mode
};

Violation validate(const TacticalConfiguration& D);

/// Rows are the first N cyclic shifts of a length-M pattern with c ones.
/// Without a pattern, one is drawn uniformly over c-subsets using `rng`.
TacticalConfiguration cyclic_init(std::size_t N, std::size_t n, std::optional<std::vector<std::uint8_t>> pattern,
                                  Rng& rng);

/// New row i is old row perm[i]. Throws unless perm is a bijection on 0..N-1.
TacticalConfiguration permute_rows(const TacticalConfiguration& D, std::span<const std::uint32_t> perm);

/// Distinct columns of D with their multiplicities, lexicographically sorted.
struct DesignSupport {
  std::vector<Sample> samples;
  std::vector<std::size_t> multiplicity;
  std::size_t M = 0;

  std::size_t size() const noexcept { return samples.size(); }
  Rational probability(std::size_t k) const {
    return {static_cast<std::int64_t>(multiplicity[k]), static_cast<std::int64_t>(M)};
  }
};

DesignSupport support(const TacticalConfiguration& D);

/// Exact first- and second-order inclusion probabilities from integer
/// co-occurrence counts over the M columns.
class InclusionProbabilities {
 public:
  explicit InclusionProbabilities(const TacticalConfiguration& D);

  std::size_t size() const noexcept { return N_; }
  Rational first(std::size_t i) const {
    return {static_cast<std::int64_t>(first_[i]), static_cast<std::int64_t>(M_)};
  }
  Rational second(std::size_t i, std::size_t j) const {
    return {static_cast<std::int64_t>(pair_[i * N_ + j]), static_cast<std::int64_t>(M_)};
  }

 private:
  std::size_t N_;
  std::size_t M_;
  std::vector<std::uint32_t> first_;
  std::vector<std::uint32_t> pair_;
};

inline InclusionProbabilities inclusion_probs(const TacticalConfiguration& D) { return InclusionProbabilities(D); }

/// Text format: line 1 "N M n c", then M lines of n sorted 1-based unit ids.
void write_configuration(std::ostream& out, const TacticalConfiguration& D);
TacticalConfiguration read_configuration(std::istream& in);
std::string configuration_text(const TacticalConfiguration& D);

}  // namespace dbdtc
