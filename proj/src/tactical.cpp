#include "dbdtc/tactical.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dbdtc {

namespace {

constexpr std::size_t kDenseMembershipBits = std::size_t{1} << 28;
constexpr std::size_t kMaxPairwiseUnits = 16384;

Violation violation(Violation::Kind kind, std::size_t column, std::size_t unit, std::string message) {
  return Violation{kind, column, unit, std::move(message)};
}

// Shared checks over M columns reachable through `column(k)`.
template <typename ColumnAt>
Violation check_columns(std::size_t N, std::size_t n, std::size_t M, ColumnAt column) {
  using K = Violation::Kind;
  if (N == 0 || n == 0 || n > N) return violation(K::shape, 0, 0, "require 1 <= n <= N");
  if (M == 0) return violation(K::shape, 0, 0, "configuration has no columns");
  std::vector<std::size_t> row_sum(N, 0);
  std::vector<std::size_t> last_seen(N, M);
  for (std::size_t k = 0; k < M; ++k) {
    const std::span<const std::uint32_t> col = column(k);
    for (std::uint32_t u : col) {
      if (u >= N) {
        return violation(K::index_range, k, u, "unit " + std::to_string(u + 1) + " out of range in column " +
                                                   std::to_string(k + 1));
      }
      if (last_seen[u] == k) {
        return violation(K::duplicate_unit, k, u, "unit " + std::to_string(u + 1) + " repeated in column " +
                                                      std::to_string(k + 1));
      }
      last_seen[u] = k;
      ++row_sum[u];
    }
    if (col.size() != n) {
      return violation(K::column_sum, k, 0, "column " + std::to_string(k + 1) + " has sum " +
                                                std::to_string(col.size()) + ", expected " + std::to_string(n));
    }
  }
  if ((M * n) % N != 0) {
    return violation(K::row_sum, 0, 0, "M*n is not a multiple of N; row sums cannot be constant");
  }
  const std::size_t c = M * n / N;
  for (std::size_t u = 0; u < N; ++u) {
    if (row_sum[u] != c) {
      return violation(K::row_sum, 0, u, "unit " + std::to_string(u + 1) + " has row sum " +
                                             std::to_string(row_sum[u]) + ", expected " + std::to_string(c));
    }
  }
  return {};
}

}  // namespace

MinParams min_params(std::uint64_t N, std::uint64_t n) {
  if (n == 0 || n > N) throw std::invalid_argument("min_params requires 1 <= n <= N");
  const std::uint64_t g = std::gcd(N, n);
  return {g, N / g, n / g};
}

Violation validate(std::size_t N, std::size_t n, std::span<const Sample> columns) {
  return check_columns(N, n, columns.size(),
                       [&](std::size_t k) { return std::span<const std::uint32_t>(columns[k]); });
}

Violation validate_matrix(const std::vector<std::vector<std::uint8_t>>& rows, std::size_t n) {
  if (rows.empty() || rows.front().empty()) return violation(Violation::Kind::shape, 0, 0, "empty matrix");
  const std::size_t M = rows.front().size();
  std::vector<Sample> columns(M);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != M) return violation(Violation::Kind::shape, 0, i, "ragged matrix");
    for (std::size_t k = 0; k < M; ++k) {
      if (rows[i][k] > 1) return violation(Violation::Kind::shape, k, i, "entry is not binary");
      if (rows[i][k]) columns[k].push_back(static_cast<std::uint32_t>(i));
    }
  }
  return validate(rows.size(), n, columns);
}

Violation validate(const TacticalConfiguration& D) {
  return check_columns(D.population_size(), D.sample_size(), D.size(), [&](std::size_t k) { return D.column(k); });
}

TacticalConfiguration::TacticalConfiguration(std::size_t N, std::size_t n, std::vector<Sample> columns)
    : N_(N), n_(n), M_(columns.size()), c_(0) {
  const Violation v = validate(N, n, columns);
  if (!v.ok()) throw std::invalid_argument("invalid tactical configuration: " + v.message);
  c_ = M_ * n_ / N_;
  units_.reserve(M_ * n_);
  for (auto& col : columns) {
    if (!std::is_sorted(col.begin(), col.end())) std::sort(col.begin(), col.end());
    units_.insert(units_.end(), col.begin(), col.end());
  }
  if (N_ * M_ <= kDenseMembershipBits) {
    bits_.assign((N_ * M_ + 63) / 64, 0);
  } else {
    unit_columns_.assign(N_ * c_, 0);
  }
  std::vector<std::size_t> fill(bits_.empty() ? N_ : 0, 0);
  for (std::size_t k = 0; k < M_; ++k) {
    for (std::uint32_t u : column(k)) {
      if (!bits_.empty()) {
        set_member(u, k, true);
      } else {
        unit_columns_[u * c_ + fill[u]++] = static_cast<std::uint32_t>(k);
      }
    }
  }
}

std::vector<Sample> TacticalConfiguration::columns() const {
  std::vector<Sample> out;
  out.reserve(M_);
  for (std::size_t k = 0; k < M_; ++k) {
    const auto col = column(k);
    out.emplace_back(col.begin(), col.end());
  }
  return out;
}

bool TacticalConfiguration::admissible(std::size_t a, std::size_t b, std::uint32_t u, std::uint32_t v) const noexcept {
  if (a == b || a >= M_ || b >= M_ || u >= N_ || v >= N_) return false;
  return contains(u, a) && contains(v, b) && !contains(u, b) && !contains(v, a);
}

void TacticalConfiguration::set_member(std::uint32_t unit, std::size_t col, bool value) {
  const std::size_t bit = static_cast<std::size_t>(unit) * M_ + col;
  if (value) {
    bits_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
  } else {
    bits_[bit >> 6] &= ~(std::uint64_t{1} << (bit & 63));
  }
}

void TacticalConfiguration::replace_in_column(std::size_t col, std::uint32_t old_unit, std::uint32_t new_unit) {
  auto* first = units_.data() + col * n_;
  auto* last = first + n_;
  auto* pos = std::lower_bound(first, last, old_unit);
  // Shift neighbours so the column stays sorted after substitution.
  if (new_unit > old_unit) {
    while (pos + 1 < last && pos[1] < new_unit) {
      pos[0] = pos[1];
      ++pos;
    }
  } else {
    while (pos > first && pos[-1] > new_unit) {
      pos[0] = pos[-1];
      --pos;
    }
  }
  *pos = new_unit;
}

void TacticalConfiguration::swap_units(std::size_t a, std::size_t b, std::uint32_t u, std::uint32_t v) {
  if (!admissible(a, b, u, v)) throw std::invalid_argument("inadmissible swap");
  replace_in_column(a, u, v);
  replace_in_column(b, v, u);
  if (!bits_.empty()) {
    set_member(u, a, false);
    set_member(u, b, true);
    set_member(v, b, false);
    set_member(v, a, true);
  } else {
    for (std::size_t t = 0; t < c_; ++t) {
      if (unit_columns_[u * c_ + t] == a) unit_columns_[u * c_ + t] = static_cast<std::uint32_t>(b);
      if (unit_columns_[v * c_ + t] == b) unit_columns_[v * c_ + t] = static_cast<std::uint32_t>(a);
    }
  }
}

std::vector<std::vector<std::uint8_t>> TacticalConfiguration::membership_matrix() const {
  std::vector<std::vector<std::uint8_t>> rows(N_, std::vector<std::uint8_t>(M_, 0));
  for (std::size_t k = 0; k < M_; ++k) {
    for (std::uint32_t u : column(k)) rows[u][k] = 1;
  }
  return rows;
}

TacticalConfiguration cyclic_init(std::size_t N, std::size_t n, std::optional<std::vector<std::uint8_t>> pattern,
                                  Rng& rng) {
  const MinParams mp = min_params(N, n);
  const std::size_t M = mp.M;
  std::vector<std::size_t> ones;
  if (pattern) {
    if (pattern->size() != M) throw std::invalid_argument("cyclic pattern must have length M");
    for (std::size_t t = 0; t < M; ++t) {
      if ((*pattern)[t] > 1) throw std::invalid_argument("cyclic pattern must be binary");
      if ((*pattern)[t]) ones.push_back(t);
    }
    if (ones.size() != mp.c) throw std::invalid_argument("cyclic pattern must contain exactly c ones");
  } else {
    std::vector<std::size_t> idx(M);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t t = 0; t < mp.c; ++t) std::swap(idx[t], idx[t + uniform_index(rng, M - t)]);
    ones.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(mp.c));
  }
  std::vector<Sample> columns(M);
  for (auto& col : columns) col.reserve(n);
  // Unit i goes to column (t + i) mod M for every one-position t; advance
  // the positions instead of taking the modulus per entry.
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t& t : ones) {
      columns[t].push_back(static_cast<std::uint32_t>(i));
      if (++t == M) t = 0;
    }
  }
  return TacticalConfiguration(N, n, std::move(columns));
}

TacticalConfiguration permute_rows(const TacticalConfiguration& D, std::span<const std::uint32_t> perm) {
  const std::size_t N = D.population_size();
  if (perm.size() != N) throw std::invalid_argument("permutation length must equal N");
  std::vector<std::uint32_t> inverse(N, static_cast<std::uint32_t>(N));
  for (std::size_t i = 0; i < N; ++i) {
    if (perm[i] >= N || inverse[perm[i]] != N) throw std::invalid_argument("rows permutation is not a bijection");
    inverse[perm[i]] = static_cast<std::uint32_t>(i);
  }
  std::vector<Sample> columns = D.columns();
  for (auto& col : columns) {
    for (auto& u : col) u = inverse[u];
  }
  return TacticalConfiguration(N, D.sample_size(), std::move(columns));
}

DesignSupport support(const TacticalConfiguration& D) {
  std::vector<Sample> cols = D.columns();
  std::sort(cols.begin(), cols.end());
  DesignSupport out;
  out.M = D.size();
  for (auto& col : cols) {
    if (!out.samples.empty() && out.samples.back() == col) {
      ++out.multiplicity.back();
    } else {
      out.samples.push_back(std::move(col));
      out.multiplicity.push_back(1);
    }
  }
  return out;
}

InclusionProbabilities::InclusionProbabilities(const TacticalConfiguration& D)
    : N_(D.population_size()), M_(D.size()), first_(N_, 0) {
  if (N_ > kMaxPairwiseUnits) throw std::length_error("pairwise inclusion matrix too large for N");
  pair_.assign(N_ * N_, 0);
  for (std::size_t k = 0; k < M_; ++k) {
    const auto col = D.column(k);
    for (std::uint32_t i : col) {
      ++first_[i];
      for (std::uint32_t j : col) ++pair_[static_cast<std::size_t>(i) * N_ + j];
    }
  }
}

void write_configuration(std::ostream& out, const TacticalConfiguration& D) {
  out << D.population_size() << ' ' << D.size() << ' ' << D.sample_size() << ' ' << D.multiplicity() << '\n';
  for (std::size_t k = 0; k < D.size(); ++k) {
    const auto col = D.column(k);
    for (std::size_t t = 0; t < col.size(); ++t) {
      if (t) out << ' ';
      out << col[t] + 1;
    }
    out << '\n';
  }
}

std::string configuration_text(const TacticalConfiguration& D) {
  std::ostringstream os;
  write_configuration(os, D);
  return os.str();
}

TacticalConfiguration read_configuration(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("configuration file is empty");
  std::istringstream head(line);
  long long N = 0, M = 0, n = 0, c = 0;
  if (!(head >> N >> M >> n >> c) || N <= 0 || M <= 0 || n <= 0 || c <= 0) {
    throw std::runtime_error("malformed configuration header: expected 'N M n c'");
  }
  std::vector<Sample> columns;
  columns.reserve(static_cast<std::size_t>(M));
  for (long long k = 0; k < M; ++k) {
    if (!std::getline(in, line)) throw std::runtime_error("configuration file ends before column " + std::to_string(k + 1));
    std::istringstream row(line);
    Sample col;
    long long id = 0;
    while (row >> id) {
      if (id < 1 || id > N) throw std::runtime_error("unit id out of range in column " + std::to_string(k + 1));
      col.push_back(static_cast<std::uint32_t>(id - 1));
    }
    if (!row.eof()) throw std::runtime_error("non-integer entry in column " + std::to_string(k + 1));
    if (static_cast<long long>(col.size()) != n) {
      throw std::runtime_error("column " + std::to_string(k + 1) + " has " + std::to_string(col.size()) +
                               " ids, expected " + std::to_string(n));
    }
    columns.push_back(std::move(col));
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw std::runtime_error("trailing data after M columns");
  }
  const Violation v = validate(static_cast<std::size_t>(N), static_cast<std::size_t>(n), columns);
  if (!v.ok()) throw std::runtime_error("invalid configuration: " + v.message);
  TacticalConfiguration D(static_cast<std::size_t>(N), static_cast<std::size_t>(n), std::move(columns));
  if (static_cast<long long>(D.multiplicity()) != c) throw std::runtime_error("header c disagrees with row sums");
  return D;
}

}  // namespace dbdtc
