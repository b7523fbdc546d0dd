#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dbdtc {

/// Finite population of N units, each carrying a p-dimensional auxiliary
/// vector. Optional target variables (for estimation studies) and strata
/// labels travel with the units. Immutable after construction.
class Population {
 public:
  /// Throws std::invalid_argument when N == 0, p == 0, shapes disagree,
  /// an entry is non-finite, or ids are not unique. Empty `ids` defaults
  /// to "1".."N".
  Population(std::size_t p, std::vector<double> aux, std::vector<std::string> ids = {},
             std::vector<std::string> aux_names = {},
             std::optional<std::vector<std::string>> strata = std::nullopt);

  std::size_t size() const noexcept { return size_; }
  std::size_t dimension() const noexcept { return dim_; }

  std::span<const double> row(std::size_t i) const { return {aux_.data() + i * dim_, dim_}; }
  double value(std::size_t i, std::size_t column) const { return aux_[i * dim_ + column]; }
  std::span<const double> aux() const noexcept { return aux_; }
  std::vector<double> column(std::size_t column) const;

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<std::string>& aux_names() const noexcept { return aux_names_; }
  const std::optional<std::vector<std::string>>& strata() const noexcept { return strata_; }

  /// Target variables, N x q row-major; q may be zero.
  std::size_t target_count() const noexcept { return target_names_.size(); }
  const std::vector<std::string>& target_names() const noexcept { return target_names_; }
  std::vector<double> target(std::size_t t) const;
  Population with_targets(std::vector<std::string> names, std::vector<double> values) const;

  /// Same units, ids, strata and targets with a replacement N x p aux matrix.
  Population with_aux(std::vector<double> aux) const;

  /// Sub-population of the given units (ids, strata and targets follow).
  Population subset(std::span<const std::uint32_t> units) const;

 private:
  std::size_t size_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> aux_;
  std::vector<std::string> ids_;
  std::vector<std::string> aux_names_;
  std::optional<std::vector<std::string>> strata_;
  std::vector<std::string> target_names_;
  std::vector<double> targets_;
};

struct CsvOptions {
  std::vector<std::string> aux_columns;
  std::optional<std::string> id_column;
  std::optional<std::string> stratum_column;
  std::vector<std::string> target_columns;
};

struct LoadResult {
  Population population;
  std::size_t dropped_rows = 0;
};

/// Reads a comma-separated file with a header line. Rows with an empty or
/// NA cell in any aux/target column are dropped and counted. A cell that is
/// present but not a finite number is an error naming its row and column.
LoadResult load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// N x p matrix of i.i.d. U[0,1] values, reproducible from `seed`.
Population synth_uniform(std::size_t N, std::size_t p, std::uint64_t seed);

/// Centers each aux column and scales it to unit sample standard deviation
/// (divisor N-1). Constant columns become zero; their names are appended to
/// `warnings` when given, otherwise reported on stderr.
Population standardize(const Population& pop, std::vector<std::string>* warnings = nullptr);

/// Writes id, aux columns and target columns (and stratum when present).
void write_csv(const Population& pop, const std::filesystem::path& path);

}  // namespace dbdtc
