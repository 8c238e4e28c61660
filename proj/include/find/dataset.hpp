#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "find/rational.hpp"

namespace find {

inline constexpr std::size_t kBaseDims = 7;

// Base-dimension order used by every matrix in the library.
enum class BaseDim : std::size_t { M = 0, L, T, Theta, I, J, N };

inline constexpr std::array<std::string_view, kBaseDims> kBaseSymbols = {
    "kg", "m", "s", "K", "A", "cd", "mol"};
inline constexpr std::array<std::string_view, kBaseDims> kBaseNames = {
    "M", "L", "T", "Theta", "I", "J", "N"};

/// Exponents over (M, L, T, Θ, I, J, N). Equality is exact.
class DimVector {
 public:
  DimVector() = default;
  explicit DimVector(const std::array<Rational, kBaseDims>& e) : exps_(e) {}

  static DimVector of(std::initializer_list<std::pair<BaseDim, Rational>> terms);

  Rational& operator[](BaseDim d) { return exps_[static_cast<std::size_t>(d)]; }
  const Rational& operator[](BaseDim d) const { return exps_[static_cast<std::size_t>(d)]; }
  Rational& operator[](std::size_t i) { return exps_[i]; }
  const Rational& operator[](std::size_t i) const { return exps_[i]; }

  bool dimensionless() const;

  DimVector operator+(const DimVector& o) const;
  DimVector operator-(const DimVector& o) const;
  DimVector operator*(const Rational& k) const;
  bool operator==(const DimVector& o) const = default;

  const std::array<Rational, kBaseDims>& exponents() const { return exps_; }

 private:
  std::array<Rational, kBaseDims> exps_{};
};

class UnitParseError : public std::runtime_error {
 public:
  UnitParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `kg*m^2/(A*s^3)`, `m/s^2`, `1/s`, `m^(1/2)`, `m^0.5` or "" (dimensionless).
/// Exponent denominators are capped at 100.
DimVector parse_unit(std::string_view text);

/// Canonical text: factors in base-dimension order, `*`-joined, `^-q` for
/// negative exponents and `^(p/q)` for fractional ones; "1" when dimensionless.
std::string format_unit(const DimVector& d);

struct Column {
  std::string name;
  DimVector unit;
  std::vector<double> values;
};

struct ColumnStats {
  bool has_zero = false;
  bool has_negative = false;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

ColumnStats column_stats(const Column& col);

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Column> columns, std::string provenance = {});

  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().values.size(); }
  std::size_t cols() const { return columns_.size(); }

  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const Column& column(std::string_view name) const;
  std::ptrdiff_t index_of(std::string_view name) const;
  std::vector<std::string> names() const;

  const std::string& provenance() const { return provenance_; }
  std::size_t dropped_rows() const { return dropped_rows_; }
  void set_dropped_rows(std::size_t n) { dropped_rows_ = n; }

  void add_column(Column c);
  Dataset select(const std::vector<std::string>& names) const;

  bool operator==(const Dataset& o) const;

 private:
  void validate() const;

  std::vector<Column> columns_;
  std::string provenance_;
  std::size_t dropped_rows_ = 0;
};

/// Header cells `name[unit]`; body cells numeric. Empty cells mark a missing
/// value and drop the row (counted in dropped_rows()); any other non-numeric
/// cell is an error naming the row.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text, std::string provenance = {});
std::string to_csv(const Dataset& ds);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// Dimension matrix: 7 rows (base dims) by p columns, one per input.
struct DimMatrix {
  std::vector<RationalVector> rows;  // rows[base][input]
  std::size_t inputs = 0;

  static DimMatrix zeros(std::size_t p);
  static DimMatrix from_units(const std::vector<DimVector>& units);
  DimVector column(std::size_t j) const;
};

struct XySplit {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  DimMatrix D;
  DimVector d;
  std::vector<std::string> input_names;
  std::vector<DimVector> input_units;
  std::vector<ColumnStats> input_stats;
  std::string output_name;
};

/// Inputs in dataset order; `inputs` restricts and orders them when non-empty.
XySplit split_xy(const Dataset& ds, std::string_view output,
                 const std::vector<std::string>& inputs = {});

}  // namespace find
