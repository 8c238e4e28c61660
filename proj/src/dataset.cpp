#include "find/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace find {

DimVector DimVector::of(std::initializer_list<std::pair<BaseDim, Rational>> terms) {
  DimVector v;
  for (const auto& [d, e] : terms) v[d] += e;
  return v;
}

bool DimVector::dimensionless() const {
  return std::all_of(exps_.begin(), exps_.end(), [](const Rational& r) { return r == 0; });
}

DimVector DimVector::operator+(const DimVector& o) const {
  DimVector r;
  for (std::size_t i = 0; i < kBaseDims; ++i) r[i] = exps_[i] + o[i];
  return r;
}

DimVector DimVector::operator-(const DimVector& o) const {
  DimVector r;
  for (std::size_t i = 0; i < kBaseDims; ++i) r[i] = exps_[i] - o[i];
  return r;
}

DimVector DimVector::operator*(const Rational& k) const {
  DimVector r;
  for (std::size_t i = 0; i < kBaseDims; ++i) r[i] = exps_[i] * k;
  return r;
}

// ---------------------------------------------------------------------------
// Unit grammar
//
//   expr     := term (('*' | '/') term)*
//   term     := factor ('^' exponent)?
//   factor   := symbol | '1' | '(' expr ')'
//   exponent := ['+'|'-'] number | '(' ['+'|'-'] number ['/' integer] ')'

namespace {

class UnitParser {
 public:
  explicit UnitParser(std::string_view text) : s_(text) {}

  DimVector parse() {
    skip_ws();
    if (pos_ == s_.size()) return {};
    DimVector v = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw UnitParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  DimVector expr() {
    DimVector v = term();
    for (;;) {
      if (accept('*')) {
        v = v + term();
      } else if (accept('/')) {
        v = v - term();
      } else {
        return v;
      }
    }
  }

  DimVector term() {
    DimVector v = factor();
    if (accept('^')) v = v * exponent();
    return v;
  }

  DimVector factor() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected unit factor");
    if (accept('(')) {
      DimVector v = expr();
      if (!accept(')')) fail("expected ')'");
      return v;
    }
    const std::size_t start = pos_;
    if (s_[pos_] == '1') {
      ++pos_;
      if (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
        pos_ = start;
        fail("only the literal 1 may appear as a numeric factor");
      }
      return {};
    }
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string_view sym = s_.substr(start, pos_ - start);
    if (sym.empty()) fail("expected unit symbol");
    for (std::size_t i = 0; i < kBaseDims; ++i) {
      if (sym == kBaseSymbols[i]) {
        DimVector v;
        v[i] = 1;
        return v;
      }
    }
    pos_ = start;
    fail("unknown base symbol '" + std::string(sym) + "'");
  }

  Rational signed_number(bool allow_fraction) {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    skip_ws();
    const std::size_t num_start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ == num_start) fail("expected exponent");
    std::string literal(s_.substr(num_start, pos_ - num_start));
    if (s_[start] == '-') literal.insert(literal.begin(), '-');
    Rational r;
    try {
      r = parse_rational(literal);
    } catch (const std::invalid_argument&) {
      pos_ = start;
      fail("malformed exponent");
    }
    if (allow_fraction && accept('/')) {
      skip_ws();
      const std::size_t den_start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == den_start) fail("expected exponent denominator");
      std::int64_t den = 0;
      std::from_chars(s_.data() + den_start, s_.data() + pos_, den);
      if (den == 0) fail("zero exponent denominator");
      r /= den;
    }
    if (r.denominator() > 100) {
      pos_ = start;
      fail("exponent denominator exceeds 100");
    }
    return r;
  }

  Rational exponent() {
    if (accept('(')) {
      Rational r = signed_number(true);
      if (!accept(')')) fail("expected ')'");
      return r;
    }
    return signed_number(false);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

DimVector parse_unit(std::string_view text) { return UnitParser(text).parse(); }

std::string format_unit(const DimVector& d) {
  std::string out;
  for (std::size_t i = 0; i < kBaseDims; ++i) {
    const Rational& e = d[i];
    if (e == 0) continue;
    if (!out.empty()) out += '*';
    out += kBaseSymbols[i];
    if (e == 1) continue;
    out += '^';
    if (is_integer(e)) {
      out += std::to_string(e.numerator());
    } else {
      out += '(' + to_string(e) + ')';
    }
  }
  return out.empty() ? "1" : out;
}

ColumnStats column_stats(const Column& col) {
  ColumnStats s;
  if (col.values.empty()) return s;
  s.min = s.max = col.values.front();
  double sum = 0.0;
  for (double v : col.values) {
    s.has_zero = s.has_zero || v == 0.0;
    s.has_negative = s.has_negative || v < 0.0;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(col.values.size());
  double ss = 0.0;
  for (double v : col.values) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / static_cast<double>(col.values.size());
  return s;
}

// ---------------------------------------------------------------------------

Dataset::Dataset(std::vector<Column> columns, std::string provenance)
    : columns_(std::move(columns)), provenance_(std::move(provenance)) {
  validate();
}

void Dataset::validate() const {
  std::set<std::string> seen;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw DatasetError("empty column name");
    if (!seen.insert(c.name).second) throw DatasetError("duplicate column name '" + c.name + "'");
    if (c.values.size() != columns_.front().values.size()) {
      throw DatasetError("column '" + c.name + "' has " + std::to_string(c.values.size()) +
                         " values, expected " + std::to_string(columns_.front().values.size()));
    }
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      if (!std::isfinite(c.values[i])) {
        throw DatasetError("non-finite value in column '" + c.name + "' at row " + std::to_string(i));
      }
    }
  }
  if (!columns_.empty() && rows() < 2) throw DatasetError("dataset needs at least 2 rows");
}

const Column& Dataset::column(std::string_view name) const {
  const auto idx = index_of(name);
  if (idx < 0) throw DatasetError("unknown column '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(idx)];
}

std::ptrdiff_t Dataset::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

std::vector<std::string> Dataset::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

void Dataset::add_column(Column c) {
  columns_.push_back(std::move(c));
  try {
    validate();
  } catch (...) {
    columns_.pop_back();
    throw;
  }
}

Dataset Dataset::select(const std::vector<std::string>& names) const {
  std::vector<Column> cols;
  for (const auto& n : names) cols.push_back(column(n));
  Dataset out(std::move(cols), provenance_);
  out.dropped_rows_ = dropped_rows_;
  return out;
}

bool Dataset::operator==(const Dataset& o) const {
  if (columns_.size() != o.columns_.size()) return false;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& a = columns_[i];
    const auto& b = o.columns_[i];
    if (a.name != b.name || !(a.unit == b.unit) || a.values != b.values) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

Dataset parse_csv(std::string_view text, std::string provenance) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw DatasetError("missing header row");

  std::vector<Column> cols;
  for (auto cell : split_line(lines.front())) {
    Column c;
    const auto lb = cell.find('[');
    if (lb == std::string_view::npos) {
      c.name = std::string(trim(cell));
    } else {
      if (cell.back() != ']') throw DatasetError("malformed header cell '" + std::string(cell) + "'");
      c.name = std::string(trim(cell.substr(0, lb)));
      const auto unit_text = cell.substr(lb + 1, cell.size() - lb - 2);
      try {
        c.unit = parse_unit(unit_text);
      } catch (const UnitParseError& e) {
        throw DatasetError("column '" + c.name + "': " + e.what());
      }
    }
    cols.push_back(std::move(c));
  }

  std::size_t dropped = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto cells = split_line(lines[li]);
    const std::size_t row = li;  // 1-based data row
    if (cells.size() != cols.size()) {
      throw DatasetError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(cols.size()));
    }
    std::vector<double> vals(cells.size());
    bool missing = false;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (cells[j].empty()) {
        missing = true;
        continue;
      }
      auto v = parse_double(cells[j]);
      if (!v) {
        throw DatasetError("row " + std::to_string(row) + ": non-numeric cell '" +
                           std::string(cells[j]) + "' in column '" + cols[j].name + "'");
      }
      vals[j] = *v;
    }
    if (missing) {
      ++dropped;
      continue;
    }
    for (std::size_t j = 0; j < cells.size(); ++j) cols[j].values.push_back(vals[j]);
  }
  Dataset ds(std::move(cols), std::move(provenance));
  ds.set_dropped_rows(dropped);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.filename().string());
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    if (j) out += ',';
    const auto& c = ds.column(j);
    out += c.name;
    if (!c.unit.dimensionless()) out += '[' + format_unit(c.unit) + ']';
  }
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.cols(); ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", ds.column(j).values[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write '" + path.string() + "'");
  out << to_csv(ds);
}

// ---------------------------------------------------------------------------

DimMatrix DimMatrix::zeros(std::size_t p) {
  DimMatrix m;
  m.inputs = p;
  m.rows.assign(kBaseDims, RationalVector(p, Rational(0)));
  return m;
}

DimMatrix DimMatrix::from_units(const std::vector<DimVector>& units) {
  DimMatrix m = zeros(units.size());
  for (std::size_t j = 0; j < units.size(); ++j) {
    for (std::size_t r = 0; r < kBaseDims; ++r) m.rows[r][j] = units[j][r];
  }
  return m;
}

DimVector DimMatrix::column(std::size_t j) const {
  DimVector v;
  for (std::size_t r = 0; r < kBaseDims; ++r) v[r] = rows[r][j];
  return v;
}

XySplit split_xy(const Dataset& ds, std::string_view output, const std::vector<std::string>& inputs) {
  const auto out_idx = ds.index_of(output);
  if (out_idx < 0) throw DatasetError("unknown output column '" + std::string(output) + "'");
  std::vector<std::size_t> idx;
  if (inputs.empty()) {
    for (std::size_t j = 0; j < ds.cols(); ++j) {
      if (static_cast<std::ptrdiff_t>(j) != out_idx) idx.push_back(j);
    }
  } else {
    for (const auto& n : inputs) {
      const auto k = ds.index_of(n);
      if (k < 0) throw DatasetError("unknown input column '" + n + "'");
      if (k == out_idx) throw DatasetError("output '" + n + "' listed as input");
      idx.push_back(static_cast<std::size_t>(k));
    }
  }
  XySplit s;
  const std::size_t b = ds.rows();
  s.X.resize(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(idx.size()));
  s.y.resize(static_cast<Eigen::Index>(b));
  const auto& yc = ds.column(static_cast<std::size_t>(out_idx));
  for (std::size_t i = 0; i < b; ++i) s.y(static_cast<Eigen::Index>(i)) = yc.values[i];
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto& c = ds.column(idx[j]);
    for (std::size_t i = 0; i < b; ++i) {
      s.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c.values[i];
    }
    s.input_names.push_back(c.name);
    s.input_units.push_back(c.unit);
    s.input_stats.push_back(column_stats(c));
  }
  s.D = DimMatrix::from_units(s.input_units);
  s.d = yc.unit;
  s.output_name = yc.name;
  return s;
}

}  // namespace find
