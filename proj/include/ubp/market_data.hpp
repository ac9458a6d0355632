#ifndef UBP_MARKET_DATA_HPP
#define UBP_MARKET_DATA_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ubp {

// One half-period of gross returns across m assets. Gross convention:
// 1.05 means +5%, 0.0 means total loss. Entries are nonnegative and at
// least one is positive.
class ReturnVector {
 public:
  explicit ReturnVector(std::vector<double> values) : v_(std::move(values)) {
    if (v_.empty()) throw std::invalid_argument("ReturnVector: empty");
    bool any_positive = false;
    for (double x : v_) {
      if (!std::isfinite(x) || x < 0.0)
        throw std::invalid_argument("ReturnVector: entries must be finite and >= 0");
      if (x > 0.0) any_positive = true;
    }
    if (!any_positive)
      throw std::invalid_argument("ReturnVector: at least one entry must be positive");
  }

  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  const std::vector<double>& values() const { return v_; }

  friend bool operator==(const ReturnVector& a, const ReturnVector& b) {
    return a.v_ == b.v_;
  }

 private:
  std::vector<double> v_;
};

// Gross-return history organized into H-partite investment periods: half k
// (0-based) belongs to sub-period k mod H of period k / H. Trailing halves
// beyond the last complete period are kept and can be padded with all-ones
// vectors (see pad_incomplete).
class MarketHistory {
 public:
  MarketHistory(std::size_t order, std::vector<std::string> assets)
      : order_(order), assets_(std::move(assets)) {
    if (order_ < 1) throw std::invalid_argument("MarketHistory: order must be >= 1");
    if (assets_.empty()) throw std::invalid_argument("MarketHistory: no assets");
  }

  MarketHistory(std::size_t order, std::size_t num_assets)
      : MarketHistory(order, default_labels(num_assets)) {}

  void append(ReturnVector half) {
    if (half.size() != assets_.size())
      throw std::invalid_argument("MarketHistory: return vector dimension mismatch");
    halves_.push_back(std::move(half));
  }

  std::size_t order() const { return order_; }
  std::size_t num_assets() const { return assets_.size(); }
  const std::vector<std::string>& assets() const { return assets_; }
  const std::vector<ReturnVector>& halves() const { return halves_; }
  std::size_t complete_periods() const { return halves_.size() / order_; }
  std::size_t remainder() const { return halves_.size() % order_; }

  // The H halves of complete period t, in chronological order.
  std::span<const ReturnVector> period(std::size_t t) const {
    if (t >= complete_periods())
      throw std::out_of_range("MarketHistory::period: index past complete periods");
    return {halves_.data() + t * order_, order_};
  }

  friend bool operator==(const MarketHistory& a, const MarketHistory& b) {
    return a.order_ == b.order_ && a.assets_ == b.assets_ && a.halves_ == b.halves_;
  }

 private:
  static std::vector<std::string> default_labels(std::size_t m) {
    std::vector<std::string> out;
    out.reserve(m);
    for (std::size_t i = 1; i <= m; ++i) out.push_back("asset" + std::to_string(i));
    return out;
  }

  std::size_t order_;
  std::vector<std::string> assets_;
  std::vector<ReturnVector> halves_;
};

// CSV rejection with 1-based file coordinates.
struct ParseError : std::runtime_error {
  ParseError(std::size_t row_, std::size_t col_, const std::string& what_)
      : std::runtime_error("row " + std::to_string(row_) + ", column " +
                           std::to_string(col_) + ": " + what_),
        row(row_),
        col(col_) {}
  std::size_t row;
  std::size_t col;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  if (cell.empty()) throw ParseError(row, col, "empty cell");
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw ParseError(row, col, "not a decimal number: '" + std::string(cell) + "'");
  if (!std::isfinite(value)) throw ParseError(row, col, "value must be finite");
  if (value < 0.0)
    throw ParseError(row, col, "negative gross return (use gross units: 1.05 = +5%)");
  return value;
}

}  // namespace detail

// Parses a gross-return CSV: header row of asset labels (an optional leading
// `t` column is ignored), then one half-period per row in chronological
// order. Row k of the data is half k mod H of period k / H.
inline MarketHistory parse_history(std::string_view text, std::size_t order) {
  if (order < 1) throw std::invalid_argument("parse_history: order must be >= 1");

  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      lines.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }

  std::size_t row = 0;
  std::size_t li = 0;
  auto next_line = [&]() -> std::string_view {
    while (li < lines.size()) {
      std::string_view ln = detail::trim(lines[li]);
      ++li;
      ++row;
      if (!ln.empty()) return ln;
      // blank lines carry no data; keep the row counter aligned with the file
    }
    return {};
  };

  std::string_view header = next_line();
  if (header.empty()) throw ParseError(1, 1, "missing header row");
  auto fields = detail::split_csv(header);
  bool t_column = !fields.empty() && fields.front() == "t";
  std::size_t first = t_column ? 1 : 0;
  if (fields.size() <= first) throw ParseError(row, 1, "no asset labels in header");

  std::vector<std::string> labels;
  for (std::size_t i = first; i < fields.size(); ++i) {
    if (fields[i].empty()) throw ParseError(row, i + 1, "empty asset label");
    labels.emplace_back(fields[i]);
  }

  MarketHistory history(order, std::move(labels));
  const std::size_t m = history.num_assets();
  bool any_row = false;

  for (;;) {
    std::string_view line = next_line();
    if (line.empty()) break;
    auto cells = detail::split_csv(line);
    if (cells.size() != m + first)
      throw ParseError(row, 1,
                       "expected " + std::to_string(m + first) + " cells, got " +
                           std::to_string(cells.size()));
    std::vector<double> values(m);
    bool any_positive = false;
    for (std::size_t i = 0; i < m; ++i) {
      values[i] = detail::parse_cell(cells[i + first], row, i + first + 1);
      any_positive = any_positive || values[i] > 0.0;
    }
    if (!any_positive)
      throw ParseError(row, first + 1, "all-zero return row (market must pay something)");
    history.append(ReturnVector(std::move(values)));
    any_row = true;
  }

  if (!any_row) throw ParseError(row + 1, 1, "no data rows");
  return history;
}

// CSV form accepted back by parse_history (no `t` column). 17 significant
// digits so the round trip is value-exact.
inline std::string serialize_csv(const MarketHistory& h) {
  std::string out;
  for (std::size_t i = 0; i < h.assets().size(); ++i) {
    if (i) out += ',';
    out += h.assets()[i];
  }
  out += '\n';
  char buf[32];
  for (const ReturnVector& half : h.halves()) {
    for (std::size_t i = 0; i < half.size(); ++i) {
      if (i) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", half[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

// Rescales onto the unit simplex: v / sum(v). Direction-preserving and
// idempotent; gross-return scale does not matter to any ratio quantity.
inline ReturnVector normalize_half(const ReturnVector& v) {
  double sum = 0.0;
  for (double x : v.values()) sum += x;
  std::vector<double> out(v.values());
  for (double& x : out) x /= sum;
  return ReturnVector(std::move(out));
}

// Completes a trailing partial period with all-ones vectors (a half-period
// in which every asset holds its value). No-op when the history is already
// complete.
inline MarketHistory pad_incomplete(MarketHistory h) {
  std::size_t r = h.remainder();
  if (r == 0) return h;
  ReturnVector ones(std::vector<double>(h.num_assets(), 1.0));
  for (std::size_t i = r; i < h.order(); ++i) h.append(ones);
  return h;
}

}  // namespace ubp

#endif  // UBP_MARKET_DATA_HPP
