#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tabver/decimal.hpp"
#include "tabver/errors.hpp"
#include "tabver/text.hpp"

namespace tabver {

inline constexpr char kDefaultDelimiter = '#';

/// One table cell. `raw` is kept byte-exact; `parsed` is a Number iff the
/// trimmed raw text passes the numeric lexer.
struct CellValue {
  std::string raw;
  std::variant<std::string, Decimal> parsed;

  static CellValue from_raw(std::string raw) {
    CellValue c;
    if (auto d = Decimal::parse(text::trim(raw)))
      c.parsed = *d;
    else
      c.parsed = std::string(raw);
    c.raw = std::move(raw);
    return c;
  }

  bool is_number() const { return std::holds_alternative<Decimal>(parsed); }
  const Decimal* number() const { return std::get_if<Decimal>(&parsed); }
  std::string normalized() const { return text::normalize(raw); }

  friend bool operator==(const CellValue&, const CellValue&) = default;
};

/// Immutable rectangular grid. Construct through load_table or Table::make.
class Table {
 public:
  static Table make(std::string id, std::string caption, std::vector<std::string> header,
                    std::vector<std::vector<std::string>> rows) {
    if (header.empty() || rows.empty()) throw EmptyTableError();
    for (std::size_t c = 0; c < header.size(); ++c)
      if (text::normalize(header[c]).empty()) throw InvalidHeaderError(c);
    Table t;
    t.id_ = std::move(id);
    t.caption_ = std::move(caption);
    t.header_ = std::move(header);
    t.rows_.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      // line numbers are 1-based and the header is line 1
      if (rows[r].size() != t.header_.size()) throw RaggedRowError(r + 2, rows[r].size(), t.header_.size());
      std::vector<CellValue> row;
      row.reserve(rows[r].size());
      for (auto& raw : rows[r]) row.push_back(CellValue::from_raw(std::move(raw)));
      t.rows_.push_back(std::move(row));
    }
    for (const auto& h : t.header_) t.normalized_header_.push_back(text::normalize(h));
    return t;
  }

  const std::string& id() const { return id_; }
  const std::string& caption() const { return caption_; }
  const std::vector<std::string>& header() const { return header_; }
  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_cols() const { return header_.size(); }
  const CellValue& cell(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }
  const std::vector<CellValue>& row(std::size_t r) const { return rows_.at(r); }

  /// Case-insensitive, whitespace-normalized lookup.
  std::optional<std::size_t> column_index(std::string_view name) const {
    std::string key = text::normalize(name);
    std::optional<std::size_t> found;
    for (std::size_t c = 0; c < normalized_header_.size(); ++c) {
      if (normalized_header_[c] != key) continue;
      if (found) throw AmbiguousColumnError(std::string(name));
      found = c;
    }
    return found;
  }

  Table with_caption(std::string caption) const {
    Table t = *this;
    t.caption_ = std::move(caption);
    return t;
  }

 private:
  Table() = default;

  std::string id_;
  std::string caption_;
  std::vector<std::string> header_;
  std::vector<std::string> normalized_header_;
  std::vector<std::vector<CellValue>> rows_;
};

/// Parse delimiter-separated UTF-8 text whose first line is the header.
/// Blank trailing lines and a trailing '\r' on each line are ignored.
inline Table load_table(std::string_view bytes, char delimiter = kDefaultDelimiter, std::string id = {}) {
  if (auto bad = text::utf8_error(bytes)) throw DecodeError(*bad);
  std::vector<std::string_view> lines = text::split(bytes, '\n');
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.size() < 2) throw EmptyTableError();

  std::vector<std::string> header;
  for (auto f : text::split(lines[0], delimiter)) header.emplace_back(f);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> row;
    for (auto f : text::split(lines[i], delimiter)) row.emplace_back(f);
    if (row.size() != header.size()) throw RaggedRowError(i + 1, row.size(), header.size());
    rows.push_back(std::move(row));
  }
  return Table::make(std::move(id), {}, std::move(header), std::move(rows));
}

/// Reads a file; the table id is the file stem.
inline Table load_table_file(const std::filesystem::path& path, char delimiter = kDefaultDelimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open table file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_table(ss.str(), delimiter, path.stem().string());
}

inline std::string serialize_table(const Table& t, char delimiter = kDefaultDelimiter) {
  std::string out;
  for (std::size_t c = 0; c < t.num_cols(); ++c) {
    if (c) out.push_back(delimiter);
    out += t.header()[c];
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    for (std::size_t c = 0; c < t.num_cols(); ++c) {
      if (c) out.push_back(delimiter);
      out += t.cell(r, c).raw;
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace tabver
