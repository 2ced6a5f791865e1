#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tabver/decimal.hpp"
#include "tabver/table.hpp"
#include "tabver/text.hpp"

namespace tabver {

struct ColumnTarget {
  std::size_t col = 0;
  friend bool operator==(const ColumnTarget&, const ColumnTarget&) = default;
};
struct CellTarget {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const CellTarget&, const CellTarget&) = default;
};
struct NumberTarget {
  Decimal value;
  friend bool operator==(const NumberTarget&, const NumberTarget&) = default;
};

/// A statement span linked to the table (or to a bare number).
struct LinkedEntity {
  std::string surface;
  std::variant<ColumnTarget, CellTarget, NumberTarget> target;
  std::size_t begin = 0;  // byte span in the statement
  std::size_t end = 0;
};

namespace detail {

inline std::string word_key(std::string_view s) {
  std::string key;
  for (const auto& w : text::words(s)) {
    if (!key.empty()) key.push_back(' ');
    key += w.text;
  }
  return key;
}

inline std::optional<Decimal> number_word(std::string_view w) {
  static const std::map<std::string_view, long long> words = {
      {"zero", 0}, {"one", 1}, {"two", 2},   {"three", 3}, {"four", 4}, {"five", 5},
      {"six", 6},  {"seven", 7}, {"eight", 8}, {"nine", 9},  {"ten", 10}, {"eleven", 11}, {"twelve", 12}};
  auto it = words.find(w);
  if (it == words.end()) return std::nullopt;
  return Decimal(it->second);
}

}  // namespace detail

/// Greedy longest-match entity linking: column names, then cell values, then
/// standalone numbers. Overlaps are resolved longest-first, then leftmost.
/// Output is ordered by position in the statement.
inline std::vector<LinkedEntity> link_entities(std::string_view statement, const Table& t,
                                               std::size_t max_span_words = 12) {
  auto words = text::words(statement);
  std::map<std::string, std::size_t> columns;
  for (std::size_t c = 0; c < t.num_cols(); ++c) columns.emplace(detail::word_key(t.header()[c]), c);
  std::map<std::string, CellTarget> cells;
  std::map<Decimal, CellTarget> numeric_cells;
  for (std::size_t r = 0; r < t.num_rows(); ++r)
    for (std::size_t c = 0; c < t.num_cols(); ++c) {
      const CellValue& v = t.cell(r, c);
      std::string key = detail::word_key(v.raw);
      if (!key.empty()) cells.emplace(key, CellTarget{r, c});
      if (auto d = v.number()) numeric_cells.emplace(*d, CellTarget{r, c});
    }

  struct Candidate {
    std::size_t first, len;
    std::variant<ColumnTarget, CellTarget, NumberTarget> target;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string key;
    for (std::size_t len = 1; len <= max_span_words && i + len <= words.size(); ++len) {
      if (len > 1) key.push_back(' ');
      key += words[i + len - 1].text;
      if (auto it = columns.find(key); it != columns.end()) {
        cands.push_back({i, len, ColumnTarget{it->second}});
      } else if (auto ct = cells.find(key); ct != cells.end()) {
        cands.push_back({i, len, ct->second});
      } else if (len == 1) {
        std::optional<Decimal> num = Decimal::parse(key);
        if (!num) num = detail::number_word(key);
        if (num) {
          if (auto nc = numeric_cells.find(*num); nc != numeric_cells.end())
            cands.push_back({i, len, nc->second});
          else
            cands.push_back({i, len, NumberTarget{*num}});
        }
      }
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.len != b.len ? a.len > b.len : a.first < b.first;
  });
  std::vector<bool> used(words.size(), false);
  std::vector<LinkedEntity> out;
  for (const auto& c : cands) {
    bool free = true;
    for (std::size_t k = c.first; k < c.first + c.len; ++k) free = free && !used[k];
    if (!free) continue;
    for (std::size_t k = c.first; k < c.first + c.len; ++k) used[k] = true;
    LinkedEntity e;
    e.begin = words[c.first].begin;
    e.end = words[c.first + c.len - 1].end;
    e.surface = std::string(statement.substr(e.begin, e.end - e.begin));
    e.target = c.target;
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const LinkedEntity& a, const LinkedEntity& b) { return a.begin < b.begin; });
  return out;
}

}  // namespace tabver
