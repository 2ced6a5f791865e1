#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "tabver/errors.hpp"
#include "tabver/program.hpp"
#include "tabver/synth.hpp"

namespace tabver {

struct RetrievalConfig {
  long negative_threshold = 50;  // "large number of programs"
  std::size_t max_evidence = 8;
};

struct SourceCounts {
  long selected = 0;
  long after_decompose = 0;
  long after_filter = 0;
  friend bool operator==(const SourceCounts&, const SourceCounts&) = default;
};

struct EvidenceSet {
  std::vector<Program> items;
  SourceCounts counts;
  std::string statement;
  std::string table_id;
};

inline std::vector<Program> select_true(const ProgramSet& ps) {
  std::vector<Program> out;
  for (const auto& it : ps.items)
    if (it.label) out.push_back(it.program);
  return out;
}

namespace detail {

inline void split_and(const ProgramNode& n, std::vector<ProgramNode>& out) {
  if (n.is_function && n.name == "and") {
    for (const auto& c : n.children) split_and(c, out);
    return;
  }
  out.push_back(n);
}

inline std::vector<Program> dedupe(std::vector<Program> ps) {
  std::set<std::string> seen;
  std::vector<Program> out;
  for (auto& p : ps)
    if (seen.insert(render_program(p)).second) out.push_back(std::move(p));
  return out;
}

}  // namespace detail

/// Replaces every and-rooted program by its conjuncts, recursively.
/// First-occurrence order is kept; duplicates are dropped.
inline std::vector<Program> decompose_and(const std::vector<Program>& evidence) {
  std::vector<Program> out;
  for (const auto& p : evidence) {
    std::vector<ProgramNode> parts;
    detail::split_and(p.root, parts);
    for (auto& n : parts) out.push_back(Program{std::move(n)});
  }
  return detail::dedupe(std::move(out));
}

/// Above the threshold, programs that use any negative-polarity function go.
inline std::vector<Program> filter_negative(const std::vector<Program>& evidence, long threshold) {
  if (threshold < 0) throw InvalidBudgetError("negative-filter threshold must be >= 0");
  if (static_cast<long>(evidence.size()) <= threshold) return evidence;
  const auto& neg = negative_function_set();
  std::vector<Program> out;
  for (const auto& p : evidence)
    if (!contains_function(p, neg)) out.push_back(p);
  return out;
}

inline EvidenceSet retrieve(const ProgramSet& ps, const RetrievalConfig& cfg = {}) {
  EvidenceSet ev;
  ev.statement = ps.statement;
  ev.table_id = ps.table_id;
  auto selected = select_true(ps);
  ev.counts.selected = static_cast<long>(selected.size());
  auto parts = decompose_and(selected);
  ev.counts.after_decompose = static_cast<long>(parts.size());
  auto kept = detail::dedupe(filter_negative(parts, cfg.negative_threshold));
  ev.counts.after_filter = static_cast<long>(kept.size());

  std::vector<std::pair<std::string, Program>> keyed;
  for (auto& p : kept) keyed.emplace_back(render_program(p), std::move(p));
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    std::size_t sa = a.second.size(), sb = b.second.size();
    return sa != sb ? sa < sb : a.first < b.first;
  });
  if (keyed.size() > cfg.max_evidence) keyed.resize(cfg.max_evidence);
  for (auto& [text, p] : keyed) ev.items.push_back(std::move(p));
  return ev;
}

/// Wraps evidence back into a true-labeled program set.
inline ProgramSet as_program_set(const EvidenceSet& ev) {
  ProgramSet ps;
  ps.statement = ev.statement;
  ps.table_id = ev.table_id;
  for (const auto& p : ev.items) ps.items.push_back({p, true});
  return ps;
}

}  // namespace tabver
