#pragma once

#include <chrono>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tabver/catalog.hpp"
#include "tabver/executor.hpp"
#include "tabver/lexicon.hpp"
#include "tabver/linker.hpp"
#include "tabver/program.hpp"
#include "tabver/table.hpp"

namespace tabver {

struct SearchBudget {
  int max_depth = 4;
  long max_programs = 5000;
  long max_intermediates = 20000;
  std::chrono::milliseconds time_limit{10000};

  void validate() const {
    // max_programs == 0 is accepted and yields an empty, truncated set
    if (max_depth < 1 || max_programs < 0 || max_intermediates < 1 || time_limit.count() <= 0)
      throw InvalidBudgetError("search budget fields must be positive");
  }
};

struct ProgramItem {
  Program program;
  bool label = false;
};

/// The synthesized program set: Bool-rooted programs with their execution
/// labels, deduplicated by canonical rendering.
struct ProgramSet {
  std::vector<ProgramItem> items;
  std::string statement;
  std::string table_id;
  bool truncated = false;
};

namespace detail {

class Enumerator {
 public:
  Enumerator(const Table& t, const SearchBudget& b, const std::set<std::string>& enabled, ProgramSet& out)
      : table_(t), budget_(b), start_(std::chrono::steady_clock::now()), out_(out) {
    for (const auto& f : catalog())
      if (f.name != kAllRows && enabled.count(std::string(f.name))) functions_.push_back(&f);
  }

  void seed(const std::vector<LinkedEntity>& links) {
    add_value(ProgramNode::all_rows(), apply_function(*find_function(kAllRows), {}, table_), 0);
    std::set<std::size_t> cols;
    for (const auto& e : links) {
      if (auto c = std::get_if<ColumnTarget>(&e.target)) cols.insert(c->col);
      if (auto c = std::get_if<CellTarget>(&e.target)) {
        cols.insert(c->col);
        std::string raw(text::trim(table_.cell(c->row, c->col).raw));
        add_value(ProgramNode::entity(EntityKind::CellRef, raw), CellValue::from_raw(raw), 0);
      }
      if (auto n = std::get_if<NumberTarget>(&e.target)) {
        std::string s = n->value.to_string();
        add_value(ProgramNode::literal(s), CellValue::from_raw(s), 0);
      }
    }
    for (auto c : cols) columns_.push_back({ProgramNode::column(table_.header()[c]), ColumnId{c}});
    commit();
  }

  void run() {
    if (budget_.max_programs == 0) {
      out_.truncated = true;
      return;
    }
    for (int layer = 1; layer <= budget_.max_depth && !stop_; ++layer) {
      for (const FunctionSpec* f : functions_) {
        if (stop_) break;
        std::vector<Arg> args;
        std::vector<const Cand*> picked;
        expand(*f, layer, 0, false, args, picked);
      }
      commit();
    }
    if (stop_) out_.truncated = true;
  }

 private:
  struct Cand {
    ProgramNode node;
    Value value;
    std::string text;
    int layer = 0;
  };

  const Table& table_;
  SearchBudget budget_;
  std::chrono::steady_clock::time_point start_;
  ProgramSet& out_;
  std::vector<const FunctionSpec*> functions_;
  std::vector<Cand> views_, objs_, bools_;
  std::vector<Cand> pending_;  // current layer; joins the pools at commit()
  std::vector<std::pair<ProgramNode, ColumnId>> columns_;
  std::unordered_set<std::string> seen_values_;
  std::unordered_map<std::string, std::size_t> pending_index_;
  std::unordered_set<std::string> emitted_, seed_texts_;
  bool stop_ = false;
  long steps_ = 0;

  std::vector<Cand>& pool(Sort s) {
    switch (s) {
      case Sort::View: return views_;
      case Sort::Bool: return bools_;
      default: return objs_;
    }
  }

  bool out_of_time() {
    if ((++steps_ & 255) != 0) return false;
    return std::chrono::steady_clock::now() - start_ > budget_.time_limit;
  }

  static bool shorter(const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  }

  void commit() {
    for (auto& c : pending_) pool(sort_of(c.value)).push_back(std::move(c));
    pending_.clear();
    pending_index_.clear();
  }

  void add_value(ProgramNode node, Value v, int layer) {
    Sort s = sort_of(v);
    std::string text = render(node);
    if (s == Sort::Bool) {
      if (!emitted_.insert(text).second) return;
      bool label = std::get<bool>(v);
      out_.items.push_back({Program{node}, label});
      pending_.push_back({std::move(node), std::move(v), std::move(text), layer});
      if (static_cast<long>(out_.items.size()) >= budget_.max_programs) stop_ = true;
      return;
    }
    if (layer == 0) {
      // seeds stay out of the memo: hop{...} may legitimately equal a linked cell
      if (!seed_texts_.insert(text).second) return;
      pending_.push_back({std::move(node), std::move(v), std::move(text), layer});
      return;
    }
    std::string key = std::string(to_string(s)) + ":" + value_key(v);
    if (auto it = pending_index_.find(key); it != pending_index_.end()) {
      Cand& existing = pending_[it->second];
      if (shorter(text, existing.text)) {
        existing.node = std::move(node);
        existing.text = std::move(text);
      }
      return;
    }
    if (seen_values_.count(key)) return;
    if (static_cast<long>(seen_values_.size()) >= budget_.max_intermediates) {
      out_.truncated = true;
      return;
    }
    seen_values_.insert(key);
    pending_index_.emplace(key, pending_.size());
    pending_.push_back({std::move(node), std::move(v), std::move(text), layer});
  }

  // Depth-first over argument slots. `fresh` records whether some argument
  // came from the previous layer; programs built only from older values were
  // already produced in an earlier round.
  void expand(const FunctionSpec& f, int layer, std::size_t slot, bool fresh, std::vector<Arg>& args,
              std::vector<const Cand*>& picked) {
    if (stop_) return;
    if (slot == f.arity()) {
      if (fresh) emit(f, layer, args, picked);
      return;
    }
    Sort want = f.arg_sorts[slot];
    if (want == Sort::Col) {
      for (const auto& col : columns_) {
        args.emplace_back(col.second);
        picked.push_back(nullptr);
        expand(f, layer, slot + 1, fresh, args, picked);
        args.pop_back();
        picked.pop_back();
        if (stop_) return;
      }
      return;
    }
    for (const Cand& c : pool(want)) {
      if (f.name == "and" && c.node.is_function && c.node.name == "and") continue;
      if (slot == 1 && picked[0]) {
        if (picked[0]->text == c.text) continue;
        if (f.symmetric && !(picked[0]->text < c.text)) continue;
      }
      args.emplace_back(c.value);
      picked.push_back(&c);
      expand(f, layer, slot + 1, fresh || c.layer == layer - 1, args, picked);
      args.pop_back();
      picked.pop_back();
      if (stop_) return;
    }
  }

  void emit(const FunctionSpec& f, int layer, const std::vector<Arg>& args, const std::vector<const Cand*>& picked) {
    if (out_of_time()) {
      stop_ = true;
      return;
    }
    Value v;
    try {
      v = apply_function(f, args, table_);
    } catch (const ExecError&) {
      return;
    }
    std::vector<ProgramNode> children;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (picked[i]) {
        children.push_back(picked[i]->node);
        continue;
      }
      auto id = std::get<ColumnId>(args[i]).index;
      for (const auto& col : columns_)
        if (col.second.index == id) children.push_back(col.first);
    }
    add_value(ProgramNode::function(f.name, std::move(children)), std::move(v), layer);
  }
};

}  // namespace detail

/// Latent program search: link entities, then enumerate well-sorted programs
/// bottom-up over trigger-enabled functions, executing each immediately and
/// memoizing intermediate values. Deterministic for fixed inputs (unless the
/// time limit truncates the run).
inline ProgramSet synthesize(std::string_view statement, const Table& t, const SearchBudget& budget = {},
                             const TriggerLexicon& lexicon = TriggerLexicon::builtin()) {
  budget.validate();
  ProgramSet out;
  out.statement = std::string(statement);
  out.table_id = t.id();
  detail::Enumerator e(t, budget, lexicon.trigger_functions(statement), out);
  e.seed(link_entities(statement, t));
  e.run();
  return out;
}

}  // namespace tabver
