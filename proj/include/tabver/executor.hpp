#pragma once

#include <compare>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tabver/catalog.hpp"
#include "tabver/decimal.hpp"
#include "tabver/errors.hpp"
#include "tabver/program.hpp"
#include "tabver/table.hpp"

namespace tabver {

/// Ordered set of row indices; strictly increasing, each in [0, R).
struct View {
  std::vector<std::size_t> rows;
  friend bool operator==(const View&, const View&) = default;
};

struct RowRef {
  std::size_t index = 0;
  friend bool operator==(const RowRef&, const RowRef&) = default;
};

using Value = std::variant<bool, Decimal, CellValue, View, RowRef>;

inline Sort sort_of(const Value& v) {
  switch (v.index()) {
    case 0: return Sort::Bool;
    case 1: return Sort::Num;
    case 2: return Sort::Obj;
    case 3: return Sort::View;
    default: return Sort::Row;
  }
}

/// Render a value in the program text grammar.
inline std::string render_value(const Value& v) {
  struct Visitor {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const Decimal& d) const { return d.to_string(); }
    std::string operator()(const CellValue& c) const { return detail::escape_entity(c.raw, false); }
    std::string operator()(const View& w) const {
      std::string s = "view {";
      for (std::size_t i = 0; i < w.rows.size(); ++i) s += (i ? " ; " : " ") + std::to_string(w.rows[i]);
      return s + " }";
    }
    std::string operator()(const RowRef& r) const { return "row { " + std::to_string(r.index) + " }"; }
  };
  return std::visit(Visitor{}, v);
}

/// Canonical identity of a value for memoization: equal keys mean the
/// executor cannot tell the values apart.
inline std::string value_key(const Value& v) {
  switch (v.index()) {
    case 2: {
      const auto& c = std::get<CellValue>(v);
      if (auto d = c.number()) return "O#" + d->to_string();
      return "O\"" + c.normalized();
    }
    default: return std::string(to_string(sort_of(v))) + ":" + render_value(v);
  }
}

struct ColumnId {
  std::size_t index = 0;
};

/// An evaluated argument: a column for Col slots, a value otherwise.
using Arg = std::variant<Value, ColumnId>;

namespace detail {

/// A scalar seen through the comparison rules: numeric when it parses as a
/// number, normalized text otherwise.
struct Scalar {
  std::optional<Decimal> num;
  std::string norm;
};

inline Scalar to_scalar(const Value& v) {
  if (auto d = std::get_if<Decimal>(&v)) return {*d, d->to_string()};
  const auto& c = std::get<CellValue>(v);
  Scalar s;
  if (auto d = c.number()) s.num = *d;
  s.norm = c.normalized();
  return s;
}

inline Scalar to_scalar(const CellValue& c) {
  Scalar s;
  if (auto d = c.number()) s.num = *d;
  s.norm = c.normalized();
  return s;
}

inline bool scalar_eq(const Scalar& a, const Scalar& b) {
  if (a.num && b.num) return *a.num == *b.num;
  return a.norm == b.norm;
}

inline std::strong_ordering scalar_cmp(const Scalar& a, const Scalar& b) {
  if (a.num && b.num) return *a.num <=> *b.num;
  return a.norm <=> b.norm;
}

inline Decimal as_num(const Value& v) {
  if (auto d = std::get_if<Decimal>(&v)) return *d;
  if (auto c = std::get_if<CellValue>(&v)) {
    if (auto d = c->number()) return *d;
    throw ExecError(ExecErrorKind::Sort, "'" + c->raw + "' is not a number");
  }
  throw ExecError(ExecErrorKind::Sort, std::string("expected Num, got ") + to_string(sort_of(v)));
}

inline const View& as_view(const Value& v) {
  if (auto w = std::get_if<View>(&v)) return *w;
  throw ExecError(ExecErrorKind::Sort, std::string("expected View, got ") + to_string(sort_of(v)));
}

inline bool as_bool(const Value& v) {
  if (auto b = std::get_if<bool>(&v)) return *b;
  throw ExecError(ExecErrorKind::Sort, std::string("expected Bool, got ") + to_string(sort_of(v)));
}

inline const Value& as_obj(const Value& v) {
  if (std::holds_alternative<Decimal>(v) || std::holds_alternative<CellValue>(v)) return v;
  throw ExecError(ExecErrorKind::Sort, std::string("expected Obj, got ") + to_string(sort_of(v)));
}

inline std::size_t as_col(const Arg& a) {
  if (auto c = std::get_if<ColumnId>(&a)) return c->index;
  throw ExecError(ExecErrorKind::Sort, "expected a column");
}

inline const Value& as_value(const Arg& a) {
  if (auto v = std::get_if<Value>(&a)) return *v;
  throw ExecError(ExecErrorKind::Sort, "a column is not a value");
}

/// Numeric cells of `col` over `w`, in row order.
inline std::vector<std::pair<std::size_t, Decimal>> numeric_cells(const Table& t, const View& w, std::size_t col) {
  std::vector<std::pair<std::size_t, Decimal>> out;
  for (auto r : w.rows)
    if (auto d = t.cell(r, col).number()) out.emplace_back(r, *d);
  return out;
}

}  // namespace detail

/// Apply one catalog function to already-evaluated arguments.
inline Value apply_function(const FunctionSpec& f, const std::vector<Arg>& args, const Table& t) {
  using namespace detail;
  const std::string_view n = f.name;
  if (args.size() != f.arity()) throw ArityError(std::string(n), args.size(), f.arity());

  if (n == "all_rows") {
    View w;
    for (std::size_t r = 0; r < t.num_rows(); ++r) w.rows.push_back(r);
    return w;
  }

  // (View, Col, Obj) family
  if (f.arg_sorts.size() == 3) {
    const View& w = as_view(as_value(args[0]));
    std::size_t col = as_col(args[1]);
    Scalar key = to_scalar(as_obj(as_value(args[2])));
    auto test = [&](std::size_t r) -> bool {
      Scalar cell = to_scalar(t.cell(r, col));
      if (n == "filter_eq" || n == "within" || n == "not_within" || n == "all_eq" || n == "not_all_eq")
        return scalar_eq(cell, key);
      if (n == "filter_not_eq") return !scalar_eq(cell, key);
      auto c = scalar_cmp(cell, key);
      if (n == "filter_greater" || n == "all_greater" || n == "not_all_greater") return c > 0;
      if (n == "filter_less" || n == "all_less" || n == "not_all_less") return c < 0;
      if (n == "filter_greater_eq") return c >= 0;
      if (n == "filter_less_eq") return c <= 0;
      throw ExecError(ExecErrorKind::Sort, "unhandled function " + std::string(n));
    };
    if (n.starts_with("filter_")) {
      View out;
      for (auto r : w.rows)
        if (test(r)) out.rows.push_back(r);
      return out;
    }
    if (n == "within" || n == "not_within") {
      bool any = false;
      for (auto r : w.rows) any = any || test(r);
      return n == "within" ? any : !any;
    }
    // all_* / not_all_*: vacuous truth over an empty view is rejected
    if (w.rows.empty()) throw ExecError(ExecErrorKind::EmptyView, std::string(n) + " over an empty view");
    bool all = true;
    for (auto r : w.rows) all = all && test(r);
    return n.starts_with("not_") ? !all : all;
  }

  if (n == "count") return Decimal(static_cast<long long>(as_view(as_value(args[0])).rows.size()));
  if (n == "only") return as_view(as_value(args[0])).rows.size() == 1;
  if (n == "first" || n == "second") {
    const View& w = as_view(as_value(args[0]));
    std::size_t k = n == "first" ? 0 : 1;
    if (w.rows.empty()) throw ExecError(ExecErrorKind::EmptyView, std::string(n) + " of an empty view");
    if (w.rows.size() <= k) throw ExecError(ExecErrorKind::Cardinality, "second of a one-row view");
    return View{{w.rows[k]}};
  }
  if (n == "hop") {
    const View& w = as_view(as_value(args[0]));
    std::size_t col = as_col(args[1]);
    if (w.rows.empty()) throw ExecError(ExecErrorKind::EmptyView, "hop over an empty view");
    if (w.rows.size() > 1) throw ExecError(ExecErrorKind::Cardinality, "hop needs exactly one row");
    return t.cell(w.rows[0], col);
  }
  if (n == "min" || n == "max" || n == "sum" || n == "avg" || n == "argmax" || n == "argmin") {
    const View& w = as_view(as_value(args[0]));
    auto cells = numeric_cells(t, w, as_col(args[1]));
    if (n == "sum") {
      Decimal s;
      for (const auto& [r, d] : cells) s += d;
      return s;
    }
    if (cells.empty()) throw ExecError(ExecErrorKind::EmptyView, std::string(n) + " over no numeric cells");
    if (n == "avg") {
      Decimal s;
      for (const auto& [r, d] : cells) s += d;
      return s.divided_by(static_cast<long long>(cells.size()));
    }
    bool want_max = n == "max" || n == "argmax";
    auto best = cells.front();
    for (const auto& c : cells)
      if (want_max ? c.second > best.second : c.second < best.second) best = c;  // strict: lowest row wins ties
    if (n.starts_with("arg")) return View{{best.first}};
    return best.second;
  }
  if (n == "eq" || n == "not_eq") {
    bool e = scalar_eq(to_scalar(as_obj(as_value(args[0]))), to_scalar(as_obj(as_value(args[1]))));
    return n == "eq" ? e : !e;
  }
  if (n == "less" || n == "greater" || n == "round_eq") {
    Decimal a = as_num(as_value(args[0]));
    Decimal b = as_num(as_value(args[1]));
    if (n == "less") return a < b;
    if (n == "greater") return a > b;
    Decimal bound = b.abs() > Decimal(1) ? b.abs() : Decimal(1);
    return (a - b).abs() * 100 <= bound;
  }
  if (n == "and") return as_bool(as_value(args[0])) && as_bool(as_value(args[1]));
  throw ExecError(ExecErrorKind::Sort, "unhandled function " + std::string(n));
}

namespace detail {

inline ColumnId resolve_column(const ProgramNode& n, const Table& t) {
  if (n.is_function || n.is_all_rows())
    throw ExecError(ExecErrorKind::Sort, "column slot holds '" + render(n) + "'");
  std::optional<std::size_t> idx;
  try {
    idx = t.column_index(n.name);
  } catch (const AmbiguousColumnError& e) {
    throw ExecError(ExecErrorKind::AmbiguousColumn, e.what());
  }
  if (!idx) throw ExecError(ExecErrorKind::UnresolvedColumn, "no column '" + n.name + "'");
  return ColumnId{*idx};
}

inline Value eval(const ProgramNode& n, const Table& t) {
  if (!n.is_function) {
    if (n.is_all_rows()) return apply_function(*find_function(kAllRows), {}, t);
    if (n.kind == EntityKind::ColumnRef)
      throw ExecError(ExecErrorKind::Sort, "column '" + n.name + "' used as a value");
    return CellValue::from_raw(n.name);
  }
  const FunctionSpec& f = *find_function(n.name);
  std::vector<Arg> args;
  args.reserve(n.children.size());
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (f.arg_sorts[i] == Sort::Col)
      args.emplace_back(resolve_column(n.children[i], t));
    else
      args.emplace_back(eval(n.children[i], t));
  }
  return apply_function(f, args, t);
}

}  // namespace detail

/// Bottom-up evaluation against a table. Throws ExecError.
inline Value execute(const Program& p, const Table& t) { return detail::eval(p.root, t); }

struct BoolResult {
  bool value = false;
  bool discarded = false;
  std::optional<ExecErrorKind> error;
};

/// Execute a Bool-sorted program; errors become a discard flag.
inline BoolResult execute_bool(const Program& p, const Table& t) {
  try {
    Value v = execute(p, t);
    if (auto b = std::get_if<bool>(&v)) return {*b, false, std::nullopt};
    return {false, true, ExecErrorKind::Sort};
  } catch (const ExecError& e) {
    return {false, true, e.kind()};
  }
}

/// Static sort check against the catalog; true when every argument slot
/// can accept what its child produces.
inline bool well_sorted(const ProgramNode& n) {
  if (!n.is_function) return true;
  const FunctionSpec* f = find_function(n.name);
  if (!f || f->arity() != n.children.size()) return false;
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const ProgramNode& c = n.children[i];
    Sort want = f->arg_sorts[i];
    if (want == Sort::Col) {
      if (c.is_function || c.kind != EntityKind::ColumnRef) return false;
      continue;
    }
    if (!c.is_function && c.kind == EntityKind::ColumnRef) return false;
    if (!sort_accepts(want, c.result_sort())) return false;
    if (!well_sorted(c)) return false;
  }
  return true;
}

}  // namespace tabver
