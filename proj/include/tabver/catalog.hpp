#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tabver {

enum class Sort { View, Row, Num, Obj, Bool, Col };

inline const char* to_string(Sort s) {
  switch (s) {
    case Sort::View: return "View";
    case Sort::Row: return "Row";
    case Sort::Num: return "Num";
    case Sort::Obj: return "Obj";
    case Sort::Bool: return "Bool";
    case Sort::Col: return "Col";
  }
  return "?";
}

/// Can a value of sort `have` fill a slot declared `want`?  Num is an Obj;
/// an Obj is accepted in a Num slot and checked when executed.
inline bool sort_accepts(Sort want, Sort have) {
  if (want == have) return true;
  return (want == Sort::Obj && have == Sort::Num) || (want == Sort::Num && have == Sort::Obj);
}

enum class Polarity { Positive, Negative };

struct FunctionSpec {
  std::string_view name;
  std::vector<Sort> arg_sorts;
  Sort return_sort;
  Polarity polarity = Polarity::Positive;
  /// Arguments may be swapped without changing the result.
  bool symmetric = false;

  std::size_t arity() const { return arg_sorts.size(); }
};

namespace detail {

inline std::vector<FunctionSpec> build_catalog() {
  using S = Sort;
  const auto neg = Polarity::Negative;
  const auto pos = Polarity::Positive;
  std::vector<FunctionSpec> c;
  c.push_back({"all_rows", {}, S::View});
  for (auto n : {"filter_eq", "filter_not_eq", "filter_greater", "filter_less", "filter_greater_eq",
                 "filter_less_eq"})
    c.push_back({n, {S::View, S::Col, S::Obj}, S::View, std::string_view(n) == "filter_not_eq" ? neg : pos});
  c.push_back({"count", {S::View}, S::Num});
  c.push_back({"only", {S::View}, S::Bool});
  c.push_back({"first", {S::View}, S::View});
  c.push_back({"second", {S::View}, S::View});
  c.push_back({"hop", {S::View, S::Col}, S::Obj});
  for (auto n : {"min", "max", "sum", "avg"}) c.push_back({n, {S::View, S::Col}, S::Num});
  for (auto n : {"argmax", "argmin"}) c.push_back({n, {S::View, S::Col}, S::View});
  c.push_back({"eq", {S::Obj, S::Obj}, S::Bool, pos, true});
  c.push_back({"not_eq", {S::Obj, S::Obj}, S::Bool, neg, true});
  c.push_back({"less", {S::Num, S::Num}, S::Bool});
  c.push_back({"greater", {S::Num, S::Num}, S::Bool});
  c.push_back({"round_eq", {S::Num, S::Num}, S::Bool});
  c.push_back({"within", {S::View, S::Col, S::Obj}, S::Bool});
  c.push_back({"not_within", {S::View, S::Col, S::Obj}, S::Bool, neg});
  c.push_back({"all_eq", {S::View, S::Col, S::Obj}, S::Bool});
  c.push_back({"not_all_eq", {S::View, S::Col, S::Obj}, S::Bool, neg});
  c.push_back({"all_greater", {S::View, S::Col, S::Obj}, S::Bool});
  c.push_back({"not_all_greater", {S::View, S::Col, S::Obj}, S::Bool, neg});
  c.push_back({"all_less", {S::View, S::Col, S::Obj}, S::Bool});
  c.push_back({"not_all_less", {S::View, S::Col, S::Obj}, S::Bool, neg});
  c.push_back({"and", {S::Bool, S::Bool}, S::Bool, pos, true});
  return c;
}

}  // namespace detail

/// The fixed function catalog, in a stable order with unique names.
inline std::span<const FunctionSpec> catalog() {
  static const std::vector<FunctionSpec> c = detail::build_catalog();
  return c;
}

inline const FunctionSpec* find_function(std::string_view name) {
  auto c = catalog();
  auto it = std::find_if(c.begin(), c.end(), [&](const FunctionSpec& f) { return f.name == name; });
  return it == c.end() ? nullptr : &*it;
}

inline const std::vector<std::string>& negative_functions() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : catalog())
      if (f.polarity == Polarity::Negative) out.emplace_back(f.name);
    return out;
  }();
  return names;
}

inline constexpr std::string_view kAllRows = "all_rows";

}  // namespace tabver
