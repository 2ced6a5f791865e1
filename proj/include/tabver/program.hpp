#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tabver/catalog.hpp"
#include "tabver/errors.hpp"
#include "tabver/text.hpp"

namespace tabver {

enum class EntityKind { ColumnRef, CellRef, Literal, AllRows };

/// A node of a program tree: either a catalog function with its arguments
/// or an entity leaf.
struct ProgramNode {
  bool is_function = false;
  /// Function name, or entity text.
  std::string name;
  EntityKind kind = EntityKind::Literal;
  std::vector<ProgramNode> children;

  static ProgramNode function(std::string_view fname, std::vector<ProgramNode> args) {
    const FunctionSpec* spec = find_function(fname);
    if (!spec || fname == kAllRows) throw UnknownFunctionError(std::string(fname));
    if (args.size() != spec->arity()) throw ArityError(std::string(fname), args.size(), spec->arity());
    ProgramNode n;
    n.is_function = true;
    n.name = std::string(fname);
    n.children = std::move(args);
    return n;
  }

  static ProgramNode entity(EntityKind kind, std::string entity_text) {
    ProgramNode n;
    n.kind = kind;
    n.name = kind == EntityKind::AllRows ? std::string(kAllRows) : std::move(entity_text);
    return n;
  }

  static ProgramNode all_rows() { return entity(EntityKind::AllRows, {}); }
  static ProgramNode column(std::string name) { return entity(EntityKind::ColumnRef, std::move(name)); }
  static ProgramNode literal(std::string value) { return entity(EntityKind::Literal, std::move(value)); }

  bool is_all_rows() const { return !is_function && kind == EntityKind::AllRows; }

  /// Sort this node produces: the catalog return sort, or the entity's own sort.
  Sort result_sort() const {
    if (is_function) return find_function(name)->return_sort;
    switch (kind) {
      case EntityKind::AllRows: return Sort::View;
      case EntityKind::ColumnRef: return Sort::Col;
      default: return Sort::Obj;
    }
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.size();
    return n;
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& c : children) d = std::max(d, c.depth());
    return is_function ? d + 1 : 0;
  }

  /// Structural equality; Literal and CellRef leaves are the same leaf in
  /// text form, so they compare equal.
  friend bool operator==(const ProgramNode& a, const ProgramNode& b) {
    auto cls = [](EntityKind k) { return k == EntityKind::CellRef ? EntityKind::Literal : k; };
    if (a.is_function != b.is_function || a.name != b.name) return false;
    if (!a.is_function && cls(a.kind) != cls(b.kind)) return false;
    return a.children == b.children;
  }
};

struct Program {
  ProgramNode root;

  std::size_t size() const { return root.size(); }
  std::size_t depth() const { return root.depth(); }
  friend bool operator==(const Program&, const Program&) = default;
};

namespace detail {

inline bool is_special(char c) { return c == '{' || c == '}' || c == ';' || c == '\\'; }

inline std::string escape_entity(std::string_view s, bool is_all_rows) {
  if (is_all_rows) return std::string(kAllRows);
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    bool edge = i == 0 || i + 1 == s.size();
    if (c == '\n') {
      out += "\\n";
    } else if (is_special(c) || (edge && text::is_space(c))) {
      out.push_back('\\');
      out.push_back(c);
    } else {
      out.push_back(c);
    }
  }
  // a literal whose text happens to be "all_rows" must not parse back as the view
  if (s == kAllRows) out.insert(out.begin(), '\\');
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Program parse() {
    ProgramNode root = parse_node(std::nullopt);
    skip_space();
    if (pos_ != src_.size()) throw SyntaxError(pos_, "trailing input");
    return Program{std::move(root)};
  }

 private:
  struct Token {
    std::string text;
    bool any_escape = false;
    std::size_t start = 0;
  };

  void skip_space() {
    while (pos_ < src_.size() && text::is_space(src_[pos_])) ++pos_;
  }

  Token read_token() {
    skip_space();
    Token t;
    t.start = pos_;
    std::vector<bool> escaped;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '{' || c == '}' || c == ';') break;
      if (c == '\\') {
        if (pos_ + 1 >= src_.size()) throw SyntaxError(pos_, "dangling escape");
        char e = src_[pos_ + 1];
        t.text.push_back(e == 'n' ? '\n' : e);
        escaped.push_back(true);
        t.any_escape = true;
        pos_ += 2;
        continue;
      }
      t.text.push_back(c);
      escaped.push_back(false);
      ++pos_;
    }
    // only unescaped whitespace at the edges is insignificant
    std::size_t e = t.text.size();
    while (e > 0 && !escaped[e - 1] && text::is_space(t.text[e - 1])) --e;
    t.text.resize(e);
    return t;
  }

  ProgramNode parse_node(std::optional<Sort> slot) {
    Token tok = read_token();
    if (tok.text.empty()) throw SyntaxError(tok.start, "expected a function or entity");
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == '{') {
      const FunctionSpec* spec = find_function(tok.text);
      if (!spec || tok.any_escape || tok.text == kAllRows) throw UnknownFunctionError(tok.text);
      ++pos_;
      std::vector<ProgramNode> args;
      while (true) {
        std::optional<Sort> arg_slot;
        if (args.size() < spec->arity()) arg_slot = spec->arg_sorts[args.size()];
        args.push_back(parse_node(arg_slot));
        skip_space();
        if (pos_ >= src_.size()) throw SyntaxError(pos_, "unterminated argument list");
        if (src_[pos_] == ';') {
          ++pos_;
          continue;
        }
        if (src_[pos_] == '}') {
          ++pos_;
          break;
        }
        throw SyntaxError(pos_, "expected ';' or '}'");
      }
      if (args.size() != spec->arity()) throw ArityError(tok.text, args.size(), spec->arity());
      return ProgramNode::function(tok.text, std::move(args));
    }
    if (!tok.any_escape && tok.text == kAllRows) return ProgramNode::all_rows();
    if (slot == Sort::Col) return ProgramNode::column(std::move(tok.text));
    return ProgramNode::literal(std::move(tok.text));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline void render_into(const ProgramNode& n, std::string& out) {
  if (!n.is_function) {
    out += escape_entity(n.name, n.is_all_rows());
    return;
  }
  out += n.name;
  out += " { ";
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (i) out += " ; ";
    render_into(n.children[i], out);
  }
  out += " }";
}

}  // namespace detail

/// Parse `name { arg ; arg }` text. Bare tokens are entities; `all_rows` is
/// the whole-table view; entity kinds follow the argument slot's sort.
inline Program parse_program(std::string_view src) { return detail::Parser(src).parse(); }

inline std::string render(const ProgramNode& n) {
  std::string out;
  detail::render_into(n, out);
  return out;
}

inline std::string render_program(const Program& p) { return render(p.root); }

/// Preorder visit of every node.
inline void visit(const ProgramNode& n, const std::function<void(const ProgramNode&)>& f) {
  f(n);
  for (const auto& c : n.children) visit(c, f);
}

/// For each occurrence of function `fname` (preorder), its children as
/// standalone programs.
inline std::vector<Program> subtrees_of(const Program& p, std::string_view fname) {
  std::vector<Program> out;
  visit(p.root, [&](const ProgramNode& n) {
    if (n.is_function && n.name == fname)
      for (const auto& c : n.children) out.push_back(Program{c});
  });
  return out;
}

inline bool contains_function(const ProgramNode& n, const std::set<std::string, std::less<>>& names) {
  if (n.is_function && names.count(n.name)) return true;
  return std::any_of(n.children.begin(), n.children.end(),
                     [&](const ProgramNode& c) { return contains_function(c, names); });
}

inline bool contains_function(const Program& p, const std::set<std::string, std::less<>>& names) {
  return contains_function(p.root, names);
}

inline const std::set<std::string, std::less<>>& negative_function_set() {
  static const std::set<std::string, std::less<>> s(negative_functions().begin(), negative_functions().end());
  return s;
}

}  // namespace tabver
