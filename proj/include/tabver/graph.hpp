#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tabver/errors.hpp"
#include "tabver/evidence.hpp"
#include "tabver/program.hpp"
#include "tabver/text.hpp"

namespace tabver {

enum class NodeType { Function, Entity };
enum class EdgeKind { Structural, Coreference };

inline const char* to_string(NodeType t) { return t == NodeType::Function ? "function" : "entity"; }

struct GraphNode {
  std::size_t id = 0;
  std::string text;
  NodeType type = NodeType::Entity;
  std::size_t program_id = 0;
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
  bool removed = false;
};

/// Logic-level graph over an evidence set. Node ids are positions in `nodes`
/// and stay valid after removals; removed nodes keep their slot, flagged.
class LogicGraph {
 public:
  using EdgeKey = std::pair<std::size_t, std::size_t>;  // first < second

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const GraphNode& node(std::size_t id) const {
    if (id >= nodes_.size() || nodes_[id].removed) throw NodeNotFoundError(id);
    return nodes_[id];
  }
  const std::map<EdgeKey, EdgeKind>& edges() const { return edges_; }

  bool has_edge(std::size_t a, std::size_t b) const { return edges_.count(key(a, b)) > 0; }
  std::optional<EdgeKind> edge_kind(std::size_t a, std::size_t b) const {
    auto it = edges_.find(key(a, b));
    if (it == edges_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t num_live() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const GraphNode& n) { return !n.removed; }));
  }
  std::vector<std::size_t> live_ids() const {
    std::vector<std::size_t> out;
    for (const auto& n : nodes_)
      if (!n.removed) out.push_back(n.id);
    return out;
  }
  std::size_t count_edges(EdgeKind k) const {
    return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [k](const auto& e) { return e.second == k; }));
  }

  /// Sorted neighbor lists indexed by node id (empty for removed nodes).
  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(nodes_.size());
    for (const auto& [e, k] : edges_) {
      adj[e.first].push_back(e.second);
      adj[e.second].push_back(e.first);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
  }

  std::vector<std::size_t> neighbors(std::size_t id) const {
    node(id);
    std::vector<std::size_t> out;
    for (const auto& [e, k] : edges_) {
      if (e.first == id) out.push_back(e.second);
      if (e.second == id) out.push_back(e.first);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Tab-separated debug dump, one live node per line:
  /// id, type, escaped text, comma-separated neighbor ids.
  std::string dump() const {
    auto adj = adjacency();
    std::ostringstream out;
    for (const auto& n : nodes_) {
      if (n.removed) continue;
      out << n.id << '\t' << to_string(n.type) << '\t' << escape(n.text) << '\t';
      for (std::size_t i = 0; i < adj[n.id].size(); ++i) out << (i ? "," : "") << adj[n.id][i];
      out << '\n';
    }
    return out.str();
  }

 private:
  friend LogicGraph build_graph(const std::vector<Program>&);
  friend LogicGraph remove_node_rewire(const LogicGraph&, std::size_t);
  friend LogicGraph relabel(const LogicGraph&, const std::vector<std::size_t>&);

  std::vector<GraphNode> nodes_;
  std::map<EdgeKey, EdgeKind> edges_;

  static EdgeKey key(std::size_t a, std::size_t b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

  // existing edges keep their kind
  void add_edge(std::size_t a, std::size_t b, EdgeKind k) {
    if (a != b) edges_.emplace(key(a, b), k);
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '\t') out += "\\t";
      else if (c == '\n') out += "\\n";
      else if (c == '\\') out += "\\\\";
      else out.push_back(c);
    }
    return out;
  }

  std::size_t add_tree(const ProgramNode& n, std::size_t program_id, std::optional<std::size_t> parent) {
    std::size_t id = nodes_.size();
    GraphNode g;
    g.id = id;
    g.text = n.is_all_rows() ? std::string(kAllRows) : n.name;
    g.type = n.is_function ? NodeType::Function : NodeType::Entity;
    g.program_id = program_id;
    g.parent = parent;
    nodes_.push_back(std::move(g));
    if (parent) add_edge(*parent, id, EdgeKind::Structural);
    for (const auto& c : n.children) {
      std::size_t cid = add_tree(c, program_id, id);
      nodes_[id].children.push_back(cid);
    }
    return id;
  }
};

/// Nodes in preorder, program by program. Structural edges follow each
/// program tree; entities with equal normalized text form a coreference clique.
inline LogicGraph build_graph(const std::vector<Program>& evidence) {
  if (evidence.empty()) throw EmptyEvidenceError();
  LogicGraph g;
  for (std::size_t p = 0; p < evidence.size(); ++p) g.add_tree(evidence[p].root, p, std::nullopt);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (const auto& n : g.nodes_)
    if (n.type == NodeType::Entity) groups[text::normalize(n.text)].push_back(n.id);
  for (const auto& [text, ids] : groups)
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) g.add_edge(ids[i], ids[j], EdgeKind::Coreference);
  return g;
}

inline LogicGraph build_graph(const EvidenceSet& ev) { return build_graph(ev.items); }

/// Removes a node and reconnects its children to its parent. A removed root
/// leaves its children as roots, joined pairwise.
inline LogicGraph remove_node_rewire(const LogicGraph& src, std::size_t id) {
  src.node(id);
  LogicGraph g = src;
  GraphNode& victim = g.nodes_[id];
  for (auto it = g.edges_.begin(); it != g.edges_.end();) {
    if (it->first.first == id || it->first.second == id)
      it = g.edges_.erase(it);
    else
      ++it;
  }
  std::optional<std::size_t> parent = victim.parent;
  std::vector<std::size_t> kids = victim.children;
  if (parent) {
    auto& siblings = g.nodes_[*parent].children;
    auto pos = std::find(siblings.begin(), siblings.end(), id);
    pos = siblings.erase(pos);
    siblings.insert(pos, kids.begin(), kids.end());
    for (auto c : kids) g.add_edge(c, *parent, EdgeKind::Structural);
  } else {
    for (std::size_t i = 0; i < kids.size(); ++i)
      for (std::size_t j = i + 1; j < kids.size(); ++j) g.add_edge(kids[i], kids[j], EdgeKind::Structural);
  }
  for (auto c : kids) g.nodes_[c].parent = parent;
  victim.children.clear();
  victim.parent.reset();
  victim.removed = true;
  return g;
}

/// Same graph with node `i` renamed `new_id[i]`; `new_id` must be a
/// permutation of the node ids.
inline LogicGraph relabel(const LogicGraph& src, const std::vector<std::size_t>& new_id) {
  std::size_t n = src.nodes_.size();
  std::vector<bool> hit(n, false);
  if (new_id.size() != n) throw NodeNotFoundError(new_id.size());
  for (auto v : new_id) {
    if (v >= n || hit[v]) throw NodeNotFoundError(v);
    hit[v] = true;
  }
  LogicGraph g;
  g.nodes_.resize(n);
  for (const auto& old : src.nodes_) {
    GraphNode m = old;
    m.id = new_id[old.id];
    if (m.parent) m.parent = new_id[*m.parent];
    for (auto& c : m.children) c = new_id[c];
    g.nodes_[m.id] = std::move(m);
  }
  for (const auto& [e, k] : src.edges_) g.edges_.emplace(LogicGraph::key(new_id[e.first], new_id[e.second]), k);
  return g;
}

}  // namespace tabver
