#pragma once

// Random labeled program sets and evidence sets built on ProgramGen.

#include <random>
#include <set>
#include <vector>

#include "oracle/random_programs.hpp"
#include "tabver/evidence.hpp"
#include "tabver/executor.hpp"

namespace gen {

/// Up to `max_items` executable Bool programs labeled by the executor; some
/// are wrapped in nested `and`s so decomposition has work to do.
inline tabver::ProgramSet random_program_set(std::mt19937_64& rng, const tabver::Table& t, std::size_t max_items) {
  using tabver::ProgramNode;
  ProgramGen g(rng, t);
  tabver::ProgramSet ps;
  ps.table_id = t.id();
  std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_items)(rng);
  std::bernoulli_distribution wrap(0.3);
  for (std::size_t tries = 0; ps.items.size() < n && tries < 20 * n + 20; ++tries) {
    ProgramNode root = g.make(tabver::Sort::Bool, 3);
    if (wrap(rng)) root = ProgramNode::function("and", {root, g.make(tabver::Sort::Bool, 2)});
    if (wrap(rng)) root = ProgramNode::function("and", {g.make(tabver::Sort::Bool, 1), root});
    tabver::Program p{root};
    auto r = tabver::execute_bool(p, t);
    if (r.discarded) continue;
    ps.items.push_back({p, r.value});
  }
  return ps;
}

/// Random non-empty evidence: 1..max_programs well-sorted Bool programs.
/// Entities are drawn from the table, so coreference edges are common.
inline std::vector<tabver::Program> random_evidence(std::mt19937_64& rng, const tabver::Table& t, std::size_t max_programs,
                                                    int depth = 3) {
  ProgramGen g(rng, t);
  std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_programs)(rng);
  std::vector<tabver::Program> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(tabver::Program{g.make(tabver::Sort::Bool, depth)});
  return out;
}

}  // namespace gen
