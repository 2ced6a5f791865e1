#include <gtest/gtest.h>

#include <random>

#include "oracle/random_evidence.hpp"
#include "tabver/evidence.hpp"
#include "tabver/synth.hpp"

using namespace tabver;

namespace {

Program P(const char* s) { return parse_program(s); }

std::vector<std::string> texts(const std::vector<Program>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(render_program(p));
  return out;
}

ProgramSet set_of(std::vector<std::pair<const char*, bool>> items) {
  ProgramSet ps;
  for (auto& [s, l] : items) ps.items.push_back({P(s), l});
  return ps;
}

}  // namespace

TEST(SelectTrue, KeepsOrder) {
  auto ps = set_of({{"eq { 1 ; 1 }", true}, {"eq { 1 ; 2 }", false}, {"less { 1 ; 2 }", true}});
  EXPECT_EQ(texts(select_true(ps)), (std::vector<std::string>{"eq { 1 ; 1 }", "less { 1 ; 2 }"}));
  EXPECT_TRUE(select_true(ProgramSet{}).empty());
}

TEST(DecomposeAnd, NestedConjunctsFlattenInPreorder) {
  auto out = decompose_and({P("and { and { eq { a ; b } ; less { 1 ; 2 } } ; greater { 3 ; 2 } }")});
  EXPECT_EQ(texts(out), (std::vector<std::string>{"eq { a ; b }", "less { 1 ; 2 }", "greater { 3 ; 2 }"}));
}

TEST(DecomposeAnd, DuplicateConjunctsCollapse) {
  auto out = decompose_and({P("and { eq { x ; x } ; eq { x ; x } }"), P("eq { x ; x }")});
  EXPECT_EQ(texts(out), (std::vector<std::string>{"eq { x ; x }"}));
}

TEST(FilterNegative, BelowThresholdUnchanged) {
  std::vector<Program> ev;
  for (int i = 0; i < 10; ++i) ev.push_back(P(("not_eq { " + std::to_string(i) + " ; 99 }").c_str()));
  EXPECT_EQ(filter_negative(ev, 50).size(), 10u);
}

TEST(FilterNegative, AboveThresholdDropsNegatives) {
  std::vector<Program> ev = {P("not_eq { 1 ; 2 }"), P("eq { 1 ; 1 }"), P("not_within { all_rows ; c ; z }")};
  EXPECT_EQ(texts(filter_negative(ev, 2)), (std::vector<std::string>{"eq { 1 ; 1 }"}));
  EXPECT_TRUE(filter_negative({P("not_eq { 1 ; 2 }"), P("not_eq { 3 ; 2 }")}, 1).empty());
}

TEST(FilterNegative, NestedNegativeCounts) {
  std::vector<Program> ev = {P("eq { count { filter_not_eq { all_rows ; c ; x } } ; 2 }"), P("eq { 2 ; 2 }")};
  EXPECT_EQ(filter_negative(ev, 1).size(), 1u);
}

TEST(FilterNegative, RejectsNegativeThreshold) { EXPECT_THROW(filter_negative({}, -1), InvalidBudgetError); }

TEST(Retrieve, EmptySet) {
  auto ev = retrieve(ProgramSet{});
  EXPECT_TRUE(ev.items.empty());
  EXPECT_EQ(ev.counts, (SourceCounts{0, 0, 0}));
}

TEST(Retrieve, AndOfSameProgramLeavesOne) {
  auto ev = retrieve(set_of({{"and { eq { x ; x } ; eq { x ; x } }", true}}));
  EXPECT_EQ(texts(ev.items), (std::vector<std::string>{"eq { x ; x }"}));
  EXPECT_EQ(ev.counts, (SourceCounts{1, 1, 1}));
}

TEST(Retrieve, SmallestFirstThenText) {
  auto ev = retrieve(set_of({{"eq { count { all_rows } ; 3 }", true},
                             {"less { 1 ; 2 }", true},
                             {"eq { 1 ; 1 }", true},
                             {"greater { 2 ; 1 }", false}}));
  EXPECT_EQ(texts(ev.items), (std::vector<std::string>{"eq { 1 ; 1 }", "less { 1 ; 2 }", "eq { count { all_rows } ; 3 }"}));
}

TEST(Retrieve, TruncatesToMaxEvidence) {
  ProgramSet ps;
  for (int i = 0; i < 20; ++i) ps.items.push_back({P(("eq { " + std::to_string(i) + " ; " + std::to_string(i) + " }").c_str()), true});
  RetrievalConfig cfg;
  cfg.max_evidence = 5;
  auto ev = retrieve(ps, cfg);
  EXPECT_EQ(ev.items.size(), 5u);
  EXPECT_EQ(ev.counts.after_filter, 20);
}

TEST(Retrieve, CaseStudyOnlyAndFilterGreater) {
  Table t = Table::make("t", "", {"player", "score", "country"},
                        {{"ann", "71", "us"}, {"bo", "68", "uk"}, {"cy", "75", "us"}, {"di", "66", "fr"}});
  // statement with "only" and "more than": the sole player under 67
  auto ps = synthesize("di is the only player with more than 66 strokes below 67", t, SearchBudget{3, 5000, 20000, std::chrono::milliseconds(10000)});
  auto ev = retrieve(ps);
  for (const auto& p : ev.items) EXPECT_TRUE(execute_bool(p, t).value) << render_program(p);
  EXPECT_FALSE(ev.items.empty());
}

TEST(RetrieveProperty, RandomProgramSets) {
  std::mt19937_64 rng(20241);
  for (int trial = 0; trial < 200; ++trial) {
    Table t = gen::random_table(rng);
    auto ps = gen::random_program_set(rng, t, trial % 4 == 0 ? 120 : 30);
    RetrievalConfig cfg;
    cfg.negative_threshold = trial % 3 == 0 ? 5 : 50;
    cfg.max_evidence = trial % 5 == 0 ? 200 : 8;
    auto ev = retrieve(ps, cfg);
    for (const auto& p : ev.items) {
      EXPECT_TRUE(execute_bool(p, t).value) << render_program(p);
      EXPECT_FALSE(contains_function(p, {"and"}));
      if (ev.counts.after_decompose > cfg.negative_threshold) EXPECT_FALSE(contains_function(p, negative_function_set()));
    }
    EXPECT_LE(ev.items.size(), cfg.max_evidence);
    auto again = retrieve(as_program_set(ev), cfg);
    EXPECT_EQ(texts(again.items), texts(ev.items));
  }
}
