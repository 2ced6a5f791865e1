#include <gtest/gtest.h>

#include <random>

#include "oracle/compare.hpp"
#include "oracle/random_programs.hpp"
#include "tabver/executor.hpp"

using namespace tabver;

namespace {

Table fleet() {
  return Table::make("fleet", "", {"type", "number in fleet", "year"},
                     {{"a320", "1", "2001"}, {"b737", "12", "1999"}, {"a330", "35", "2010"}});
}

Table games() {
  return Table::make("games", "", {"date", "venue", "score"},
                     {{"26 january 2011", "sai tso wan recreation ground, hong kong", "2"},
                      {"29 january 2011", "siu sai wan sports ground", "0"},
                      {"26 january 2011", "happy valley", "0"},
                      {"2 february 2011", "mong kok stadium", "3"}});
}

Table rows(std::size_t n) {
  std::vector<std::vector<std::string>> r;
  for (std::size_t i = 0; i < n; ++i) r.push_back({std::to_string(i)});
  return Table::make("n", "", {"a"}, r);
}

Value run(const std::string& src, const Table& t) { return execute(parse_program(src), t); }

ExecErrorKind error_of(const std::string& src, const Table& t) {
  try {
    run(src, t);
  } catch (const ExecError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << src;
  return ExecErrorKind::Sort;
}

}  // namespace

TEST(Execute, CountAllRows) { EXPECT_EQ(std::get<Decimal>(run("count { all_rows }", rows(5))), Decimal(5)); }

TEST(Execute, OnlyOnSingleRow) { EXPECT_TRUE(std::get<bool>(run("only { all_rows }", rows(1)))); }

TEST(Execute, MinOfNumberInFleet) {
  EXPECT_TRUE(std::get<bool>(run("eq { min { all_rows ; number in fleet } ; 1 }", fleet())));
  EXPECT_FALSE(std::get<bool>(run("eq { min { all_rows ; number in fleet } ; 12 }", fleet())));
}

TEST(Execute, CaseStudyOnlyOverFilteredGames) {
  Table t = games();
  Program p = parse_program(
      "only { filter_greater { filter_eq { all_rows ; date ; 26 january 2011 } ; score ; 0 } }");
  EXPECT_TRUE(std::get<bool>(execute(p, t)));
  auto agreement = oracle::differential(p, t);
  EXPECT_TRUE(agreement.agree) << agreement.detail;
  // the unfiltered date view has two games
  EXPECT_FALSE(std::get<bool>(run("only { filter_eq { all_rows ; date ; 26 january 2011 } }", t)));
}

TEST(Execute, ArgmaxTiesPickLowestRow) {
  Table t = Table::make("t", "", {"p"}, {{"3"}, {"7"}, {"7"}, {"1"}});
  EXPECT_EQ(std::get<View>(run("argmax { all_rows ; p }", t)).rows, std::vector<std::size_t>{1});
  Table u = Table::make("t", "", {"p"}, {{"1"}, {"7"}, {"1"}});
  EXPECT_EQ(std::get<View>(run("argmin { all_rows ; p }", u)).rows, std::vector<std::size_t>{0});
}

TEST(Execute, AggregatesSkipNonNumericCells) {
  Table t = Table::make("t", "", {"p"}, {{"3"}, {"n/a"}, {"5"}, {"1,000"}});
  EXPECT_EQ(std::get<Decimal>(run("sum { all_rows ; p }", t)), Decimal(1008));
  EXPECT_EQ(std::get<Decimal>(run("avg { all_rows ; p }", t)), Decimal(336));
  EXPECT_EQ(std::get<Decimal>(run("max { all_rows ; p }", t)), Decimal(1000));
  Table text = Table::make("t", "", {"p"}, {{"x"}, {"y"}});
  EXPECT_EQ(error_of("min { all_rows ; p }", text), ExecErrorKind::EmptyView);
  EXPECT_EQ(error_of("argmax { all_rows ; p }", text), ExecErrorKind::EmptyView);
  EXPECT_EQ(std::get<Decimal>(run("sum { all_rows ; p }", text)), Decimal(0));
}

TEST(Execute, FirstAndSecond) {
  Table t = rows(3);
  EXPECT_EQ(std::get<View>(run("first { all_rows }", t)).rows, std::vector<std::size_t>{0});
  EXPECT_EQ(std::get<View>(run("second { all_rows }", t)).rows, std::vector<std::size_t>{1});
  EXPECT_EQ(error_of("second { first { all_rows } }", t), ExecErrorKind::Cardinality);
  EXPECT_EQ(error_of("first { filter_eq { all_rows ; a ; 9 } }", t), ExecErrorKind::EmptyView);
}

TEST(Execute, HopCardinality) {
  Table t = rows(2);
  EXPECT_EQ(error_of("hop { all_rows ; a }", t), ExecErrorKind::Cardinality);
  EXPECT_EQ(error_of("hop { filter_eq { all_rows ; a ; 7 } ; a }", t), ExecErrorKind::EmptyView);
  EXPECT_EQ(std::get<CellValue>(run("hop { filter_eq { all_rows ; a ; 1 } ; a }", t)).raw, "1");
}

TEST(Execute, RoundEqTolerance) {
  Table t = rows(1);
  EXPECT_TRUE(std::get<bool>(run("round_eq { 101 ; 100 }", t)));
  EXPECT_FALSE(std::get<bool>(run("round_eq { 101.5 ; 100 }", t)));
  EXPECT_TRUE(std::get<bool>(run("round_eq { 0.5 ; 0.495 }", t)));  // floor of 1 for small magnitudes
  EXPECT_FALSE(std::get<bool>(run("round_eq { 0.52 ; 0.5 }", t)));
}

TEST(Execute, TextComparisonsAreNormalized) {
  Table t = Table::make("t", "", {"team"}, {{"  Hong Kong "}, {"Macau"}});
  EXPECT_TRUE(std::get<bool>(run("within { all_rows ; team ; hong kong }", t)));
  EXPECT_TRUE(std::get<bool>(run("eq { 3.0 ; 3 }", t)));
  EXPECT_FALSE(std::get<bool>(run("eq { 3a ; 3 }", t)));
}

TEST(Execute, ColumnErrors) {
  Table t = rows(2);
  EXPECT_EQ(error_of("count { filter_eq { all_rows ; nope ; 1 } }", t), ExecErrorKind::UnresolvedColumn);
  Table dup = Table::make("t", "", {"a", "A"}, {{"1", "2"}});
  EXPECT_EQ(error_of("hop { all_rows ; a }", dup), ExecErrorKind::AmbiguousColumn);
  EXPECT_EQ(error_of("less { x ; 1 }", t), ExecErrorKind::Sort);
}

TEST(Execute, AllFamilyRejectsEmptyView) {
  Table t = rows(2);
  EXPECT_EQ(error_of("all_eq { filter_eq { all_rows ; a ; 9 } ; a ; 1 }", t), ExecErrorKind::EmptyView);
}

TEST(ExecuteBool, Examples) {
  Table t = rows(2);
  EXPECT_TRUE(execute_bool(parse_program("and { eq { 1 ; 1 } ; eq { 2 ; 2 } }"), t).value);
  auto ne = execute_bool(parse_program("not_eq { 1 ; 1 }"), t);
  EXPECT_FALSE(ne.value);
  EXPECT_FALSE(ne.discarded);
  auto hop = execute_bool(parse_program("eq { hop { all_rows ; a } ; 1 }"), t);
  EXPECT_TRUE(hop.discarded);
  EXPECT_EQ(hop.error, ExecErrorKind::Cardinality);
  auto non_bool = execute_bool(parse_program("count { all_rows }"), t);
  EXPECT_TRUE(non_bool.discarded);
}

TEST(WellSorted, Checks) {
  EXPECT_TRUE(well_sorted(parse_program("eq { min { all_rows ; c } ; 1 }").root));
  EXPECT_TRUE(well_sorted(parse_program("less { hop { all_rows ; c } ; 1 }").root));
  EXPECT_FALSE(well_sorted(parse_program("count { 1 }").root));
  EXPECT_FALSE(well_sorted(parse_program("and { 1 ; eq { 1 ; 1 } }").root));
}

TEST(ExecutorProperties, AgreesWithNaiveEvaluator) {
  std::mt19937_64 rng(99);
  int errors = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    Table t = gen::random_table(rng);
    gen::ProgramGen g(rng, t);
    Program p{g.make(Sort::Bool, 3)};
    auto a = oracle::differential(p, t);
    ASSERT_TRUE(a.agree) << render_program(p) << "\n" << serialize_table(t) << a.detail;
    errors += a.errored;
  }
  // both branches must actually be exercised
  EXPECT_GT(errors, 50);
  EXPECT_LT(errors, 1400);
}

TEST(ExecutorProperties, NonBoolRootsAgreeToo) {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 600; ++trial) {
    Table t = gen::random_table(rng);
    gen::ProgramGen g(rng, t);
    Sort s = std::array{Sort::View, Sort::Num, Sort::Obj}[trial % 3];
    Program p{g.make(s, 3)};
    auto a = oracle::differential(p, t);
    ASSERT_TRUE(a.agree) << render_program(p) << "\n" << a.detail;
  }
}

TEST(ExecutorProperties, Deterministic) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Table t = gen::random_table(rng);
    gen::ProgramGen g(rng, t);
    Program p{g.make(Sort::Bool, 3)};
    auto a = execute_bool(p, t);
    auto b = execute_bool(p, t);
    ASSERT_EQ(a.value, b.value);
    ASSERT_EQ(a.discarded, b.discarded);
  }
}

TEST(ExecutorProperties, AndIsConjunction) {
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Table t = gen::random_table(rng);
    gen::ProgramGen g(rng, t);
    ProgramNode p = g.make(Sort::Bool, 2), q = g.make(Sort::Bool, 2);
    auto rp = execute_bool(Program{p}, t), rq = execute_bool(Program{q}, t);
    if (rp.discarded || rq.discarded) continue;
    auto both = execute_bool(Program{ProgramNode::function("and", {p, q})}, t);
    ASSERT_FALSE(both.discarded);
    ASSERT_EQ(both.value, rp.value && rq.value);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(ExecutorProperties, NegativePairsAreComplementary) {
  std::mt19937_64 rng(8);
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"eq", "not_eq"}, {"within", "not_within"}, {"all_eq", "not_all_eq"},
      {"all_greater", "not_all_greater"}, {"all_less", "not_all_less"}};
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Table t = gen::random_table(rng);
    gen::ProgramGen g(rng, t);
    for (const auto& [pos, neg] : pairs) {
      const FunctionSpec* f = find_function(pos);
      std::vector<ProgramNode> args;
      for (auto s : f->arg_sorts) args.push_back(g.make(s == Sort::Col ? Sort::Col : s, 1));
      if (f->arg_sorts.size() == 3) args[1] = ProgramNode::column(t.header()[trial % t.num_cols()]);
      auto a = execute_bool(Program{ProgramNode::function(pos, args)}, t);
      auto b = execute_bool(Program{ProgramNode::function(neg, args)}, t);
      ASSERT_EQ(a.discarded, b.discarded);
      if (a.discarded) continue;
      ASSERT_NE(a.value, b.value) << pos;
      ++checked;
    }
  }
  EXPECT_GT(checked, 500);
}
