#include <gtest/gtest.h>

#include <random>

#include "oracle/random_programs.hpp"
#include "tabver/table.hpp"

using namespace tabver;

TEST(Decimal, ParsesLexerForms) {
  EXPECT_EQ(Decimal::parse("3"), Decimal(3));
  EXPECT_EQ(Decimal::parse("+3.0"), Decimal(3));
  EXPECT_EQ(Decimal::parse("1,234"), Decimal(1234));
  EXPECT_EQ(Decimal::parse("-1,234,567.5")->to_string(), "-1234567.5");
  EXPECT_EQ(Decimal::parse(".5")->to_string(), "0.5");
  EXPECT_FALSE(Decimal::parse(""));
  EXPECT_FALSE(Decimal::parse("-"));
  EXPECT_FALSE(Decimal::parse("."));
  EXPECT_FALSE(Decimal::parse("12,34"));
  EXPECT_FALSE(Decimal::parse("1,2345"));
  EXPECT_FALSE(Decimal::parse("3rd"));
  EXPECT_FALSE(Decimal::parse(" 3"));
}

TEST(Decimal, DivisionRoundsHalfAwayFromZero) {
  EXPECT_EQ(Decimal(2).divided_by(3).to_string(), "0.666666667");
  EXPECT_EQ(Decimal(-2).divided_by(3).to_string(), "-0.666666667");
  EXPECT_EQ(Decimal(3).divided_by(2).to_string(), "1.5");
}

TEST(LoadTable, HashDelimitedSingleRow) {
  Table t = load_table("a#b\nx#3\n", '#');
  EXPECT_EQ(t.num_cols(), 2u);
  EXPECT_EQ(t.num_rows(), 1u);
  ASSERT_TRUE(t.cell(0, 1).is_number());
  EXPECT_EQ(*t.cell(0, 1).number(), Decimal(3));
  EXPECT_FALSE(t.cell(0, 0).is_number());
}

TEST(LoadTable, EmptyInputIsEmptyTable) {
  EXPECT_THROW(load_table("", '#'), EmptyTableError);
  EXPECT_THROW(load_table("a#b\n", '#'), EmptyTableError);
  EXPECT_THROW(load_table("\n\n", '#'), EmptyTableError);
}

TEST(LoadTable, RaggedRowReportsLine) {
  try {
    load_table("a#b\nx", '#');
    FAIL() << "expected RaggedRowError";
  } catch (const RaggedRowError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    load_table("a#b\nx#1\ny#2#3\n", '#');
    FAIL() << "expected RaggedRowError";
  } catch (const RaggedRowError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadTable, RejectsInvalidUtf8) {
  std::string bad = "a#b\nx#\xC3\x28\n";
  EXPECT_THROW(load_table(bad, '#'), DecodeError);
  EXPECT_NO_THROW(load_table("a#b\nx#caf\xC3\xA9\n", '#'));
}

TEST(LoadTable, EmptyHeaderNameRejected) {
  EXPECT_THROW(load_table("a# \nx#1\n", '#'), InvalidHeaderError);
}

TEST(LoadTable, CrLfAndCustomDelimiter) {
  Table t = load_table("a,b\r\n1,2\r\n", ',');
  EXPECT_EQ(t.cell(0, 1).raw, "2");
}

TEST(LoadTable, RawCellsPreservedByteExact) {
  Table t = load_table("name#pts\n  Spaced  Out #1,000\n", '#');
  EXPECT_EQ(t.cell(0, 0).raw, "  Spaced  Out ");
  EXPECT_EQ(t.cell(0, 0).normalized(), "spaced out");
  EXPECT_EQ(*t.cell(0, 1).number(), Decimal(1000));
  EXPECT_EQ(t.cell(0, 1).raw, "1,000");
}

TEST(ColumnIndex, CaseAndWhitespaceInsensitive) {
  Table t = Table::make("t", "", {"number in fleet", "year"}, {{"1", "2000"}});
  EXPECT_EQ(t.column_index("Number In Fleet"), 0u);
  EXPECT_EQ(t.column_index("  number   in fleet "), 0u);
  EXPECT_EQ(t.column_index("year"), 1u);
}

TEST(ColumnIndex, AbsentColumn) {
  Table t = Table::make("t", "", {"a", "b"}, {{"1", "2"}});
  EXPECT_FALSE(t.column_index("score").has_value());
}

TEST(ColumnIndex, DuplicatesLoadButLookupIsAmbiguous) {
  Table t = Table::make("t", "", {"a", "A"}, {{"1", "2"}});
  EXPECT_THROW(t.column_index("a"), AmbiguousColumnError);
}

TEST(TableProperties, SerializeRoundTripsRawCells) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Table t = gen::random_table(rng);
    Table back = load_table(serialize_table(t, '#'), '#');
    ASSERT_EQ(back.num_rows(), t.num_rows());
    ASSERT_EQ(back.header(), t.header());
    for (std::size_t r = 0; r < t.num_rows(); ++r)
      for (std::size_t c = 0; c < t.num_cols(); ++c) ASSERT_EQ(back.cell(r, c), t.cell(r, c));
  }
}

TEST(TableProperties, ColumnIndexOfOwnHeader) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Table t = gen::random_table(rng);
    for (std::size_t i = 0; i < t.num_cols(); ++i) ASSERT_EQ(t.column_index(t.header()[i]), i);
  }
}
