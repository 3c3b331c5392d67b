#include <gtest/gtest.h>

#include "support.hpp"
#include "synql/error.hpp"
#include "synql/sql_parser.hpp"

using namespace synql;

namespace {

using Edges = std::vector<std::pair<std::string, std::string>>;

std::string fixture_sql(const std::string& name) {
  return test::read_text(test::fixture_dir() / "sql" / name);
}

std::string parse_error(const std::string& sql) {
  try {
    parse_query(sql);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(SqlParser, ChainListingJoinGraph) {
  const JoinGraphSummary s = parse_join_graph(fixture_sql("chain_tpch.sql"));
  EXPECT_EQ(s.root, "lineitem");
  EXPECT_EQ(s.edges, (Edges{{"lineitem", "orders"}, {"orders", "customer"}, {"customer", "nation"},
                            {"nation", "region"}}));
}

TEST(SqlParser, WalkthroughJoinGraph) {
  const JoinGraphSummary s = parse_join_graph(fixture_sql("walkthrough_imdb.sql"));
  EXPECT_EQ(s.root, "title");
  EXPECT_EQ(s.edges, (Edges{{"title", "cast_info"}, {"cast_info", "name"}, {"cast_info", "char_name"}}));
}

TEST(SqlParser, SingleTable) {
  const ParsedQuery q = parse_query("SELECT x FROM t");
  EXPECT_EQ(q.from.table, "t");
  EXPECT_EQ(q.from.alias, "t");
  ASSERT_EQ(q.select.size(), 1u);
  EXPECT_EQ(q.select[0].column->column, "x");
  EXPECT_TRUE(parse_join_graph("SELECT x FROM t").edges.empty());
}

TEST(SqlParser, FullClauseSet) {
  const ParsedQuery q = parse_query(
      "SELECT o.o_orderpriority, SUM(l.l_tax) AS sum_l_tax, COUNT(*) FROM lineitem AS l "
      "INNER JOIN orders o ON l.l_orderkey = o.o_orderkey "
      "WHERE l.l_shipdate > DATE '1995-01-01' AND o.o_totalprice <= 100.5 AND o.o_comment = 'it''s' "
      "GROUP BY o.o_orderpriority ORDER BY sum_l_tax DESC LIMIT 100;");
  ASSERT_EQ(q.select.size(), 3u);
  EXPECT_EQ(q.select[1].function, "SUM");
  EXPECT_EQ(q.select[1].alias, "sum_l_tax");
  EXPECT_EQ(q.select[2].function, "COUNT");
  EXPECT_FALSE(q.select[2].column);
  EXPECT_EQ(q.from.alias, "l");
  ASSERT_EQ(q.where.size(), 3u);
  EXPECT_EQ(q.where[1].op, "<=");
  EXPECT_EQ(q.group_by, (std::vector<ParsedColumn>{{"o", "o_orderpriority"}}));
  ASSERT_TRUE(q.order_by);
  EXPECT_EQ(q.order_by->alias, "sum_l_tax");
  EXPECT_TRUE(q.order_by->descending);
  EXPECT_EQ(q.limit, 100);
  EXPECT_EQ(q.resolve("o"), "orders");
  EXPECT_THROW(q.resolve("zz"), ParseError);
}

TEST(SqlParser, CompositeAndQuotedIdentifiers) {
  const JoinGraphSummary s = parse_join_graph(
      "SELECT \"order\".x FROM lineitem l JOIN partsupp \"order\" "
      "ON l.l_partkey = \"order\".ps_partkey AND \"order\".ps_suppkey = l.l_suppkey");
  EXPECT_EQ(s.edges, (Edges{{"lineitem", "partsupp"}}));
}

TEST(SqlParser, ColumnNamedDateIsNotALiteral) {
  const ParsedQuery q = parse_query("SELECT t.date FROM t WHERE t.date > '2001-01-01'");
  EXPECT_EQ(q.select[0].column->column, "date");
  EXPECT_EQ(q.where[0].operand, "'2001-01-01'");
}

TEST(SqlParser, RejectsUnsupportedShapes) {
  EXPECT_NE(parse_error("SELECT a.x FROM (SELECT x FROM t) a").find("subquer"), std::string::npos)
      << parse_error("SELECT a.x FROM (SELECT x FROM t) a");
  EXPECT_NE(parse_error("SELECT t.x FROM t WHERE t.x IN (SELECT y FROM u)"), "");
  EXPECT_NE(parse_error("SELECT a.x FROM a, b WHERE a.id = b.id").find("comma"), std::string::npos)
      << parse_error("SELECT a.x FROM a, b WHERE a.id = b.id");
  EXPECT_NE(parse_error("SELECT a.x FROM a JOIN b").find("ON"), std::string::npos)
      << parse_error("SELECT a.x FROM a JOIN b");
  EXPECT_NE(parse_error("SELECT a.x FROM a LEFT JOIN b ON a.id = b.id"), "");
  EXPECT_NE(parse_error("SELECT a.x FROM a JOIN b USING (id)"), "");
  EXPECT_NE(parse_error("SELECT a.x FROM a WHERE a.x = 1 OR a.x = 2"), "");
  EXPECT_NE(parse_error("SELECT DISTINCT a.x FROM a"), "");
  EXPECT_NE(parse_error("SELECT * FROM a"), "");
  EXPECT_NE(parse_error("SELECT a.x FROM a LIMIT"), "");
  EXPECT_NE(parse_error("SELECT a.x FROM a WHERE a.x = 'open"), "");
  EXPECT_NE(parse_error("SELECT a.x FROM a; SELECT 1"), "");
}

TEST(SqlParser, JoinGraphRejectsBadOnClauses) {
  EXPECT_THROW(parse_join_graph("SELECT a.x FROM a JOIN b ON a.id = c.id"), ParseError);
  EXPECT_THROW(parse_join_graph("SELECT a.x FROM a JOIN b ON b.id = b.other"), ParseError);
  EXPECT_THROW(parse_join_graph("SELECT a.x FROM a JOIN b ON a.id = b.a_id JOIN c ON c.a_id = a.id "
                                "AND c.b_id = b.id"),
               ParseError);
  EXPECT_THROW(parse_join_graph("SELECT a.x FROM a JOIN a ON a.id = a.id"), ParseError);
}

TEST(SqlParser, SplitStatements) {
  const auto parts = split_statements(fixture_sql("mixed.sql"));
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_NE(parts[2].find("'a;b'"), std::string::npos);
  EXPECT_TRUE(split_statements("-- nothing\n ;; \n").empty());
  EXPECT_EQ(split_statements("SELECT 1 -- trailing;\n").size(), 1u);
}
