#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace synql {

// Recursive-descent parser for the dialect core the synthesizer emits:
//   SELECT item, ... FROM t [a] {[INNER] JOIN t [a] ON x.c = y.d [AND ...]}
//   [WHERE cond AND ...] [GROUP BY col, ...] [ORDER BY expr [ASC|DESC]]
//   [LIMIT n] [;]
// Subqueries, comma joins, outer joins and JOIN without ON are rejected.

struct ParsedColumn {
  std::string qualifier;  // empty when unqualified
  std::string column;

  bool operator==(const ParsedColumn&) const = default;
  auto operator<=>(const ParsedColumn&) const = default;
};

struct ParsedSelectItem {
  std::optional<std::string> function;  // upper-cased, e.g. "SUM"
  std::optional<ParsedColumn> column;   // absent for FUNC(*)
  std::string alias;
};

struct ParsedTable {
  std::string table;
  std::string alias;  // defaults to the table name
};

struct ParsedJoin {
  ParsedTable table;
  std::vector<std::pair<ParsedColumn, ParsedColumn>> on;
};

struct ParsedPredicate {
  ParsedColumn column;
  std::string op;
  std::string operand;  // literal or column, as written
};

struct ParsedOrder {
  std::optional<ParsedColumn> column;  // unset when ordering by a bare alias
  std::string alias;
  bool descending = false;
};

struct ParsedQuery {
  std::vector<ParsedSelectItem> select;
  ParsedTable from;
  std::vector<ParsedJoin> joins;
  std::vector<ParsedPredicate> where;
  std::vector<ParsedColumn> group_by;
  std::optional<ParsedOrder> order_by;
  std::optional<std::int64_t> limit;

  /// Table named by an alias (or by its own name); throws ParseError.
  const std::string& resolve(std::string_view qualifier) const;
};

ParsedQuery parse_query(std::string_view sql);

struct JoinGraphSummary {
  std::string root;
  // (table already in the query, table introduced by the clause), in join order.
  std::vector<std::pair<std::string, std::string>> edges;
};

JoinGraphSummary join_graph_of(const ParsedQuery& query);
JoinGraphSummary parse_join_graph(std::string_view sql);

/// Splits a file of `;`-terminated statements (comments stripped, blank
/// statements skipped). String literals may contain semicolons.
std::vector<std::string> split_statements(std::string_view text);

}  // namespace synql
