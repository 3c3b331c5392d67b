#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synql/literal.hpp"
#include "synql/rng.hpp"
#include "synql/schema.hpp"
#include "synql/traversal.hpp"

namespace synql {

enum class AggFunc { sum, avg, count };
enum class CompareOp { gt, lt, eq };

/// Operator set offered to predicates. gt_only replicates `c > val` for every
/// column; mixed draws {>, <, =} at 0.4/0.4/0.2 and only `=` on text.
enum class PredicateOps { mixed, gt_only };

std::string_view to_sql(AggFunc f);
std::string_view to_sql(CompareOp op);

struct ColumnRef {
  std::string table;
  std::string column;

  bool operator==(const ColumnRef&) const = default;
  auto operator<=>(const ColumnRef&) const = default;
};

struct SelectItem {
  enum class Kind { plain_column, aggregate };

  Kind kind = Kind::plain_column;
  ColumnRef column;
  std::optional<AggFunc> agg_func;
  std::string alias;  // set for aggregates

  bool is_aggregate() const { return kind == Kind::aggregate; }
};

struct Predicate {
  ColumnRef column;
  CompareOp op = CompareOp::gt;
  Literal literal;
};

struct TableRef {
  std::string table;
  std::string alias;
};

struct JoinClause {
  TableRef table;
  // (child column, parent column) pairs of one FK edge, joined conjunctively.
  std::vector<std::pair<ColumnRef, ColumnRef>> condition;
};

struct OrderBy {
  // Exactly one of the two is set.
  std::optional<std::string> alias;
  std::optional<ColumnRef> column;
  bool descending = true;
};

struct QueryAst {
  std::vector<SelectItem> select_items;
  TableRef root;
  std::vector<JoinClause> joins;
  std::vector<Predicate> where_predicates;
  std::vector<ColumnRef> group_by;
  std::optional<OrderBy> order_by;
  std::optional<int> limit;
  bool has_agg = false;

  /// Throws InternalError when the table is not part of the query.
  const std::string& alias_of(std::string_view table) const;
};

struct SemanticParams {
  double p_agg = 0.2;
  double p_where = 0.4;
  int k_pred = 3;
  double p_order_limit = 0.1;
  int columns_min = 1;
  int columns_max = 2;
  PredicateOps predicate_ops = PredicateOps::mixed;

  void validate() const;  // throws ConfigError
};

inline constexpr int kDefaultLimit = 100;

/// Phase II steps 1-2 plus clause assembly. Never fails on a valid
/// blueprint: degenerate selections fall back to the root's first key column.
QueryAst inject_semantics(const JoinBlueprint& blueprint, const SchemaGraph& graph,
                          const SemanticParams& params, RandomStream& rng);

/// Deterministic single-line serialization (no trailing semicolon). Throws
/// InternalError when the AST breaks a structural invariant.
std::string compile_sql(const QueryAst& ast);

/// Structural invariants that need no schema; returns the violations.
std::vector<std::string> check_ast_structure(const QueryAst& ast);

/// Full re-resolution of every table, column, join condition and literal
/// against the schema; returns the violations (empty when valid).
std::vector<std::string> validate_ast(const QueryAst& ast, const SchemaGraph& graph);

/// Short aliases from table-name initials, disambiguated with numeric
/// suffixes and kept clear of reserved words.
std::vector<std::string> assign_aliases(const std::vector<std::string>& tables);

bool is_reserved_word(std::string_view word);

/// Identifier as emitted: bare when it is a plain lowercase name that is not
/// reserved, double-quoted otherwise.
std::string quote_identifier(std::string_view name);

}  // namespace synql
