#include "synql/synthesis.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>
#include <set>

#include "synql/error.hpp"

namespace synql {

namespace {

constexpr std::array kReservedWords = {
    "all", "analyse", "analyze", "and", "any", "array", "as", "asc", "asymmetric", "between",
    "both", "by", "case", "cast", "check", "collate", "column", "constraint", "create", "cross",
    "current_date", "current_role", "current_time", "current_timestamp", "current_user",
    "default", "deferrable", "delete", "desc", "distinct", "do", "else", "end", "except",
    "exists", "false", "fetch", "for", "foreign", "from", "full", "grant", "group", "having",
    "if", "in", "index", "initially", "inner", "insert", "intersect", "into", "is", "isnull",
    "join", "lateral", "leading", "left", "like", "limit", "localtime", "localtimestamp",
    "natural", "no", "not", "notnull", "null", "of", "offset", "on", "only", "or", "order",
    "outer", "primary", "references", "returning", "right", "select", "session_user", "set",
    "some", "symmetric", "table", "then", "to", "trailing", "true", "union", "unique", "update",
    "user", "using", "values", "when", "where", "window", "with"};

std::string qualified(const QueryAst& ast, const ColumnRef& c) {
  return quote_identifier(ast.alias_of(c.table)) + "." + quote_identifier(c.column);
}

std::string lower_name(AggFunc f) {
  switch (f) {
    case AggFunc::sum:
      return "sum";
    case AggFunc::avg:
      return "avg";
    case AggFunc::count:
      return "count";
  }
  return "agg";
}

// Partial Fisher-Yates: k distinct indices from [0, n), returned ascending.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, RandomStream& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

CompareOp draw_operator(ValueKind kind, PredicateOps ops, RandomStream& rng) {
  if (ops == PredicateOps::gt_only) {
    return CompareOp::gt;
  }
  if (kind == ValueKind::text) {
    return CompareOp::eq;
  }
  const double u = rng.uniform01();
  if (u < 0.4) {
    return CompareOp::gt;
  }
  if (u < 0.8) {
    return CompareOp::lt;
  }
  return CompareOp::eq;
}

}  // namespace

std::string_view to_sql(AggFunc f) {
  switch (f) {
    case AggFunc::sum:
      return "SUM";
    case AggFunc::avg:
      return "AVG";
    case AggFunc::count:
      return "COUNT";
  }
  return "";
}

std::string_view to_sql(CompareOp op) {
  switch (op) {
    case CompareOp::gt:
      return ">";
    case CompareOp::lt:
      return "<";
    case CompareOp::eq:
      return "=";
  }
  return "";
}

const std::string& QueryAst::alias_of(std::string_view table) const {
  if (root.table == table) {
    return root.alias;
  }
  for (const auto& j : joins) {
    if (j.table.table == table) {
      return j.table.alias;
    }
  }
  throw InternalError("table '" + std::string(table) + "' is not part of the query");
}

void SemanticParams::validate() const {
  const auto prob = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError(std::string(name) + " = " + format_double(v) + " is out of range [0, 1]");
    }
  };
  prob("p_agg", p_agg);
  prob("p_where", p_where);
  prob("p_order_limit", p_order_limit);
  if (k_pred < 1) {
    throw ConfigError("k_pred = " + std::to_string(k_pred) + " must be >= 1");
  }
  if (columns_min < 1) {
    throw ConfigError("columns_min = " + std::to_string(columns_min) + " must be >= 1");
  }
  if (columns_max < columns_min) {
    throw ConfigError("columns_max = " + std::to_string(columns_max) +
                      " must be >= columns_min = " + std::to_string(columns_min));
  }
}

bool is_reserved_word(std::string_view word) {
  return std::find(kReservedWords.begin(), kReservedWords.end(), word) != kReservedWords.end();
}

std::string quote_identifier(std::string_view name) {
  bool plain = !name.empty() && (std::islower(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '_')) {
      plain = false;
    }
  }
  if (plain && !is_reserved_word(name)) {
    return std::string(name);
  }
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> assign_aliases(const std::vector<std::string>& tables) {
  std::vector<std::string> out;
  std::set<std::string> taken;
  for (const auto& t : tables) {
    std::string base;
    bool word_start = true;
    for (char c : t) {
      const auto u = static_cast<unsigned char>(c);
      if (c == '_' || !std::isalnum(u)) {
        word_start = true;
        continue;
      }
      if (word_start && std::isalpha(u)) {
        base += static_cast<char>(std::tolower(u));
      }
      word_start = false;
    }
    if (base.empty()) {
      base = "t";
    }
    std::string alias = base;
    for (int n = 2; taken.count(alias) || is_reserved_word(alias); ++n) {
      alias = base + std::to_string(n);
    }
    taken.insert(alias);
    out.push_back(std::move(alias));
  }
  return out;
}

QueryAst inject_semantics(const JoinBlueprint& bp, const SchemaGraph& graph,
                          const SemanticParams& params, RandomStream& rng) {
  params.validate();
  QueryAst ast;
  const std::vector<std::string> aliases = assign_aliases(bp.used_tables);
  ast.root = TableRef{bp.root, aliases.front()};
  for (std::size_t i = 0; i < bp.join_edges.size(); ++i) {
    const FkEdge& e = bp.join_edges[i];
    JoinClause join;
    join.table = TableRef{bp.used_tables[i + 1], aliases[i + 1]};
    for (const auto& p : e.columns) {
      join.condition.emplace_back(ColumnRef{e.child_table, p.child_column},
                                  ColumnRef{e.parent_table, p.parent_column});
    }
    ast.joins.push_back(std::move(join));
  }

  // Step 1: analytical injection.
  std::set<std::string> select_aliases;
  const auto unique_alias = [&](std::string base) {
    std::string alias = base;
    for (int n = 2; select_aliases.count(alias) || is_reserved_word(alias); ++n) {
      alias = base + "_" + std::to_string(n);
    }
    select_aliases.insert(alias);
    return alias;
  };
  for (std::size_t ti = 0; ti < bp.used_tables.size(); ++ti) {
    const TableMeta* table = graph.find_table(bp.used_tables[ti]);
    if (!table) {
      throw InternalError("blueprint table '" + bp.used_tables[ti] + "' missing from schema");
    }
    const auto ncols = static_cast<std::int64_t>(table->columns.size());
    const std::int64_t lo = std::min<std::int64_t>(params.columns_min, ncols);
    const std::int64_t hi = std::min<std::int64_t>(params.columns_max, ncols);
    const auto count = static_cast<std::size_t>(rng.uniform_int(lo, hi));
    for (std::size_t ci : sample_indices(table->columns.size(), count, rng)) {
      const ColumnMeta& col = table->columns[ci];
      ColumnRef ref{table->name, col.name};
      std::optional<AggFunc> agg;
      if (col.is_numeric) {
        if (rng.bernoulli(params.p_agg)) {
          agg = rng.bernoulli(0.5) ? AggFunc::sum : AggFunc::avg;
        }
      } else if (ti > 0 && rng.bernoulli(params.p_agg)) {
        agg = AggFunc::count;
      }
      if (agg) {
        ast.select_items.push_back(SelectItem{SelectItem::Kind::aggregate, ref, agg,
                                              unique_alias(lower_name(*agg) + "_" + col.name)});
        ast.has_agg = true;
      } else {
        ast.select_items.push_back(SelectItem{SelectItem::Kind::plain_column, ref, std::nullopt, {}});
        ast.group_by.push_back(ref);
      }
    }
  }
  if (ast.select_items.empty()) {
    const TableMeta* root = graph.find_table(bp.root);
    const std::string& col = root->primary_key.empty() ? root->columns.front().name
                                                      : root->primary_key.front();
    ColumnRef ref{root->name, col};
    ast.select_items.push_back(SelectItem{SelectItem::Kind::plain_column, ref, std::nullopt, {}});
    ast.group_by.push_back(ref);
  }

  // Step 2: predicate injection over columns that carry statistics.
  if (rng.bernoulli(params.p_where)) {
    std::vector<const ColumnMeta*> pool_cols;
    std::vector<std::string> pool_tables;
    for (const auto& tname : bp.used_tables) {
      for (const auto& c : graph.find_table(tname)->columns) {
        if (c.stats) {
          pool_cols.push_back(&c);
          pool_tables.push_back(tname);
        }
      }
    }
    if (!pool_cols.empty()) {
      const auto max_preds = std::min<std::int64_t>(params.k_pred, static_cast<std::int64_t>(pool_cols.size()));
      const auto n = static_cast<std::size_t>(rng.uniform_int(1, max_preds));
      for (std::size_t pi : sample_indices(pool_cols.size(), n, rng)) {
        const ColumnMeta& c = *pool_cols[pi];
        const CompareOp op = draw_operator(c.kind(), params.predicate_ops, rng);
        ast.where_predicates.push_back(
            Predicate{ColumnRef{pool_tables[pi], c.name}, op, sample_domain_value(*c.stats, rng)});
      }
    }
  }

  // Step 3: clause assembly.
  if (!ast.has_agg) {
    ast.group_by.clear();
  }
  if (rng.bernoulli(params.p_order_limit)) {
    OrderBy order;
    const auto first_agg = std::find_if(ast.select_items.begin(), ast.select_items.end(),
                                        [](const SelectItem& s) { return s.is_aggregate(); });
    if (first_agg != ast.select_items.end()) {
      order.alias = first_agg->alias;
    } else {
      order.column = ast.select_items.front().column;
    }
    ast.order_by = order;
    ast.limit = kDefaultLimit;
  }
  return ast;
}

std::vector<std::string> check_ast_structure(const QueryAst& ast) {
  std::vector<std::string> issues;
  if (ast.select_items.empty()) {
    issues.emplace_back("empty SELECT list");
  }
  std::set<std::string> tables{ast.root.table};
  std::set<std::string> aliases{ast.root.alias};
  for (const auto& j : ast.joins) {
    if (!tables.insert(j.table.table).second) {
      issues.push_back("table '" + j.table.table + "' joined twice");
    }
    if (!aliases.insert(j.table.alias).second) {
      issues.push_back("alias '" + j.table.alias + "' used twice");
    }
    if (j.condition.empty()) {
      issues.push_back("join of '" + j.table.table + "' has no condition");
    }
  }
  const auto known = [&](const ColumnRef& c) { return tables.count(c.table) > 0; };
  bool any_agg = false;
  std::set<ColumnRef> plain;
  std::set<std::string> select_aliases;
  for (const auto& s : ast.select_items) {
    if (!known(s.column)) {
      issues.push_back("select column references unknown table '" + s.column.table + "'");
    }
    if (s.is_aggregate()) {
      any_agg = true;
      if (!s.agg_func) {
        issues.emplace_back("aggregate select item without a function");
      }
      if (s.alias.empty() || !select_aliases.insert(s.alias).second) {
        issues.push_back("aggregate alias '" + s.alias + "' missing or duplicated");
      }
    } else {
      if (s.agg_func) {
        issues.emplace_back("plain select item carries an aggregate function");
      }
      plain.insert(s.column);
    }
  }
  if (any_agg != ast.has_agg) {
    issues.emplace_back("has_agg does not match the SELECT list");
  }
  const std::set<ColumnRef> grouped(ast.group_by.begin(), ast.group_by.end());
  if (grouped.size() != ast.group_by.size()) {
    issues.emplace_back("duplicate GROUP BY column");
  }
  if (ast.has_agg ? grouped != plain : !grouped.empty()) {
    issues.emplace_back("GROUP BY does not equal the plain select columns");
  }
  for (const auto& g : ast.group_by) {
    if (!known(g)) {
      issues.push_back("GROUP BY references unknown table '" + g.table + "'");
    }
  }
  for (const auto& p : ast.where_predicates) {
    if (!known(p.column)) {
      issues.push_back("predicate references unknown table '" + p.column.table + "'");
    }
  }
  if (ast.order_by) {
    const OrderBy& o = *ast.order_by;
    if (o.alias.has_value() == o.column.has_value()) {
      issues.emplace_back("ORDER BY must name exactly one alias or column");
    } else if (o.alias && !select_aliases.count(*o.alias)) {
      issues.push_back("ORDER BY alias '" + *o.alias + "' is not a select alias");
    } else if (o.column && !plain.count(*o.column)) {
      issues.emplace_back("ORDER BY column is not a plain select column");
    }
  }
  if (ast.limit && *ast.limit <= 0) {
    issues.emplace_back("LIMIT must be positive");
  }
  return issues;
}

std::string compile_sql(const QueryAst& ast) {
  if (auto issues = check_ast_structure(ast); !issues.empty()) {
    throw InternalError("refusing to compile invalid AST: " + issues.front());
  }
  std::string sql = "SELECT ";
  for (std::size_t i = 0; i < ast.select_items.size(); ++i) {
    const SelectItem& s = ast.select_items[i];
    if (i > 0) {
      sql += ", ";
    }
    if (s.is_aggregate()) {
      sql += std::string(to_sql(*s.agg_func)) + "(" + qualified(ast, s.column) + ") AS " +
             quote_identifier(s.alias);
    } else {
      sql += qualified(ast, s.column);
    }
  }
  sql += " FROM " + quote_identifier(ast.root.table) + " " + quote_identifier(ast.root.alias);
  for (const auto& j : ast.joins) {
    sql += " JOIN " + quote_identifier(j.table.table) + " " + quote_identifier(j.table.alias) + " ON ";
    for (std::size_t i = 0; i < j.condition.size(); ++i) {
      if (i > 0) {
        sql += " AND ";
      }
      sql += qualified(ast, j.condition[i].first) + " = " + qualified(ast, j.condition[i].second);
    }
  }
  for (std::size_t i = 0; i < ast.where_predicates.size(); ++i) {
    const Predicate& p = ast.where_predicates[i];
    sql += i == 0 ? " WHERE " : " AND ";
    sql += qualified(ast, p.column) + " " + std::string(to_sql(p.op)) + " " + to_sql(p.literal);
  }
  if (ast.has_agg && !ast.group_by.empty()) {
    sql += " GROUP BY ";
    for (std::size_t i = 0; i < ast.group_by.size(); ++i) {
      if (i > 0) {
        sql += ", ";
      }
      sql += qualified(ast, ast.group_by[i]);
    }
  }
  if (ast.order_by) {
    sql += " ORDER BY ";
    sql += ast.order_by->alias ? quote_identifier(*ast.order_by->alias)
                               : qualified(ast, *ast.order_by->column);
    sql += ast.order_by->descending ? " DESC" : " ASC";
  }
  if (ast.limit) {
    sql += " LIMIT " + std::to_string(*ast.limit);
  }
  return sql;
}

std::vector<std::string> validate_ast(const QueryAst& ast, const SchemaGraph& graph) {
  std::vector<std::string> issues = check_ast_structure(ast);
  const auto column_meta = [&](const ColumnRef& c) -> const ColumnMeta* {
    const TableMeta* t = graph.find_table(c.table);
    return t ? t->find_column(c.column) : nullptr;
  };
  const auto resolve = [&](const ColumnRef& c, const char* where) -> const ColumnMeta* {
    const ColumnMeta* meta = column_meta(c);
    if (!meta) {
      issues.push_back(std::string(where) + " column '" + c.table + "." + c.column +
                       "' does not exist in the schema");
    }
    return meta;
  };
  if (!graph.find_table(ast.root.table)) {
    issues.push_back("root table '" + ast.root.table + "' does not exist in the schema");
  }
  std::vector<std::string> seen{ast.root.table};
  for (const auto& j : ast.joins) {
    if (!graph.find_table(j.table.table)) {
      issues.push_back("joined table '" + j.table.table + "' does not exist in the schema");
      continue;
    }
    if (j.condition.empty()) {
      continue;
    }
    const std::string& child = j.condition.front().first.table;
    const std::string& parent = j.condition.front().second.table;
    FkEdge edge{child, parent, {}, {}};
    for (const auto& [c, p] : j.condition) {
      resolve(c, "join");
      resolve(p, "join");
      if (c.table != child || p.table != parent) {
        issues.push_back("join of '" + j.table.table + "' mixes tables in its condition");
      }
      edge.columns.push_back(ColumnPair{c.column, p.column});
    }
    const bool is_fk = std::any_of(graph.edges().begin(), graph.edges().end(), [&](const FkEdge& e) {
      return e.child_table == edge.child_table && e.parent_table == edge.parent_table &&
             e.columns == edge.columns;
    });
    if (!is_fk) {
      issues.push_back("join of '" + j.table.table + "' is not a schema FK edge");
    }
    const std::string& other = child == j.table.table ? parent : child;
    if ((child != j.table.table && parent != j.table.table) ||
        std::find(seen.begin(), seen.end(), other) == seen.end()) {
      issues.push_back("join of '" + j.table.table + "' does not connect to an earlier table");
    }
    seen.push_back(j.table.table);
  }
  for (const auto& s : ast.select_items) {
    const ColumnMeta* meta = resolve(s.column, "select");
    if (meta && s.agg_func && (*s.agg_func == AggFunc::sum || *s.agg_func == AggFunc::avg) &&
        !meta->is_numeric) {
      issues.push_back(std::string(to_sql(*s.agg_func)) + " applied to non-numeric column '" +
                       s.column.table + "." + s.column.column + "'");
    }
  }
  for (const auto& g : ast.group_by) {
    resolve(g, "GROUP BY");
  }
  for (const auto& p : ast.where_predicates) {
    const ColumnMeta* meta = resolve(p.column, "predicate");
    if (!meta) {
      continue;
    }
    const std::string name = p.column.table + "." + p.column.column;
    if (kind_of(p.literal) != meta->kind()) {
      issues.push_back("predicate literal on '" + name + "' has kind " +
                       std::string(to_string(kind_of(p.literal))) + ", column is " +
                       std::string(to_string(meta->kind())));
      continue;
    }
    if (!meta->stats) {
      issues.push_back("predicate on '" + name + "' has no statistics domain");
      continue;
    }
    if (compare(p.literal, meta->stats->min_value) == std::partial_ordering::less ||
        compare(p.literal, meta->stats->max_value) == std::partial_ordering::greater) {
      issues.push_back("predicate literal " + to_sql(p.literal) + " on '" + name +
                       "' lies outside its domain");
    }
  }
  return issues;
}

}  // namespace synql
