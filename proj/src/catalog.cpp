#include "synql/catalog.hpp"

#include <algorithm>
#include <map>

#include "synql/error.hpp"
#include "synql/synthesis.hpp"

namespace synql {

namespace {

struct RawTable {
  TableMeta meta;
};

std::string sql_string(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += '\'';
    }
    out += c;
  }
  return out + "'";
}

std::vector<std::string> column_values(const ResultSet& rs, std::size_t col = 0) {
  std::vector<std::string> out;
  for (const auto& row : rs.rows) {
    if (row.at(col)) {
      out.push_back(*row[col]);
    }
  }
  return out;
}

void read_sqlite(Connection& conn, std::vector<TableMeta>& tables, std::vector<FkEdge>& edges) {
  const ResultSet names = conn.query(
      "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name");
  for (const auto& tname : column_values(names)) {
    TableMeta t;
    t.name = tname;
    const ResultSet cols = conn.query("PRAGMA table_info(" + quote_identifier(tname) + ")");
    std::map<int, std::string> pk;
    for (const auto& row : cols.rows) {
      ColumnMeta c;
      c.name = row.at(1).value_or("");
      c.sql_type = row.at(2).value_or("");
      c.is_numeric = is_numeric_kind(classify_sql_type(c.sql_type));
      const int pk_pos = std::stoi(row.at(5).value_or("0"));
      if (pk_pos > 0) {
        pk[pk_pos] = c.name;
      }
      t.columns.push_back(std::move(c));
    }
    for (const auto& [pos, name] : pk) {
      t.primary_key.push_back(name);
    }
    // id, seq, table, from, to, ...
    const ResultSet fks = conn.query("PRAGMA foreign_key_list(" + quote_identifier(tname) + ")");
    std::map<int, FkEdge> grouped;
    for (const auto& row : fks.rows) {
      const int id = std::stoi(row.at(0).value_or("0"));
      FkEdge& e = grouped[id];
      e.child_table = tname;
      e.parent_table = row.at(2).value_or("");
      e.constraint = tname + "_fk" + std::to_string(id);
      e.columns.push_back(ColumnPair{row.at(3).value_or(""), row.at(4).value_or("")});
    }
    for (auto& [id, e] : grouped) {
      edges.push_back(std::move(e));
    }
    tables.push_back(std::move(t));
  }
}

void read_postgres(Connection& conn, std::vector<TableMeta>& tables, std::vector<FkEdge>& edges) {
  const ResultSet names = conn.query(
      "SELECT c.relname FROM pg_class c JOIN pg_namespace n ON n.oid = c.relnamespace "
      "WHERE c.relkind IN ('r', 'p') AND n.nspname = current_schema() ORDER BY c.relname");
  for (const auto& tname : column_values(names)) {
    TableMeta t;
    t.name = tname;
    const std::string rel = sql_string(quote_identifier(tname)) + "::regclass";
    const ResultSet cols = conn.query(
        "SELECT a.attname, format_type(a.atttypid, a.atttypmod) FROM pg_attribute a "
        "WHERE a.attrelid = " + rel + " AND a.attnum > 0 AND NOT a.attisdropped ORDER BY a.attnum");
    for (const auto& row : cols.rows) {
      ColumnMeta c;
      c.name = row.at(0).value_or("");
      c.sql_type = row.at(1).value_or("");
      c.is_numeric = is_numeric_kind(classify_sql_type(c.sql_type));
      t.columns.push_back(std::move(c));
    }
    const ResultSet pk = conn.query(
        "SELECT a.attname FROM pg_index i "
        "CROSS JOIN LATERAL unnest(i.indkey) WITH ORDINALITY AS k(attnum, ord) "
        "JOIN pg_attribute a ON a.attrelid = i.indrelid AND a.attnum = k.attnum "
        "WHERE i.indrelid = " + rel + " AND i.indisprimary ORDER BY k.ord");
    t.primary_key = column_values(pk);
    tables.push_back(std::move(t));
  }
  const ResultSet fks = conn.query(
      "SELECT con.conname, cl.relname, pl.relname, ca.attname, pa.attname FROM pg_constraint con "
      "JOIN pg_class cl ON cl.oid = con.conrelid JOIN pg_class pl ON pl.oid = con.confrelid "
      "JOIN pg_namespace n ON n.oid = cl.relnamespace "
      "CROSS JOIN LATERAL unnest(con.conkey, con.confkey) WITH ORDINALITY AS k(ck, pk, ord) "
      "JOIN pg_attribute ca ON ca.attrelid = con.conrelid AND ca.attnum = k.ck "
      "JOIN pg_attribute pa ON pa.attrelid = con.confrelid AND pa.attnum = k.pk "
      "WHERE con.contype = 'f' AND n.nspname = current_schema() "
      "ORDER BY cl.relname, con.conname, k.ord");
  std::map<std::pair<std::string, std::string>, FkEdge> grouped;
  for (const auto& row : fks.rows) {
    const std::string child = row.at(1).value_or("");
    FkEdge& e = grouped[{child, row.at(0).value_or("")}];
    e.child_table = child;
    e.constraint = row.at(0).value_or("");
    e.parent_table = row.at(2).value_or("");
    e.columns.push_back(ColumnPair{row.at(3).value_or(""), row.at(4).value_or("")});
  }
  for (auto& [key, e] : grouped) {
    edges.push_back(std::move(e));
  }
}

std::vector<Literal> parse_values(const std::vector<std::string>& texts, ValueKind kind) {
  std::vector<Literal> out;
  for (const auto& s : texts) {
    out.push_back(literal_from_text(s, kind));
  }
  return out;
}

std::optional<ColumnStats> probe_stats(Connection& conn, const TableMeta& t, const ColumnMeta& c,
                                       const IntrospectOptions& opt) {
  const ValueKind kind = c.kind();
  const std::string col = quote_identifier(c.name);
  const std::string tbl = quote_identifier(t.name);
  std::vector<std::string> sample_text;
  if (conn.dialect() == Dialect::postgres) {
    const ResultSet mcv = conn.query(
        "SELECT unnest(most_common_vals::text::text[]) FROM pg_stats "
        "WHERE schemaname = current_schema() AND tablename = " + sql_string(t.name) +
        " AND attname = " + sql_string(c.name) + " LIMIT " + std::to_string(opt.max_samples));
    sample_text = column_values(mcv);
  }
  if (sample_text.empty()) {
    const ResultSet rs = conn.query(
        "SELECT v FROM (SELECT " + col + " AS v FROM " + tbl + " WHERE " + col + " IS NOT NULL LIMIT " +
        std::to_string(opt.sample_scan_rows) + ") s GROUP BY v ORDER BY COUNT(*) DESC, v LIMIT " +
        std::to_string(opt.max_samples));
    sample_text = column_values(rs);
  }
  if (sample_text.empty()) {
    return std::nullopt;
  }
  ColumnStats stats;
  try {
    stats.sample_values = parse_values(sample_text, kind);
  } catch (const ParseError&) {
    return std::nullopt;  // engine text form this build cannot read back
  }
  if (kind == ValueKind::text) {
    // Byte order, independent of the engine's collation.
    const auto [lo, hi] = std::minmax_element(sample_text.begin(), sample_text.end());
    stats.min_value = *lo;
    stats.max_value = *hi;
  } else {
    const ResultSet mm = conn.query("SELECT MIN(" + col + "), MAX(" + col + ") FROM " + tbl);
    if (mm.rows.empty() || !mm.rows[0].at(0) || !mm.rows[0].at(1)) {
      return std::nullopt;
    }
    stats.min_value = literal_from_text(*mm.rows[0][0], kind);
    stats.max_value = literal_from_text(*mm.rows[0][1], kind);
    // Most-common-value lists may be stale against the live min/max.
    std::erase_if(stats.sample_values, [&](const Literal& v) {
      return compare(v, stats.min_value) == std::partial_ordering::less ||
             compare(v, stats.max_value) == std::partial_ordering::greater;
    });
    if (stats.sample_values.empty()) {
      stats.sample_values.push_back(stats.min_value);
    }
  }
  return stats;
}

}  // namespace

SchemaGraph introspect_catalog(Connection& conn, const IntrospectOptions& options) {
  std::vector<TableMeta> tables;
  std::vector<FkEdge> edges;
  if (conn.dialect() == Dialect::sqlite) {
    read_sqlite(conn, tables, edges);
  } else {
    read_postgres(conn, tables, edges);
  }
  for (auto& t : tables) {
    for (auto& c : t.columns) {
      c.stats = probe_stats(conn, t, c, options);
    }
  }
  return SchemaGraph(std::move(tables), std::move(edges));
}

}  // namespace synql
