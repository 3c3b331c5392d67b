#include "synql/db.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include "synql/error.hpp"
#include "synql/synthesis.hpp"

namespace synql {

std::unique_ptr<Connection> open_sqlite(const std::string& path);
std::unique_ptr<Connection> open_postgres(const std::string& url);

std::string_view to_string(Dialect d) { return d == Dialect::sqlite ? "sqlite" : "postgres"; }

bool postgres_supported() {
#ifdef SYNQL_WITH_LIBPQ
  return true;
#else
  return false;
#endif
}

std::unique_ptr<Connection> connect(const std::string& url) {
  if (url.rfind("sqlite:", 0) == 0) {
    std::string path = url.substr(7);
    if (path.rfind("//", 0) == 0) {
      path = path.substr(2);
    }
    if (path.empty()) {
      throw ConfigError("sqlite URL '" + url + "' names no database file");
    }
    return open_sqlite(path);
  }
  if (url.rfind("postgresql://", 0) == 0 || url.rfind("postgres://", 0) == 0) {
    if (!postgres_supported()) {
      throw ConfigError("this build has no PostgreSQL support (libpq was not found)");
    }
    return open_postgres(url);
  }
  throw ConfigError("unsupported database URL '" + url +
                    "' (expected sqlite:PATH, postgresql://... or postgres://...)");
}

std::string resolve_db_url(const std::string& flag) {
  if (!flag.empty()) {
    return flag;
  }
  if (const char* env = std::getenv("SYNQL_DB_URL"); env && *env) {
    return env;
  }
  throw ConfigError("no database given: pass --db-url or set SYNQL_DB_URL");
}

std::string explain_statement(Dialect dialect, std::string_view sql) {
  return (dialect == Dialect::postgres ? "EXPLAIN (FORMAT JSON) " : "EXPLAIN QUERY PLAN ") +
         std::string(sql);
}

std::vector<std::string> dependency_order(const SchemaGraph& graph) {
  std::map<std::string, std::set<std::string>> parents;
  for (const auto& t : graph.tables()) {
    parents[t.name];
  }
  for (const auto& e : graph.edges()) {
    parents[e.child_table].insert(e.parent_table);
  }
  std::vector<std::string> order;
  std::set<std::string> placed;
  while (order.size() < parents.size()) {
    bool progress = false;
    for (const auto& [table, ps] : parents) {
      if (placed.count(table)) {
        continue;
      }
      if (std::all_of(ps.begin(), ps.end(), [&](const std::string& p) { return placed.count(p) > 0; })) {
        order.push_back(table);
        placed.insert(table);
        progress = true;
      }
    }
    if (!progress) {
      for (const auto& [table, ps] : parents) {
        if (!placed.count(table)) {
          order.push_back(table);
          placed.insert(table);
          break;
        }
      }
    }
  }
  return order;
}

namespace {

std::string fk_clause(const FkEdge& e) {
  std::string child_cols;
  std::string parent_cols;
  for (const auto& p : e.columns) {
    if (!child_cols.empty()) {
      child_cols += ", ";
      parent_cols += ", ";
    }
    child_cols += quote_identifier(p.child_column);
    parent_cols += quote_identifier(p.parent_column);
  }
  return "FOREIGN KEY (" + child_cols + ") REFERENCES " + quote_identifier(e.parent_table) + " (" +
         parent_cols + ")";
}

std::string values_row(const std::vector<Literal>& row) {
  std::string out = "(";
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += to_sql(row[i]);
  }
  return out + ")";
}

}  // namespace

std::vector<std::string> schema_ddl(const SchemaGraph& graph, Dialect dialect, const DdlOptions& options) {
  std::vector<std::string> out;
  const std::vector<std::string> order = dependency_order(graph);
  if (options.drop_existing) {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      out.push_back("DROP TABLE IF EXISTS " + quote_identifier(*it) +
                    (dialect == Dialect::postgres ? " CASCADE" : ""));
    }
  }
  for (const auto& name : order) {
    const TableMeta& t = *graph.find_table(name);
    std::string sql = "CREATE TABLE " + quote_identifier(t.name) + " (";
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (i > 0) {
        sql += ", ";
      }
      sql += quote_identifier(t.columns[i].name) + " " + t.columns[i].sql_type;
    }
    if (!t.primary_key.empty()) {
      sql += ", PRIMARY KEY (";
      for (std::size_t i = 0; i < t.primary_key.size(); ++i) {
        sql += (i > 0 ? ", " : "") + quote_identifier(t.primary_key[i]);
      }
      sql += ")";
    }
    if (options.foreign_keys && dialect == Dialect::sqlite) {
      for (const auto& e : graph.edges()) {
        if (e.child_table == t.name) {
          sql += ", " + fk_clause(e);
        }
      }
    }
    sql += ")";
    out.push_back(std::move(sql));
  }
  if (options.foreign_keys && dialect == Dialect::postgres) {
    std::map<std::string, int> per_table;
    for (const auto& e : graph.edges()) {
      const std::string name = e.constraint.empty()
                                   ? e.child_table + "_fk" + std::to_string(++per_table[e.child_table])
                                   : e.constraint;
      out.push_back("ALTER TABLE " + quote_identifier(e.child_table) + " ADD CONSTRAINT " +
                    quote_identifier(name) + " " + fk_clause(e));
    }
  }
  return out;
}

void create_schema(Connection& conn, const SchemaGraph& graph, const DdlOptions& options) {
  for (const auto& stmt : schema_ddl(graph, conn.dialect(), options)) {
    conn.execute(stmt);
  }
}

void populate_synthetic(Connection& conn, const SchemaGraph& graph, std::uint64_t rows_per_table,
                        std::uint64_t seed) {
  std::map<std::string, std::vector<std::vector<Literal>>> rows;
  RandomStream rng(seed);
  conn.execute("BEGIN");
  for (const auto& name : dependency_order(graph)) {
    const TableMeta& t = *graph.find_table(name);
    std::map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      col_index[t.columns[i].name] = i;
    }
    // FK edges whose parent rows already exist; each row copies one parent.
    std::vector<const FkEdge*> fks;
    for (const auto& e : graph.edges()) {
      if (e.child_table == name && rows.count(e.parent_table) && !rows[e.parent_table].empty()) {
        fks.push_back(&e);
      }
    }
    std::optional<std::size_t> serial;
    std::int64_t serial_start = 1;
    std::uint64_t target = rows_per_table;
    if (t.primary_key.size() == 1) {
      const std::size_t ci = col_index.at(t.primary_key.front());
      const ColumnMeta& c = t.columns[ci];
      const bool is_fk = std::any_of(fks.begin(), fks.end(), [&](const FkEdge* e) {
        return std::any_of(e->columns.begin(), e->columns.end(),
                           [&](const ColumnPair& p) { return p.child_column == c.name; });
      });
      if (c.kind() == ValueKind::integer && !is_fk) {
        serial = ci;
        if (c.stats) {
          serial_start = std::get<std::int64_t>(c.stats->min_value);
          const auto span = std::get<std::int64_t>(c.stats->max_value) - serial_start + 1;
          target = std::min<std::uint64_t>(target, static_cast<std::uint64_t>(span));
        }
      }
    }
    std::vector<std::size_t> pk_cols;
    for (const auto& pk : t.primary_key) {
      pk_cols.push_back(col_index.at(pk));
    }
    std::set<std::vector<std::string>> seen_keys;
    auto& out = rows[name];
    for (std::uint64_t r = 0; r < target; ++r) {
      for (int attempt = 0; attempt < 20; ++attempt) {
        std::vector<Literal> row;
        for (std::size_t ci = 0; ci < t.columns.size(); ++ci) {
          const ColumnMeta& c = t.columns[ci];
          if (serial && ci == *serial) {
            row.emplace_back(serial_start + static_cast<std::int64_t>(r));
          } else if (c.stats) {
            row.push_back(sample_domain_value(*c.stats, rng));
          } else if (c.kind() == ValueKind::integer) {
            row.emplace_back(static_cast<std::int64_t>(r + 1));
          } else if (c.kind() == ValueKind::real) {
            row.emplace_back(static_cast<double>(r + 1));
          } else if (c.kind() == ValueKind::date) {
            row.emplace_back(Date{static_cast<std::int32_t>(r % 3650 + 8036)});
          } else {
            row.emplace_back(c.name + "_" + std::to_string(r + 1));
          }
        }
        for (const FkEdge* e : fks) {
          const auto& parents = rows[e->parent_table];
          const auto& parent_row = parents[rng.uniform_below(parents.size())];
          const TableMeta& pt = *graph.find_table(e->parent_table);
          for (const auto& p : e->columns) {
            std::size_t pi = 0;
            while (pt.columns[pi].name != p.parent_column) {
              ++pi;
            }
            row[col_index.at(p.child_column)] = parent_row[pi];
          }
        }
        std::vector<std::string> key;
        for (std::size_t ci : pk_cols) {
          key.push_back(to_sql(row[ci]));
        }
        if (pk_cols.empty() || seen_keys.insert(key).second) {
          out.push_back(std::move(row));
          break;
        }
      }
    }
    constexpr std::size_t kBatch = 500;
    for (std::size_t start = 0; start < out.size(); start += kBatch) {
      std::string sql = "INSERT INTO " + quote_identifier(name) + " VALUES ";
      for (std::size_t i = start; i < std::min(out.size(), start + kBatch); ++i) {
        sql += (i > start ? ", " : "") + values_row(out[i]);
      }
      conn.execute(sql);
    }
  }
  conn.execute("COMMIT");
  if (conn.dialect() == Dialect::postgres) {
    conn.execute("ANALYZE");
  }
}

}  // namespace synql
