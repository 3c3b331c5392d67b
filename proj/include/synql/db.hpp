#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synql/schema.hpp"

namespace synql {

enum class Dialect { sqlite, postgres };

std::string_view to_string(Dialect d);

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<std::string>>> rows;  // text form; nullopt is NULL
};

enum class ExecStatus { ok, timed_out, error, connection_lost };

struct ExecResult {
  ExecStatus status = ExecStatus::ok;
  double elapsed_ms = 0.0;
  std::string error;
};

class Connection {
 public:
  virtual ~Connection() = default;

  virtual Dialect dialect() const = 0;
  /// Runs a statement and returns its rows; throws DbError.
  virtual ResultSet query(const std::string& sql) = 0;
  /// Runs one or more statements that return no rows; throws DbError.
  virtual void execute(const std::string& sql) = 0;
  /// Runs `sql` once under a statement timeout (<= 0 disables it), fetching
  /// and discarding every row. Wall time covers the full round trip. Never
  /// throws for engine-side failures.
  virtual ExecResult execute_timed(const std::string& sql, int timeout_ms) = 0;
  virtual bool is_alive() = 0;
  /// Re-establishes the session; throws DbError when that fails.
  virtual void reconnect() = 0;
  virtual std::string describe() const = 0;
};

/// `sqlite::memory:`, `sqlite:PATH`, or a libpq URL (`postgresql://...`,
/// `postgres://...`).
std::unique_ptr<Connection> connect(const std::string& url);

/// The flag value when given, else $SYNQL_DB_URL; throws ConfigError if both
/// are empty.
std::string resolve_db_url(const std::string& flag);

bool postgres_supported();

/// Plan-only statement: `EXPLAIN (FORMAT JSON)` on PostgreSQL, `EXPLAIN QUERY
/// PLAN` on SQLite.
std::string explain_statement(Dialect dialect, std::string_view sql);

struct DdlOptions {
  bool foreign_keys = true;
  bool drop_existing = false;
};

/// CREATE TABLE statements in dependency order. SQLite declares foreign keys
/// inline; PostgreSQL gets trailing ALTER TABLE ... ADD CONSTRAINT statements
/// so data can be loaded before constraints are checked.
std::vector<std::string> schema_ddl(const SchemaGraph& graph, Dialect dialect,
                                    const DdlOptions& options = {});
void create_schema(Connection& conn, const SchemaGraph& graph, const DdlOptions& options = {});

/// Fills every table with up to `rows_per_table` deterministic rows drawn
/// from the column statistics, keeping primary keys unique and foreign keys
/// pointing at existing parent rows. Tables must already exist without rows.
/// Single integer keys are numbered from their stats minimum, so small
/// dimension tables get fewer rows.
void populate_synthetic(Connection& conn, const SchemaGraph& graph, std::uint64_t rows_per_table,
                        std::uint64_t seed);

/// Tables ordered so that every FK parent precedes its children (cycles are
/// broken by name order).
std::vector<std::string> dependency_order(const SchemaGraph& graph);

}  // namespace synql
