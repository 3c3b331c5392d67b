#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "synql/literal.hpp"
#include "synql/rng.hpp"

namespace synql {

struct ColumnStats {
  Literal min_value;
  Literal max_value;
  std::vector<Literal> sample_values;  // at least one entry
  std::optional<std::uint64_t> distinct_estimate;
};

struct ColumnMeta {
  std::string name;
  std::string sql_type;
  bool is_numeric = false;
  // Absent when the engine exposed no statistics (e.g. an empty table);
  // such columns are never used in predicates.
  std::optional<ColumnStats> stats;

  ValueKind kind() const { return classify_sql_type(sql_type); }
};

struct TableMeta {
  std::string name;
  std::vector<ColumnMeta> columns;
  std::vector<std::string> primary_key;

  const ColumnMeta* find_column(std::string_view column) const;
};

struct ColumnPair {
  std::string child_column;
  std::string parent_column;

  bool operator==(const ColumnPair&) const = default;
};

/// One PK-FK relationship. Composite keys carry several column pairs that are
/// always joined together.
struct FkEdge {
  std::string child_table;
  std::string parent_table;
  std::vector<ColumnPair> columns;
  std::string constraint;  // optional name, empty when unnamed

  bool connects(std::string_view a, std::string_view b) const {
    return (child_table == a && parent_table == b) || (child_table == b && parent_table == a);
  }
  bool operator==(const FkEdge&) const = default;
};

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

/// Immutable schema graph: tables sorted by name, edges sorted by
/// (child, parent, columns). Construction validates every invariant and
/// precomputes undirected hop distances.
class SchemaGraph {
 public:
  SchemaGraph() = default;

  /// Throws ValidationError naming the offending entity. Self-referencing
  /// edges are dropped and reported through warnings().
  SchemaGraph(std::vector<TableMeta> tables, std::vector<FkEdge> edges);

  const std::vector<TableMeta>& tables() const { return tables_; }
  const std::vector<FkEdge>& edges() const { return edges_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool empty() const { return tables_.empty(); }
  std::size_t table_count() const { return tables_.size(); }

  std::optional<std::size_t> table_index(std::string_view name) const;
  const TableMeta* find_table(std::string_view name) const;
  const TableMeta& table_at(std::size_t index) const { return tables_.at(index); }

  /// Endpoint table indices of edge i.
  std::size_t edge_child(std::size_t edge) const { return endpoints_.at(edge).first; }
  std::size_t edge_parent(std::size_t edge) const { return endpoints_.at(edge).second; }

  /// Undirected hop count by table index; kUnreachable across components.
  std::size_t distance(std::size_t from, std::size_t to) const {
    return distances_[from * tables_.size() + to];
  }

  /// Edge indices incident to a table, in edge order.
  const std::vector<std::size_t>& incident_edges(std::size_t table) const {
    return incident_.at(table);
  }

 private:
  std::vector<TableMeta> tables_;
  std::vector<FkEdge> edges_;
  std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::size_t> distances_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> warnings_;
};

/// Shortest-path hop count on the undirected FK graph; kUnreachable when the
/// tables lie in different components. Throws ValidationError for unknown
/// tables.
std::size_t fk_distance(const SchemaGraph& graph, std::string_view table, std::string_view root);

/// Probability of drawing from sample_values instead of the uniform range.
inline constexpr double kSampleProbability = 0.5;

/// Draws a literal inside [min_value, max_value]. Text columns always draw
/// from sample_values; ordered kinds mix samples and uniform range draws.
Literal sample_domain_value(const ColumnStats& stats, RandomStream& rng);

/// Parses and validates the schema file document.
SchemaGraph schema_from_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const SchemaGraph& graph);

SchemaGraph load_schema_file(const std::filesystem::path& path);
void save_schema_file(const SchemaGraph& graph, const std::filesystem::path& path);

/// Checks a single column's stats against its kind; returns the first
/// problem or nullopt.
std::optional<std::string> check_stats(const ColumnMeta& column);

}  // namespace synql
