#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "synql/analysis.hpp"
#include "synql/schema.hpp"
#include "synql/synthesis.hpp"
#include "synql/traversal.hpp"

namespace synql {

struct ThetaConfig {
  TraversalParams traversal;
  SemanticParams semantics;
  std::uint64_t n_queries = 1000;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError naming field and bound
};

/// Flat `key = value` document (TOML subset: `#` comments, bare numbers,
/// quoted strings). Unknown or repeated keys are errors.
ThetaConfig parse_theta(std::string_view text, const std::string& source = "<theta>");
ThetaConfig load_theta(const std::filesystem::path& path);

struct ManifestJoinEdge {
  std::string child;
  std::string parent;
  std::vector<ColumnPair> on;

  bool operator==(const ManifestJoinEdge&) const = default;
};

struct WorkloadRecord {
  std::uint64_t query_id = 0;
  std::string sql;
  std::string root_table;
  std::vector<std::string> tables;
  std::vector<ManifestJoinEdge> join_edges;
  Topology topology = Topology::star;
  bool has_agg = false;
  int num_predicates = 0;

  bool operator==(const WorkloadRecord&) const = default;
};

nlohmann::ordered_json record_to_json(const WorkloadRecord& record);
WorkloadRecord record_from_json(const nlohmann::json& doc);

/// Manifest line for a record, without the trailing newline.
std::string manifest_line(const WorkloadRecord& record);

struct GeneratedQuery {
  JoinBlueprint blueprint;
  QueryAst ast;
  WorkloadRecord record;
};

/// Query `index` of the workload, drawn from RandomStream::for_query(seed,
/// index) so it does not depend on any other query.
GeneratedQuery generate_query(const SchemaGraph& graph, const ThetaConfig& theta,
                              std::uint64_t index,
                              std::vector<ExpansionStep>* trace = nullptr);

using RecordSink = std::function<void(const GeneratedQuery&)>;

/// Drives Phase I + II for query ids 0..n_queries-1 and hands each query to
/// `sink` in id order. threads > 1 generates in parallel blocks; output
/// order and bytes are identical to the sequential run.
void generate_workload(const SchemaGraph& graph, const ThetaConfig& theta, const RecordSink& sink,
                       unsigned threads = 1);

struct WorkloadSummary {
  std::uint64_t queries = 0;
  DiversityReport diversity;
  double seconds = 0.0;
};

/// Writes the JSONL manifest (and optionally the `;`-terminated .sql
/// export) atomically.
WorkloadSummary write_workload(const SchemaGraph& graph, const ThetaConfig& theta,
                               const std::filesystem::path& manifest,
                               const std::filesystem::path& sql_out = {}, unsigned threads = 1);

/// Streams a manifest; errors name the file and line.
void read_manifest(const std::filesystem::path& path,
                   const std::function<void(const WorkloadRecord&)>& visit);
std::vector<WorkloadRecord> load_manifest(const std::filesystem::path& path);

}  // namespace synql
