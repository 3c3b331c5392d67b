#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "synql/analysis.hpp"
#include "synql/db.hpp"
#include "synql/explain.hpp"
#include "synql/workload.hpp"

namespace synql {

/// Runs the plan-only statement (no execution) and parses it. PostgreSQL
/// JSON plans only; throws ConfigError on other dialects, DbError on engine
/// errors.
PlanNode collect_plan(Connection& conn, const std::string& sql);

/// Plan-only validity check on any dialect: nullopt when the engine accepts
/// the statement, else its error text.
std::optional<std::string> check_plan(Connection& conn, const std::string& sql);

/// Median of the values (mean of the middle pair for even counts). Throws
/// ValidationError on an empty input.
double median(std::vector<double> values);

struct MeasureOptions {
  int repeats = 5;
  int timeout_ms = 60000;
  bool warmup = true;
};

struct RuntimeMeasurement {
  double runtime_ms = 0.0;
  bool timed_out = false;
  bool errored = false;
  bool connection_lost = false;
  std::string error;
};

/// Back-to-back executions on one connection. A timeout on the warm-up or
/// any repeat ends measurement with runtime_ms = timeout_ms. Failed repeats
/// are dropped; all repeats failing makes the sample errored.
RuntimeMeasurement measure_runtime(Connection& conn, const std::string& sql,
                                   const MeasureOptions& options = {});

struct LabeledSample {
  std::uint64_t query_id = 0;
  Topology topology = Topology::star;
  std::optional<FeatureVector> features;
  double runtime_ms = 0.0;
  bool timed_out = false;
  bool errored = false;
  std::string error_text;
};

struct DatasetSummary {
  std::uint64_t total = 0;
  std::uint64_t ok = 0;
  std::uint64_t timed_out = 0;
  std::uint64_t errored = 0;
  bool connection_abandoned = false;
  double wall_seconds = 0.0;

  double timeout_fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(timed_out) / static_cast<double>(total);
  }
};

using ConnectionFactory = std::function<std::unique_ptr<Connection>()>;

struct DatasetOptions {
  MeasureOptions measure;
  // > 1 shards queries over independent connections from `factory`. Labels
  // from concurrent runs interfere with each other; use for plans only.
  unsigned parallel = 1;
  ConnectionFactory factory;
};

/// Label one query: plan features first, then timed executions.
LabeledSample label_query(Connection& conn, const WorkloadRecord& record, const MeasureOptions& options,
                          bool* connection_lost = nullptr);

/// One sample per record, in manifest order. A lost connection is retried
/// once (reconnect + rerun of that query); if that fails the remaining
/// queries are marked errored. Throws DbError before writing anything when
/// the database is unreachable.
std::vector<LabeledSample> label_workload(Connection& conn, const std::vector<WorkloadRecord>& records,
                                          const DatasetOptions& options, DatasetSummary* summary);

std::string dataset_csv_header();
std::string dataset_csv_row(const LabeledSample& sample);
nlohmann::ordered_json sample_to_json(const LabeledSample& sample);

/// Writes `out` (CSV) and, when given, the JSON-lines mirror, atomically.
DatasetSummary build_dataset(Connection& conn, const std::vector<WorkloadRecord>& records,
                             const std::filesystem::path& out, const std::filesystem::path& jsonl_out,
                             const DatasetOptions& options = {});

}  // namespace synql
