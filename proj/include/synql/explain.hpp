#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace synql {

struct PlanNode {
  std::string node_type;
  double startup_cost = 0.0;
  double total_cost = 0.0;
  double plan_rows = 0.0;
  std::int64_t plan_width = 0;
  std::string relation_name;  // empty for non-scan nodes
  bool filter_present = false;
  bool join_condition_present = false;
  int condition_count = 0;  // Filter, Join Filter, Hash/Merge/Index/Recheck Cond attributes
  std::vector<PlanNode> children;
};

/// Accepts the engine's plan array (`[{"Plan": {...}}]`), a single
/// `{"Plan": ...}` object, or a bare plan node. Errors name the field path,
/// e.g. `Plan.Plans[1].Total Cost`. Execution-time fields are ignored.
PlanNode parse_explain(std::string_view text);
PlanNode plan_from_json(const nlohmann::json& doc);

inline constexpr std::size_t kFeatureCount = 21;

/// Column order of the dataset file.
extern const std::array<std::string_view, kFeatureCount> kFeatureNames;

struct FeatureVector {
  double plan_total_cost = 0.0;
  double plan_startup_cost = 0.0;
  double plan_rows = 0.0;
  double plan_width = 0.0;
  double max_plan_rows = 0.0;
  std::int64_t num_plan_nodes = 0;
  std::int64_t plan_depth = 0;
  std::int64_t num_joins = 0;
  std::int64_t num_relations = 0;
  std::int64_t num_predicates = 0;
  std::int64_t num_seq_scan = 0;
  std::int64_t num_index_scan = 0;
  std::int64_t num_bitmap_scan = 0;
  std::int64_t num_hash_join = 0;
  std::int64_t num_merge_join = 0;
  std::int64_t num_nested_loop = 0;
  std::int64_t num_aggregate = 0;
  std::int64_t num_sort = 0;
  std::int64_t num_limit = 0;
  std::int64_t num_materialize = 0;
  std::int64_t num_gather = 0;

  std::array<double, kFeatureCount> values() const;
  bool operator==(const FeatureVector&) const = default;
};

FeatureVector extract_features(const PlanNode& plan);

/// Cells for CSV output: integers without a fraction, costs shortest-exact.
std::vector<std::string> feature_cells(const FeatureVector& f);

}  // namespace synql
