#include "synql/explain.hpp"

#include <algorithm>

#include "synql/error.hpp"
#include "synql/literal.hpp"

namespace synql {

namespace {

constexpr std::array<std::string_view, 6> kConditionKeys = {
    "Filter", "Join Filter", "Hash Cond", "Merge Cond", "Index Cond", "Recheck Cond"};

double number_at(const nlohmann::json& node, const char* key, const std::string& path) {
  const auto it = node.find(key);
  if (it == node.end()) {
    throw ParseError("plan node " + path + ": missing field '" + key + "'");
  }
  if (!it->is_number()) {
    throw ParseError("plan field " + path + "." + key + ": expected a number");
  }
  const double v = it->get<double>();
  if (v < 0) {
    throw ParseError("plan field " + path + "." + key + ": negative value " + format_double(v));
  }
  return v;
}

PlanNode node_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ParseError("plan node " + path + ": expected an object");
  }
  PlanNode n;
  const auto type = j.find("Node Type");
  if (type == j.end() || !type->is_string()) {
    throw ParseError("plan node " + path + ": missing field 'Node Type'");
  }
  n.node_type = type->get<std::string>();
  n.startup_cost = number_at(j, "Startup Cost", path);
  n.total_cost = number_at(j, "Total Cost", path);
  n.plan_rows = number_at(j, "Plan Rows", path);
  n.plan_width = static_cast<std::int64_t>(number_at(j, "Plan Width", path));
  if (auto rel = j.find("Relation Name"); rel != j.end() && rel->is_string()) {
    n.relation_name = rel->get<std::string>();
  }
  for (std::string_view key : kConditionKeys) {
    if (j.contains(std::string(key))) {
      ++n.condition_count;
      if (key == "Filter") {
        n.filter_present = true;
      } else if (key != "Index Cond" && key != "Recheck Cond") {
        n.join_condition_present = true;
      }
    }
  }
  if (auto kids = j.find("Plans"); kids != j.end()) {
    if (!kids->is_array()) {
      throw ParseError("plan field " + path + ".Plans: expected an array");
    }
    for (std::size_t i = 0; i < kids->size(); ++i) {
      n.children.push_back(node_from_json((*kids)[i], path + ".Plans[" + std::to_string(i) + "]"));
    }
  }
  return n;
}

struct Tally {
  FeatureVector f;

  void visit(const PlanNode& n, std::int64_t depth) {
    ++f.num_plan_nodes;
    f.plan_depth = std::max(f.plan_depth, depth);
    f.max_plan_rows = std::max(f.max_plan_rows, n.plan_rows);
    f.num_predicates += n.condition_count;
    const std::string& t = n.node_type;
    if (!n.relation_name.empty()) {
      ++f.num_relations;
    }
    if (t == "Seq Scan") {
      ++f.num_seq_scan;
    } else if (t == "Index Scan" || t == "Index Only Scan") {
      ++f.num_index_scan;
    } else if (t == "Bitmap Heap Scan" || t == "Bitmap Index Scan") {
      ++f.num_bitmap_scan;
    } else if (t == "Hash Join") {
      ++f.num_hash_join;
    } else if (t == "Merge Join") {
      ++f.num_merge_join;
    } else if (t == "Nested Loop") {
      ++f.num_nested_loop;
    } else if (t == "Aggregate" || t == "GroupAggregate" || t == "HashAggregate" ||
               t == "Partial Aggregate" || t == "Finalize Aggregate") {
      ++f.num_aggregate;
    } else if (t == "Sort" || t == "Incremental Sort") {
      ++f.num_sort;
    } else if (t == "Limit") {
      ++f.num_limit;
    } else if (t == "Materialize") {
      ++f.num_materialize;
    } else if (t == "Gather" || t == "Gather Merge") {
      ++f.num_gather;
    }
    for (const auto& c : n.children) {
      visit(c, depth + 1);
    }
  }
};

}  // namespace

const std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "plan_total_cost", "plan_startup_cost", "plan_rows",       "plan_width",     "max_plan_rows",
    "num_plan_nodes",  "plan_depth",        "num_joins",       "num_relations",  "num_predicates",
    "num_seq_scan",    "num_index_scan",    "num_bitmap_scan", "num_hash_join",  "num_merge_join",
    "num_nested_loop", "num_aggregate",     "num_sort",        "num_limit",      "num_materialize",
    "num_gather"};

PlanNode plan_from_json(const nlohmann::json& doc) {
  const nlohmann::json* j = &doc;
  if (j->is_array()) {
    if (j->empty()) {
      throw ParseError("plan document: empty array");
    }
    j = &(*j)[0];
  }
  if (j->is_object() && j->contains("Plan")) {
    j = &(*j)["Plan"];
  } else if (!(j->is_object() && j->contains("Node Type"))) {
    throw ParseError("plan document: no top-level \"Plan\" object");
  }
  return node_from_json(*j, "Plan");
}

PlanNode parse_explain(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("plan document: ") + e.what());
  }
  return plan_from_json(doc);
}

FeatureVector extract_features(const PlanNode& plan) {
  Tally t;
  t.f.plan_total_cost = plan.total_cost;
  t.f.plan_startup_cost = plan.startup_cost;
  t.f.plan_rows = plan.plan_rows;
  t.f.plan_width = static_cast<double>(plan.plan_width);
  t.visit(plan, 1);
  t.f.num_joins = t.f.num_hash_join + t.f.num_merge_join + t.f.num_nested_loop;
  return t.f;
}

std::array<double, kFeatureCount> FeatureVector::values() const {
  const auto d = [](std::int64_t v) { return static_cast<double>(v); };
  return {plan_total_cost,      plan_startup_cost,     plan_rows,          plan_width,
          max_plan_rows,        d(num_plan_nodes),     d(plan_depth),      d(num_joins),
          d(num_relations),     d(num_predicates),     d(num_seq_scan),    d(num_index_scan),
          d(num_bitmap_scan),   d(num_hash_join),      d(num_merge_join),  d(num_nested_loop),
          d(num_aggregate),     d(num_sort),           d(num_limit),       d(num_materialize),
          d(num_gather)};
}

std::vector<std::string> feature_cells(const FeatureVector& f) {
  std::vector<std::string> out;
  const auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i < 5) {
      out.push_back(format_double(v[i]));
    } else {
      out.push_back(std::to_string(static_cast<std::int64_t>(v[i])));
    }
  }
  return out;
}

}  // namespace synql
