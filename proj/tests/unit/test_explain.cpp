#include <gtest/gtest.h>

#include "support.hpp"
#include "synql/error.hpp"
#include "synql/explain.hpp"

using namespace synql;

namespace {

FeatureVector features_of(const std::string& fixture) {
  return extract_features(parse_explain(test::read_text(test::fixture_dir() / "plans" / fixture)));
}

std::string parse_failure(const std::string& text) {
  try {
    parse_explain(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

// Expected vectors below were tallied by hand from the fixture files.

TEST(Features, SingleScan) {
  FeatureVector e;
  e.plan_total_cost = 155.0;
  e.plan_startup_cost = 0.0;
  e.plan_rows = 10000;
  e.plan_width = 8;
  e.max_plan_rows = 10000;
  e.num_plan_nodes = 1;
  e.plan_depth = 1;
  e.num_relations = 1;
  e.num_seq_scan = 1;
  EXPECT_EQ(features_of("seq_scan_only.json"), e);
}

TEST(Features, HashJoinPair) {
  FeatureVector e;
  e.plan_total_cost = 3.36;
  e.plan_startup_cost = 1.56;
  e.plan_rows = 25;
  e.plan_width = 108;
  e.max_plan_rows = 25;
  e.num_plan_nodes = 4;
  e.plan_depth = 3;
  e.num_joins = 1;
  e.num_relations = 2;
  e.num_predicates = 2;  // Hash Cond + Filter
  e.num_seq_scan = 2;
  e.num_hash_join = 1;
  EXPECT_EQ(features_of("hash_join.json"), e);
}

TEST(Features, AggregateSortLimitChain) {
  FeatureVector e;
  e.plan_total_cost = 812.65;
  e.plan_startup_cost = 812.40;
  e.plan_rows = 100;
  e.plan_width = 40;
  e.max_plan_rows = 15000;
  e.num_plan_nodes = 8;
  e.plan_depth = 7;
  e.num_joins = 1;
  e.num_relations = 2;
  e.num_predicates = 5;  // Filter, Join Filter, Index Cond x2, Recheck Cond
  e.num_index_scan = 1;
  e.num_bitmap_scan = 2;
  e.num_nested_loop = 1;
  e.num_aggregate = 1;
  e.num_sort = 1;
  e.num_limit = 1;
  e.num_materialize = 1;
  EXPECT_EQ(features_of("agg_sort_limit.json"), e);
}

TEST(Features, NamesAndCells) {
  EXPECT_EQ(kFeatureNames.size(), 21u);
  EXPECT_EQ(kFeatureNames.front(), "plan_total_cost");
  EXPECT_EQ(kFeatureNames.back(), "num_gather");
  const auto cells = feature_cells(features_of("hash_join.json"));
  ASSERT_EQ(cells.size(), 21u);
  EXPECT_EQ(cells[0], "3.36");
  EXPECT_EQ(cells[2], "25");
  EXPECT_EQ(cells[5], "4");
}

TEST(Features, OtherOperatorFamilies) {
  const FeatureVector f = extract_features(parse_explain(R"json({"Plan": {
    "Node Type": "Gather Merge", "Startup Cost": 1, "Total Cost": 9, "Plan Rows": 3, "Plan Width": 4,
    "Plans": [{"Node Type": "Merge Join", "Startup Cost": 1, "Total Cost": 8, "Plan Rows": 3, "Plan Width": 4,
               "Merge Cond": "(a.id = b.id)",
               "Plans": [{"Node Type": "Index Only Scan", "Relation Name": "a", "Startup Cost": 0,
                          "Total Cost": 2, "Plan Rows": 3, "Plan Width": 4},
                         {"Node Type": "Incremental Sort", "Startup Cost": 0, "Total Cost": 3,
                          "Plan Rows": 3, "Plan Width": 4,
                          "Plans": [{"Node Type": "Seq Scan", "Relation Name": "b", "Startup Cost": 0,
                                     "Total Cost": 1, "Plan Rows": 3, "Plan Width": 4}]}]}]}})json"));
  EXPECT_EQ(f.num_gather, 1);
  EXPECT_EQ(f.num_merge_join, 1);
  EXPECT_EQ(f.num_index_scan, 1);
  EXPECT_EQ(f.num_sort, 1);
  EXPECT_EQ(f.num_joins, 1);
  EXPECT_EQ(f.plan_depth, 4);
  EXPECT_EQ(f.num_predicates, 1);
}

TEST(Explain, AcceptsBareNodeAndPlanObject) {
  const std::string node = R"json({"Node Type": "Result", "Startup Cost": 0, "Total Cost": 0.01, "Plan Rows": 1, "Plan Width": 4})json";
  EXPECT_EQ(parse_explain(node).node_type, "Result");
  EXPECT_EQ(parse_explain("{\"Plan\": " + node + "}").total_cost, 0.01);
  EXPECT_EQ(parse_explain("[{\"Plan\": " + node + ", \"Planning Time\": 0.1}]").plan_width, 4);
}

TEST(Explain, ErrorsNameTheFieldPath) {
  const std::string missing = test::read_text(test::fixture_dir() / "plans" / "missing_cost.json");
  EXPECT_EQ(parse_failure(missing), "plan node Plan.Plans[1]: missing field 'Total Cost'");
  EXPECT_NE(parse_failure(test::read_text(test::fixture_dir() / "plans" / "truncated.json")).find("plan document"),
            std::string::npos);
  EXPECT_EQ(parse_failure("[]"), "plan document: empty array");
  EXPECT_NE(parse_failure(R"json({"Plan": {"Node Type": "X", "Startup Cost": -1, "Total Cost": 1, "Plan Rows": 1, "Plan Width": 1}})json")
                .find("negative"),
            std::string::npos);
  EXPECT_NE(parse_failure(R"json({"Plan": {"Node Type": "X", "Startup Cost": "a", "Total Cost": 1, "Plan Rows": 1, "Plan Width": 1}})json")
                .find("Plan.Startup Cost: expected a number"),
            std::string::npos);
  EXPECT_NE(parse_failure(R"json({"something": 1})json").find("no top-level"), std::string::npos);
}
