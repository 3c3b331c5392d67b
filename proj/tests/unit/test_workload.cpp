#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "support.hpp"
#include "synql/error.hpp"
#include "synql/workload.hpp"

using namespace synql;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("synql-unit-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

ThetaConfig small_theta(std::uint64_t n, std::uint64_t seed = 7) {
  ThetaConfig t;
  t.n_queries = n;
  t.seed = seed;
  return t;
}

std::string config_error(const std::string& text) {
  try {
    parse_theta(text, "t.toml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Theta, BundledPresetsLoad) {
  const ThetaConfig b = load_theta(test::data_dir() / "presets" / "tpch_balanced.toml");
  EXPECT_EQ(b.traversal.alpha_shape, 0.5);
  EXPECT_EQ(b.traversal.k_join, 3);
  EXPECT_EQ(b.semantics.p_agg, 0.2);
  EXPECT_EQ(b.semantics.p_where, 0.4);
  EXPECT_EQ(b.semantics.k_pred, 3);
  EXPECT_EQ(b.n_queries, 10000u);
  EXPECT_EQ(b.seed, 42u);
  const ThetaConfig cs4 = load_theta(test::data_dir() / "presets" / "cs4_deep_chain_imdb.toml");
  EXPECT_EQ(cs4.traversal.alpha_shape, 0.1);
  EXPECT_EQ(cs4.traversal.k_join, 4);
  EXPECT_EQ(cs4.semantics.p_agg, 1.0);
  EXPECT_EQ(cs4.semantics.p_where, 0.0);
  for (const auto& entry : fs::directory_iterator(test::data_dir() / "presets")) {
    EXPECT_NO_THROW(load_theta(entry.path())) << entry.path();
  }
}

TEST(Theta, DefaultsCommentsAndStrings) {
  const ThetaConfig t = parse_theta("# nothing but a comment\n\nk_join = 5  # trailing\npredicate_ops = \"gt_only\"\nn_queries = 20_000\n");
  EXPECT_EQ(t.traversal.k_join, 5);
  EXPECT_EQ(t.traversal.alpha_shape, 0.5);
  EXPECT_EQ(t.semantics.predicate_ops, PredicateOps::gt_only);
  EXPECT_EQ(t.n_queries, 20000u);
  EXPECT_EQ(t.seed, 0u);
}

TEST(Theta, ErrorsNameKeyAndLine) {
  EXPECT_EQ(config_error("k_join = 3\nalpha_shape = 1.5\n"), "t.toml:2: alpha_shape = 1.5 is out of range [0, 1]");
  EXPECT_EQ(config_error("alpha = 0.5\n"), "t.toml:1: unknown key 'alpha'");
  EXPECT_EQ(config_error("k_join = 2\nk_join = 3\n"), "t.toml:2: duplicate key 'k_join'");
  EXPECT_EQ(config_error("k_join = three\n"), "t.toml:1: k_join: expected an integer, got 'three'");
  EXPECT_EQ(config_error("[traversal]\n"), "t.toml:1: tables/sections are not supported; use top-level keys");
  EXPECT_NE(config_error("k_join = 0\n").find("k_join = 0 must be >= 1"), std::string::npos);
  EXPECT_NE(config_error("p_where = -0.1\n").find("p_where"), std::string::npos);
  EXPECT_NE(config_error("n_queries = -5\n").find("n_queries"), std::string::npos);
  EXPECT_NE(config_error("predicate_ops = \"lt\"\n").find("predicate_ops"), std::string::npos);
  EXPECT_THROW(load_theta("/nonexistent/theta.toml"), ConfigError);
}

TEST(Workload, RecordJsonRoundTrip) {
  const GeneratedQuery q = generate_query(test::tpch(), small_theta(1), 3);
  const std::string line = manifest_line(q.record);
  EXPECT_EQ(line.rfind("{\"query_id\":3,\"sql\":", 0), 0u) << line;
  EXPECT_EQ(record_from_json(nlohmann::json::parse(line)), q.record);
  EXPECT_THROW(record_from_json(nlohmann::json::parse(R"({"query_id": 1})")), ParseError);
}

TEST(Workload, QueryIsIndependentOfOtherQueries) {
  const ThetaConfig a = small_theta(50);
  ThetaConfig b = small_theta(5000);
  b.n_queries = 5000;
  EXPECT_EQ(generate_query(test::imdb(), a, 17).record, generate_query(test::imdb(), b, 17).record);
  std::vector<WorkloadRecord> seq;
  generate_workload(test::imdb(), a, [&](const GeneratedQuery& q) { seq.push_back(q.record); });
  ASSERT_EQ(seq.size(), 50u);
  for (std::uint64_t i = 0; i < 50; ++i) {
    ASSERT_EQ(seq[i].query_id, i);
    ASSERT_EQ(seq[i], generate_query(test::imdb(), a, i).record);
  }
}

TEST(Workload, SeedChangesTheWorkload) {
  int differing = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    differing += generate_query(test::tpch(), small_theta(50, 1), i).record.sql !=
                 generate_query(test::tpch(), small_theta(50, 2), i).record.sql;
  }
  EXPECT_GT(differing, 30);
}

TEST(Workload, ParallelOutputMatchesSequential) {
  const ThetaConfig t = small_theta(5000);
  const fs::path seq = scratch("seq.jsonl"), par = scratch("par.jsonl");
  const auto s1 = write_workload(test::tpch(), t, seq, {}, 1);
  const auto s2 = write_workload(test::tpch(), t, par, {}, 4);
  EXPECT_EQ(s1.queries, 5000u);
  EXPECT_EQ(test::read_text(seq), test::read_text(par));
  EXPECT_EQ(s1.diversity.counts, s2.diversity.counts);
}

TEST(Workload, ManifestAndSqlExport) {
  const fs::path m = scratch("w.jsonl"), sql = scratch("w.sql");
  const auto summary = write_workload(test::imdb(), small_theta(200), m, sql);
  const auto records = load_manifest(m);
  ASSERT_EQ(records.size(), 200u);
  std::uint64_t single = 0;
  for (const auto& r : records) {
    single += r.join_edges.empty();
    EXPECT_EQ(r.tables.size(), r.join_edges.size() + 1);
    EXPECT_EQ(r.tables.front(), r.root_table);
  }
  EXPECT_EQ(summary.diversity.single_table, single);
  EXPECT_EQ(summary.diversity.total, 200u);
  EXPECT_EQ(split_statements(test::read_text(sql)).size(), 200u);
}

TEST(Workload, ManifestErrorsNameTheLine) {
  const fs::path m = scratch("bad.jsonl");
  {
    std::ofstream out(m);
    out << manifest_line(generate_query(test::tpch(), small_theta(1), 0).record) << "\n\n{not json\n";
  }
  try {
    load_manifest(m);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_manifest(scratch("missing.jsonl")), ConfigError);
}

TEST(Workload, EmptySchemaIsAConfigError) {
  EXPECT_THROW(generate_workload(SchemaGraph{}, small_theta(1), [](const GeneratedQuery&) {}), ConfigError);
}

TEST(Workload, FailedWriteLeavesNoPartialFile) {
  const fs::path m = scratch("never.jsonl");
  fs::remove(m);
  EXPECT_THROW(write_workload(SchemaGraph{}, small_theta(10), m), ConfigError);
  EXPECT_FALSE(fs::exists(m));
}
