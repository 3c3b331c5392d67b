// synql: workload generation, topology analysis, plan featurization and
// runtime labeling from the command line.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "synql/analysis.hpp"
#include "synql/atomic_file.hpp"
#include "synql/bench.hpp"
#include "synql/catalog.hpp"
#include "synql/db.hpp"
#include "synql/error.hpp"
#include "synql/explain.hpp"
#include "synql/schema.hpp"
#include "synql/sql_parser.hpp"
#include "synql/workload.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw synql::ConfigError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path data_dir() {
  if (const char* env = std::getenv("SYNQL_DATA_DIR"); env && *env) {
    return env;
  }
  return SYNQL_DATA_DIR;
}

ordered_json diversity_json(const synql::DiversityReport& r) {
  ordered_json j;
  for (synql::Topology t : synql::kTopologies) {
    j["counts"][std::string(synql::to_string(t))] = r.count(t);
    j["fractions"][std::string(synql::to_string(t))] = r.fraction(t);
  }
  j["single_table"] = r.single_table;
  j["total"] = r.total;
  j["entropy_bits"] = r.entropy_bits;
  return j;
}

struct GenerateArgs {
  std::string schema, db_url, theta, out, sql_out;
  std::optional<std::uint64_t> seed, n_queries;
  unsigned threads = 1;
  bool json = false;
};

int run_generate(const GenerateArgs& a) {
  synql::SchemaGraph graph;
  if (!a.schema.empty()) {
    graph = synql::load_schema_file(a.schema);
  } else {
    auto conn = synql::connect(synql::resolve_db_url(a.db_url));
    graph = synql::introspect_catalog(*conn);
  }
  for (const auto& w : graph.warnings()) {
    std::cerr << "synql: warning: " << w << "\n";
  }
  synql::ThetaConfig theta = synql::load_theta(a.theta);
  if (a.seed) {
    theta.seed = *a.seed;
  }
  if (a.n_queries) {
    theta.n_queries = *a.n_queries;
    theta.validate();
  }
  const auto s = synql::write_workload(graph, theta, a.out, a.sql_out, std::max(1u, a.threads));
  if (a.json) {
    ordered_json j;
    j["queries"] = s.queries;
    j["manifest"] = a.out;
    j["seconds"] = s.seconds;
    j["diversity"] = diversity_json(s.diversity);
    std::cout << j.dump() << "\n";
  } else {
    std::cerr << "wrote " << s.queries << " queries to " << a.out << " in " << s.seconds << " s\n";
    std::cout << synql::format_report_text(s.diversity);
  }
  return 0;
}

int run_classify(const std::string& sql_file, bool json) {
  const auto statements = synql::split_statements(read_file(sql_file));
  if (statements.empty()) {
    throw synql::ValidationError("'" + sql_file + "' contains no SQL statements");
  }
  ordered_json out = ordered_json::array();
  for (std::size_t i = 0; i < statements.size(); ++i) {
    synql::Topology t;
    try {
      t = synql::classify_join_graph(synql::parse_join_graph(statements[i]));
    } catch (const synql::ParseError& e) {
      throw synql::ParseError("statement " + std::to_string(i + 1) + ": " + e.what());
    }
    if (json) {
      out.push_back({{"statement", i + 1}, {"topology", std::string(synql::to_string(t))}});
    } else if (statements.size() == 1) {
      std::cout << synql::to_string(t) << "\n";
    } else {
      std::cout << (i + 1) << "\t" << synql::to_string(t) << "\n";
    }
  }
  if (json) {
    std::cout << out.dump() << "\n";
  }
  return 0;
}

int run_report(const std::string& manifest, const std::string& csv, bool json) {
  synql::DiversityAccumulator acc;
  synql::read_manifest(manifest, [&](const synql::WorkloadRecord& r) {
    acc.add(r.topology, r.join_edges.empty());
  });
  if (acc.total() == 0) {
    throw synql::ValidationError("manifest '" + manifest + "' is empty");
  }
  const auto report = acc.report();
  if (!csv.empty()) {
    synql::AtomicFile f(csv);
    f.stream() << synql::format_report_csv(report);
    f.commit();
  }
  if (json) {
    std::cout << diversity_json(report).dump() << "\n";
  } else {
    std::cout << synql::format_report_text(report);
  }
  return 0;
}

int run_featurize(const std::string& dir, const std::string& out, bool json) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw synql::ValidationError("no .json plan files in '" + dir + "'");
  }
  synql::AtomicFile f(out);
  f.stream() << "plan";
  for (auto name : synql::kFeatureNames) {
    f.stream() << "," << name;
  }
  f.stream() << "\n";
  for (const auto& p : files) {
    synql::FeatureVector fv;
    try {
      fv = synql::extract_features(synql::parse_explain(read_file(p)));
    } catch (const synql::ParseError& e) {
      throw synql::ParseError(p.filename().string() + ": " + e.what());
    }
    f.stream() << p.filename().string();
    for (const auto& cell : synql::feature_cells(fv)) {
      f.stream() << "," << cell;
    }
    f.stream() << "\n";
  }
  f.commit();
  if (json) {
    std::cout << ordered_json{{"plans", files.size()}, {"out", out}}.dump() << "\n";
  } else {
    std::cerr << "featurized " << files.size() << " plans into " << out << "\n";
  }
  return 0;
}

struct LabelArgs {
  std::string manifest, db_url, out, jsonl;
  synql::MeasureOptions measure;
  unsigned parallel = 1;
  bool json = false;
};

int run_label(const LabelArgs& a) {
  const std::string url = synql::resolve_db_url(a.db_url);
  const auto records = synql::load_manifest(a.manifest);
  auto conn = synql::connect(url);
  synql::DatasetOptions opt;
  opt.measure = a.measure;
  opt.parallel = a.parallel;
  if (a.parallel > 1) {
    std::cerr << "synql: warning: parallel labeling disturbs runtimes; use it for plan features only\n";
    opt.factory = [url] { return synql::connect(url); };
  }
  const auto s = synql::build_dataset(*conn, records, a.out, a.jsonl, opt);
  if (a.json) {
    ordered_json j;
    j["total"] = s.total;
    j["ok"] = s.ok;
    j["timed_out"] = s.timed_out;
    j["errored"] = s.errored;
    j["timeout_fraction"] = s.timeout_fraction();
    j["connection_abandoned"] = s.connection_abandoned;
    j["wall_seconds"] = s.wall_seconds;
    std::cout << j.dump() << "\n";
  } else {
    std::printf("rows: %llu  ok: %llu  timed out: %llu (%.1f%%)  errored: %llu\n",
                static_cast<unsigned long long>(s.total), static_cast<unsigned long long>(s.ok),
                static_cast<unsigned long long>(s.timed_out), 100.0 * s.timeout_fraction(),
                static_cast<unsigned long long>(s.errored));
    std::cerr << "wall time " << s.wall_seconds << " s\n";
  }
  return s.connection_abandoned ? 2 : 0;
}

int run_presets(const std::string& dir_flag, bool json) {
  const fs::path dir = dir_flag.empty() ? data_dir() / "presets" : fs::path(dir_flag);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".toml") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  ordered_json out = ordered_json::array();
  if (!json) {
    std::printf("%-24s %6s %6s %6s %7s %6s %8s %8s\n", "preset", "alpha", "k_join", "p_agg", "p_where",
                "k_pred", "n", "seed");
  }
  for (const auto& p : files) {
    const auto t = synql::load_theta(p);
    const std::string name = p.stem().string();
    if (json) {
      out.push_back({{"preset", name},
                     {"path", p.string()},
                     {"alpha_shape", t.traversal.alpha_shape},
                     {"k_join", t.traversal.k_join},
                     {"p_agg", t.semantics.p_agg},
                     {"p_where", t.semantics.p_where},
                     {"k_pred", t.semantics.k_pred},
                     {"n_queries", t.n_queries},
                     {"seed", t.seed}});
    } else {
      std::printf("%-24s %6.2f %6d %6.2f %7.2f %6d %8llu %8llu\n", name.c_str(), t.traversal.alpha_shape,
                  t.traversal.k_join, t.semantics.p_agg, t.semantics.p_where, t.semantics.k_pred,
                  static_cast<unsigned long long>(t.n_queries), static_cast<unsigned long long>(t.seed));
    }
  }
  if (json) {
    std::cout << out.dump() << "\n";
  }
  return 0;
}

int run_introspect(const std::string& db_url, const std::string& out) {
  auto conn = synql::connect(synql::resolve_db_url(db_url));
  const auto graph = synql::introspect_catalog(*conn);
  for (const auto& w : graph.warnings()) {
    std::cerr << "synql: warning: " << w << "\n";
  }
  synql::save_schema_file(graph, out);
  std::cerr << "wrote " << graph.table_count() << " tables, " << graph.edges().size()
            << " foreign keys to " << out << "\n";
  return 0;
}

int run_load(const std::string& schema, const std::string& db_url, std::uint64_t rows, std::uint64_t seed,
             bool no_fks) {
  const auto graph = synql::load_schema_file(schema);
  auto conn = synql::connect(synql::resolve_db_url(db_url));
  synql::DdlOptions ddl;
  ddl.drop_existing = true;
  ddl.foreign_keys = !no_fks;
  synql::create_schema(*conn, graph, ddl);
  if (rows > 0) {
    synql::populate_synthetic(*conn, graph, rows, seed);
  }
  std::cerr << "loaded " << graph.table_count() << " tables into " << conn->describe() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SQL workload synthesis over foreign-key graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "synql 0.1.0");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a workload manifest");
  auto* g_schema = g->add_option("--schema", gen.schema, "Schema JSON file")->check(CLI::ExistingFile);
  auto* g_db = g->add_option("--db-url", gen.db_url, "Introspect this database instead of a schema file");
  g_schema->excludes(g_db);
  g->add_option("--theta", gen.theta, "Configuration file")->required()->check(CLI::ExistingFile);
  g->add_option("--out", gen.out, "Manifest (JSON lines)")->required();
  g->add_option("--sql-out", gen.sql_out, "Also write a ;-terminated .sql file");
  g->add_option("--seed", gen.seed, "Override the configuration seed");
  g->add_option("--n-queries", gen.n_queries, "Override the configuration corpus size");
  g->add_option("--threads", gen.threads, "Generation threads (output is identical)")->check(CLI::Range(1u, 256u));
  g->add_flag("--json", gen.json, "Machine-readable summary on stdout");

  std::string sql_file;
  bool classify_json = false;
  auto* c = app.add_subcommand("classify", "Print the join topology of each statement");
  c->add_option("--sql-file", sql_file, "File of ;-terminated statements")->required()->check(CLI::ExistingFile);
  c->add_flag("--json", classify_json);

  std::string manifest, csv;
  bool report_json = false;
  auto* r = app.add_subcommand("report", "Topology distribution and entropy of a manifest");
  r->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  r->add_option("--csv", csv, "Write topology,count,fraction rows");
  r->add_flag("--json", report_json);

  std::string plans, feat_out;
  bool feat_json = false;
  auto* f = app.add_subcommand("featurize", "Extract plan features from a directory of JSON plans");
  f->add_option("--plans", plans)->required()->check(CLI::ExistingDirectory);
  f->add_option("--out", feat_out)->required();
  f->add_flag("--json", feat_json);

  LabelArgs lab;
  auto* l = app.add_subcommand("label", "Collect plans and runtimes into a training dataset");
  l->add_option("--manifest", lab.manifest)->required()->check(CLI::ExistingFile);
  l->add_option("--db-url", lab.db_url, "Database URL (default: $SYNQL_DB_URL)");
  l->add_option("--out", lab.out, "Dataset CSV")->required();
  l->add_option("--jsonl", lab.jsonl, "Also write a JSON-lines mirror");
  l->add_option("--repeats", lab.measure.repeats, "Timed executions per query")->check(CLI::Range(1, 1000));
  l->add_option("--timeout-ms", lab.measure.timeout_ms, "Per-execution statement timeout")->check(CLI::Range(1, 86400000));
  l->add_flag("--warmup,!--no-warmup", lab.measure.warmup, "Run one untimed warm-up execution");
  l->add_option("--parallel", lab.parallel, "Shard over N connections (plans only)")->check(CLI::Range(1u, 64u));
  l->add_flag("--json", lab.json);

  std::string preset_dir;
  bool presets_json = false;
  auto* p = app.add_subcommand("presets", "List bundled configuration presets");
  p->add_option("--dir", preset_dir, "Preset directory")->check(CLI::ExistingDirectory);
  p->add_flag("--json", presets_json);

  std::string intro_url, intro_out;
  auto* i = app.add_subcommand("introspect", "Write a schema file from a live database catalog");
  i->add_option("--db-url", intro_url, "Database URL (default: $SYNQL_DB_URL)");
  i->add_option("--out", intro_out)->required();

  std::string load_schema, load_url;
  std::uint64_t load_rows = 1000, load_seed = 0;
  bool load_no_fks = false;
  auto* ld = app.add_subcommand("load", "Create a schema's tables and fill them with synthetic rows");
  ld->add_option("--schema", load_schema)->required()->check(CLI::ExistingFile);
  ld->add_option("--db-url", load_url, "Database URL (default: $SYNQL_DB_URL)");
  ld->add_option("--rows", load_rows, "Rows per table (0 = empty tables)");
  ld->add_option("--seed", load_seed);
  ld->add_flag("--no-foreign-keys", load_no_fks, "Skip FK constraints");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) {
      if (gen.schema.empty() && gen.db_url.empty() && !std::getenv("SYNQL_DB_URL")) {
        throw synql::ConfigError("generate needs --schema or --db-url");
      }
      return run_generate(gen);
    }
    if (*c) {
      return run_classify(sql_file, classify_json);
    }
    if (*r) {
      return run_report(manifest, csv, report_json);
    }
    if (*f) {
      return run_featurize(plans, feat_out, feat_json);
    }
    if (*l) {
      return run_label(lab);
    }
    if (*p) {
      return run_presets(preset_dir, presets_json);
    }
    if (*i) {
      return run_introspect(intro_url, intro_out);
    }
    if (*ld) {
      return run_load(load_schema, load_url, load_rows, load_seed, load_no_fks);
    }
  } catch (const std::exception& e) {
    std::cerr << "synql: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
