#include "synql/workload.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "synql/atomic_file.hpp"
#include "synql/error.hpp"

namespace synql {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct RawValue {
  std::string text;
  bool quoted = false;
  int line = 0;
};

}  // namespace

void ThetaConfig::validate() const {
  traversal.validate();
  semantics.validate();
  if (n_queries < 1) {
    throw ConfigError("n_queries = 0 must be >= 1");
  }
}

ThetaConfig parse_theta(std::string_view text, const std::string& source) {
  std::map<std::string, RawValue> raw;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  const auto fail = [&](int at, const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(at) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') {
        in_quote = !in_quote;
      } else if (line[i] == '#' && !in_quote) {
        line.resize(i);
        break;
      }
    }
    const std::string body = trim(line);
    if (body.empty()) {
      continue;
    }
    if (body.front() == '[') {
      fail(lineno, "tables/sections are not supported; use top-level keys");
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      fail(lineno, "expected `key = value`");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail(lineno, "expected `key = value`");
    }
    RawValue rv{value, false, lineno};
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') {
        fail(lineno, "unterminated string for '" + key + "'");
      }
      rv.text = value.substr(1, value.size() - 2);
      rv.quoted = true;
    }
    if (!raw.emplace(key, rv).second) {
      fail(lineno, "duplicate key '" + key + "'");
    }
  }

  std::map<std::string, int> key_lines;
  for (const auto& [k, v] : raw) {
    key_lines.emplace(k, v.line);
  }
  ThetaConfig theta;
  const auto take = [&](const char* key) -> std::optional<RawValue> {
    auto it = raw.find(key);
    if (it == raw.end()) {
      return std::nullopt;
    }
    RawValue v = it->second;
    raw.erase(it);
    return v;
  };
  const auto as_real = [&](const char* key, double& out) {
    if (auto v = take(key)) {
      const std::string& s = v->text;
      double d = 0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
      if (v->quoted || ec != std::errc() || p != s.data() + s.size()) {
        fail(v->line, std::string(key) + ": expected a number, got '" + s + "'");
      }
      out = d;
    }
  };
  const auto as_int = [&](const char* key, auto& out) {
    if (auto v = take(key)) {
      std::string s = v->text;
      std::erase(s, '_');
      using T = std::remove_reference_t<decltype(out)>;
      T x{};
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
      if (v->quoted || ec != std::errc() || p != s.data() + s.size()) {
        fail(v->line, std::string(key) + ": expected an integer, got '" + v->text + "'");
      }
      out = x;
    }
  };
  as_real("alpha_shape", theta.traversal.alpha_shape);
  as_int("k_join", theta.traversal.k_join);
  as_real("p_agg", theta.semantics.p_agg);
  as_real("p_where", theta.semantics.p_where);
  as_int("k_pred", theta.semantics.k_pred);
  as_real("p_order_limit", theta.semantics.p_order_limit);
  as_int("columns_min", theta.semantics.columns_min);
  as_int("columns_max", theta.semantics.columns_max);
  if (auto v = take("n_queries")) {
    if (!v->text.empty() && v->text.front() == '-') {
      throw ConfigError(source + ": n_queries = " + v->text + " must be >= 1");
    }
    raw.emplace("n_queries", *v);
    as_int("n_queries", theta.n_queries);
  }
  if (auto v = take("seed")) {
    raw.emplace("seed", *v);
    as_int("seed", theta.seed);
  }
  if (auto v = take("predicate_ops")) {
    if (v->text == "mixed") {
      theta.semantics.predicate_ops = PredicateOps::mixed;
    } else if (v->text == "gt_only") {
      theta.semantics.predicate_ops = PredicateOps::gt_only;
    } else {
      fail(v->line, "predicate_ops must be \"mixed\" or \"gt_only\", got '" + v->text + "'");
    }
  }
  if (!raw.empty()) {
    fail(raw.begin()->second.line, "unknown key '" + raw.begin()->first + "'");
  }
  try {
    theta.validate();
  } catch (const ConfigError& e) {
    // Range messages start with the offending key; point at its line.
    const std::string msg = e.what();
    const std::string key = msg.substr(0, msg.find(' '));
    if (auto it = key_lines.find(key); it != key_lines.end()) {
      fail(it->second, msg);
    }
    throw ConfigError(source + ": " + msg);
  }
  return theta;
}

ThetaConfig load_theta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open theta file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_theta(buf.str(), path.string());
}

nlohmann::ordered_json record_to_json(const WorkloadRecord& r) {
  nlohmann::ordered_json j;
  j["query_id"] = r.query_id;
  j["sql"] = r.sql;
  j["root_table"] = r.root_table;
  j["tables"] = r.tables;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : r.join_edges) {
    nlohmann::ordered_json je;
    je["child"] = e.child;
    je["parent"] = e.parent;
    auto on = nlohmann::ordered_json::array();
    for (const auto& p : e.on) {
      on.push_back({p.child_column, p.parent_column});
    }
    je["on"] = std::move(on);
    edges.push_back(std::move(je));
  }
  j["join_edges"] = std::move(edges);
  j["topology"] = std::string(to_string(r.topology));
  j["has_agg"] = r.has_agg;
  j["num_predicates"] = r.num_predicates;
  return j;
}

WorkloadRecord record_from_json(const nlohmann::json& j) {
  WorkloadRecord r;
  try {
    r.query_id = j.at("query_id").get<std::uint64_t>();
    r.sql = j.at("sql").get<std::string>();
    r.root_table = j.at("root_table").get<std::string>();
    r.tables = j.at("tables").get<std::vector<std::string>>();
    for (const auto& e : j.at("join_edges")) {
      ManifestJoinEdge me{e.at("child").get<std::string>(), e.at("parent").get<std::string>(), {}};
      for (const auto& p : e.at("on")) {
        me.on.push_back(ColumnPair{p.at(0).get<std::string>(), p.at(1).get<std::string>()});
      }
      r.join_edges.push_back(std::move(me));
    }
    const auto topo = parse_topology(j.at("topology").get<std::string>());
    if (!topo) {
      throw ParseError("unknown topology '" + j.at("topology").get<std::string>() + "'");
    }
    r.topology = *topo;
    r.has_agg = j.at("has_agg").get<bool>();
    r.num_predicates = j.at("num_predicates").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest record: ") + e.what());
  }
  return r;
}

std::string manifest_line(const WorkloadRecord& r) { return record_to_json(r).dump(); }

GeneratedQuery generate_query(const SchemaGraph& graph, const ThetaConfig& theta, std::uint64_t index,
                              std::vector<ExpansionStep>* trace) {
  RandomStream rng = RandomStream::for_query(theta.seed, index);
  GeneratedQuery q;
  q.blueprint = build_blueprint(graph, theta.traversal, rng, trace);
  check_blueprint(q.blueprint, graph, theta.traversal.k_join);
  q.ast = inject_semantics(q.blueprint, graph, theta.semantics, rng);

  WorkloadRecord& r = q.record;
  r.query_id = index;
  r.sql = compile_sql(q.ast);
  r.root_table = q.blueprint.root;
  r.tables = q.blueprint.used_tables;
  for (const auto& e : q.blueprint.join_edges) {
    r.join_edges.push_back(ManifestJoinEdge{e.child_table, e.parent_table, e.columns});
  }
  r.topology = classify_blueprint(q.blueprint);
  r.has_agg = q.ast.has_agg;
  r.num_predicates = static_cast<int>(q.ast.where_predicates.size());
  return q;
}

void generate_workload(const SchemaGraph& graph, const ThetaConfig& theta, const RecordSink& sink,
                       unsigned threads) {
  theta.validate();
  if (graph.empty()) {
    throw ConfigError("cannot generate a workload over an empty schema");
  }
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < theta.n_queries; ++i) {
      sink(generate_query(graph, theta, i));
    }
    return;
  }
  constexpr std::uint64_t kBlock = 2048;
  std::vector<GeneratedQuery> block;
  for (std::uint64_t start = 0; start < theta.n_queries; start += kBlock) {
    const std::uint64_t n = std::min(kBlock, theta.n_queries - start);
    block.assign(n, GeneratedQuery{});
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::uint64_t i = t; i < n; i += threads) {
            block[i] = generate_query(graph, theta, start + i);
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
    for (const auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
    for (const auto& q : block) {
      sink(q);
    }
  }
}

WorkloadSummary write_workload(const SchemaGraph& graph, const ThetaConfig& theta,
                               const std::filesystem::path& manifest,
                               const std::filesystem::path& sql_out, unsigned threads) {
  const auto t0 = std::chrono::steady_clock::now();
  AtomicFile out(manifest);
  std::optional<AtomicFile> sql;
  if (!sql_out.empty()) {
    sql.emplace(sql_out);
  }
  DiversityAccumulator acc;
  WorkloadSummary summary;
  generate_workload(
      graph, theta,
      [&](const GeneratedQuery& q) {
        out.stream() << manifest_line(q.record) << '\n';
        if (sql) {
          sql->stream() << q.record.sql << ";\n";
        }
        acc.add(q.record.topology, q.record.join_edges.empty());
        ++summary.queries;
      },
      threads);
  out.commit();
  if (sql) {
    sql->commit();
  }
  summary.diversity = acc.report();
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return summary;
}

void read_manifest(const std::filesystem::path& path,
                   const std::function<void(const WorkloadRecord&)>& visit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open manifest '" + path.string() + "'");
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) {
      continue;
    }
    WorkloadRecord r;
    try {
      r = record_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    visit(r);
  }
}

std::vector<WorkloadRecord> load_manifest(const std::filesystem::path& path) {
  std::vector<WorkloadRecord> out;
  read_manifest(path, [&](const WorkloadRecord& r) { out.push_back(r); });
  return out;
}

}  // namespace synql
