#include "synql/schema.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "synql/atomic_file.hpp"
#include "synql/error.hpp"

namespace synql {

using nlohmann::json;

const ColumnMeta* TableMeta::find_column(std::string_view column) const {
  for (const auto& c : columns) {
    if (c.name == column) {
      return &c;
    }
  }
  return nullptr;
}

std::optional<std::string> check_stats(const ColumnMeta& column) {
  if (!column.stats) {
    return std::nullopt;
  }
  const ColumnStats& stats = *column.stats;
  const ValueKind kind = column.kind();
  const auto kind_matches = [&](const Literal& v) {
    const ValueKind k = kind_of(v);
    return k == kind || (kind == ValueKind::real && k == ValueKind::integer);
  };
  if (!kind_matches(stats.min_value) || !kind_matches(stats.max_value)) {
    return "stats min/max do not match column type " + column.sql_type;
  }
  if (compare(stats.min_value, stats.max_value) == std::partial_ordering::greater) {
    return "stats min " + to_text(stats.min_value) + " exceeds max " + to_text(stats.max_value);
  }
  if (stats.sample_values.empty()) {
    return std::string("stats carry no sample values");
  }
  for (const auto& v : stats.sample_values) {
    if (!kind_matches(v)) {
      return "sample value " + to_text(v) + " does not match column type " + column.sql_type;
    }
    if (compare(v, stats.min_value) == std::partial_ordering::less ||
        compare(v, stats.max_value) == std::partial_ordering::greater) {
      return "sample value " + to_text(v) + " lies outside [" + to_text(stats.min_value) + ", " +
             to_text(stats.max_value) + "]";
    }
  }
  return std::nullopt;
}

SchemaGraph::SchemaGraph(std::vector<TableMeta> tables, std::vector<FkEdge> edges) {
  std::sort(tables.begin(), tables.end(),
            [](const TableMeta& a, const TableMeta& b) { return a.name < b.name; });
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const TableMeta& t = tables[i];
    if (t.name.empty()) {
      throw ValidationError("table with empty name");
    }
    if (i > 0 && tables[i - 1].name == t.name) {
      throw ValidationError("duplicate table '" + t.name + "'");
    }
    if (t.columns.empty()) {
      throw ValidationError("table '" + t.name + "' has no columns");
    }
    std::set<std::string_view> seen;
    for (const auto& c : t.columns) {
      if (c.name.empty()) {
        throw ValidationError("table '" + t.name + "' has a column with an empty name");
      }
      if (!seen.insert(c.name).second) {
        throw ValidationError("duplicate column '" + t.name + "." + c.name + "'");
      }
      if (c.is_numeric != is_numeric_kind(c.kind())) {
        throw ValidationError("column '" + t.name + "." + c.name + "': is_numeric=" +
                              (c.is_numeric ? "true" : "false") + " contradicts sql_type '" +
                              c.sql_type + "'");
      }
      if (auto problem = check_stats(c)) {
        throw ValidationError("column '" + t.name + "." + c.name + "': " + *problem);
      }
    }
    for (const auto& pk : t.primary_key) {
      if (!t.find_column(pk)) {
        throw ValidationError("table '" + t.name + "': primary key column '" + pk +
                              "' does not exist");
      }
    }
  }
  tables_ = std::move(tables);
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    index_.emplace(tables_[i].name, i);
  }

  std::sort(edges.begin(), edges.end(), [](const FkEdge& a, const FkEdge& b) {
    const auto key = [](const FkEdge& e) {
      std::vector<std::pair<std::string_view, std::string_view>> cols;
      for (const auto& p : e.columns) {
        cols.emplace_back(p.child_column, p.parent_column);
      }
      return std::make_tuple(std::string_view(e.child_table), std::string_view(e.parent_table),
                             cols, std::string_view(e.constraint));
    };
    return key(a) < key(b);
  });
  for (auto& e : edges) {
    const std::string label =
        e.child_table + "(" + (e.columns.empty() ? "" : e.columns.front().child_column) + ") -> " +
        e.parent_table + "(" + (e.columns.empty() ? "" : e.columns.front().parent_column) + ")";
    const TableMeta* child = find_table(e.child_table);
    const TableMeta* parent = find_table(e.parent_table);
    if (!child) {
      throw ValidationError("foreign key " + label + ": child table '" + e.child_table +
                            "' does not exist");
    }
    if (!parent) {
      throw ValidationError("foreign key " + label + ": parent table '" + e.parent_table +
                            "' does not exist");
    }
    if (e.columns.empty()) {
      throw ValidationError("foreign key " + label + " has no column pairs");
    }
    for (const auto& p : e.columns) {
      if (!child->find_column(p.child_column)) {
        throw ValidationError("foreign key " + label + ": column '" + e.child_table + "." +
                              p.child_column + "' does not exist");
      }
      if (!parent->find_column(p.parent_column)) {
        throw ValidationError("foreign key " + label + ": column '" + e.parent_table + "." +
                              p.parent_column + "' does not exist");
      }
    }
    if (e.child_table == e.parent_table) {
      warnings_.push_back("ignoring self-referencing foreign key " + label);
      continue;
    }
    if (!edges_.empty() && edges_.back().child_table == e.child_table &&
        edges_.back().parent_table == e.parent_table && edges_.back().columns == e.columns) {
      throw ValidationError("duplicate foreign key " + label);
    }
    endpoints_.emplace_back(index_.at(e.child_table), index_.at(e.parent_table));
    edges_.push_back(std::move(e));
  }

  const std::size_t n = tables_.size();
  incident_.assign(n, {});
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    incident_[endpoints_[i].first].push_back(i);
    incident_[endpoints_[i].second].push_back(i);
  }
  distances_.assign(n * n, kUnreachable);
  for (std::size_t src = 0; src < n; ++src) {
    std::size_t* row = &distances_[src * n];
    row[src] = 0;
    std::deque<std::size_t> queue{src};
    while (!queue.empty()) {
      const std::size_t at = queue.front();
      queue.pop_front();
      for (std::size_t e : incident_[at]) {
        const std::size_t next = endpoints_[e].first == at ? endpoints_[e].second : endpoints_[e].first;
        if (row[next] == kUnreachable) {
          row[next] = row[at] + 1;
          queue.push_back(next);
        }
      }
    }
  }
}

std::optional<std::size_t> SchemaGraph::table_index(std::string_view name) const {
  if (auto it = index_.find(std::string(name)); it != index_.end()) {
    return it->second;
  }
  return std::nullopt;
}

const TableMeta* SchemaGraph::find_table(std::string_view name) const {
  if (auto idx = table_index(name)) {
    return &tables_[*idx];
  }
  return nullptr;
}

std::size_t fk_distance(const SchemaGraph& graph, std::string_view table, std::string_view root) {
  const auto a = graph.table_index(table);
  const auto b = graph.table_index(root);
  if (!a) {
    throw ValidationError("unknown table '" + std::string(table) + "'");
  }
  if (!b) {
    throw ValidationError("unknown table '" + std::string(root) + "'");
  }
  return graph.distance(*a, *b);
}

Literal sample_domain_value(const ColumnStats& stats, RandomStream& rng) {
  const ValueKind kind = kind_of(stats.min_value);
  const auto pick_sample = [&]() -> Literal {
    return stats.sample_values[rng.uniform_below(stats.sample_values.size())];
  };
  if (kind == ValueKind::text || rng.bernoulli(kSampleProbability)) {
    return pick_sample();
  }
  switch (kind) {
    case ValueKind::integer:
      return rng.uniform_int(std::get<std::int64_t>(stats.min_value),
                             std::get<std::int64_t>(stats.max_value));
    case ValueKind::real: {
      const auto as_double = [](const Literal& v) {
        return kind_of(v) == ValueKind::integer ? static_cast<double>(std::get<std::int64_t>(v))
                                                : std::get<double>(v);
      };
      const double lo = as_double(stats.min_value);
      const double hi = as_double(stats.max_value);
      double v = std::round((lo + rng.uniform01() * (hi - lo)) * 100.0) / 100.0;
      return std::clamp(v, lo, hi);
    }
    case ValueKind::date: {
      const auto lo = std::get<Date>(stats.min_value).days;
      const auto hi = std::get<Date>(stats.max_value).days;
      return Date{static_cast<std::int32_t>(rng.uniform_int(lo, hi))};
    }
    case ValueKind::text:
      break;
  }
  return pick_sample();
}

namespace {

const json& require(const json& obj, std::string_view key, const std::string& where) {
  if (!obj.is_object()) {
    throw ParseError(where + ": expected an object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::string require_string(const json& obj, std::string_view key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) {
    throw ParseError(where + "." + std::string(key) + ": expected a string");
  }
  return v.get<std::string>();
}

ColumnStats stats_from_json(const json& j, ValueKind kind, const std::string& where) {
  ColumnStats stats;
  try {
    stats.min_value = literal_from_json(require(j, "min", where), kind);
    stats.max_value = literal_from_json(require(j, "max", where), kind);
    const json& samples = require(j, "samples", where);
    if (!samples.is_array()) {
      throw ParseError(where + ".samples: expected an array");
    }
    for (const auto& s : samples) {
      stats.sample_values.push_back(literal_from_json(s, kind));
    }
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) {
      throw;
    }
    throw ParseError(where + ": " + msg);
  }
  if (auto it = j.find("distinct"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
      throw ParseError(where + ".distinct: expected a non-negative integer");
    }
    stats.distinct_estimate = it->get<std::uint64_t>();
  }
  return stats;
}

json stats_to_json(const ColumnStats& stats) {
  json j = json::object();
  j["min"] = literal_to_json(stats.min_value);
  j["max"] = literal_to_json(stats.max_value);
  json samples = json::array();
  for (const auto& s : stats.sample_values) {
    samples.push_back(literal_to_json(s));
  }
  j["samples"] = std::move(samples);
  if (stats.distinct_estimate) {
    j["distinct"] = *stats.distinct_estimate;
  }
  return j;
}

}  // namespace

SchemaGraph schema_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw ParseError("schema document: expected a JSON object");
  }
  const json& jtables = require(doc, "tables", "schema");
  if (!jtables.is_array()) {
    throw ParseError("schema.tables: expected an array");
  }
  std::vector<TableMeta> tables;
  for (std::size_t ti = 0; ti < jtables.size(); ++ti) {
    const json& jt = jtables[ti];
    const std::string where = "tables[" + std::to_string(ti) + "]";
    TableMeta table;
    table.name = require_string(jt, "name", where);
    const std::string twhere = "table '" + table.name + "'";
    if (auto it = jt.find("primary_key"); it != jt.end()) {
      if (!it->is_array()) {
        throw ParseError(twhere + ".primary_key: expected an array");
      }
      for (const auto& pk : *it) {
        if (!pk.is_string()) {
          throw ParseError(twhere + ".primary_key: expected column names");
        }
        table.primary_key.push_back(pk.get<std::string>());
      }
    }
    const json& jcols = require(jt, "columns", twhere);
    if (!jcols.is_array()) {
      throw ParseError(twhere + ".columns: expected an array");
    }
    for (std::size_t ci = 0; ci < jcols.size(); ++ci) {
      const json& jc = jcols[ci];
      const std::string cwhere = twhere + ".columns[" + std::to_string(ci) + "]";
      ColumnMeta col;
      col.name = require_string(jc, "name", cwhere);
      col.sql_type = require_string(jc, "sql_type", cwhere);
      if (auto it = jc.find("is_numeric"); it != jc.end()) {
        if (!it->is_boolean()) {
          throw ParseError(cwhere + ".is_numeric: expected a boolean");
        }
        col.is_numeric = it->get<bool>();
      } else {
        col.is_numeric = is_numeric_kind(col.kind());
      }
      if (auto it = jc.find("stats"); it != jc.end() && !it->is_null()) {
        col.stats = stats_from_json(*it, col.kind(), "column '" + table.name + "." + col.name + "'.stats");
      }
      table.columns.push_back(std::move(col));
    }
    tables.push_back(std::move(table));
  }

  std::vector<FkEdge> edges;
  if (auto it = doc.find("foreign_keys"); it != doc.end()) {
    if (!it->is_array()) {
      throw ParseError("schema.foreign_keys: expected an array");
    }
    std::map<std::tuple<std::string, std::string, std::string>, std::size_t> named;
    for (std::size_t fi = 0; fi < it->size(); ++fi) {
      const json& jf = (*it)[fi];
      const std::string where = "foreign_keys[" + std::to_string(fi) + "]";
      FkEdge edge;
      edge.child_table = require_string(jf, "child_table", where);
      edge.parent_table = require_string(jf, "parent_table", where);
      ColumnPair pair{require_string(jf, "child_column", where),
                      require_string(jf, "parent_column", where)};
      if (auto c = jf.find("constraint"); c != jf.end() && c->is_string()) {
        edge.constraint = c->get<std::string>();
      }
      if (!edge.constraint.empty()) {
        auto key = std::make_tuple(edge.child_table, edge.parent_table, edge.constraint);
        if (auto found = named.find(key); found != named.end()) {
          edges[found->second].columns.push_back(std::move(pair));
          continue;
        }
        named.emplace(std::move(key), edges.size());
      }
      edge.columns.push_back(std::move(pair));
      edges.push_back(std::move(edge));
    }
  }
  return SchemaGraph(std::move(tables), std::move(edges));
}

json schema_to_json(const SchemaGraph& graph) {
  json jtables = json::array();
  for (const auto& t : graph.tables()) {
    json jt = json::object();
    jt["name"] = t.name;
    jt["primary_key"] = t.primary_key;
    json jcols = json::array();
    for (const auto& c : t.columns) {
      json jc = json::object();
      jc["name"] = c.name;
      jc["sql_type"] = c.sql_type;
      jc["is_numeric"] = c.is_numeric;
      if (c.stats) {
        jc["stats"] = stats_to_json(*c.stats);
      }
      jcols.push_back(std::move(jc));
    }
    jt["columns"] = std::move(jcols);
    jtables.push_back(std::move(jt));
  }
  json jfks = json::array();
  for (const auto& e : graph.edges()) {
    for (const auto& p : e.columns) {
      json jf = json::object();
      jf["child_table"] = e.child_table;
      jf["child_column"] = p.child_column;
      jf["parent_table"] = e.parent_table;
      jf["parent_column"] = p.parent_column;
      if (!e.constraint.empty()) {
        jf["constraint"] = e.constraint;
      } else if (e.columns.size() > 1) {
        jf["constraint"] = e.child_table + "_" + e.parent_table + "_fk";
      }
      jfks.push_back(std::move(jf));
    }
  }
  json doc = json::object();
  doc["tables"] = std::move(jtables);
  doc["foreign_keys"] = std::move(jfks);
  return doc;
}

SchemaGraph load_schema_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open schema file '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("schema file '" + path.string() + "': " + e.what());
  }
  try {
    return schema_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError("schema file '" + path.string() + "': " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("schema file '" + path.string() + "': " + e.what());
  }
}

void save_schema_file(const SchemaGraph& graph, const std::filesystem::path& path) {
  AtomicFile out(path);
  out.stream() << schema_to_json(graph).dump(2) << '\n';
  out.commit();
}

}  // namespace synql
