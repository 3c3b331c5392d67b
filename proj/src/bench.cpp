#include "synql/bench.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "synql/atomic_file.hpp"
#include "synql/error.hpp"

namespace synql {

PlanNode collect_plan(Connection& conn, const std::string& sql) {
  if (conn.dialect() != Dialect::postgres) {
    throw ConfigError("plan features need PostgreSQL JSON plans; " + conn.describe() +
                      " cannot provide them");
  }
  const ResultSet rs = conn.query(explain_statement(conn.dialect(), sql));
  if (rs.rows.empty() || rs.rows[0].empty() || !rs.rows[0][0]) {
    throw DbError("EXPLAIN returned no plan");
  }
  std::string text;
  for (const auto& row : rs.rows) {
    text += row.at(0).value_or("");
  }
  return parse_explain(text);
}

std::optional<std::string> check_plan(Connection& conn, const std::string& sql) {
  try {
    conn.query(explain_statement(conn.dialect(), sql));
    return std::nullopt;
  } catch (const DbError& e) {
    return std::string(e.what());
  }
}

double median(std::vector<double> v) {
  if (v.empty()) {
    throw ValidationError("median of an empty sample");
  }
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

RuntimeMeasurement measure_runtime(Connection& conn, const std::string& sql, const MeasureOptions& opt) {
  if (opt.repeats < 1) {
    throw ConfigError("repeats = " + std::to_string(opt.repeats) + " must be >= 1");
  }
  RuntimeMeasurement m;
  const auto stop = [&](const ExecResult& r) {
    switch (r.status) {
      case ExecStatus::timed_out:
        m.timed_out = true;
        m.runtime_ms = opt.timeout_ms;
        return true;
      case ExecStatus::connection_lost:
        m.connection_lost = true;
        m.errored = true;
        m.error = r.error;
        return true;
      default:
        return false;
    }
  };
  if (opt.warmup && stop(conn.execute_timed(sql, opt.timeout_ms))) {
    return m;
  }
  std::vector<double> times;
  for (int i = 0; i < opt.repeats; ++i) {
    const ExecResult r = conn.execute_timed(sql, opt.timeout_ms);
    if (stop(r)) {
      return m;
    }
    if (r.status == ExecStatus::ok) {
      times.push_back(r.elapsed_ms);
    } else {
      m.error = r.error;
    }
  }
  if (times.empty()) {
    m.errored = true;
    return m;
  }
  m.error.clear();
  m.runtime_ms = median(std::move(times));
  return m;
}

LabeledSample label_query(Connection& conn, const WorkloadRecord& record, const MeasureOptions& options,
                          bool* connection_lost) {
  LabeledSample s;
  s.query_id = record.query_id;
  s.topology = record.topology;
  if (connection_lost) {
    *connection_lost = false;
  }
  try {
    s.features = extract_features(collect_plan(conn, record.sql));
  } catch (const DbError& e) {
    s.errored = true;
    s.error_text = e.what();
    if (connection_lost) {
      *connection_lost = e.connection_lost() || !conn.is_alive();
    }
    return s;
  } catch (const ParseError& e) {
    s.errored = true;
    s.error_text = e.what();
    return s;
  }
  const RuntimeMeasurement m = measure_runtime(conn, record.sql, options);
  s.runtime_ms = m.runtime_ms;
  s.timed_out = m.timed_out;
  s.errored = m.errored;
  s.error_text = m.error;
  if (connection_lost) {
    *connection_lost = m.connection_lost;
  }
  return s;
}

namespace {

std::vector<LabeledSample> label_range(Connection& conn, const std::vector<WorkloadRecord>& records,
                                       std::size_t begin, std::size_t end, std::size_t stride,
                                       const MeasureOptions& opt, bool& abandoned) {
  std::vector<LabeledSample> out;
  for (std::size_t i = begin; i < end; i += stride) {
    if (abandoned) {
      LabeledSample s;
      s.query_id = records[i].query_id;
      s.topology = records[i].topology;
      s.errored = true;
      s.error_text = "skipped: database connection lost";
      out.push_back(std::move(s));
      continue;
    }
    bool lost = false;
    LabeledSample s = label_query(conn, records[i], opt, &lost);
    if (lost) {
      try {
        conn.reconnect();
        s = label_query(conn, records[i], opt, &lost);
      } catch (const DbError& e) {
        s.error_text = e.what();
        lost = true;
      }
      if (lost) {
        abandoned = true;
        s.errored = true;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<LabeledSample> label_workload(Connection& conn, const std::vector<WorkloadRecord>& records,
                                          const DatasetOptions& options, DatasetSummary* summary) {
  const auto t0 = std::chrono::steady_clock::now();
  if (conn.dialect() != Dialect::postgres) {
    throw ConfigError("runtime labels need PostgreSQL JSON plans; " + conn.describe() +
                      " only supports plan-only validity checks");
  }
  if (!conn.is_alive()) {
    throw DbError("database " + conn.describe() + " is unreachable", true);
  }
  std::vector<LabeledSample> samples;
  bool abandoned = false;
  if (options.parallel <= 1 || !options.factory) {
    samples = label_range(conn, records, 0, records.size(), 1, options.measure, abandoned);
  } else {
    const unsigned n = options.parallel;
    std::vector<std::vector<LabeledSample>> parts(n);
    std::vector<std::exception_ptr> errors(n);
    std::vector<char> lost(n, 0);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) {
      pool.emplace_back([&, t] {
        try {
          auto c = options.factory();
          bool ab = false;
          parts[t] = label_range(*c, records, t, records.size(), n, options.measure, ab);
          lost[t] = ab;
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
    samples.resize(records.size());
    for (unsigned t = 0; t < n; ++t) {
      for (std::size_t k = 0; k < parts[t].size(); ++k) {
        samples[t + k * n] = std::move(parts[t][k]);
      }
      abandoned = abandoned || lost[t];
    }
  }
  if (summary) {
    *summary = DatasetSummary{};
    summary->total = samples.size();
    for (const auto& s : samples) {
      if (s.errored) {
        ++summary->errored;
      } else if (s.timed_out) {
        ++summary->timed_out;
      } else {
        ++summary->ok;
      }
    }
    summary->connection_abandoned = abandoned;
    summary->wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return samples;
}

std::string dataset_csv_header() {
  std::string h = "query_id,topology,runtime_ms,timed_out,errored";
  for (auto name : kFeatureNames) {
    h += ",";
    h += name;
  }
  return h;
}

std::string dataset_csv_row(const LabeledSample& s) {
  std::string row = std::to_string(s.query_id) + "," + std::string(to_string(s.topology)) + ",";
  if (!s.errored) {
    row += format_double(s.runtime_ms);
  }
  row += s.timed_out ? ",1" : ",0";
  row += s.errored ? ",1" : ",0";
  if (s.features) {
    for (const auto& cell : feature_cells(*s.features)) {
      row += "," + cell;
    }
  } else {
    row += std::string(kFeatureCount, ',');
  }
  return row;
}

nlohmann::ordered_json sample_to_json(const LabeledSample& s) {
  nlohmann::ordered_json j;
  j["query_id"] = s.query_id;
  j["topology"] = std::string(to_string(s.topology));
  j["runtime_ms"] = s.errored ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(s.runtime_ms);
  j["timed_out"] = s.timed_out;
  j["errored"] = s.errored;
  j["error"] = s.error_text.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(s.error_text);
  if (s.features) {
    nlohmann::ordered_json f;
    const auto v = s.features->values();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (i < 5) {
        f[std::string(kFeatureNames[i])] = v[i];
      } else {
        f[std::string(kFeatureNames[i])] = static_cast<std::int64_t>(v[i]);
      }
    }
    j["features"] = std::move(f);
  } else {
    j["features"] = nullptr;
  }
  return j;
}

DatasetSummary build_dataset(Connection& conn, const std::vector<WorkloadRecord>& records,
                             const std::filesystem::path& out, const std::filesystem::path& jsonl_out,
                             const DatasetOptions& options) {
  DatasetSummary summary;
  const auto samples = label_workload(conn, records, options, &summary);
  AtomicFile csv(out);
  csv.stream() << dataset_csv_header() << '\n';
  for (const auto& s : samples) {
    csv.stream() << dataset_csv_row(s) << '\n';
  }
  std::optional<AtomicFile> jl;
  if (!jsonl_out.empty()) {
    jl.emplace(jsonl_out);
    for (const auto& s : samples) {
      jl->stream() << sample_to_json(s).dump() << '\n';
    }
  }
  csv.commit();
  if (jl) {
    jl->commit();
  }
  return summary;
}

}  // namespace synql
