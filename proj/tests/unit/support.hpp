#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <unistd.h>

#include "synql/db.hpp"
#include "synql/schema.hpp"

namespace synql::test {

inline std::filesystem::path data_dir() { return SYNQL_TEST_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return SYNQL_TEST_FIXTURE_DIR; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline const SchemaGraph& tpch() {
  static const SchemaGraph g = load_schema_file(data_dir() / "schemas" / "tpch.schema.json");
  return g;
}

inline const SchemaGraph& imdb() {
  static const SchemaGraph g = load_schema_file(data_dir() / "schemas" / "imdb.schema.json");
  return g;
}

/// a - b - c - d - e, each child pointing at its right neighbour.
inline const SchemaGraph& path5() {
  static const SchemaGraph g = load_schema_file(fixture_dir() / "schemas" / "path5.schema.json");
  return g;
}

/// PostgreSQL URL from $SYNQL_DB_URL or the ctest server fixture.
inline std::optional<std::string> postgres_url() {
  if (const char* env = std::getenv("SYNQL_DB_URL"); env && std::string(env).rfind("postgres", 0) == 0) {
    return std::string(env);
  }
  std::ifstream in(SYNQL_TEST_PG_URL_FILE);
  std::string url;
  if (in && std::getline(in, url) && !url.empty()) {
    return url;
  }
  return std::nullopt;
}

}  // namespace synql::test

namespace synql::test {

/// Throwaway database on the fixture server; dropped on destruction. Each
/// ctest case is its own process, so cases running in parallel never share
/// tables.
class ScratchPgDatabase {
 public:
  ScratchPgDatabase(const std::string& server_url, const std::string& name)
      : admin_url_(server_url), name_(name + "_" + std::to_string(::getpid())) {
    auto admin = connect(admin_url_);
    admin->execute("DROP DATABASE IF EXISTS " + name_);
    admin->execute("CREATE DATABASE " + name_);
    url_ = admin_url_.substr(0, admin_url_.rfind('/') + 1) + name_;
  }
  ~ScratchPgDatabase() {
    try {
      connect(admin_url_)->execute("DROP DATABASE IF EXISTS " + name_ + " WITH (FORCE)");
    } catch (...) {
    }
  }
  ScratchPgDatabase(const ScratchPgDatabase&) = delete;
  ScratchPgDatabase& operator=(const ScratchPgDatabase&) = delete;

  const std::string& url() const { return url_; }

 private:
  std::string admin_url_;
  std::string name_;
  std::string url_;
};

}  // namespace synql::test
