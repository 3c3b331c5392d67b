#include <sqlite3.h>

#include <chrono>

#include "synql/db.hpp"
#include "synql/error.hpp"

namespace synql {

namespace {

class SqliteConnection final : public Connection {
 public:
  explicit SqliteConnection(std::string path) : path_(std::move(path)) { open(); }
  ~SqliteConnection() override { close(); }

  Dialect dialect() const override { return Dialect::sqlite; }

  ResultSet query(const std::string& sql) override {
    ResultSet rs;
    sqlite3_stmt* stmt = prepare(sql);
    const int ncols = sqlite3_column_count(stmt);
    for (int i = 0; i < ncols; ++i) {
      rs.columns.emplace_back(sqlite3_column_name(stmt, i));
    }
    int rc = 0;
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
      std::vector<std::optional<std::string>> row;
      for (int i = 0; i < ncols; ++i) {
        if (sqlite3_column_type(stmt, i) == SQLITE_NULL) {
          row.emplace_back(std::nullopt);
        } else {
          row.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(stmt, i)));
        }
      }
      rs.rows.push_back(std::move(row));
    }
    const bool ok = rc == SQLITE_DONE;
    sqlite3_finalize(stmt);
    if (!ok) {
      throw DbError("sqlite: " + std::string(sqlite3_errmsg(db_)));
    }
    return rs;
  }

  void execute(const std::string& sql) override {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : sqlite3_errmsg(db_);
      sqlite3_free(err);
      throw DbError("sqlite: " + msg);
    }
  }

  ExecResult execute_timed(const std::string& sql, int timeout_ms) override {
    ExecResult res;
    const auto start = std::chrono::steady_clock::now();
    deadline_ = timeout_ms > 0 ? start + std::chrono::milliseconds(timeout_ms)
                               : std::chrono::steady_clock::time_point::max();
    sqlite3_progress_handler(db_, 1000, &SqliteConnection::on_progress, this);
    sqlite3_stmt* stmt = nullptr;
    int rc = sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr);
    if (rc == SQLITE_OK) {
      while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
      }
    }
    res.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (rc == SQLITE_INTERRUPT) {
      res.status = ExecStatus::timed_out;
      res.error = "statement timeout";
    } else if (rc != SQLITE_DONE && rc != SQLITE_OK) {
      res.status = ExecStatus::error;
      res.error = sqlite3_errmsg(db_);
    }
    sqlite3_finalize(stmt);
    sqlite3_progress_handler(db_, 0, nullptr, nullptr);
    return res;
  }

  bool is_alive() override { return db_ != nullptr; }

  void reconnect() override {
    if (path_ == ":memory:") {
      throw DbError("sqlite: an in-memory database cannot be reopened", true);
    }
    close();
    open();
  }

  std::string describe() const override { return "sqlite:" + path_; }

 private:
  static int on_progress(void* self) {
    return std::chrono::steady_clock::now() > static_cast<SqliteConnection*>(self)->deadline_ ? 1 : 0;
  }

  void open() {
    if (sqlite3_open_v2(path_.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) !=
        SQLITE_OK) {
      const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      close();
      throw DbError("sqlite: cannot open '" + path_ + "': " + msg, true);
    }
    execute("PRAGMA foreign_keys = ON");
  }

  void close() {
    if (db_) {
      sqlite3_close_v2(db_);
      db_ = nullptr;
    }
  }

  sqlite3_stmt* prepare(const std::string& sql) {
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
      throw DbError("sqlite: " + std::string(sqlite3_errmsg(db_)));
    }
    return stmt;
  }

  std::string path_;
  sqlite3* db_ = nullptr;
  std::chrono::steady_clock::time_point deadline_{};
};

}  // namespace

std::unique_ptr<Connection> open_sqlite(const std::string& path) {
  return std::make_unique<SqliteConnection>(path);
}

}  // namespace synql
