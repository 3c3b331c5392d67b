#include "synql/db.hpp"
#include "synql/error.hpp"

#ifdef SYNQL_WITH_LIBPQ

#include <libpq-fe.h>

#include <chrono>

namespace synql {

namespace {

constexpr const char* kQueryCanceled = "57014";

class PgConnection final : public Connection {
 public:
  explicit PgConnection(std::string url) : url_(std::move(url)) { open(); }
  ~PgConnection() override {
    if (conn_) {
      PQfinish(conn_);
    }
  }

  Dialect dialect() const override { return Dialect::postgres; }

  ResultSet query(const std::string& sql) override {
    PGresult* res = PQexec(conn_, sql.c_str());
    const ExecStatusType st = PQresultStatus(res);
    if (st != PGRES_TUPLES_OK && st != PGRES_COMMAND_OK) {
      fail(res);
    }
    ResultSet rs;
    const int ncols = PQnfields(res);
    for (int c = 0; c < ncols; ++c) {
      rs.columns.emplace_back(PQfname(res, c));
    }
    for (int r = 0; r < PQntuples(res); ++r) {
      std::vector<std::optional<std::string>> row;
      for (int c = 0; c < ncols; ++c) {
        if (PQgetisnull(res, r, c)) {
          row.emplace_back(std::nullopt);
        } else {
          row.emplace_back(std::string(PQgetvalue(res, r, c), PQgetlength(res, r, c)));
        }
      }
      rs.rows.push_back(std::move(row));
    }
    PQclear(res);
    return rs;
  }

  void execute(const std::string& sql) override {
    PGresult* res = PQexec(conn_, sql.c_str());
    const ExecStatusType st = PQresultStatus(res);
    if (st != PGRES_TUPLES_OK && st != PGRES_COMMAND_OK) {
      fail(res);
    }
    PQclear(res);
  }

  ExecResult execute_timed(const std::string& sql, int timeout_ms) override {
    ExecResult out;
    const int wanted = timeout_ms > 0 ? timeout_ms : 0;
    if (wanted != current_timeout_) {
      PGresult* res = PQexec(conn_, ("SET statement_timeout = " + std::to_string(wanted)).c_str());
      const bool ok = PQresultStatus(res) == PGRES_COMMAND_OK;
      PQclear(res);
      if (!ok) {
        return lost_or_error();
      }
      current_timeout_ = wanted;
    }
    const auto start = std::chrono::steady_clock::now();
    if (!PQsendQuery(conn_, sql.c_str())) {
      return lost_or_error();
    }
    PQsetSingleRowMode(conn_);
    std::string sqlstate;
    while (PGresult* res = PQgetResult(conn_)) {
      const ExecStatusType st = PQresultStatus(res);
      if (st == PGRES_FATAL_ERROR) {
        const char* state = PQresultErrorField(res, PG_DIAG_SQLSTATE);
        sqlstate = state ? state : "";
        out.error = trimmed(PQresultErrorMessage(res));
        out.status = ExecStatus::error;
      }
      PQclear(res);
    }
    out.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (out.status == ExecStatus::error) {
      if (sqlstate == kQueryCanceled) {
        out.status = ExecStatus::timed_out;
      } else if (PQstatus(conn_) == CONNECTION_BAD) {
        out.status = ExecStatus::connection_lost;
      }
    } else if (PQstatus(conn_) == CONNECTION_BAD) {
      out.status = ExecStatus::connection_lost;
      out.error = trimmed(PQerrorMessage(conn_));
    }
    return out;
  }

  bool is_alive() override {
    if (PQstatus(conn_) != CONNECTION_OK) {
      return false;
    }
    PGresult* res = PQexec(conn_, "SELECT 1");
    const bool ok = PQresultStatus(res) == PGRES_TUPLES_OK;
    PQclear(res);
    return ok;
  }

  void reconnect() override {
    PQreset(conn_);
    current_timeout_ = -1;
    if (PQstatus(conn_) != CONNECTION_OK) {
      throw DbError("postgres: reconnect failed: " + trimmed(PQerrorMessage(conn_)), true);
    }
    quiet();
  }

  std::string describe() const override {
    return std::string("postgres:") + PQdb(conn_) + "@" + PQhost(conn_) + ":" + PQport(conn_);
  }

 private:
  static std::string trimmed(const char* msg) {
    std::string s = msg ? msg : "";
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) {
      s.pop_back();
    }
    return s;
  }

  void open() {
    conn_ = PQconnectdb(url_.c_str());
    if (PQstatus(conn_) != CONNECTION_OK) {
      const std::string msg = trimmed(PQerrorMessage(conn_));
      PQfinish(conn_);
      conn_ = nullptr;
      throw DbError("postgres: cannot connect: " + msg, true);
    }
    quiet();
  }

  void quiet() {
    PGresult* res = PQexec(conn_, "SET client_min_messages = warning");
    PQclear(res);
  }

  [[noreturn]] void fail(PGresult* res) {
    std::string msg = trimmed(res ? PQresultErrorMessage(res) : PQerrorMessage(conn_));
    if (msg.empty()) {
      msg = trimmed(PQerrorMessage(conn_));
    }
    PQclear(res);
    throw DbError("postgres: " + msg, PQstatus(conn_) == CONNECTION_BAD);
  }

  ExecResult lost_or_error() {
    ExecResult out;
    out.error = trimmed(PQerrorMessage(conn_));
    out.status = PQstatus(conn_) == CONNECTION_BAD ? ExecStatus::connection_lost : ExecStatus::error;
    return out;
  }

  std::string url_;
  PGconn* conn_ = nullptr;
  int current_timeout_ = -1;
};

}  // namespace

std::unique_ptr<Connection> open_postgres(const std::string& url) {
  return std::make_unique<PgConnection>(url);
}

}  // namespace synql

#else

namespace synql {

std::unique_ptr<Connection> open_postgres(const std::string&) {
  throw ConfigError("this build has no PostgreSQL support (libpq was not found)");
}

}  // namespace synql

#endif
