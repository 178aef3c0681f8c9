#include "vsql/database.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "vsql/error.hpp"
#include "vsql/identifiers.hpp"
#include "vsql/sql/lexer.hpp"

namespace vsql {

namespace {

std::string last_error(sqlite3* db) { return db ? sqlite3_errmsg(db) : "out of memory"; }

sqlite3* open_or_throw(const std::string& path, int flags) {
  sqlite3* db = nullptr;
  if (sqlite3_open_v2(path.c_str(), &db, flags, nullptr) != SQLITE_OK) {
    const auto message = last_error(db);
    sqlite3_close(db);
    throw ExecutionError("cannot open database " + path + ": " + message);
  }
  sqlite3_extended_result_codes(db, 1);
  return db;
}

struct Deadline {
  std::chrono::steady_clock::time_point at;
};

int check_deadline(void* arg) {
  const auto* d = static_cast<const Deadline*>(arg);
  return std::chrono::steady_clock::now() >= d->at ? 1 : 0;
}

SqlValue column_value(sqlite3_stmt* stmt, int i) {
  switch (sqlite3_column_type(stmt, i)) {
    case SQLITE_INTEGER:
      return static_cast<std::int64_t>(sqlite3_column_int64(stmt, i));
    case SQLITE_FLOAT:
      return sqlite3_column_double(stmt, i);
    case SQLITE_TEXT: {
      const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt, i));
      return std::string(text, static_cast<std::size_t>(sqlite3_column_bytes(stmt, i)));
    }
    case SQLITE_BLOB: {
      const auto* data = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, i));
      Blob b;
      b.bytes.assign(data, data + sqlite3_column_bytes(stmt, i));
      return b;
    }
    default:
      return std::monostate{};
  }
}

int rank(const SqlValue& v) {
  switch (v.index()) {
    case 0:
      return 0;
    case 1:
    case 2:
      return 1;
    case 3:
      return 2;
    default:
      return 3;
  }
}

long double numeric(const SqlValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<long double>(*i);
  return static_cast<long double>(std::get<double>(v));
}

bool value_less(const SqlValue& a, const SqlValue& b) {
  if (rank(a) != rank(b)) return rank(a) < rank(b);
  switch (rank(a)) {
    case 1:
      return numeric(a) < numeric(b);
    case 2:
      return std::get<std::string>(a) < std::get<std::string>(b);
    case 3:
      return std::get<Blob>(a).bytes < std::get<Blob>(b).bytes;
    default:
      return false;
  }
}

bool row_less(const Row& a, const Row& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), value_less);
}

bool rows_equal(const Row& a, const Row& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), values_equal);
}

}  // namespace

std::string to_display(const SqlValue& value) {
  switch (value.index()) {
    case 0:
      return "NULL";
    case 1:
      return std::to_string(std::get<std::int64_t>(value));
    case 2: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.15g", std::get<double>(value));
      return buf;
    }
    case 3:
      return std::get<std::string>(value);
    default: {
      std::string out = "x'";
      char buf[3];
      for (unsigned char c : std::get<Blob>(value).bytes) {
        std::snprintf(buf, sizeof buf, "%02x", c);
        out += buf;
      }
      return out + "'";
    }
  }
}

Database Database::open_read_only(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("database not found: " + path);
  return Database(open_or_throw(path, SQLITE_OPEN_READONLY), path);
}

Database Database::open_read_write(const std::string& path) {
  return Database(open_or_throw(path, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE), path);
}

Database Database::open_memory() {
  return Database(open_or_throw(":memory:", SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE), ":memory:");
}

Database Database::scratch_copy(const Database& source) {
  auto copy = open_memory();
  sqlite3_backup* backup = sqlite3_backup_init(copy.db_, "main", source.db_, "main");
  if (!backup) throw ExecutionError("cannot copy database " + source.path_ + ": " + last_error(copy.db_));
  const int rc = sqlite3_backup_step(backup, -1);
  sqlite3_backup_finish(backup);
  if (rc != SQLITE_DONE) {
    throw ExecutionError("cannot copy database " + source.path_ + ": " + sqlite3_errstr(rc));
  }
  return copy;
}

Database::Database(Database&& other) noexcept : db_(other.db_), path_(std::move(other.path_)) {
  other.db_ = nullptr;
}

Database& Database::operator=(Database&& other) noexcept {
  if (this != &other) {
    sqlite3_close(db_);
    db_ = other.db_;
    path_ = std::move(other.path_);
    other.db_ = nullptr;
  }
  return *this;
}

Database::~Database() { sqlite3_close(db_); }

void Database::exec_script(std::string_view sql) {
  char* err = nullptr;
  const std::string text(sql);
  if (sqlite3_exec(db_, text.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string message = err ? err : last_error(db_);
    sqlite3_free(err);
    throw ExecutionError(message);
  }
}

ResultSet Database::query(std::string_view sql, std::chrono::milliseconds timeout) {
  sqlite3_stmt* stmt = nullptr;
  const char* tail = nullptr;
  if (sqlite3_prepare_v2(db_, sql.data(), static_cast<int>(sql.size()), &stmt, &tail) != SQLITE_OK) {
    throw ExecutionError(last_error(db_));
  }
  std::unique_ptr<sqlite3_stmt, int (*)(sqlite3_stmt*)> guard(stmt, sqlite3_finalize);
  if (!stmt) throw ExecutionError("empty statement");
  const std::string_view rest = tail ? sql.substr(static_cast<std::size_t>(tail - sql.data())) : "";
  if (rest.find_first_not_of(" \t\r\n;") != std::string_view::npos) {
    throw ExecutionError("multiple statements are not allowed");
  }

  ResultSet out;
  const int n = sqlite3_column_count(stmt);
  for (int i = 0; i < n; ++i) {
    const char* name = sqlite3_column_name(stmt, i);
    out.columns.emplace_back(name ? name : "");
  }

  Deadline deadline{std::chrono::steady_clock::now() + timeout};
  sqlite3_progress_handler(db_, 1000, check_deadline, &deadline);
  int rc;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    Row row;
    row.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) row.push_back(column_value(stmt, i));
    out.rows.push_back(std::move(row));
  }
  sqlite3_progress_handler(db_, 0, nullptr, nullptr);
  if (rc == SQLITE_INTERRUPT) {
    throw TimeoutError("query exceeded the " + std::to_string(timeout.count()) + " ms timeout");
  }
  if (rc != SQLITE_DONE) throw ExecutionError(last_error(db_));
  return out;
}

ResultSet execute_sql(std::string_view sql, Database& db, std::chrono::milliseconds timeout) {
  return db.query(sql, timeout);
}

bool values_equal(const SqlValue& a, const SqlValue& b) {
  if (rank(a) != rank(b)) return false;
  switch (rank(a)) {
    case 0:
      return true;
    case 1:
      if (a.index() == 1 && b.index() == 1) return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
      return std::fabs(static_cast<double>(numeric(a) - numeric(b))) <= kRealTolerance;
    case 2:
      return std::get<std::string>(a) == std::get<std::string>(b);
    default:
      return std::get<Blob>(a) == std::get<Blob>(b);
  }
}

bool compare_results(const ResultSet& predicted, const ResultSet& gold, bool gold_has_order_by) {
  if (predicted.rows.size() != gold.rows.size()) return false;
  if (predicted.columns.size() != gold.columns.size()) return false;
  if (gold_has_order_by) {
    return std::equal(predicted.rows.begin(), predicted.rows.end(), gold.rows.begin(), rows_equal);
  }
  auto p = predicted.rows;
  auto g = gold.rows;
  std::sort(p.begin(), p.end(), row_less);
  std::sort(g.begin(), g.end(), row_less);
  return std::equal(p.begin(), p.end(), g.begin(), rows_equal);
}

bool has_top_level_order_by(std::string_view sql) {
  std::vector<sql::Token> tokens;
  try {
    tokens = sql::tokenize(sql);
  } catch (const Error&) {
    return false;
  }
  int depth = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i].is_symbol("(")) ++depth;
    if (tokens[i].is_symbol(")")) --depth;
    if (depth == 0 && tokens[i].is_keyword("order") && tokens[i + 1].is_keyword("by")) return true;
  }
  return false;
}

}  // namespace vsql
