#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

struct sqlite3;

namespace vsql {

struct Blob {
  std::vector<unsigned char> bytes;
  bool operator==(const Blob&) const = default;
};

using SqlValue = std::variant<std::monostate, std::int64_t, double, std::string, Blob>;

std::string to_display(const SqlValue& value);  // NULL, 42, 1.5, text, x'0a'

using Row = std::vector<SqlValue>;

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<Row> rows;
};

constexpr std::chrono::milliseconds kDefaultTimeout{30'000};

// A SQLite connection. Move-only.
class Database {
 public:
  static Database open_read_only(const std::string& path);
  static Database open_read_write(const std::string& path);  // creates the file
  static Database open_memory();
  // In-memory copy of `source` (SQLite backup API); the source is untouched.
  static Database scratch_copy(const Database& source);

  Database(Database&&) noexcept;
  Database& operator=(Database&&) noexcept;
  ~Database();

  // Runs a multi-statement script with no result rows.
  void exec_script(std::string_view sql);
  // Runs exactly one statement and collects its rows. Throws ExecutionError
  // with the backend message, or TimeoutError once `timeout` elapses.
  ResultSet query(std::string_view sql, std::chrono::milliseconds timeout = kDefaultTimeout);

  const std::string& path() const { return path_; }
  sqlite3* handle() const { return db_; }

 private:
  Database(sqlite3* db, std::string path) : db_(db), path_(std::move(path)) {}

  sqlite3* db_ = nullptr;
  std::string path_;
};

ResultSet execute_sql(std::string_view sql, Database& db, std::chrono::milliseconds timeout = kDefaultTimeout);

// Absolute tolerance for cells where either side is a real.
constexpr double kRealTolerance = 1e-6;

// Type-aware cell equality: integers and reals compare numerically (within
// kRealTolerance when a real is involved); text and blobs exactly; NULL
// only equals NULL.
bool values_equal(const SqlValue& a, const SqlValue& b);

// Row multiset equality, or sequence equality when the gold query orders
// its output. Column order matters; column names do not.
bool compare_results(const ResultSet& predicted, const ResultSet& gold, bool gold_has_order_by);

// True when the statement has ORDER BY at its outermost level. Works on
// any tokenizable text, so execute-only gold SQL is covered too.
bool has_top_level_order_by(std::string_view sql);

}  // namespace vsql
