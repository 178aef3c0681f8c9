#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vsql/database.hpp"
#include "vsql/views.hpp"

namespace vsql {

enum class Difficulty { simple, moderate, challenging };

constexpr std::array<Difficulty, 3> kDifficulties = {Difficulty::simple, Difficulty::moderate,
                                                     Difficulty::challenging};

const char* to_string(Difficulty d) noexcept;
Difficulty parse_difficulty(std::string_view text);

struct DatasetExample {
  std::string example_id;
  std::string db_id;
  std::string question;
  std::string gold_sql;
  Difficulty difficulty = Difficulty::simple;
  std::string evidence;  // optional hint text, passed along untouched
  // Gold SQL outside the supported dialect: executed verbatim, left out of
  // AST statistics.
  bool execute_only = false;
};

// JSONL, one object per line: {question_id, db_id, question, SQL,
// difficulty[, evidence]}. A top-level JSON array of such objects is
// accepted too. execute_only is derived by trying to parse each gold query.
std::vector<DatasetExample> parse_dataset(std::string_view text);
std::vector<DatasetExample> load_dataset(const std::string& path);

struct StageTimings {
  double generation_ms = 0;
  double reconstruction_ms = 0;
  double execution_ms = 0;
};

// What the pipeline produced for one example.
struct Prediction {
  std::string dummy_sql;
  std::string final_sql;
  std::optional<std::string> error;  // pipeline failure; final_sql is empty then
  std::string error_stage;
  StageTimings timings;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  // Must be safe to call concurrently when parallelism > 1.
  virtual Prediction predict(const DatasetExample& example) = 0;
};

struct EvalRecord {
  std::string example_id;
  std::string db_id;
  Difficulty difficulty = Difficulty::simple;
  std::string dummy_sql;
  std::string predicted_sql;
  bool executed_ok = false;
  bool result_match = false;
  std::optional<std::string> error_text;
  std::string error_stage;
  StageTimings timings;
};

struct StratumStats {
  std::size_t examples = 0;
  std::size_t analyzed = 0;      // parseable gold queries
  std::size_t execute_only = 0;
  double avg_joins = 0;
  double avg_tables = 0;
  std::size_t table_combinations = 0;
  bool empty = true;  // no analyzable example: averages are meaningless
};

struct CorpusStats {
  std::array<StratumStats, 3> strata;  // indexed by Difficulty
  StratumStats overall;
};

// Join counts are top-level JOIN clauses; tables are distinct base tables
// over the whole statement; a table combination is the set of those tables.
CorpusStats corpus_stats(const std::vector<DatasetExample>& dataset);

struct StratumScore {
  std::size_t examples = 0;
  std::size_t matches = 0;
  double ex = 0;  // matches / examples, 0 when there are no examples
};

struct EvalReport {
  std::vector<EvalRecord> records;  // sorted by example_id
  std::array<StratumScore, 3> strata;
  StratumScore total;
  bool ex_defined = false;  // false for an empty dataset
  CorpusStats stats;
};

// Maps a db_id to a database file.
using DatabaseResolver = std::function<std::string(const std::string& db_id)>;

struct EvalOptions {
  std::size_t parallelism = 1;
  std::chrono::milliseconds timeout = kDefaultTimeout;
};

// Runs every example through `predictor`, executes prediction and gold on
// a read-only connection and compares results. Example failures are
// recorded, never thrown; a missing database fails the run up front.
EvalReport run_eval(const std::vector<DatasetExample>& dataset, Predictor& predictor,
                    const DatabaseResolver& resolve, const EvalOptions& options = {});

// Deterministic renderings. Timings are left out of the JSON unless asked
// for, since they would break byte-identical reruns.
std::string report_json(const EvalReport& report, bool include_timings = false);
std::string report_table(const EvalReport& report);

struct OracleVerdict {
  bool match = false;
  ResultSet dummy_result;
  ResultSet final_result;
};

// Creates every catalog view in an in-memory copy of `db`, runs the dummy
// query there and the final query against `db` itself, and compares the
// results. Throws ExecutionError naming the statement when a view cannot be
// created; query errors propagate.
OracleVerdict materialize_views_oracle(const ViewCatalog& catalog, Database& db, const std::string& dummy_sql,
                                       const std::string& final_sql,
                                       std::chrono::milliseconds timeout = kDefaultTimeout);

// Scratch database with the catalog's views created; reusable across many
// oracle checks on a single thread.
Database materialize_views(const ViewCatalog& catalog, const Database& db);
OracleVerdict oracle_check(Database& views_db, Database& db, const std::string& dummy_sql,
                           const std::string& final_sql, std::chrono::milliseconds timeout = kDefaultTimeout);

}  // namespace vsql
