#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vsql/views.hpp"

namespace vsql::cli {

// argv without the program name. Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct OracleFailure {
  std::size_t index;
  std::string dummy_sql;
  std::string final_sql;
  std::string reason;
};

struct OracleSummary {
  std::size_t count = 0;
  std::size_t passed = 0;
  std::size_t round_trips = 0;  // parse(print(parse(q))) == parse(q) on the dummy and the final SQL
  double mean_dummy_joins = 0, mean_final_joins = 0;
  double mean_dummy_length = 0, mean_final_length = 0;
  std::vector<OracleFailure> failures;
  std::vector<std::string> dummies;  // the generated corpus, in order
};

struct OracleOptions {
  std::size_t count = 200;
  std::uint64_t seed = 42;
  bool tighten = false;
  bool prune = true;
};

// Materializes `truth` in a scratch copy of the database, generates dummy
// queries over it, reconstructs each with `rewrite` and compares results.
OracleSummary run_oracle(const ViewCatalog& truth, const ViewCatalog& rewrite, const std::string& db_path,
                         const OracleOptions& options);

}  // namespace vsql::cli
