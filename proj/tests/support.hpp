#pragma once

#include <string>

#include "vsql/error.hpp"
#include "vsql/schema.hpp"
#include "vsql/identifiers.hpp"

namespace vsql::test {

inline std::string fixture(const std::string& relative) {
  return std::string(VSQL_FIXTURE_DIR) + "/" + relative;
}

inline std::string fixture_text(const std::string& relative) {
  return trim(read_file(fixture(relative)));
}

// Built databases live under <db_root>/<db_id>/<db_id>.sqlite.
inline std::string db_root() { return VSQL_DB_ROOT; }

inline std::string superhero_db() { return db_root() + "/superhero/superhero.sqlite"; }

inline const DatabaseSchema& superhero_schema() {
  static const DatabaseSchema schema = load_schema_file(fixture("superhero/schema.json"));
  return schema;
}

}  // namespace vsql::test
