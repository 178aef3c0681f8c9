// Builds a SQLite database from a SQL script: build_fixture_db <script.sql> <out.sqlite>
#include <cstdio>
#include <filesystem>

#include "vsql/database.hpp"
#include "vsql/error.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <script.sql> <out.sqlite>\n", argv[0]);
    return 2;
  }
  try {
    const std::filesystem::path out = argv[2];
    std::filesystem::create_directories(out.parent_path());
    std::filesystem::remove(out);
    auto db = vsql::Database::open_read_write(out.string());
    db.exec_script(vsql::read_file(argv[1]));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "build_fixture_db: %s\n", e.what());
    return 1;
  }
  return 0;
}
