#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vsql/database.hpp"
#include "vsql/views.hpp"

namespace vsql::cli {

// Seeded random dummy queries over a view catalog. Literals are sampled
// from the materialized views so predicates actually select rows; every
// query is inside the supported dialect and, when ordered, ordered by all
// of its output columns so sequence comparison is well defined.
class QueryGenerator {
 public:
  QueryGenerator(const ViewCatalog& catalog, Database& views_db, std::uint64_t seed);

  std::string next();

 private:
  struct Column {
    std::string name;
    bool numeric = false;
    std::vector<std::string> literals;  // SQL literal text
  };
  struct Relation {
    std::string name;
    std::vector<Column> columns;
  };
  // relations[from].from_column = relations[to].to_column follows a key.
  struct Link {
    std::size_t from;
    std::string from_column;
    std::size_t to;
    std::string to_column;
  };
  struct Ref {
    std::string name;  // alias or relation name
    std::size_t relation;
  };

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <typename T>
  const T& pick_of(const std::vector<T>& v) { return v[pick(v.size())]; }

  std::string column_ref(const Ref& ref, const Column& c) const;
  std::string predicate(const std::vector<Ref>& scope, int depth);
  std::string simple_predicate(const Ref& ref, const Column& c);

  std::vector<Relation> relations_;
  std::vector<Link> links_;
  std::mt19937_64 rng_;
  std::size_t alias_counter_ = 0;
};

}  // namespace vsql::cli
