// Properties over generated inputs: the seeded dummy-query corpus on the
// fixture database, and random schemas with random data.
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cli/cli.hpp"
#include "cli/query_gen.hpp"
#include "support.hpp"
#include "vsql/database.hpp"
#include "vsql/eval.hpp"
#include "vsql/reconstruction.hpp"
#include "vsql/sql/analysis.hpp"
#include "vsql/sql/parser.hpp"
#include "vsql/sql/printer.hpp"

using namespace vsql;
using vsql::test::superhero_db;
using vsql::test::superhero_schema;

namespace {

const ViewCatalog& catalog() {
  static const ViewCatalog c = synthesize_views(superhero_schema());
  return c;
}

const std::vector<std::string>& corpus() {
  static const auto dummies = [] {
    auto db = Database::open_read_only(superhero_db());
    auto views_db = materialize_views(catalog(), db);
    cli::QueryGenerator gen(catalog(), views_db, 42);
    std::vector<std::string> out;
    for (int i = 0; i < 200; ++i) out.push_back(gen.next());
    return out;
  }();
  return dummies;
}

bool mentions_view(const sql::QueryAst& ast, const ViewCatalog& c) {
  for (const auto& r : sql::referenced_relations(ast)) {
    if (c.is_view(r)) return true;
  }
  return false;
}

}  // namespace

TEST(Corpus, GeneratorIsSeeded) {
  auto db = Database::open_read_only(superhero_db());
  auto views_db = materialize_views(catalog(), db);
  cli::QueryGenerator a(catalog(), views_db, 42), b(catalog(), views_db, 42), c(catalog(), views_db, 7);
  std::size_t differing = 0;
  for (int i = 0; i < 20; ++i) {
    const auto qa = a.next();
    EXPECT_EQ(qa, b.next());
    differing += qa != c.next();
  }
  EXPECT_GT(differing, 0u);
}

TEST(Corpus, ExercisesTheDialect) {
  std::size_t joins = 0, left = 0, aggregates = 0, ordered = 0, subqueries = 0, null_tests = 0;
  for (const auto& q : corpus()) {
    joins += q.find(" join ") != std::string::npos;
    left += q.find(" left join ") != std::string::npos;
    aggregates += q.find("count(") != std::string::npos || q.find("avg(") != std::string::npos;
    ordered += q.find(" order by ") != std::string::npos;
    subqueries += q.find("(select") != std::string::npos || q.find("exists") != std::string::npos;
    null_tests += q.find(" is null") != std::string::npos;
  }
  EXPECT_GT(joins, 10u);
  EXPECT_GT(left, 5u);
  EXPECT_GT(aggregates, 20u);
  EXPECT_GT(ordered, 20u);
  EXPECT_GT(subqueries, 10u);
  EXPECT_GT(null_tests, 10u);
}

TEST(Corpus, ParsePrintParseIsStable) {
  for (const auto& q : corpus()) {
    const auto once = sql::parse(q);
    EXPECT_EQ(sql::parse(sql::print(once)), once) << q;
  }
}

TEST(Corpus, OracleMatchesWithoutTightening) {
  const auto s = cli::run_oracle(catalog(), catalog(), superhero_db(), {200, 42, false, true});
  EXPECT_EQ(s.passed, 200u);
  for (const auto& f : s.failures) ADD_FAILURE() << f.reason << "\n" << f.dummy_sql << "\n" << f.final_sql;
  EXPECT_EQ(s.dummies, corpus());
}

// Tightening only fires under null-rejecting predicates, so the whole
// corpus qualifies.
TEST(Corpus, OracleMatchesWithTightening) {
  const auto s = cli::run_oracle(catalog(), catalog(), superhero_db(), {200, 42, true, true});
  EXPECT_EQ(s.passed, 200u);
  for (const auto& f : s.failures) ADD_FAILURE() << f.reason << "\n" << f.dummy_sql << "\n" << f.final_sql;
}

TEST(Corpus, PruningNeverChangesResults) {
  auto db = Database::open_read_only(superhero_db());
  std::size_t pruned_any = 0;
  for (const auto& q : corpus()) {
    const auto r = reconstruct(sql::parse(q), catalog());
    pruned_any += !r.pruned_joins.empty();
    const auto unpruned = db.query(sql::print(r.inlined_ast));
    const auto pruned = db.query(sql::print(r.final_ast));
    EXPECT_TRUE(compare_results(pruned, unpruned, has_top_level_order_by(q))) << q;
  }
  EXPECT_GT(pruned_any, 30u);
}

TEST(Corpus, JoinCountsAreMonotone) {
  for (const auto& q : corpus()) {
    const auto dummy = sql::parse(q);
    const auto r = reconstruct(dummy, catalog());
    EXPECT_LE(sql::count_joins(r.final_ast), sql::count_joins(r.inlined_ast)) << q;
    EXPECT_LE(sql::count_joins(dummy), sql::count_joins(r.final_ast)) << q;
  }
}

TEST(Corpus, OutputIsViewFreeAndIdempotent) {
  const auto tables = table_relations(superhero_schema());
  for (const auto& q : corpus()) {
    const auto r = reconstruct(sql::parse(q), catalog(), {true, true, false});
    EXPECT_FALSE(mentions_view(r.final_ast, catalog())) << q;
    for (const auto& t : r.linked_tables) EXPECT_NE(superhero_schema().find_table(t), nullptr) << t;
    const auto again = reconstruct(r.final_ast, catalog(), {true, true, false});
    EXPECT_EQ(sql::print(again.final_ast), sql::print(r.final_ast)) << q;
  }
}

TEST(Corpus, DummyIsShorterOnAverage) {
  const auto s = cli::run_oracle(catalog(), catalog(), superhero_db(), {200, 42, false, true});
  EXPECT_LT(s.mean_dummy_joins, s.mean_final_joins);
  EXPECT_LT(s.mean_dummy_length, s.mean_final_length);
}

TEST(Corpus, CorruptedCatalogIsCaught) {
  // Mutation: hair_colour reads the skin colour.
  auto broken = catalog();
  for (auto& v : broken.views) {
    for (auto& j : v.join_chain) {
      if (j.alias == "hair_colour") j.left_column = "skin_colour_id";
    }
  }
  const auto s = cli::run_oracle(catalog(), broken, superhero_db(), {200, 42, false, true});
  EXPECT_LT(s.passed, 200u);
  EXPECT_FALSE(s.failures.empty());
}

TEST(Compare, ReorderingRowsKeepsUnorderedMatch) {
  auto db = Database::open_read_only(superhero_db());
  std::mt19937 rng(3);
  for (const auto& q : corpus()) {
    if (has_top_level_order_by(q)) continue;
    const auto gold = db.query(sql::print(reconstruct(sql::parse(q), catalog()).final_ast));
    auto shuffled = gold;
    std::shuffle(shuffled.rows.begin(), shuffled.rows.end(), rng);
    EXPECT_TRUE(compare_results(shuffled, gold, false));
  }
}

// --- random schemas ---------------------------------------------------------

namespace {

struct RandomDatabase {
  DatabaseSchema schema;
  std::string script;  // DDL + rows
};

// Lookup tables first, then fact tables with foreign keys (some parallel,
// some named after their target) into earlier tables. Rows leave about a
// fifth of the foreign keys NULL and some dangling.
RandomDatabase random_database(std::uint32_t seed) {
  std::mt19937 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RandomDatabase out;
  out.schema.db_id = "random" + std::to_string(seed);
  const int n_tables = pick(3, 6);
  for (int t = 0; t < n_tables; ++t) {
    TableDef table;
    table.name = "t" + std::to_string(t);
    table.columns.push_back({"id", "", "", DataFormat::integer});
    table.primary_key = {"id"};
    const int n_cols = pick(0, 3);
    for (int c = 0; c < n_cols; ++c) {
      table.columns.push_back({"c" + std::to_string(c), "", "", pick(0, 2) ? DataFormat::text : DataFormat::integer});
    }
    if (t > 0) {
      const int n_fks = pick(0, 3);
      for (int f = 0; f < n_fks; ++f) {
        const auto target = "t" + std::to_string(pick(0, t - 1));
        auto role = pick(0, 3) == 0 ? target : "r" + std::to_string(f);
        if (table.has_column(role + "_id")) role = "r" + std::to_string(f);
        table.columns.push_back({role + "_id", "", "", DataFormat::integer});
        table.foreign_keys.push_back({table.name, role + "_id", target, "id"});
      }
    }
    out.schema.tables.push_back(std::move(table));
  }
  validate(out.schema);

  for (const auto& t : out.schema.tables) {
    std::vector<std::string> defs;
    for (const auto& c : t.columns) {
      defs.push_back(c.name + (c.data_format == DataFormat::text ? " text" : " integer") +
                     (c.name == "id" ? " primary key" : ""));
    }
    out.script += "create table " + t.name + " (" + join(defs, ", ") + ");\n";
    const int rows = pick(3, 9);
    for (int r = 1; r <= rows; ++r) {
      std::vector<std::string> values;
      for (const auto& c : t.columns) {
        if (c.name == "id") {
          values.push_back(std::to_string(r));
        } else if (t.foreign_key_from(c.name)) {
          const int v = pick(0, 9);
          values.push_back(v < 2 ? "null" : std::to_string(v - 1));  // ids past the end dangle
        } else if (pick(0, 6) == 0) {
          values.push_back("null");
        } else if (c.data_format == DataFormat::text) {
          values.push_back("'" + std::string(1, static_cast<char>('a' + pick(0, 4))) + "x'");
        } else {
          values.push_back(std::to_string(pick(0, 5)));
        }
      }
      out.script += "insert into " + t.name + " values (" + join(values, ", ") + ");\n";
    }
  }
  return out;
}

}  // namespace

TEST(RandomSchemas, SynthesisInvariants) {
  for (std::uint32_t seed = 1; seed <= 60; ++seed) {
    const auto rdb = random_database(seed);
    const auto& s = rdb.schema;
    const auto c = synthesize_views(s);
    ASSERT_EQ(c.views.size(), s.tables.size());
    validate(c);
    for (const auto& v : c.views) {
      EXPECT_TRUE(istarts_with(v.view_name, "v_")) << v.view_name;
      CiSet exposed;
      for (const auto& o : v.output_columns) EXPECT_TRUE(exposed.insert(o.exposed_name).second) << o.exposed_name;
      const auto& t = s.table(v.base_table);
      for (const auto& col : t.columns) {
        if (t.is_primary_key(col.name) || t.foreign_key_from(col.name)) continue;
        EXPECT_EQ(std::count_if(v.output_columns.begin(), v.output_columns.end(),
                                [&](const OutputColumn& o) {
                                  return o.source_relation == v.base_exposed_name() && o.source_column == col.name;
                                }),
                  1)
            << "seed " << seed << ": " << v.view_name << "." << col.name;
      }
      for (const auto& j : v.join_chain) {
        EXPECT_FALSE(c.is_view(j.target_table));
        EXPECT_EQ(j.left_relation, v.base_exposed_name());
      }
      EXPECT_EQ(ingest_view_sql(emit_view_sql(v), s), v) << "seed " << seed << "\n" << emit_view_sql(v);
    }
    EXPECT_EQ(emit_catalog_sql(synthesize_views(s)), emit_catalog_sql(c));
  }
}

TEST(RandomSchemas, OracleHoldsWithNullAndDanglingKeys) {
  for (std::uint32_t seed = 1; seed <= 25; ++seed) {
    const auto rdb = random_database(seed);
    auto db = Database::open_memory();
    db.exec_script(rdb.script);
    const auto c = synthesize_views(rdb.schema);
    auto views_db = materialize_views(c, db);
    cli::QueryGenerator gen(c, views_db, seed);
    for (int i = 0; i < 40; ++i) {
      const auto q = gen.next();
      for (bool tighten : {false, true}) {
        std::string final_sql;
        try {
          final_sql = sql::print(reconstruct(sql::parse(q), c, {tighten, true, false}).final_ast);
          EXPECT_TRUE(oracle_check(views_db, db, q, final_sql).match)
              << "seed " << seed << (tighten ? " (tightened)" : "") << "\n" << q << "\n" << final_sql;
        } catch (const std::exception& e) {
          ADD_FAILURE() << "seed " << seed << ": " << e.what() << "\n" << q << "\n" << final_sql;
        }
      }
    }
  }
}
