#include <gtest/gtest.h>

#include "support.hpp"
#include "vsql/error.hpp"
#include "vsql/schema.hpp"

using namespace vsql;
using vsql::test::superhero_schema;

namespace {

const char* kEmployees = R"({
  "db_id": "hr",
  "tables": [
    { "name": "employee",
      "columns": [
        { "name": "id", "data_format": "integer" },
        { "name": "name", "data_format": "text" },
        { "name": "manager_id", "data_format": "integer" }
      ],
      "primary_key": ["id"],
      "foreign_keys": [ { "column": "manager_id", "ref_table": "employee", "ref_column": "id" } ] }
  ]
})";

std::size_t count_lines_starting(const std::string& text, const std::string& prefix) {
  std::size_t n = 0, pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    if (text.compare(pos, prefix.size(), prefix) == 0) ++n;
    pos = end + 1;
  }
  return n;
}

}  // namespace

TEST(LoadSchema, SuperheroJson) {
  const auto& s = superhero_schema();
  EXPECT_EQ(s.db_id, "superhero");
  EXPECT_EQ(s.tables.size(), 8u);
  const auto& hero = s.table("superhero");
  ASSERT_EQ(hero.columns.size(), 12u);
  std::vector<std::string> fk_cols;
  for (const auto& fk : hero.foreign_keys) fk_cols.push_back(fk.from_column);
  EXPECT_EQ(fk_cols, (std::vector<std::string>{"gender_id", "eye_colour_id", "hair_colour_id", "skin_colour_id",
                                               "race_id", "publisher_id", "alignment_id"}));
  EXPECT_EQ(hero.find_column("eye_colour_id")->description, "the id of the superhero's eye color");
  EXPECT_EQ(hero.find_column("superhero_name")->display_name, "superhero name");
  EXPECT_EQ(hero.primary_key, std::vector<std::string>{"id"});
}

TEST(LoadSchema, LookupIsCaseInsensitive) {
  const auto& s = superhero_schema();
  ASSERT_NE(s.find_table("SuperHero"), nullptr);
  EXPECT_EQ(s.find_table("SuperHero")->name, "superhero");
  EXPECT_TRUE(s.table("superhero").has_column("EYE_COLOUR_ID"));
}

TEST(LoadSchema, SingleTableWithoutKeys) {
  const auto s = load_schema(
      R"({"db_id":"one","tables":[{"name":"t","columns":[{"name":"a","data_format":"text"}],"primary_key":[],"foreign_keys":[]}]})",
      SchemaFormat::json);
  EXPECT_EQ(s.tables.size(), 1u);
  EXPECT_EQ(fk_graph(s).edge_count(), 0u);
}

TEST(LoadSchema, DanglingForeignKeyNamesTable) {
  try {
    load_schema(
        R"({"db_id":"x","tables":[{"name":"t","columns":[{"name":"a_id","data_format":"integer"}],
            "primary_key":[],"foreign_keys":[{"column":"a_id","ref_table":"nowhere","ref_column":"id"}]}]})",
        SchemaFormat::json);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("nowhere"), std::string::npos) << e.what();
  }
}

TEST(LoadSchema, DuplicateColumnRejected) {
  EXPECT_THROW(load_schema(R"({"db_id":"x","tables":[{"name":"t","columns":[
                 {"name":"a","data_format":"text"},{"name":"A","data_format":"text"}]}]})",
                           SchemaFormat::json),
               ValidationError);
}

TEST(LoadSchema, DuplicateTableRejected) {
  EXPECT_THROW(load_schema(R"({"db_id":"x","tables":[
                 {"name":"t","columns":[{"name":"a","data_format":"text"}]},
                 {"name":"T","columns":[{"name":"a","data_format":"text"}]}]})",
                           SchemaFormat::json),
               ValidationError);
}

TEST(LoadSchema, ForeignKeyMustTargetPrimaryKey) {
  EXPECT_THROW(load_schema(R"({"db_id":"x","tables":[
                 {"name":"p","columns":[{"name":"id","data_format":"integer"},{"name":"code","data_format":"text"}],
                  "primary_key":["id"]},
                 {"name":"c","columns":[{"name":"p_code","data_format":"text"}],
                  "foreign_keys":[{"column":"p_code","ref_table":"p","ref_column":"code"}]}]})",
                           SchemaFormat::json),
               ValidationError);
}

TEST(LoadSchema, CompositeForeignKeyRejected) {
  try {
    load_schema(R"({"db_id":"x","tables":[
                 {"name":"p","columns":[{"name":"a","data_format":"integer"},{"name":"b","data_format":"integer"}],
                  "primary_key":["a","b"]},
                 {"name":"c","columns":[{"name":"a","data_format":"integer"},{"name":"b","data_format":"integer"}],
                  "foreign_keys":[{"column":["a","b"],"ref_table":"p","ref_column":["a","b"]}]}]})",
                SchemaFormat::json);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("composite"), std::string::npos);
  }
  EXPECT_THROW(load_schema("CREATE TABLE p (a INTEGER, b INTEGER, PRIMARY KEY (a, b));"
                           "CREATE TABLE c (a INTEGER, b INTEGER, FOREIGN KEY (a, b) REFERENCES p(a, b));",
                           SchemaFormat::ddl, "x"),
               ValidationError);
}

TEST(LoadSchema, MalformedJsonIsParseError) {
  try {
    load_schema("{\n  \"db_id\": \"x\",\n  \"tables\": [ oops ]\n}", SchemaFormat::json);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadSchema, MissingFieldNamesIt) {
  try {
    load_schema(R"({"db_id":"x","tables":[{"name":"t","columns":[{"name":"a"}]}]})", SchemaFormat::json);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("data_format"), std::string::npos) << e.what();
  }
}

TEST(LoadSchema, MissingFile) {
  try {
    load_schema_file("/nonexistent/schema.json");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("schema source not found"), std::string::npos);
  }
}

TEST(LoadSchema, DdlMatchesJsonStructure) {
  const auto ddl = load_schema_file(vsql::test::fixture("superhero/superhero.sql"));
  const auto& json = superhero_schema();
  EXPECT_EQ(ddl.db_id, "superhero");
  ASSERT_EQ(ddl.tables.size(), json.tables.size());
  for (std::size_t i = 0; i < ddl.tables.size(); ++i) {
    const auto& a = ddl.tables[i];
    const auto& b = json.tables[i];
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.column_names(), b.column_names());
    EXPECT_EQ(a.primary_key, b.primary_key) << a.name;
    EXPECT_EQ(a.foreign_keys, b.foreign_keys) << a.name;
    for (std::size_t c = 0; c < a.columns.size(); ++c) {
      EXPECT_EQ(a.columns[c].data_format, b.columns[c].data_format) << a.name << "." << a.columns[c].name;
    }
  }
}

TEST(LoadSchema, DdlSkipsCommentsAndOtherStatements) {
  const auto s = load_schema(
      "-- header\n/* block */ CREATE TABLE a (id INTEGER PRIMARY KEY, label VARCHAR(20), born DATE, w NUMERIC);\n"
      "CREATE INDEX ix ON a(label);\n"
      "CREATE TABLE b (id INT PRIMARY KEY, a_id INTEGER REFERENCES a, data BLOB);\n"
      "INSERT INTO a VALUES (1, 'x', '2020-01-01', 1);",
      SchemaFormat::ddl, "demo");
  ASSERT_EQ(s.tables.size(), 2u);
  EXPECT_EQ(s.table("a").find_column("label")->data_format, DataFormat::text);
  EXPECT_EQ(s.table("a").find_column("born")->data_format, DataFormat::date);
  EXPECT_EQ(s.table("a").find_column("w")->data_format, DataFormat::real);
  EXPECT_EQ(s.table("b").find_column("data")->data_format, DataFormat::blob);
  ASSERT_EQ(s.table("b").foreign_keys.size(), 1u);
  EXPECT_EQ(s.table("b").foreign_keys[0].to_column, "id");
}

TEST(FkGraph, SuperheroOutEdges) {
  const auto g = fk_graph(superhero_schema());
  EXPECT_EQ(g.out_degree("superhero"), 7u);
  std::size_t to_colour = 0;
  for (const auto& e : g.out_edges("superhero")) {
    if (g.nodes()[e.to] == "colour") ++to_colour;
  }
  EXPECT_EQ(to_colour, 3u);
  EXPECT_EQ(g.edge_count(), superhero_schema().foreign_key_count());
  EXPECT_EQ(g.edge_count(), 9u);
  EXPECT_EQ(g.in_edges("colour").size(), 3u);
}

TEST(FkGraph, SelfReferenceIsLoop) {
  const auto s = load_schema(kEmployees, SchemaFormat::json);
  const auto g = fk_graph(s);
  ASSERT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.edges()[0].from, g.edges()[0].to);
}

TEST(RenderSchema, SuperheroSubset) {
  const auto text = render_schema_text(superhero_schema(), std::vector<std::string>{"superhero"});
  EXPECT_NE(text.find("the unique identifier of the superhero"), std::string::npos);
  EXPECT_EQ(text.find("# table: colour"), std::string::npos);
  EXPECT_EQ(count_lines_starting(text, "  - "), 12u + 7u);  // columns + foreign keys
  EXPECT_NE(text.find("  - eye_colour_id -> colour.id\n"), std::string::npos);
}

TEST(RenderSchema, EmptySubsetIsEmpty) {
  EXPECT_EQ(render_schema_text(superhero_schema(), std::vector<std::string>{}), "");
}

TEST(RenderSchema, Deterministic) {
  EXPECT_EQ(render_schema_text(superhero_schema()), render_schema_text(superhero_schema()));
}

TEST(RenderSchema, UnknownSubsetTable) {
  EXPECT_THROW(render_schema_text(superhero_schema(), std::vector<std::string>{"villain"}), ResolutionError);
}

TEST(RenderSchema, MissingDescriptionFallsBackToName) {
  const auto s = load_schema(kEmployees, SchemaFormat::json);
  EXPECT_NE(render_schema_text(s).find("  - manager_id: integer, manager_id\n"), std::string::npos);
}
