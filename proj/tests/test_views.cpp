#include <gtest/gtest.h>

#include "support.hpp"
#include "vsql/error.hpp"
#include "vsql/sql/parser.hpp"
#include "vsql/views.hpp"

using namespace vsql;
using vsql::test::fixture_text;
using vsql::test::superhero_schema;

namespace {

// The superhero mapping rule, transcribed by hand column by column.
ViewDefinition expected_v_superhero() {
  ViewDefinition v;
  v.view_name = "v_superhero";
  v.base_table = "superhero";
  v.output_columns = {
      {"id", "superhero", "id"},
      {"superhero_name", "superhero", "superhero_name"},
      {"full_name", "superhero", "full_name"},
      {"gender", "gender", "gender"},
      {"eye_colour", "eye_colour", "colour"},
      {"hair_colour", "hair_colour", "colour"},
      {"skin_colour", "skin_colour", "colour"},
      {"race", "race", "race"},
      {"publisher_name", "publisher", "publisher_name"},
      {"alignment", "alignment", "alignment"},
      {"height_cm", "superhero", "height_cm"},
      {"weight_kg", "superhero", "weight_kg"},
  };
  auto join = [](std::string alias, std::string target, std::string fk) {
    return MappedJoin{std::move(alias), std::move(target), sql::JoinType::left, "superhero", std::move(fk), "id", false};
  };
  v.join_chain = {
      join("gender", "gender", "gender_id"),           join("eye_colour", "colour", "eye_colour_id"),
      join("hair_colour", "colour", "hair_colour_id"), join("skin_colour", "colour", "skin_colour_id"),
      join("race", "race", "race_id"),                 join("publisher", "publisher", "publisher_id"),
      join("alignment", "alignment", "alignment_id"),
  };
  return v;
}

DatabaseSchema parse_json(const char* text) { return load_schema(text, SchemaFormat::json); }

const char* kEmployees = R"({"db_id":"hr","tables":[{"name":"employee","columns":[
  {"name":"id","data_format":"integer"},{"name":"name","data_format":"text"},
  {"name":"manager_id","data_format":"integer"}],"primary_key":["id"],
  "foreign_keys":[{"column":"manager_id","ref_table":"employee","ref_column":"id"}]}]})";

}  // namespace

TEST(Synthesize, SuperheroMatchesMappingRule) {
  const auto v = synthesize_view(superhero_schema(), "superhero");
  EXPECT_EQ(v, expected_v_superhero());
  EXPECT_EQ(v.column_names(),
            (std::vector<std::string>{"id", "superhero_name", "full_name", "gender", "eye_colour", "hair_colour",
                                      "skin_colour", "race", "publisher_name", "alignment", "height_cm", "weight_kg"}));
}

TEST(Synthesize, VerbatimMappingRuleIngestsToSameDefinition) {
  for (const char* f : {"sql/v_superhero_mapping.sql", "sql/v_superhero_inline.sql"}) {
    EXPECT_EQ(ingest_view_sql(fixture_text(f), superhero_schema()), expected_v_superhero()) << f;
  }
}

TEST(Synthesize, EmitRoundTrips) {
  const auto catalog = synthesize_views(superhero_schema());
  ASSERT_EQ(catalog.views.size(), superhero_schema().tables.size());
  for (const auto& v : catalog.views) {
    const auto text = emit_view_sql(v);
    EXPECT_EQ(ingest_view_sql(text, superhero_schema()), v) << text;
    EXPECT_EQ(emit_view_sql(v), text);
  }
}

TEST(Synthesize, EmitLayout) {
  const auto text = emit_view_sql(expected_v_superhero());
  EXPECT_EQ(text.rfind("create view v_superhero as\nselect\n  `superhero`.`id`,\n", 0), 0u) << text;
  EXPECT_NE(text.find("  `eye_colour`.`colour` as `eye_colour`,\n"), std::string::npos);
  EXPECT_NE(text.find("\nleft join `colour` eye_colour on `superhero`.`eye_colour_id` = `eye_colour`.`id`"),
            std::string::npos);
  EXPECT_NE(text.find("\nleft join `gender` on `superhero`.`gender_id` = `gender`.`id`"), std::string::npos);
  const auto cv = sql::parse_create_view(text);
  EXPECT_EQ(cv.query.select_items.size(), 12u);
  EXPECT_EQ(cv.query.joins.size(), 7u);
}

TEST(Synthesize, PassThroughView) {
  const auto v = synthesize_view(superhero_schema(), "colour");
  EXPECT_EQ(v.view_name, "v_colour");
  EXPECT_TRUE(v.join_chain.empty());
  EXPECT_EQ(v.column_names(), (std::vector<std::string>{"id", "colour"}));
  EXPECT_EQ(emit_view_sql(v), "create view v_colour as\nselect\n  `colour`.`id`,\n  `colour`.`colour`\nfrom\n  `colour`");
}

TEST(Synthesize, SelfReferenceIsOneHop) {
  const auto s = parse_json(kEmployees);
  const auto v = synthesize_view(s, "employee");
  ASSERT_EQ(v.join_chain.size(), 1u);
  EXPECT_EQ(v.join_chain[0].alias, "manager");
  EXPECT_EQ(v.join_chain[0].target_table, "employee");
  // employee has two non-key columns (name, manager_id), so both get the role prefix.
  EXPECT_EQ(v.column_names(), (std::vector<std::string>{"id", "name", "manager_name", "manager_manager_id"}));
  EXPECT_EQ(ingest_view_sql(emit_view_sql(v), s), v);
}

TEST(Synthesize, CompositeKeyTableKeepsKeyColumns) {
  const auto v = synthesize_view(superhero_schema(), "hero_attribute");
  const auto names = v.column_names();
  ASSERT_GE(names.size(), 4u);
  EXPECT_EQ(names[0], "hero_id");
  EXPECT_EQ(names[1], "hero_superhero_name");
  EXPECT_TRUE(contains_ci(names, "attribute_id"));
  EXPECT_TRUE(contains_ci(names, "attribute_name"));
  EXPECT_TRUE(contains_ci(names, "attribute_value"));
  EXPECT_EQ(v.join_chain.size(), 2u);
  EXPECT_EQ(v.join_chain[0].alias, "hero");
}

TEST(Synthesize, CollisionFallsBackToRolePrefix) {
  const auto s = parse_json(R"({"db_id":"x","tables":[
    {"name":"city","columns":[{"name":"id","data_format":"integer"},{"name":"name","data_format":"text"}],"primary_key":["id"]},
    {"name":"person","columns":[{"name":"id","data_format":"integer"},{"name":"name","data_format":"text"},
      {"name":"home_id","data_format":"integer"},{"name":"work_id","data_format":"integer"},{"name":"home","data_format":"text"}],
     "primary_key":["id"],
     "foreign_keys":[{"column":"home_id","ref_table":"city","ref_column":"id"},{"column":"work_id","ref_table":"city","ref_column":"id"}]}]})");
  const auto v = synthesize_view(s, "person");
  // `home` is a base column, so the lookup falls back to home_name.
  EXPECT_EQ(v.column_names(), (std::vector<std::string>{"id", "name", "home_name", "work", "home"}));
}

TEST(Synthesize, UnresolvableCollisionIsReported) {
  const auto s = parse_json(R"({"db_id":"x","tables":[
    {"name":"city","columns":[{"name":"id","data_format":"integer"},{"name":"name","data_format":"text"}],"primary_key":["id"]},
    {"name":"person","columns":[{"name":"id","data_format":"integer"},{"name":"home_id","data_format":"integer"},
      {"name":"home","data_format":"text"},{"name":"home_name","data_format":"text"}],
     "primary_key":["id"],
     "foreign_keys":[{"column":"home_id","ref_table":"city","ref_column":"id"}]}]})");
  try {
    synthesize_view(s, "person");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("home_name"), std::string::npos) << e.what();
  }
}

TEST(Synthesize, ListedPolicyAndRejectedPolicies) {
  SynthesisPolicy p{SynthesisPolicy::Kind::listed_tables, {"superhero"}};
  const auto c = synthesize_views(superhero_schema(), p);
  ASSERT_EQ(c.views.size(), 1u);
  EXPECT_EQ(c.views[0].view_name, "v_superhero");
  EXPECT_THROW(synthesize_views(superhero_schema(), {SynthesisPolicy::Kind::listed_tables, {"villain"}}),
               ResolutionError);
  EXPECT_THROW(synthesize_views(superhero_schema(), {SynthesisPolicy::Kind::hand_authored_only, {}}), ConfigError);
  EXPECT_EQ(parse_policy_kind("llm-proposed"), SynthesisPolicy::Kind::llm_proposed);
  EXPECT_THROW(parse_policy_kind("some"), ConfigError);
}

TEST(Ingest, UnknownColumn) {
  try {
    ingest_view_sql("create view v_x as select superhero.cape from superhero", superhero_schema());
    FAIL();
  } catch (const ResolutionError& e) {
    EXPECT_EQ(e.name(), "superhero.cape");
  }
}

TEST(Ingest, AdHocJoinFlagged) {
  const auto v = ingest_view_sql(
      "create view v_pair as select superhero.superhero_name, hero_attribute.attribute_value "
      "from superhero join hero_attribute on superhero.height_cm = hero_attribute.attribute_value",
      superhero_schema());
  EXPECT_TRUE(v.has_ad_hoc_joins());
  EXPECT_EQ(v.join_chain[0].join_type, sql::JoinType::inner);
  EXPECT_FALSE(expected_v_superhero().has_ad_hoc_joins());
}

TEST(Ingest, Rejections) {
  const auto& s = superhero_schema();
  EXPECT_THROW(ingest_view_sql("create view hero as select superhero.id from superhero", s), ValidationError);
  try {
    ingest_view_sql("create view v_y as select v_superhero.id from v_superhero", s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("selects from another view"), std::string::npos);
  }
  EXPECT_THROW(ingest_view_sql("create view v_y as select superhero.id from superhero where superhero.id = 1", s),
               ValidationError);
  EXPECT_THROW(ingest_view_sql("create view v_y as select superhero.id, gender.id from superhero "
                               "left join gender on superhero.gender_id = gender.id",
                               s),
               ValidationError);  // duplicate exposed name
  EXPECT_THROW(ingest_view_sql("create view v_y as select superhero.id from superhero "
                               "left join gender on superhero.gender_id < gender.id",
                               s),
               Error);
  EXPECT_THROW(ingest_view_sql("create view v_y as select count(*) from superhero", s), ValidationError);
}

TEST(Ingest, StarExpansionAndAliasedBase) {
  const auto v = ingest_view_sql(
      "create view v_g as select s.*, g.gender from superhero s left join gender g on g.id = s.gender_id",
      superhero_schema());
  EXPECT_EQ(v.base_alias, std::optional<std::string>("s"));
  EXPECT_EQ(v.output_columns.size(), 13u);
  EXPECT_EQ(v.join_chain[0].left_relation, "s");  // ON orientation normalized
  EXPECT_EQ(v.join_chain[0].left_column, "gender_id");
  EXPECT_FALSE(v.join_chain[0].ad_hoc);
  EXPECT_EQ(ingest_view_sql(emit_view_sql(v), superhero_schema()), v);
  // Both relations expose `id`.
  EXPECT_THROW(ingest_view_sql("create view v_g as select * from superhero s left join gender g on g.id = s.gender_id",
                               superhero_schema()),
               ValidationError);
}

TEST(Catalog, LoadAndEmitFile) {
  const auto synthesized = synthesize_views(superhero_schema());
  const auto text = emit_catalog_sql(synthesized);
  const auto loaded = load_view_catalog(text, superhero_schema());
  EXPECT_EQ(loaded.views, synthesized.views);
  EXPECT_THROW(load_view_catalog(text + "\n" + emit_view_sql(synthesized.views[0]), superhero_schema()),
               ValidationError);
}

TEST(RenderViews, FlatAndDeterministic) {
  const auto c = synthesize_views(superhero_schema());
  const auto text = render_view_schema_text(c, std::vector<std::string>{"v_superhero"});
  EXPECT_EQ(text.find("foreign key"), std::string::npos);
  EXPECT_NE(text.find("  - eye_colour: text, "), std::string::npos);
  std::size_t lines = 0;
  for (std::size_t p = text.find("\n  - "); p != std::string::npos; p = text.find("\n  - ", p + 1)) ++lines;
  EXPECT_EQ(lines, 12u);
  EXPECT_EQ(render_view_schema_text(c, std::vector<std::string>{}), "");
  EXPECT_EQ(render_view_schema_text(c), render_view_schema_text(c));
  EXPECT_THROW(render_view_schema_text(c, std::vector<std::string>{"v_none"}), ResolutionError);
}

TEST(SynthesisProperties, InvariantsOnSuperhero) {
  const auto& s = superhero_schema();
  const auto c = synthesize_views(s);
  CiSet names;
  for (const auto& v : c.views) {
    EXPECT_TRUE(istarts_with(v.view_name, "v_"));
    EXPECT_TRUE(names.insert(v.view_name).second);
    const auto& t = s.table(v.base_table);
    // Coverage: every non-key, non-FK base column appears exactly once.
    for (const auto& col : t.columns) {
      if (t.is_primary_key(col.name) || t.foreign_key_from(col.name)) continue;
      std::size_t n = 0;
      for (const auto& o : v.output_columns) {
        if (o.source_relation == v.base_table && o.source_column == col.name) ++n;
      }
      EXPECT_EQ(n, 1u) << v.view_name << "." << col.name;
    }
    // Flatness: no FK column survives unless it is part of the key.
    for (const auto& o : v.output_columns) {
      if (o.source_relation == v.base_table && t.foreign_key_from(o.source_column)) {
        EXPECT_TRUE(t.is_primary_key(o.source_column)) << v.view_name << "." << o.exposed_name;
      }
    }
    for (const auto& j : v.join_chain) {
      EXPECT_EQ(j.join_type, sql::JoinType::left);
      EXPECT_FALSE(c.is_view(j.target_table));
      EXPECT_EQ(j.left_relation, v.base_table);  // one hop
    }
  }
  EXPECT_EQ(synthesize_views(s).views, c.views);
}
