#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "vsql/database.hpp"
#include "vsql/pipeline.hpp"
#include "vsql/sql/analysis.hpp"
#include "vsql/sql/parser.hpp"

using namespace vsql;
using vsql::test::fixture;
using vsql::test::fixture_text;
using vsql::test::superhero_db;
using vsql::test::superhero_schema;

namespace fs = std::filesystem;

namespace {

const std::string kBlueEyes = "Please list the superhero names of all the superheroes that have blue eyes";

template <typename Fn>
std::string config_error(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

struct Harness {
  std::shared_ptr<llm::MockProvider> mock = std::make_shared<llm::MockProvider>();
  std::shared_ptr<llm::Gateway> gateway;
  std::unique_ptr<Pipeline> pipeline;

  explicit Harness(ReconstructionMode mode = ReconstructionMode::deterministic, ReconstructionOptions options = {}) {
    llm::GatewayOptions go;
    go.initial_backoff = std::chrono::milliseconds(1);
    gateway = std::make_shared<llm::Gateway>(mock, go);
    pipeline = std::make_unique<Pipeline>(synthesize_views(superhero_schema()), gateway, mode, options);
  }

  void answer_dummy(const std::string& question, const std::string& completion) {
    mock->add(pipeline->dummy_prompt(question), completion);
  }
};

}  // namespace

TEST(Config, ParsesEverySection) {
  const auto c = parse_config(R"({
    "schema": "s/schema.json", "db_root": "/data/bird", "out": "runs", "seed": 7,
    "views": {"policy": "listed-tables", "tables": ["superhero"]},
    "gateway": {"provider": "http", "model": "gpt-4-turbo", "temperature": 0.2, "top_p": 0.9,
                "max_tokens": 400, "concurrency": 2, "max_attempts": 5, "templates": "paper-verbatim"},
    "reconstruction": {"mode": "llm", "tighten": true, "prune": false},
    "eval": {"parallelism": 3, "timeout_ms": 1000}
  })",
                              "/base");
  EXPECT_EQ(c.schema_path, "/base/s/schema.json");
  EXPECT_EQ(c.db_root, "/data/bird");
  EXPECT_EQ(c.out_dir, "/base/runs");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.view_policy.kind, SynthesisPolicy::Kind::listed_tables);
  EXPECT_EQ(c.view_policy.tables, std::vector<std::string>{"superhero"});
  EXPECT_EQ(c.provider, "http");
  EXPECT_EQ(c.settings.model_id, "gpt-4-turbo");
  EXPECT_DOUBLE_EQ(c.settings.temperature, 0.2);
  EXPECT_EQ(c.settings.max_tokens, 400u);
  EXPECT_EQ(c.max_attempts, 5u);
  EXPECT_EQ(c.template_variant, "paper-verbatim");
  EXPECT_EQ(c.reconstruction_mode, ReconstructionMode::llm);
  EXPECT_TRUE(c.reconstruction.llm_mode);
  EXPECT_TRUE(c.reconstruction.tighten);
  EXPECT_FALSE(c.reconstruction.prune);
  EXPECT_EQ(c.eval.parallelism, 3u);
  EXPECT_EQ(c.eval.timeout, std::chrono::milliseconds(1000));
  EXPECT_EQ(c.effective_transcript_path(), "/base/runs/transcript.jsonl");
}

TEST(Config, DefaultsFromEmptyDocument) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.view_policy.kind, SynthesisPolicy::Kind::all_tables);
  EXPECT_EQ(c.provider, "mock");
  EXPECT_EQ(c.template_variant, "cleaned");
  EXPECT_EQ(c.settings.model_id, "gpt-4");
  EXPECT_EQ(c.settings.temperature, 0.0);
  EXPECT_EQ(c.reconstruction_mode, ReconstructionMode::deterministic);
  EXPECT_FALSE(c.reconstruction.tighten);
  EXPECT_TRUE(c.reconstruction.prune);
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, RejectsMistakes) {
  EXPECT_NE(config_error([] { parse_config(R"({"gateway": {"modle": "x"}})"); }).find("gateway.modle"),
            std::string::npos);
  EXPECT_NE(config_error([] { parse_config(R"({"views": {"policy": "all-tables", "file": "v.sql"}})"); })
                .find("mutually exclusive"),
            std::string::npos);
  EXPECT_NE(config_error([] { parse_config(R"({"views": {"policy": "hand-authored-only"}})"); }).find("view file"),
            std::string::npos);
  EXPECT_NE(config_error([] { parse_config(R"({"views": {"policy": "listed-tables"}})"); }).find("views.tables"),
            std::string::npos);
  EXPECT_NE(config_error([] { parse_config(R"({"gateway": {"api_key": "sk-123"}})"); }).find("VSQL_API_KEY"),
            std::string::npos);
  EXPECT_NE(config_error([] { parse_config(R"({"gateway": {"provider": "carrier-pigeon"}})"); }).find("provider"),
            std::string::npos);
  EXPECT_NE(config_error([] { parse_config(R"({"seed": "abc"})"); }).find("wrong type"), std::string::npos);
  EXPECT_NE(config_error([] { parse_config(R"({"eval": {"parallelism": 0}})"); }).find("parallelism"),
            std::string::npos);
  EXPECT_NE(config_error([] { parse_config(R"({"reconstruction": {"mode": "magic"}})"); }).find("magic"),
            std::string::npos);
  EXPECT_NE(config_error([] { parse_config("{oops"); }).find("malformed"), std::string::npos);
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Config, LoadResolvesAgainstFileDirectory) {
  const auto dir = fs::temp_directory_path() / "vsql_config_test";
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"views": {"policy": "hand-authored-only", "file": "views.sql"}})";
  const auto c = load_config((dir / "c.json").string());
  EXPECT_EQ(fs::path(c.views_path), dir / "views.sql");
  fs::remove_all(dir);
}

TEST(Config, ResolvesDatabasesAndSchemas) {
  PipelineConfig c;
  EXPECT_THROW(resolve_database(c, "superhero"), ConfigError);
  c.db_root = test::db_root();
  EXPECT_EQ(resolve_database(c, "superhero"), superhero_db());
  // Bird layout: schema.json beside the database wins over the DDL.
  EXPECT_EQ(resolve_schema(c, "superhero"), superhero_schema());
  EXPECT_THROW(resolve_schema(c, "formula_1"), IoError);

  c.schema_path = fixture("superhero/schema.json");
  EXPECT_EQ(resolve_schema(c, "superhero"), superhero_schema());
  EXPECT_THROW(resolve_schema(c, "formula_1"), ConfigError);

  // Without a schema document the database's DDL is used.
  PipelineConfig ddl;
  ddl.db_path = superhero_db();
  const auto schema = resolve_schema(ddl, "superhero");
  ASSERT_EQ(schema.tables.size(), superhero_schema().tables.size());
  EXPECT_EQ(schema.foreign_key_count(), superhero_schema().foreign_key_count());
}

TEST(Config, MockNeedsTranscript) {
  PipelineConfig c;
  EXPECT_THROW(make_gateway(c), ConfigError);
  c.mock_transcript = "/nonexistent.jsonl";
  EXPECT_THROW(make_gateway(c), IoError);
}

TEST(BuildCatalog, EachPolicy) {
  PipelineConfig c;
  EXPECT_EQ(build_catalog(c, superhero_schema(), nullptr).views.size(), 8u);
  c.view_policy = {SynthesisPolicy::Kind::listed_tables, {"superhero"}};
  EXPECT_EQ(build_catalog(c, superhero_schema(), nullptr).views.size(), 1u);
  c.view_policy = {SynthesisPolicy::Kind::hand_authored_only, {}};
  c.views_path = fixture("sql/v_superhero_mapping.sql");
  const auto hand = build_catalog(c, superhero_schema(), nullptr);
  ASSERT_EQ(hand.views.size(), 1u);
  EXPECT_EQ(hand.views[0].view_name, "v_superhero");
  c.view_policy = {SynthesisPolicy::Kind::llm_proposed, {}};
  c.views_path.clear();
  EXPECT_THROW(build_catalog(c, superhero_schema(), nullptr), ConfigError);
}

TEST(BuildCatalog, ProposedViewsKeepOnlyValidOnes) {
  auto mock = std::make_shared<llm::MockProvider>();
  llm::Gateway gateway(mock);
  mock->add(view_creation_prompt(superhero_schema(), gateway.templates()),
            "```sql\n" + fixture_text("sql/v_superhero_mapping.sql") +
                ";\ncreate view v_publisher as select `publisher`.`publisher_name` from `publisher`;\n"
                "create view v_publisher as select `publisher`.`id` from `publisher`;\n"
                "create view v_power as select `superpower`.`power_name` from `superpower`\n```");
  PipelineConfig c;
  c.view_policy.kind = SynthesisPolicy::Kind::llm_proposed;
  const auto catalog = build_catalog(c, superhero_schema(), &gateway);
  ASSERT_EQ(catalog.views.size(), 2u);
  EXPECT_EQ(catalog.views[0].view_name, "v_superhero");
  EXPECT_EQ(catalog.views[1].view_name, "v_publisher");
  EXPECT_EQ(catalog.views[1].output_columns.size(), 1u);  // the first of the duplicates
}

TEST(Pipeline, BlueEyedBlondEndToEnd) {
  Harness h;
  h.answer_dummy(kBlueEyes, "Here it is:\n```sql\n" + fixture_text("sql/blue_eyed_blond_dummy.sql") + "\n```");
  const auto run = h.pipeline->run(kBlueEyes);
  ASSERT_FALSE(run.error) << *run.error;
  EXPECT_EQ(run.dummy_sql, fixture_text("sql/blue_eyed_blond_dummy.sql"));
  const auto final_ast = sql::parse(run.final_sql);
  EXPECT_EQ(sql::count_joins(final_ast), 2u);
  EXPECT_EQ(run.linked_tables, (CiSet{"superhero", "colour"}));
  EXPECT_EQ(run.pruned_joins.size(), 5u);
  EXPECT_TRUE(run.tightened_joins.empty());

  auto db = Database::open_read_only(superhero_db());
  EXPECT_TRUE(compare_results(db.query(run.final_sql), db.query(fixture_text("sql/blue_eyed_blond_gold.sql")), false));
}

TEST(Pipeline, DummyPromptCarriesViewsAndQuestion) {
  Harness h;
  const auto prompt = h.pipeline->dummy_prompt(kBlueEyes);
  EXPECT_NE(prompt.find("v_superhero"), std::string::npos);
  EXPECT_NE(prompt.find("eye_colour"), std::string::npos);
  EXPECT_NE(prompt.find(kBlueEyes), std::string::npos);
  EXPECT_EQ(prompt.find("  - eye_colour_id"), std::string::npos);  // the flattened schema hides keys
  EXPECT_EQ(prompt.find("foreign keys"), std::string::npos);
  EXPECT_EQ(prompt.find("{query}"), std::string::npos);
}

TEST(Pipeline, UncoveredTablesAreStillDescribed) {
  auto mock = std::make_shared<llm::MockProvider>();
  auto gateway = std::make_shared<llm::Gateway>(mock);
  const Pipeline p(synthesize_views(superhero_schema(), {SynthesisPolicy::Kind::listed_tables, {"superhero"}}),
                   gateway, ReconstructionMode::deterministic, {});
  const auto prompt = p.dummy_prompt("q");
  EXPECT_NE(prompt.find("v_superhero"), std::string::npos);
  EXPECT_NE(prompt.find("hero_attribute"), std::string::npos);
  EXPECT_EQ(prompt.find("v_hero_attribute"), std::string::npos);
}

TEST(Pipeline, StageErrorsAreNamed) {
  Harness h;
  EXPECT_EQ(h.pipeline->run("unanswered").error_stage, "dummy generation");

  h.answer_dummy("prose", "I cannot help with that.");
  auto run = h.pipeline->run("prose");
  EXPECT_EQ(run.error_stage, "dummy generation");
  EXPECT_NE(run.error->find("no SQL"), std::string::npos);

  h.answer_dummy("broken", "```sql\nselect from where\n```");
  EXPECT_EQ(h.pipeline->run("broken").error_stage, "dummy parse");

  // The unexposed-column hallucination is caught before execution.
  h.answer_dummy("hallucinated", "```sql\nselect v_superhero.attribute_name from v_superhero\n```");
  run = h.pipeline->run("hallucinated");
  ASSERT_TRUE(run.error);
  EXPECT_NE(run.error->find("attribute_name"), std::string::npos) << *run.error;
  EXPECT_TRUE(run.final_sql.empty());
  EXPECT_EQ(run.error->find(run.error_stage + ": " + run.error_stage), std::string::npos);
}

TEST(Pipeline, LlmReconstructionMode) {
  Harness h(ReconstructionMode::llm, {false, true, true});
  const auto dummy = fixture_text("sql/blue_eyed_blond_dummy.sql");
  h.answer_dummy(kBlueEyes, llm::wrap_in_fence(dummy));
  const auto& catalog = h.pipeline->catalog();
  const auto prompt = reconstruction_prompt(kBlueEyes, dummy, catalog, h.gateway->templates());

  h.mock->add(prompt, llm::wrap_in_fence(fixture_text("sql/blue_eyed_blond_final.sql")));
  auto run = h.pipeline->run(kBlueEyes);
  ASSERT_FALSE(run.error) << *run.error;
  EXPECT_EQ(run.final_sql, fixture_text("sql/blue_eyed_blond_final.sql"));
  EXPECT_EQ(run.linked_tables, (CiSet{"superhero", "colour"}));

  h.mock->add(prompt, llm::wrap_in_fence(dummy));
  run = h.pipeline->run(kBlueEyes);
  EXPECT_EQ(run.error_stage, "reconstruction validation");
  EXPECT_NE(run.error->find("raw completion"), std::string::npos);
}

TEST(Predictor, BuildsPipelinesPerDatabase) {
  PipelineConfig c;
  c.db_root = test::db_root();
  auto mock = std::make_shared<llm::MockProvider>();
  PipelinePredictor predictor(c, std::make_shared<llm::Gateway>(mock));
  mock->add(predictor.pipeline_for("superhero").dummy_prompt("how many?"),
            "```sql\nselect count(*) from v_superhero\n```");

  DatasetExample ex;
  ex.example_id = "1";
  ex.db_id = "superhero";
  ex.question = "how many?";
  const auto p = predictor.predict(ex);
  ASSERT_FALSE(p.error) << *p.error;
  EXPECT_EQ(p.final_sql, "select count(*) from `superhero`");

  ex.db_id = "formula_1";
  const auto missing = predictor.predict(ex);
  EXPECT_EQ(missing.error_stage, "setup");
}
