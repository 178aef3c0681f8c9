#include "vsql/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "vsql/database.hpp"
#include "vsql/sql/analysis.hpp"
#include "vsql/sql/parser.hpp"
#include "vsql/sql/printer.hpp"

namespace vsql {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config key '" + name_ + "' must be an object");
  }

  // Call after reading: any key not consumed is a typo.
  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + path(key) + "'");
    }
  }

  const Json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const auto* v = get(key)) {
      try {
        out = v->get<T>();
      } catch (const Json::exception&) {
        throw ConfigError("config key '" + path(key) + "' has the wrong type");
      }
    }
  }

  void read_path(const std::string& key, std::string& out, const std::string& base) {
    std::string raw;
    read(key, raw);
    if (!raw.empty()) out = fs::path(raw).is_absolute() ? raw : (fs::path(base) / raw).lexically_normal().string();
  }

  std::string path(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

std::string leftover_tables_text(const ViewCatalog& catalog) {
  std::vector<std::string> leftovers;
  for (const auto& t : catalog.schema.tables) {
    const bool covered = std::any_of(catalog.views.begin(), catalog.views.end(),
                                     [&](const ViewDefinition& v) { return iequals(v.base_table, t.name); });
    if (!covered) leftovers.push_back(t.name);
  }
  return leftovers.empty() ? "" : render_schema_text(catalog.schema, leftovers);
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string PipelineConfig::effective_transcript_path() const {
  return transcript_path.empty() ? (fs::path(out_dir) / "transcript.jsonl").string() : transcript_path;
}

PipelineConfig parse_config(std::string_view json_text, const std::string& base_dir) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  PipelineConfig c;
  Section top(doc, "");
  top.read_path("schema", c.schema_path, base_dir);
  top.read_path("db", c.db_path, base_dir);
  top.read_path("db_root", c.db_root, base_dir);
  top.read_path("out", c.out_dir, base_dir);
  top.read("seed", c.seed);

  if (const auto* v = top.get("views")) {
    Section s(*v, "views");
    std::string policy;
    s.read("policy", policy);
    if (!policy.empty()) c.view_policy.kind = parse_policy_kind(policy);
    s.read("tables", c.view_policy.tables);
    s.read_path("file", c.views_path, base_dir);
    s.finish();
  }
  if (const auto* v = top.get("gateway")) {
    Section s(*v, "gateway");
    s.read("provider", c.provider);
    s.read("base_url", c.base_url);
    s.read_path("mock_transcript", c.mock_transcript, base_dir);
    s.read("templates", c.template_variant);
    s.read_path("templates_dir", c.templates_dir, base_dir);
    s.read("model", c.settings.model_id);
    s.read("temperature", c.settings.temperature);
    s.read("top_p", c.settings.top_p);
    s.read("max_tokens", c.settings.max_tokens);
    s.read("concurrency", c.concurrency);
    s.read("max_attempts", c.max_attempts);
    s.read_path("transcript", c.transcript_path, base_dir);
    if (s.get("api_key")) throw ConfigError(std::string("credentials do not belong in config; set ") + llm::kApiKeyEnv);
    s.finish();
  }
  if (const auto* v = top.get("reconstruction")) {
    Section s(*v, "reconstruction");
    std::string mode;
    s.read("mode", mode);
    if (mode == "llm") {
      c.reconstruction_mode = ReconstructionMode::llm;
    } else if (!mode.empty() && mode != "deterministic") {
      throw ConfigError("config key 'reconstruction.mode' must be deterministic or llm, got '" + mode + "'");
    }
    s.read("tighten", c.reconstruction.tighten);
    s.read("prune", c.reconstruction.prune);
    s.finish();
  }
  if (const auto* v = top.get("eval")) {
    Section s(*v, "eval");
    s.read("parallelism", c.eval.parallelism);
    long long timeout_ms = c.eval.timeout.count();
    s.read("timeout_ms", timeout_ms);
    c.eval.timeout = std::chrono::milliseconds(timeout_ms);
    s.finish();
  }
  top.finish();
  c.reconstruction.llm_mode = c.reconstruction_mode == ReconstructionMode::llm;
  validate(c);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw IoError("config file not found: " + path);
  return parse_config(read_file(path), fs::absolute(path).parent_path().string());
}

void validate(const PipelineConfig& c) {
  using Kind = SynthesisPolicy::Kind;
  if (c.view_policy.kind == Kind::hand_authored_only && c.views_path.empty()) {
    throw ConfigError("view policy hand-authored-only needs a view file (views.file or --views)");
  }
  if (c.view_policy.kind != Kind::hand_authored_only && !c.views_path.empty()) {
    throw ConfigError(std::string("view sources are mutually exclusive: a view file was given but the policy is ") +
                      to_string(c.view_policy.kind) + " (use hand-authored-only)");
  }
  if (c.view_policy.kind == Kind::listed_tables && c.view_policy.tables.empty()) {
    throw ConfigError("view policy listed-tables needs views.tables");
  }
  if (c.provider != "mock" && c.provider != "http") {
    throw ConfigError("unknown provider '" + c.provider + "' (expected mock or http)");
  }
  if (c.settings.temperature < 0 || c.settings.temperature > 2) throw ConfigError("temperature must be in [0, 2]");
  if (c.settings.top_p <= 0 || c.settings.top_p > 1) throw ConfigError("top_p must be in (0, 1]");
  if (c.settings.max_tokens == 0) throw ConfigError("max_tokens must be positive");
  if (c.concurrency == 0) throw ConfigError("gateway.concurrency must be positive");
  if (c.max_attempts == 0) throw ConfigError("gateway.max_attempts must be positive");
  if (c.eval.parallelism == 0) throw ConfigError("eval.parallelism must be positive");
  if (c.eval.timeout.count() <= 0) throw ConfigError("eval.timeout_ms must be positive");
}

std::string resolve_database(const PipelineConfig& c, const std::string& db_id) {
  if (!c.db_path.empty()) return c.db_path;
  if (c.db_root.empty()) throw ConfigError("no database configured: set db or db_root (--db)");
  return (fs::path(c.db_root) / db_id / (db_id + ".sqlite")).string();
}

DatabaseSchema resolve_schema(const PipelineConfig& c, const std::string& db_id) {
  if (!c.schema_path.empty()) {
    auto schema = load_schema_file(c.schema_path);
    if (!db_id.empty() && !iequals(schema.db_id, db_id)) {
      throw ConfigError("unknown db_id '" + db_id + "': the configured schema describes '" + schema.db_id + "'");
    }
    return schema;
  }
  if (!c.db_root.empty()) {
    const auto candidate = fs::path(c.db_root) / db_id / "schema.json";
    if (fs::exists(candidate)) return load_schema_file(candidate.string());
  }
  // Last resort: the database's own DDL (no descriptions).
  const auto db_file = resolve_database(c, db_id);
  if (!fs::exists(db_file)) throw IoError("unknown db_id '" + db_id + "': no schema and no database at " + db_file);
  auto db = Database::open_read_only(db_file);
  std::string ddl;
  for (const auto& row : db.query("select sql from sqlite_master where type = 'table' and sql is not null "
                                  "and name not like 'sqlite_%' order by rowid")
                             .rows) {
    ddl += to_display(row.at(0)) + ";\n";
  }
  return load_schema(ddl, SchemaFormat::ddl, db_id);
}

std::shared_ptr<llm::Gateway> make_gateway(const PipelineConfig& c) {
  std::shared_ptr<llm::Provider> provider;
  if (c.provider == "mock") {
    if (c.mock_transcript.empty()) {
      throw ConfigError("the mock provider needs a transcript (gateway.mock_transcript or --mock-transcript)");
    }
    provider = llm::MockProvider::from_file(c.mock_transcript);
  } else {
    provider = std::make_shared<llm::HttpProvider>(c.base_url);
  }
  llm::GatewayOptions options;
  options.settings = c.settings;
  options.max_attempts = c.max_attempts;
  options.concurrency = c.concurrency;
  options.transcript_path = c.effective_transcript_path();
  auto templates = c.templates_dir.empty() ? llm::builtin_templates(c.template_variant)
                                           : llm::load_templates(c.templates_dir);
  return std::make_shared<llm::Gateway>(provider, options, std::move(templates));
}

ViewCatalog build_catalog(const PipelineConfig& c, const DatabaseSchema& schema, llm::Gateway* gateway) {
  switch (c.view_policy.kind) {
    case SynthesisPolicy::Kind::hand_authored_only:
      return load_view_catalog_file(c.views_path, schema);
    case SynthesisPolicy::Kind::llm_proposed: {
      if (!gateway) throw ConfigError("view policy llm-proposed needs a gateway");
      ViewCatalog catalog{schema, {}};
      for (auto& p : llm_propose_views(schema, *gateway)) {
        if (p.valid() && !catalog.is_view(p.view->view_name) && !schema.find_table(p.view->view_name)) {
          catalog.views.push_back(std::move(*p.view));
        }
      }
      validate(catalog);
      return catalog;
    }
    default:
      return synthesize_views(schema, c.view_policy);
  }
}

Pipeline::Pipeline(ViewCatalog catalog, std::shared_ptr<llm::Gateway> gateway, ReconstructionMode mode,
                   ReconstructionOptions options)
    : catalog_(std::move(catalog)), gateway_(std::move(gateway)), mode_(mode), options_(options) {
  if (!gateway_) throw ConfigError("pipeline needs a gateway");
  view_schema_text_ = render_view_schema_text(catalog_);
  if (const auto extra = leftover_tables_text(catalog_); !extra.empty()) view_schema_text_ += "\n" + extra;
}

std::string Pipeline::dummy_prompt(const std::string& question) const {
  return llm::render_prompt(gateway_->templates().dummy_generation,
                            {{"relevant_db_schema", view_schema_text_}, {"query", question}});
}

PipelineRun Pipeline::run(const std::string& question) const {
  PipelineRun r;
  auto fail = [&](std::string stage, const std::string& message) {
    r.error_stage = std::move(stage);
    r.error = message.rfind(r.error_stage + ":", 0) == 0 ? message : r.error_stage + ": " + message;
    r.final_sql.clear();
    return r;
  };

  auto start = std::chrono::steady_clock::now();
  try {
    const auto exchange = gateway_->complete(dummy_prompt(question), llm::to_string(llm::TemplateId::dummy_generation));
    r.timings.generation_ms = ms_since(start);
    if (!exchange.extracted_sql) return fail("dummy generation", "no SQL found in completion");
    r.dummy_sql = *exchange.extracted_sql;
  } catch (const Error& e) {
    return fail("dummy generation", e.what());
  }

  start = std::chrono::steady_clock::now();
  try {
    if (mode_ == ReconstructionMode::llm) {
      r.final_sql = llm_reconstruct(question, r.dummy_sql, catalog_, *gateway_);
      r.linked_tables = sql::base_relations(sql::parse(r.final_sql));
    } else {
      sql::QueryAst dummy;
      try {
        dummy = sql::parse(r.dummy_sql);
      } catch (const Error& e) {
        return fail("dummy parse", e.what());
      }
      auto result = reconstruct(dummy, catalog_, options_);
      r.final_sql = sql::print(result.final_ast);
      r.linked_tables = std::move(result.linked_tables);
      r.pruned_joins = std::move(result.pruned_joins);
      r.tightened_joins = std::move(result.tightened_joins);
    }
  } catch (const StageError& e) {
    return fail(e.stage(), e.what());
  } catch (const Error& e) {
    return fail("reconstruction", e.what());
  }
  r.timings.reconstruction_ms = ms_since(start);
  return r;
}

PipelinePredictor::PipelinePredictor(PipelineConfig config, std::shared_ptr<llm::Gateway> gateway)
    : config_(std::move(config)), gateway_(std::move(gateway)) {}

const Pipeline& PipelinePredictor::pipeline_for(const std::string& db_id) {
  std::lock_guard lock(mu_);
  auto& slot = pipelines_[to_lower(db_id)];
  if (!slot) {
    auto schema = resolve_schema(config_, db_id);
    auto catalog = build_catalog(config_, schema, gateway_.get());
    slot = std::make_unique<Pipeline>(std::move(catalog), gateway_, config_.reconstruction_mode,
                                      config_.reconstruction);
  }
  return *slot;
}

Prediction PipelinePredictor::predict(const DatasetExample& example) {
  Prediction p;
  const Pipeline* pipeline = nullptr;
  try {
    pipeline = &pipeline_for(example.db_id);
  } catch (const Error& e) {
    p.error = e.what();
    p.error_stage = "setup";
    return p;
  }
  auto run = pipeline->run(example.question);
  p.dummy_sql = std::move(run.dummy_sql);
  p.final_sql = std::move(run.final_sql);
  p.error = std::move(run.error);
  p.error_stage = std::move(run.error_stage);
  p.timings = run.timings;
  return p;
}

}  // namespace vsql
