#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "vsql/eval.hpp"
#include "vsql/llm.hpp"
#include "vsql/reconstruction.hpp"
#include "vsql/schema.hpp"
#include "vsql/views.hpp"

namespace vsql {

enum class ReconstructionMode { deterministic, llm };

// Every knob of a run. Loaded from one JSON document; relative paths are
// resolved against the document's directory. Command-line flags override.
struct PipelineConfig {
  std::string schema_path;  // empty: <db_root>/<db_id>/schema.json, else the database's own DDL
  std::string db_path;      // single database; wins over db_root
  std::string db_root;      // <db_root>/<db_id>/<db_id>.sqlite

  SynthesisPolicy view_policy;
  std::string views_path;  // hand-authored catalog; only with hand-authored-only

  std::string provider = "mock";  // mock | http
  std::string base_url = "https://api.openai.com/v1";
  std::string mock_transcript;
  std::string template_variant = llm::kDefaultTemplateVariant;
  std::string templates_dir;  // overrides the variant when set
  llm::GenerationSettings settings;
  std::size_t concurrency = 4;
  std::size_t max_attempts = 3;
  std::string transcript_path;  // empty: <out_dir>/transcript.jsonl

  ReconstructionMode reconstruction_mode = ReconstructionMode::deterministic;
  ReconstructionOptions reconstruction;

  EvalOptions eval;
  std::string out_dir = "out";
  std::uint64_t seed = 42;

  std::string effective_transcript_path() const;
};

// Throws ConfigError naming the offending key; unknown keys are errors.
PipelineConfig parse_config(std::string_view json_text, const std::string& base_dir = ".");
PipelineConfig load_config(const std::string& path);

// Mutually exclusive view sources, a known provider, a mock transcript for
// the mock provider, sane numbers.
void validate(const PipelineConfig& config);

// Database file for a db_id under the config's layout.
std::string resolve_database(const PipelineConfig& config, const std::string& db_id);
DatabaseSchema resolve_schema(const PipelineConfig& config, const std::string& db_id);

std::shared_ptr<llm::Gateway> make_gateway(const PipelineConfig& config);

// Synthesizes, loads or (llm-proposed) asks for the catalog. Proposed views
// that fail validation are dropped.
ViewCatalog build_catalog(const PipelineConfig& config, const DatabaseSchema& schema, llm::Gateway* gateway);

struct PipelineRun {
  std::string dummy_sql;
  std::string final_sql;
  CiSet linked_tables;
  std::vector<std::string> pruned_joins;
  std::vector<std::string> tightened_joins;
  std::optional<std::string> error;
  std::string error_stage;
  StageTimings timings;
};

// Question -> dummy SQL over views -> final SQL over tables.
class Pipeline {
 public:
  Pipeline(ViewCatalog catalog, std::shared_ptr<llm::Gateway> gateway, ReconstructionMode mode,
           ReconstructionOptions options);

  // The exact dummy-generation prompt for a question (also what mock
  // transcripts are keyed on).
  std::string dummy_prompt(const std::string& question) const;

  // Never throws for per-question failures; they land in error/error_stage.
  PipelineRun run(const std::string& question) const;

  const ViewCatalog& catalog() const { return catalog_; }

 private:
  ViewCatalog catalog_;
  std::shared_ptr<llm::Gateway> gateway_;
  ReconstructionMode mode_;
  ReconstructionOptions options_;
  std::string view_schema_text_;
};

// Adapts pipelines (one per db_id, built lazily) to the eval harness.
class PipelinePredictor : public Predictor {
 public:
  PipelinePredictor(PipelineConfig config, std::shared_ptr<llm::Gateway> gateway);
  Prediction predict(const DatasetExample& example) override;
  const Pipeline& pipeline_for(const std::string& db_id);

 private:
  PipelineConfig config_;
  std::shared_ptr<llm::Gateway> gateway_;
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<Pipeline>> pipelines_;
};

}  // namespace vsql
