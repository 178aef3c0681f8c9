// Builds a mock transcript from hand-written answers, so the pipeline can be
// replayed offline. Each answers line is one of
//   {"kind": "dummy", "question_id": 5, "sql": "..."}
//   {"kind": "reconstruction", "question_id": 5, "sql": "..."}
//   {"kind": "view_creation", "sql": "..."}
// ("completion" instead of "sql" is used verbatim, no fence added). Prompts
// are rendered exactly as the pipeline renders them, for every template
// variant, and keyed by digest.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "vsql/eval.hpp"
#include "vsql/llm.hpp"
#include "vsql/pipeline.hpp"

using namespace vsql;
using json = nlohmann::ordered_json;

namespace {

struct Answer {
  std::string kind;
  std::string question;
  std::string completion;
};

std::vector<Answer> load_answers(const std::string& path, const std::vector<DatasetExample>& dataset) {
  std::map<std::string, std::string> questions;
  for (const auto& ex : dataset) questions[ex.example_id] = ex.question;

  std::vector<Answer> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto j = json::parse(line);
    Answer a;
    a.kind = j.at("kind").get<std::string>();
    if (j.contains("question")) {
      a.question = j["question"].get<std::string>();
    } else if (j.contains("question_id")) {
      const auto id = j["question_id"].is_string() ? j["question_id"].get<std::string>()
                                                   : std::to_string(j["question_id"].get<long long>());
      if (!questions.count(id)) throw ValidationError("answers line " + std::to_string(line_no) + ": unknown question_id " + id);
      a.question = questions[id];
    } else if (a.kind != "view_creation") {
      throw ValidationError("answers line " + std::to_string(line_no) + ": needs question or question_id");
    }
    a.completion = j.contains("completion") ? j["completion"].get<std::string>()
                                            : llm::wrap_in_fence(j.at("sql").get<std::string>());
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mock transcript generator", "mockgen"};
  std::string schema_path, dataset_path, answers_path, out_path, views_path;
  std::vector<std::string> variants;
  app.add_option("--schema", schema_path)->required();
  app.add_option("--dataset", dataset_path);
  app.add_option("--answers", answers_path)->required();
  app.add_option("--views", views_path, "hand-authored catalog (default: synthesized)");
  app.add_option("--variant", variants, "template variants (default: all built-in)");
  app.add_option("-o,--out", out_path)->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto schema = load_schema_file(schema_path);
    auto catalog = views_path.empty() ? synthesize_views(schema) : load_view_catalog_file(views_path, schema);
    const auto dataset = dataset_path.empty() ? std::vector<DatasetExample>{} : load_dataset(dataset_path);
    const auto answers = load_answers(answers_path, dataset);
    if (variants.empty()) variants = llm::builtin_template_variants();

    // Dummy completions feed the reconstruction prompts.
    std::map<std::string, std::string> dummy_for;
    for (const auto& a : answers) {
      if (a.kind != "dummy") continue;
      try {
        dummy_for[a.question] = llm::extract_sql(a.completion);
      } catch (const Error&) {
      }
    }

    std::string text;
    std::size_t lines = 0;
    for (const auto& variant : variants) {
      auto templates = llm::builtin_templates(variant);
      auto gateway = std::make_shared<llm::Gateway>(std::make_shared<llm::MockProvider>(), llm::GatewayOptions{},
                                                    templates);
      const Pipeline pipeline(catalog, gateway, ReconstructionMode::deterministic, {});
      for (const auto& a : answers) {
        std::string prompt;
        if (a.kind == "dummy") {
          prompt = pipeline.dummy_prompt(a.question);
        } else if (a.kind == "reconstruction") {
          if (!dummy_for.count(a.question)) throw ValidationError("reconstruction answer without a dummy: " + a.question);
          prompt = reconstruction_prompt(a.question, dummy_for[a.question], catalog, templates);
        } else if (a.kind == "view_creation") {
          prompt = view_creation_prompt(schema, templates);
        } else {
          throw ValidationError("unknown answer kind '" + a.kind + "'");
        }
        json j;
        j["purpose"] = a.kind == "dummy" ? "dummy_generation" : a.kind;
        j["variant"] = variant;
        j["prompt_digest"] = llm::prompt_digest(prompt);
        j["completion"] = a.completion;
        text += j.dump() + "\n";
        ++lines;
      }
    }
    const auto parent = std::filesystem::path(out_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream(out_path, std::ios::binary | std::ios::trunc) << text;
    std::cout << "wrote " << lines << " completions to " << out_path << "\n";
  } catch (const std::exception& e) {
    std::cerr << "mockgen: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
