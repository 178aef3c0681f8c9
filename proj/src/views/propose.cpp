#include "vsql/llm.hpp"
#include "vsql/sql/parser.hpp"
#include "vsql/views.hpp"

namespace vsql {

std::string view_creation_prompt(const DatabaseSchema& schema, const llm::TemplateSet& templates) {
  return llm::render_prompt(templates.view_creation, {{"db_description", render_schema_text(schema)}});
}

std::vector<ViewProposal> llm_propose_views(const DatabaseSchema& schema, llm::Gateway& gateway) {
  const auto exchange = gateway.complete(view_creation_prompt(schema, gateway.templates()),
                                         llm::to_string(llm::TemplateId::view_creation));
  if (!exchange.extracted_sql) {
    return {ViewProposal{exchange.raw_completion, std::nullopt, "no SQL found in completion"}};
  }
  std::vector<std::string> statements;
  try {
    statements = sql::split_statements(*exchange.extracted_sql);
  } catch (const Error& e) {
    return {ViewProposal{*exchange.extracted_sql, std::nullopt, e.what()}};
  }
  std::vector<ViewProposal> out;
  for (auto& stmt : statements) {
    ViewProposal p{stmt, std::nullopt, {}};
    try {
      p.view = ingest_view_sql(stmt, schema);
    } catch (const Error& e) {
      p.error = e.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace vsql
