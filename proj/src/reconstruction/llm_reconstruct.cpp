#include "vsql/llm.hpp"
#include "vsql/reconstruction.hpp"
#include "vsql/sql/analysis.hpp"
#include "vsql/sql/parser.hpp"

namespace vsql {

namespace {

const char* kStage = "reconstruction validation";

[[noreturn]] void fail(const std::string& why, const std::string& raw) {
  throw StageError(kStage, why + "\n--- raw completion ---\n" + raw);
}

}  // namespace

std::string reconstruction_prompt(const std::string& question, const std::string& dummy_sql,
                                  const ViewCatalog& catalog, const llm::TemplateSet& templates) {
  const auto referenced = sql::referenced_relations(sql::parse(dummy_sql));
  // Schema linking through the mapping rules: the views the dummy touches
  // and the tables those views are built from.
  std::vector<std::string> view_sql, tables;
  for (const auto& v : catalog.views) {
    if (!referenced.count(v.view_name)) continue;
    view_sql.push_back(emit_view_sql(v));
    if (!contains_ci(tables, v.base_table)) tables.push_back(v.base_table);
    for (const auto& j : v.join_chain) {
      if (!contains_ci(tables, j.target_table)) tables.push_back(j.target_table);
    }
  }
  // Base tables the dummy uses directly belong to the relevant schema too.
  for (const auto& t : catalog.schema.tables) {
    if (referenced.count(t.name) && !contains_ci(tables, t.name)) tables.push_back(t.name);
  }
  return llm::render_prompt(templates.reconstruction, {{"db_type", "SQLite"},
                                                       {"view_schemas", join(view_sql, ";\n\n")},
                                                       {"query", question},
                                                       {"dummy_sql", dummy_sql},
                                                       {"table_schemas", render_schema_text(catalog.schema, tables)},
                                                       {"sql", "your sql"}});
}

std::string llm_reconstruct(const std::string& question, const std::string& dummy_sql, const ViewCatalog& catalog,
                            llm::Gateway& gateway) {
  const auto exchange = gateway.complete(reconstruction_prompt(question, dummy_sql, catalog, gateway.templates()),
                                         llm::to_string(llm::TemplateId::reconstruction));
  if (!exchange.extracted_sql) fail("no SQL found in completion", exchange.raw_completion);

  sql::QueryAst final_ast;
  try {
    final_ast = sql::parse(*exchange.extracted_sql);
  } catch (const Error& e) {
    fail(std::string("reconstructed SQL does not parse: ") + e.what(), exchange.raw_completion);
  }
  for (const auto& name : sql::referenced_relations(final_ast)) {
    if (catalog.is_view(name)) fail("reconstructed SQL still references view " + name, exchange.raw_completion);
  }
  return *exchange.extracted_sql;
}

}  // namespace vsql
