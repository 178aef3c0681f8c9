#pragma once

#include <string>
#include <vector>

#include "vsql/identifiers.hpp"
#include "vsql/schema.hpp"
#include "vsql/sql/ast.hpp"
#include "vsql/views.hpp"

namespace vsql {

namespace llm {
class Gateway;
struct TemplateSet;
}

struct ReconstructionOptions {
  bool tighten = false;  // LEFT -> INNER under null-rejecting WHERE predicates
  bool prune = true;
  bool llm_mode = false;  // used by the pipeline; reconstruct() itself is always deterministic
};

struct ReconstructionResult {
  sql::QueryAst final_ast;
  sql::QueryAst inlined_ast;  // after inlining, before pruning/tightening
  std::vector<std::string> pruned_joins;
  std::vector<std::string> tightened_joins;
  CiSet linked_tables;
};

// Replaces every view reference with the view's base table followed by its
// join chain, and rewrites view columns to their sources. Inlined aliases
// are unique across the whole statement (second use of a name gets `_2`,
// then `_3`...). Expects qualified input.
//
// Throws ResolutionError for columns a view does not expose and
// UnsupportedError for joins that cannot be flattened (an ON condition that
// needs the view's own lookup columns, or a LEFT JOIN to a view whose
// mapping contains INNER joins).
sql::QueryAst inline_views(const sql::QueryAst& dummy, const ViewCatalog& catalog);

// Drops LEFT JOINs whose relation is referenced nowhere else in the
// statement and whose ON condition follows a declared foreign key onto the
// joined table's primary key. Such joins match at most one row, so
// removing them never changes the result. Recurses into subqueries.
sql::QueryAst prune_joins(const sql::QueryAst& ast, const DatabaseSchema& schema,
                          std::vector<std::string>* pruned = nullptr);

// LEFT -> INNER for joins whose relation is null-rejected by a top-level
// WHERE conjunct (comparison, LIKE/GLOB, IN or BETWEEN against non-null
// literals). Recurses into subqueries.
sql::QueryAst tighten_joins(const sql::QueryAst& ast, std::vector<std::string>* tightened = nullptr);

// qualify -> inline -> prune -> tighten -> qualify. Failures are rethrown as
// StageError naming the stage.
ReconstructionResult reconstruct(const sql::QueryAst& dummy, const ViewCatalog& catalog,
                                 const ReconstructionOptions& options = {});

// Model-backed reconstruction. Returns the extracted SQL after checking it
// parses and mentions no view; otherwise throws StageError("reconstruction
// validation", ...) carrying the raw completion.
std::string llm_reconstruct(const std::string& question, const std::string& dummy_sql,
                            const ViewCatalog& catalog, llm::Gateway& gateway);

// The prompt llm_reconstruct sends: only the views the dummy references and
// the tables their mapping rules join.
std::string reconstruction_prompt(const std::string& question, const std::string& dummy_sql,
                                  const ViewCatalog& catalog, const llm::TemplateSet& templates);

}  // namespace vsql
