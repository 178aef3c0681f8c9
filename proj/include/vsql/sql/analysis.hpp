#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vsql/identifiers.hpp"
#include "vsql/sql/ast.hpp"

namespace vsql::sql {

// Relation name -> ordered column names. Holds tables, views, or both.
using RelationCatalog = CiMap<std::vector<std::string>>;

// Rewrites every column reference into relation.column form, resolving
// unqualified names to the single in-scope relation exposing them (inner
// scopes first, then enclosing queries for correlated subqueries).
// References to select-list aliases (in WHERE/GROUP BY/HAVING/ORDER BY)
// stay unqualified. Idempotent.
//
// Throws ResolutionError: unknown relation, unknown column (named as
// "relation.column" when qualified), ambiguous column.
QueryAst qualify_columns(const QueryAst& ast, const RelationCatalog& catalog);

// Number of JOIN clauses of the top-level query (the FROM relation and
// joins inside subqueries are not counted).
std::size_t count_joins(const QueryAst& ast);

// Every relation name or alias the statement mentions: FROM/JOIN exposed
// names and the qualifiers of column references, across all subqueries.
CiSet referenced_relations(const QueryAst& ast);

// Names (not aliases) of the relations in FROM/JOIN across all subqueries.
CiSet base_relations(const QueryAst& ast);

}  // namespace vsql::sql
