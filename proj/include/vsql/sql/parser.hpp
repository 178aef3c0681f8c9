#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vsql/sql/ast.hpp"

namespace vsql::sql {

enum class Dialect { sqlite };

Dialect parse_dialect(std::string_view tag);  // throws ConfigError for anything but "sqlite"

// Parses one SELECT statement (an optional trailing ';' is accepted).
//
// Supported: DISTINCT, aggregates and scalar functions, CASE, CAST,
// INNER/LEFT JOIN with ON equality chains, WHERE with boolean, comparison,
// LIKE/GLOB, IN, BETWEEN and IS [NOT] NULL predicates, scalar / IN / EXISTS
// subqueries, GROUP BY, HAVING, ORDER BY, LIMIT/OFFSET.
//
// Throws ParseError (with position) on syntax errors and UnsupportedError
// naming the construct for set operations, CTEs, window functions, derived
// tables, RIGHT/FULL/CROSS/NATURAL joins, comma joins and USING.
QueryAst parse(std::string_view sql, Dialect dialect = Dialect::sqlite);

// Parses `CREATE VIEW name AS select`.
CreateView parse_create_view(std::string_view sql, Dialect dialect = Dialect::sqlite);

Expr parse_expression(std::string_view sql, Dialect dialect = Dialect::sqlite);

// Splits a script on top-level ';' (quotes and comments respected). Empty
// statements are dropped; each statement is returned trimmed, without ';'.
std::vector<std::string> split_statements(std::string_view script);

// Structural checks the parser enforces and the printer relies on:
// unique exposed relation names per FROM/JOIN scope, ON conditions that
// are AND-chains of equalities. Recurses into subqueries. Throws
// ValidationError.
void validate(const QueryAst& ast);

// True when `on` is an AND-chain of `=` comparisons.
bool is_equality_chain(const Expr& on);

}  // namespace vsql::sql
