#pragma once

#include <string>
#include <string_view>

#include "vsql/sql/ast.hpp"

namespace vsql::sql {

// Canonical single-line SQL: lower-case keywords, backtick-quoted
// identifiers, single spaces, parentheses only where precedence needs them.
// parse(print(a)) == a for every valid AST. Throws ValidationError for ASTs
// that violate the structural invariants (see validate()).
std::string print(const QueryAst& ast);
std::string print(const CreateView& view);
std::string print(const Expr& expr);

std::string quote_identifier(std::string_view name);
std::string quote_string(std::string_view value);

const char* to_string(BinaryOp op) noexcept;

}  // namespace vsql::sql
