#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vsql/sql/box.hpp"

namespace vsql::sql {

struct Expr;
struct QueryAst;

struct Literal {
  enum class Kind { integer, real, string, null, boolean };
  Kind kind = Kind::null;
  // Numbers keep their source spelling; strings hold the unescaped value;
  // booleans are "true" / "false".
  std::string text;

  bool operator==(const Literal&) const = default;
};

// A column reference. `relation` is empty until qualification, except for
// references to select-list aliases, which stay unqualified.
struct ColumnRef {
  std::string relation;
  std::string column;

  bool qualified() const { return !relation.empty(); }
  bool operator==(const ColumnRef&) const = default;
};

// `*` or `relation.*` in a select list.
struct Star {
  std::string relation;
  bool operator==(const Star&) const = default;
};

enum class UnaryOp { negate, plus, logical_not };

struct Unary {
  UnaryOp op = UnaryOp::logical_not;
  Box<Expr> operand;
  bool operator==(const Unary&) const = default;
};

enum class BinaryOp {
  logical_or,
  logical_and,
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  is,
  is_not,
  like,
  not_like,
  glob,
  concat,
  add,
  sub,
  mul,
  div,
  mod,
};

struct Binary {
  BinaryOp op = BinaryOp::eq;
  Box<Expr> lhs;
  Box<Expr> rhs;
  bool operator==(const Binary&) const = default;
};

struct Between {
  Box<Expr> operand;
  Box<Expr> low;
  Box<Expr> high;
  bool negated = false;
  bool operator==(const Between&) const = default;
};

struct InList {
  Box<Expr> operand;
  std::vector<Expr> items;
  bool negated = false;
  bool operator==(const InList&) const;
};

struct InSubquery {
  Box<Expr> operand;
  Box<QueryAst> query;
  bool negated = false;
  bool operator==(const InSubquery&) const = default;
};

struct IsNull {
  Box<Expr> operand;
  bool negated = false;  // IS NOT NULL
  bool operator==(const IsNull&) const = default;
};

struct FunctionCall {
  std::string name;  // lower-case
  std::vector<Expr> args;
  bool distinct = false;
  bool star = false;  // count(*)
  bool operator==(const FunctionCall&) const;
};

struct Cast {
  Box<Expr> operand;
  std::string type_name;
  bool operator==(const Cast&) const = default;
};

struct WhenClause;

struct Case {
  Box<Expr> subject;  // empty for searched CASE
  std::vector<WhenClause> whens;
  Box<Expr> otherwise;
  bool operator==(const Case&) const;
};

struct ScalarSubquery {
  Box<QueryAst> query;
  bool operator==(const ScalarSubquery&) const = default;
};

struct Exists {
  Box<QueryAst> query;
  bool negated = false;
  bool operator==(const Exists&) const = default;
};

using ExprNode = std::variant<Literal, ColumnRef, Star, Unary, Binary, Between, InList, InSubquery,
                              IsNull, FunctionCall, Cast, Case, ScalarSubquery, Exists>;

struct Expr {
  ExprNode node;

  Expr() = default;
  template <typename T>
  Expr(T value) : node(std::move(value)) {}  // NOLINT(google-explicit-constructor)

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <typename T>
  T* as() {
    return std::get_if<T>(&node);
  }

  bool operator==(const Expr&) const = default;
};

struct WhenClause {
  Expr condition;
  Expr result;
  bool operator==(const WhenClause&) const = default;
};

inline bool InList::operator==(const InList&) const = default;
inline bool FunctionCall::operator==(const FunctionCall&) const = default;
inline bool Case::operator==(const Case&) const = default;

struct SelectItem {
  Expr expr;
  std::optional<std::string> alias;
  bool operator==(const SelectItem&) const = default;
};

struct TableRef {
  std::string name;
  std::optional<std::string> alias;

  // The name the rest of the statement uses to refer to this relation.
  const std::string& exposed_name() const { return alias ? *alias : name; }
  bool operator==(const TableRef&) const = default;
};

enum class JoinType { inner, left };

struct JoinClause {
  JoinType join_type = JoinType::inner;
  TableRef relation;
  Expr on_condition;
  bool operator==(const JoinClause&) const = default;
};

enum class SortDirection { asc, desc };

struct OrderItem {
  Expr expr;
  SortDirection direction = SortDirection::asc;
  bool operator==(const OrderItem&) const = default;
};

struct QueryAst {
  bool distinct = false;
  std::vector<SelectItem> select_items;
  std::optional<TableRef> from_item;
  std::vector<JoinClause> joins;
  std::optional<Expr> where_clause;
  std::vector<Expr> group_by;
  std::optional<Expr> having;
  std::vector<OrderItem> order_by;
  std::optional<std::uint64_t> limit;
  std::optional<std::uint64_t> offset;

  bool operator==(const QueryAst&) const = default;
};

// CREATE VIEW <name> AS <select>
struct CreateView {
  std::string name;
  QueryAst query;
  bool operator==(const CreateView&) const = default;
};

// Convenience constructors used by rewriters and tests.
inline Expr column(std::string relation, std::string name) {
  return ColumnRef{std::move(relation), std::move(name)};
}
inline Expr string_literal(std::string value) {
  return Literal{Literal::Kind::string, std::move(value)};
}
inline Expr integer_literal(std::int64_t value) {
  return Literal{Literal::Kind::integer, std::to_string(value)};
}
inline Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Binary{op, Box<Expr>(std::move(lhs)), Box<Expr>(std::move(rhs))};
}

}  // namespace vsql::sql
