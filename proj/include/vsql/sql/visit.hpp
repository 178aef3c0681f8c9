#pragma once

#include <type_traits>

#include "vsql/sql/ast.hpp"

namespace vsql::sql {

// Calls `f` on every clause-level expression slot of `q` (select items,
// join conditions, WHERE, GROUP BY, HAVING, ORDER BY). Does not descend.
template <typename Query, typename F>
void for_each_clause(Query& q, F&& f) {
  for (auto& item : q.select_items) f(item.expr);
  for (auto& j : q.joins) f(j.on_condition);
  if (q.where_clause) f(*q.where_clause);
  for (auto& g : q.group_by) f(g);
  if (q.having) f(*q.having);
  for (auto& o : q.order_by) f(o.expr);
}

// Pre-order walk over `e` and its sub-expressions. Subqueries are not
// entered; `on_subquery` receives each one instead.
template <typename E, typename F, typename G>
void walk(E& e, F&& on_expr, G&& on_subquery) {
  on_expr(e);
  auto recurse = [&](auto& child) { walk(child, on_expr, on_subquery); };
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Unary>) {
          recurse(*n.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          recurse(*n.lhs);
          recurse(*n.rhs);
        } else if constexpr (std::is_same_v<T, Between>) {
          recurse(*n.operand);
          recurse(*n.low);
          recurse(*n.high);
        } else if constexpr (std::is_same_v<T, InList>) {
          recurse(*n.operand);
          for (auto& i : n.items) recurse(i);
        } else if constexpr (std::is_same_v<T, InSubquery>) {
          recurse(*n.operand);
          on_subquery(*n.query);
        } else if constexpr (std::is_same_v<T, IsNull> || std::is_same_v<T, Cast>) {
          recurse(*n.operand);
        } else if constexpr (std::is_same_v<T, FunctionCall>) {
          for (auto& a : n.args) recurse(a);
        } else if constexpr (std::is_same_v<T, Case>) {
          if (n.subject) recurse(*n.subject);
          for (auto& w : n.whens) {
            recurse(w.condition);
            recurse(w.result);
          }
          if (n.otherwise) recurse(*n.otherwise);
        } else if constexpr (std::is_same_v<T, ScalarSubquery> || std::is_same_v<T, Exists>) {
          on_subquery(*n.query);
        }
      },
      e.node);
}

// Visits every query in the statement tree, outermost first.
template <typename Query, typename F>
void for_each_query(Query& q, F&& f) {
  f(q);
  for_each_clause(q, [&](auto& e) {
    walk(e, [](auto&) {}, [&](auto& sub) { for_each_query(sub, f); });
  });
}

}  // namespace vsql::sql
