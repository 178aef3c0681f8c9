#include "vsql/reconstruction.hpp"

#include <utility>

#include "vsql/error.hpp"
#include "vsql/sql/analysis.hpp"
#include "vsql/sql/visit.hpp"

namespace vsql {

using namespace sql;

namespace {

// ---- inlining ------------------------------------------------------------------

struct Binding {
  const ViewDefinition* view = nullptr;       // null for base tables
  std::string table;                          // base tables only
  CiMap<std::pair<std::string, std::string>> columns;  // view column -> (relation, column)
  CiSet chain;                                // inlined aliases of the view's join chain
};

struct Frame {
  std::vector<std::string> order;  // exposed names in FROM/JOIN order
  CiMap<Binding> bindings;
};

class Inliner {
 public:
  Inliner(const ViewCatalog& catalog, const QueryAst& root) : catalog_(catalog) {
    for_each_query(root, [&](const QueryAst& q) {
      if (q.from_item) used_.insert(q.from_item->exposed_name());
      for (const auto& j : q.joins) used_.insert(j.relation.exposed_name());
    });
  }

  void query(QueryAst& q) {
    Frame frame;
    // chains[0] follows the FROM relation, chains[i + 1] follows q.joins[i].
    std::vector<std::vector<JoinClause>> chains;
    chains.push_back(q.from_item ? expand(*q.from_item, frame) : std::vector<JoinClause>{});
    std::vector<std::pair<std::size_t, std::string>> outer_view_joins;  // (index, exposed)
    for (std::size_t i = 0; i < q.joins.size(); ++i) {
      auto& j = q.joins[i];
      const auto exposed = j.relation.exposed_name();
      chains.push_back(expand(j.relation, frame));
      if (!frame.bindings.at(exposed).view) continue;
      outer_view_joins.emplace_back(i, exposed);
      if (j.join_type != JoinType::left) continue;
      for (const auto& c : chains.back()) {
        if (c.join_type == JoinType::inner) {
          throw UnsupportedError("LEFT JOIN to view " + exposed + " whose mapping contains INNER joins");
        }
      }
    }

    // Chain joins are built with final names, so they are spliced in only
    // after the original clauses have been rewritten.
    stack_.push_back(&frame);
    for_each_clause(q, [&](Expr& e) { rewrite(e); });
    expand_stars(q, frame);  // produces already-rewritten references
    stack_.pop_back();

    for (const auto& [index, exposed] : outer_view_joins) {
      const auto& chain = frame.bindings.at(exposed).chain;
      walk(
          q.joins[index].on_condition,
          [&](const Expr& e) {
            if (const auto* c = e.as<ColumnRef>(); c && chain.count(c->relation)) {
              throw UnsupportedError("join condition on view " + exposed + " uses lookup column " +
                                     c->relation + "." + c->column);
            }
          },
          [](const QueryAst&) {});
    }

    std::vector<JoinClause> joins = std::move(chains[0]);
    for (std::size_t i = 0; i < q.joins.size(); ++i) {
      joins.push_back(std::move(q.joins[i]));
      for (auto& c : chains[i + 1]) joins.push_back(std::move(c));
    }
    q.joins = std::move(joins);
  }

 private:
  std::string allocate(const std::string& name) {
    if (used_.insert(name).second) return name;
    for (int i = 2;; ++i) {
      auto candidate = name + "_" + std::to_string(i);
      if (used_.insert(candidate).second) return candidate;
    }
  }

  // Rewrites `ref` in place to the base relation; returns the chain joins.
  std::vector<JoinClause> expand(TableRef& ref, Frame& frame) {
    const auto exposed = ref.exposed_name();
    frame.order.push_back(exposed);
    Binding b;
    b.view = catalog_.find_view(ref.name);
    if (!b.view) {
      b.table = ref.name;
      frame.bindings.emplace(exposed, std::move(b));
      return {};
    }
    const auto& v = *b.view;
    const std::string base = ref.alias ? *ref.alias : allocate(v.base_table);
    CiMap<std::string> rename;
    rename.emplace(v.base_exposed_name(), base);

    std::vector<JoinClause> chain;
    for (const auto& j : v.join_chain) {
      const auto alias = allocate(j.alias);
      rename.emplace(j.alias, alias);
      b.chain.insert(alias);
      TableRef target{j.target_table, std::nullopt};
      if (!iequals(alias, j.target_table)) target.alias = alias;
      chain.push_back({j.join_type, std::move(target),
                       binary(BinaryOp::eq, column(rename.at(j.left_relation), j.left_column),
                              column(alias, j.target_column))});
    }
    for (const auto& c : v.output_columns) {
      b.columns.emplace(c.exposed_name, std::make_pair(rename.at(c.source_relation), c.source_column));
    }
    ref = TableRef{v.base_table, iequals(base, v.base_table) ? std::nullopt : std::optional<std::string>(base)};
    frame.bindings.emplace(exposed, std::move(b));
    return chain;
  }

  void append_columns(std::vector<SelectItem>& out, const std::string& exposed, const Binding& b) {
    if (!b.view) {
      for (const auto& c : catalog_.schema.table(b.table).columns) {
        out.push_back({column(exposed, c.name), std::nullopt});
      }
      return;
    }
    for (const auto& c : b.view->output_columns) {
      const auto& [rel, col] = b.columns.at(c.exposed_name);
      SelectItem item{column(rel, col), std::nullopt};
      if (c.exposed_name != col) item.alias = c.exposed_name;
      out.push_back(std::move(item));
    }
  }

  // `*` and `view.*` become explicit column lists; stars over base tables
  // alone are left as written.
  void expand_stars(QueryAst& q, const Frame& frame) {
    bool any_view = false;
    for (const auto& [name, b] : frame.bindings) any_view = any_view || b.view;
    std::vector<SelectItem> items;
    for (auto& item : q.select_items) {
      const auto* s = item.expr.as<Star>();
      if (!s || (s->relation.empty() && !any_view)) {
        items.push_back(std::move(item));
        continue;
      }
      if (s->relation.empty()) {
        for (const auto& name : frame.order) append_columns(items, name, frame.bindings.at(name));
        continue;
      }
      const auto it = frame.bindings.find(s->relation);
      if (it == frame.bindings.end() || !it->second.view) {
        items.push_back(std::move(item));
      } else {
        append_columns(items, it->first, it->second);
      }
    }
    q.select_items = std::move(items);
  }

  void rewrite(Expr& e) {
    walk(
        e,
        [&](Expr& node) {
          if (auto* c = node.as<ColumnRef>(); c && c->qualified()) resolve(*c);
        },
        [&](QueryAst& sub) { query(sub); });
  }

  void resolve(ColumnRef& c) {
    for (auto f = stack_.rbegin(); f != stack_.rend(); ++f) {
      const auto it = (*f)->bindings.find(c.relation);
      if (it == (*f)->bindings.end()) continue;
      const auto& b = it->second;
      if (!b.view) return;
      const auto col = b.columns.find(c.column);
      if (col == b.columns.end()) {
        const auto name = c.relation + "." + c.column;
        throw ResolutionError(ResolutionError::Reason::unknown_column, name,
                              "no such column: " + name + " (not exposed by view " + b.view->view_name + ")");
      }
      c.relation = col->second.first;
      c.column = col->second.second;
      return;
    }
  }

  const ViewCatalog& catalog_;
  CiSet used_;
  std::vector<Frame*> stack_;
};

// ---- shared helpers ---------------------------------------------------------------

std::string table_of(const QueryAst& q, const std::string& exposed) {
  if (q.from_item && iequals(q.from_item->exposed_name(), exposed)) return q.from_item->name;
  for (const auto& j : q.joins) {
    if (iequals(j.relation.exposed_name(), exposed)) return j.relation.name;
  }
  return {};
}

bool exposes(const QueryAst& q, const std::string& name) {
  if (q.from_item && iequals(q.from_item->exposed_name(), name)) return true;
  for (const auto& j : q.joins) {
    if (iequals(j.relation.exposed_name(), name)) return true;
  }
  return false;
}

bool query_mentions(const QueryAst& q, const std::string& name);

bool expr_mentions(const Expr& e, const std::string& name) {
  bool found = false;
  walk(
      e,
      [&](const Expr& node) {
        if (const auto* c = node.as<ColumnRef>(); c && iequals(c->relation, name)) found = true;
        if (const auto* s = node.as<Star>(); s && iequals(s->relation, name)) found = true;
      },
      [&](const QueryAst& sub) { found = found || query_mentions(sub, name); });
  return found;
}

// Does `q` (a subquery) reference the outer relation `name`?
bool query_mentions(const QueryAst& q, const std::string& name) {
  if (exposes(q, name)) return false;  // shadowed
  bool found = false;
  for_each_clause(q, [&](const Expr& e) { found = found || expr_mentions(e, name); });
  return found;
}

void split_and(const Expr& e, std::vector<const Expr*>& out) {
  if (const auto* b = e.as<Binary>(); b && b->op == BinaryOp::logical_and) {
    split_and(*b->lhs, out);
    split_and(*b->rhs, out);
  } else {
    out.push_back(&e);
  }
}

template <typename F>
void for_each_subquery(QueryAst& q, F&& f) {
  for_each_clause(q, [&](Expr& e) { walk(e, [](Expr&) {}, [&](QueryAst& sub) { f(sub); }); });
}

// ---- pruning ---------------------------------------------------------------------

bool key_preserving(const QueryAst& q, std::size_t index, const DatabaseSchema& schema) {
  const auto& j = q.joins[index];
  const auto* target = schema.find_table(j.relation.name);
  if (!target || target->primary_key.size() != 1) return false;
  const auto* eq = j.on_condition.as<Binary>();
  if (!eq || eq->op != BinaryOp::eq) return false;
  const auto* a = eq->lhs->as<ColumnRef>();
  const auto* b = eq->rhs->as<ColumnRef>();
  if (!a || !b) return false;
  const auto& exposed = j.relation.exposed_name();
  if (iequals(a->relation, exposed)) std::swap(a, b);
  if (!iequals(b->relation, exposed) || iequals(a->relation, exposed)) return false;
  if (!iequals(b->column, target->primary_key.front())) return false;
  const auto* left = schema.find_table(table_of(q, a->relation));
  if (!left) return false;
  const auto* fk = left->foreign_key_from(a->column);
  return fk && iequals(fk->to_table, target->name) && iequals(fk->to_column, b->column);
}

bool referenced_elsewhere(const QueryAst& q, std::size_t index) {
  const auto& name = q.joins[index].relation.exposed_name();
  for (const auto& item : q.select_items) {
    if (const auto* s = item.expr.as<Star>(); s && s->relation.empty()) return true;
    if (expr_mentions(item.expr, name)) return true;
  }
  for (std::size_t k = 0; k < q.joins.size(); ++k) {
    if (k != index && expr_mentions(q.joins[k].on_condition, name)) return true;
  }
  if (q.where_clause && expr_mentions(*q.where_clause, name)) return true;
  for (const auto& g : q.group_by) {
    if (expr_mentions(g, name)) return true;
  }
  if (q.having && expr_mentions(*q.having, name)) return true;
  for (const auto& o : q.order_by) {
    if (expr_mentions(o.expr, name)) return true;
  }
  return false;
}

void prune_query(QueryAst& q, const DatabaseSchema& schema, std::vector<std::string>& pruned) {
  for_each_subquery(q, [&](QueryAst& sub) { prune_query(sub, schema, pruned); });
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = q.joins.size(); i-- > 0;) {
      if (q.joins[i].join_type != JoinType::left) continue;
      if (!key_preserving(q, i, schema) || referenced_elsewhere(q, i)) continue;
      pruned.push_back(q.joins[i].relation.exposed_name());
      q.joins.erase(q.joins.begin() + static_cast<long>(i));
      changed = true;
    }
  }
}

// ---- tightening ------------------------------------------------------------------

bool non_null_literal(const Expr& e) {
  if (const auto* u = e.as<Unary>(); u && u->op != UnaryOp::logical_not) return non_null_literal(*u->operand);
  const auto* l = e.as<Literal>();
  return l && l->kind != Literal::Kind::null;
}

bool column_of(const Expr& e, const std::string& relation) {
  const auto* c = e.as<ColumnRef>();
  return c && iequals(c->relation, relation);
}

bool null_rejecting(const Expr& e, const std::string& relation) {
  if (const auto* b = e.as<Binary>()) {
    switch (b->op) {
      case BinaryOp::eq:
      case BinaryOp::ne:
      case BinaryOp::lt:
      case BinaryOp::le:
      case BinaryOp::gt:
      case BinaryOp::ge:
      case BinaryOp::like:
      case BinaryOp::not_like:
      case BinaryOp::glob:
        return (column_of(*b->lhs, relation) && non_null_literal(*b->rhs)) ||
               (non_null_literal(*b->lhs) && column_of(*b->rhs, relation));
      default:
        return false;
    }
  }
  if (const auto* b = e.as<Between>()) {
    return column_of(*b->operand, relation) && non_null_literal(*b->low) && non_null_literal(*b->high);
  }
  if (const auto* in = e.as<InList>()) {
    if (!column_of(*in->operand, relation) || in->items.empty()) return false;
    for (const auto& item : in->items) {
      if (!non_null_literal(item)) return false;
    }
    return true;
  }
  return false;
}

void tighten_query(QueryAst& q, std::vector<std::string>& tightened) {
  for_each_subquery(q, [&](QueryAst& sub) { tighten_query(sub, tightened); });
  if (!q.where_clause) return;
  std::vector<const Expr*> conjuncts;
  split_and(*q.where_clause, conjuncts);
  for (auto& j : q.joins) {
    if (j.join_type != JoinType::left) continue;
    for (const auto* c : conjuncts) {
      if (null_rejecting(*c, j.relation.exposed_name())) {
        j.join_type = JoinType::inner;
        tightened.push_back(j.relation.exposed_name());
        break;
      }
    }
  }
}

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

QueryAst inline_views(const QueryAst& dummy, const ViewCatalog& catalog) {
  QueryAst out = dummy;
  Inliner(catalog, dummy).query(out);
  return out;
}

QueryAst prune_joins(const QueryAst& ast, const DatabaseSchema& schema, std::vector<std::string>* pruned) {
  QueryAst out = ast;
  std::vector<std::string> names;
  prune_query(out, schema, names);
  if (pruned) *pruned = std::move(names);
  return out;
}

QueryAst tighten_joins(const QueryAst& ast, std::vector<std::string>* tightened) {
  QueryAst out = ast;
  std::vector<std::string> names;
  tighten_query(out, names);
  if (tightened) *tightened = std::move(names);
  return out;
}

ReconstructionResult reconstruct(const QueryAst& dummy, const ViewCatalog& catalog,
                                 const ReconstructionOptions& options) {
  ReconstructionResult r;
  const auto qualified = stage("qualify", [&] { return qualify_columns(dummy, catalog.relations()); });
  r.inlined_ast = stage("inline", [&] { return inline_views(qualified, catalog); });
  QueryAst ast = r.inlined_ast;
  if (options.prune) ast = prune_joins(ast, catalog.schema, &r.pruned_joins);
  if (options.tighten) ast = tighten_joins(ast, &r.tightened_joins);
  r.final_ast = stage("requalify", [&] { return qualify_columns(ast, table_relations(catalog.schema)); });

  for (const auto& name : base_relations(r.final_ast)) {
    if (catalog.is_view(name)) throw StageError("validate", "final SQL still references view " + name);
    r.linked_tables.insert(catalog.schema.table(name).name);
  }
  return r;
}

}  // namespace vsql
