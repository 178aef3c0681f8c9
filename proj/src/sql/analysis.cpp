#include "vsql/sql/analysis.hpp"

#include "vsql/error.hpp"
#include "vsql/sql/visit.hpp"

namespace vsql::sql {

namespace {

struct ScopeEntry {
  std::string exposed;
  const std::vector<std::string>* columns;
};

struct Frame {
  std::vector<ScopeEntry> entries;
  CiSet select_aliases;

  const ScopeEntry* find(const std::string& exposed) const {
    for (const auto& e : entries) {
      if (iequals(e.exposed, exposed)) return &e;
    }
    return nullptr;
  }
};

enum class AliasRule { never, first, fallback };

class Qualifier {
 public:
  explicit Qualifier(const RelationCatalog& catalog) : catalog_(catalog) {}

  void query(QueryAst& q) {
    Frame frame;
    if (q.from_item) add(frame, *q.from_item);
    for (const auto& j : q.joins) add(frame, j.relation);
    for (const auto& item : q.select_items) {
      if (item.alias) frame.select_aliases.insert(*item.alias);
    }

    stack_.push_back(&frame);
    for (auto& item : q.select_items) resolve(item.expr, AliasRule::never);
    for (auto& j : q.joins) resolve(j.on_condition, AliasRule::never);
    if (q.where_clause) resolve(*q.where_clause, AliasRule::fallback);
    for (auto& g : q.group_by) resolve(g, AliasRule::first);
    if (q.having) resolve(*q.having, AliasRule::fallback);
    for (auto& o : q.order_by) resolve(o.expr, AliasRule::first);
    stack_.pop_back();
  }

 private:
  void add(Frame& frame, const TableRef& ref) {
    const auto it = catalog_.find(ref.name);
    if (it == catalog_.end()) {
      throw ResolutionError(ResolutionError::Reason::unknown_relation, ref.name,
                            "no such table: " + ref.name);
    }
    frame.entries.push_back({ref.exposed_name(), &it->second});
  }

  void resolve(Expr& e, AliasRule rule) {
    walk(
        e,
        [&](Expr& node) {
          if (auto* c = node.as<ColumnRef>()) {
            column(*c, rule);
          } else if (auto* s = node.as<Star>()) {
            star(*s);
          }
        },
        [&](QueryAst& sub) { query(sub); });
  }

  void star(const Star& s) {
    const Frame& frame = *stack_.back();
    if (s.relation.empty()) {
      if (frame.entries.empty()) throw ValidationError("'*' used without a FROM clause");
      return;
    }
    if (!frame.find(s.relation)) {
      throw ResolutionError(ResolutionError::Reason::unknown_relation, s.relation,
                            "no such table: " + s.relation);
    }
  }

  void column(ColumnRef& c, AliasRule rule) {
    if (c.qualified()) {
      for (auto f = stack_.rbegin(); f != stack_.rend(); ++f) {
        if (const auto* entry = (*f)->find(c.relation)) {
          if (!contains_ci(*entry->columns, c.column)) {
            const auto name = c.relation + "." + c.column;
            throw ResolutionError(ResolutionError::Reason::unknown_column, name,
                                  "no such column: " + name);
          }
          return;
        }
      }
      const auto name = c.relation + "." + c.column;
      throw ResolutionError(ResolutionError::Reason::unknown_column, name,
                            "no such column: " + name + " (relation '" + c.relation +
                                "' is not in scope)");
    }

    const Frame& current = *stack_.back();
    if (rule == AliasRule::first && current.select_aliases.count(c.column)) return;

    for (auto f = stack_.rbegin(); f != stack_.rend(); ++f) {
      std::vector<const ScopeEntry*> matches;
      for (const auto& entry : (*f)->entries) {
        if (contains_ci(*entry.columns, c.column)) matches.push_back(&entry);
      }
      if (matches.size() > 1) {
        std::vector<std::string> names;
        for (const auto* m : matches) names.push_back(m->exposed);
        throw ResolutionError(ResolutionError::Reason::ambiguous_column, c.column,
                              "ambiguous column name: " + c.column + " (exposed by " +
                                  join(names, ", ") + ")");
      }
      if (matches.size() == 1) {
        c.relation = matches.front()->exposed;
        return;
      }
    }
    if (rule == AliasRule::fallback && current.select_aliases.count(c.column)) return;
    throw ResolutionError(ResolutionError::Reason::unknown_column, c.column,
                          "no such column: " + c.column);
  }

  const RelationCatalog& catalog_;
  std::vector<const Frame*> stack_;
};

}  // namespace

QueryAst qualify_columns(const QueryAst& ast, const RelationCatalog& catalog) {
  QueryAst out = ast;
  Qualifier(catalog).query(out);
  return out;
}

std::size_t count_joins(const QueryAst& ast) { return ast.joins.size(); }

CiSet referenced_relations(const QueryAst& ast) {
  CiSet out;
  for_each_query(ast, [&](const QueryAst& q) {
    if (q.from_item) out.insert(q.from_item->exposed_name());
    for (const auto& j : q.joins) out.insert(j.relation.exposed_name());
    for_each_clause(q, [&](const Expr& e) {
      walk(
          e,
          [&](const Expr& node) {
            if (const auto* c = node.as<ColumnRef>(); c && c->qualified()) out.insert(c->relation);
            if (const auto* s = node.as<Star>(); s && !s->relation.empty()) out.insert(s->relation);
          },
          [](const QueryAst&) {});
    });
  });
  return out;
}

CiSet base_relations(const QueryAst& ast) {
  CiSet out;
  for_each_query(ast, [&](const QueryAst& q) {
    if (q.from_item) out.insert(q.from_item->name);
    for (const auto& j : q.joins) out.insert(j.relation.name);
  });
  return out;
}

}  // namespace vsql::sql
