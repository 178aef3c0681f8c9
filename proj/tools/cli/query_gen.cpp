#include "query_gen.hpp"

#include <algorithm>
#include <cstdio>

#include "vsql/sql/printer.hpp"

namespace vsql::cli {

namespace {

std::string literal(const SqlValue& v) {
  switch (v.index()) {
    case 1:
      return std::to_string(std::get<std::int64_t>(v));
    case 2: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(v));
      return buf;
    }
    case 3:
      return sql::quote_string(std::get<std::string>(v));
    default:
      return "null";
  }
}

const char* kAggregates[] = {"count", "min", "max", "sum", "avg"};

}  // namespace

QueryGenerator::QueryGenerator(const ViewCatalog& catalog, Database& views_db, std::uint64_t seed) : rng_(seed) {
  for (const auto& v : catalog.views) {
    Relation rel{v.view_name, {}};
    for (const auto& oc : v.output_columns) {
      Column c{oc.exposed_name, true, {}};
      const auto rows = views_db.query("select distinct " + sql::quote_identifier(oc.exposed_name) + " from " +
                                       sql::quote_identifier(v.view_name) + " where " +
                                       sql::quote_identifier(oc.exposed_name) + " is not null order by 1 limit 12");
      for (const auto& row : rows.rows) {
        c.numeric = c.numeric && (row[0].index() == 1 || row[0].index() == 2);
        c.literals.push_back(literal(row[0]));
      }
      if (c.literals.empty()) c.numeric = false;
      rel.columns.push_back(std::move(c));
    }
    relations_.push_back(std::move(rel));
  }

  // Key links between views: a base FK column one view exposes, and the
  // referenced key another view exposes.
  for (std::size_t a = 0; a < catalog.views.size(); ++a) {
    const auto& va = catalog.views[a];
    const auto& base = catalog.schema.table(va.base_table);
    for (const auto& oc : va.output_columns) {
      if (!iequals(oc.source_relation, va.base_exposed_name())) continue;
      const auto* fk = base.foreign_key_from(oc.source_column);
      if (!fk) continue;
      for (std::size_t b = 0; b < catalog.views.size(); ++b) {
        const auto& vb = catalog.views[b];
        if (!iequals(vb.base_table, fk->to_table)) continue;
        for (const auto& ob : vb.output_columns) {
          if (iequals(ob.source_relation, vb.base_exposed_name()) && iequals(ob.source_column, fk->to_column)) {
            links_.push_back({a, oc.exposed_name, b, ob.exposed_name});
          }
        }
      }
    }
  }
}

std::string QueryGenerator::column_ref(const Ref& ref, const Column& c) const {
  return sql::quote_identifier(ref.name) + "." + sql::quote_identifier(c.name);
}

std::string QueryGenerator::simple_predicate(const Ref& ref, const Column& c) {
  const auto col = column_ref(ref, c);
  if (c.literals.empty()) return col + (chance(0.5) ? " is null" : " is not null");
  const auto& lit = pick_of(c.literals);
  switch (pick(c.numeric ? 9 : 7)) {
    case 0:
    case 1:
      return col + " = " + lit;
    case 2:
      return col + " <> " + lit;
    case 3:
      return col + (chance(0.5) ? " is null" : " is not null");
    case 4: {
      const auto& other = pick_of(c.literals);
      return col + " in (" + lit + ", " + other + ")";
    }
    case 5:
      if (!c.numeric && lit.size() > 2 && lit[1] != '\'' && lit[1] != '%' && lit[1] != '_') return col + " like " + lit.substr(0, 2) + "%'";
      return col + " = " + lit;
    case 6:
      return (chance(0.5) ? "not " : "") + std::string("(") + col + " = " + lit + ")";
    case 7: {
      static const char* ops[] = {" < ", " <= ", " > ", " >= "};
      return col + ops[pick(4)] + lit;
    }
    default: {
      auto lo = lit, hi = pick_of(c.literals);
      if (std::stod(lo) > std::stod(hi)) std::swap(lo, hi);
      return col + " between " + lo + " and " + hi;
    }
  }
}

std::string QueryGenerator::predicate(const std::vector<Ref>& scope, int depth) {
  const auto& ref = pick_of(scope);
  const auto& rel = relations_[ref.relation];
  const auto& c = pick_of(rel.columns);
  const auto roll = pick(20);
  if (roll < 3 && depth == 0) {
    // Null-accepting disjunction: keeps rows whose lookup is missing.
    return "(" + simple_predicate(ref, c) + " or " + column_ref(ref, pick_of(rel.columns)) + " is null)";
  }
  if (roll == 3 && depth == 0) {
    // Uncorrelated IN over the same view under a fresh alias.
    const Ref inner{"s" + std::to_string(++alias_counter_), ref.relation};
    return column_ref(ref, c) + " in (select " + column_ref(inner, c) + " from " +
           sql::quote_identifier(rel.name) + " " + inner.name + " where " + predicate({inner}, depth + 1) + ")";
  }
  if (roll == 4 && depth == 0) {
    std::vector<const Link*> usable;
    for (const auto& l : links_) {
      if (l.from == ref.relation || l.to == ref.relation) usable.push_back(&l);
    }
    if (!usable.empty()) {
      const auto& l = *pick_of(usable);
      const bool outer_is_from = l.from == ref.relation;
      const Ref inner{"s" + std::to_string(++alias_counter_), outer_is_from ? l.to : l.from};
      const auto& outer_col = outer_is_from ? l.from_column : l.to_column;
      const auto& inner_col = outer_is_from ? l.to_column : l.from_column;
      return std::string(chance(0.7) ? "" : "not ") + "exists (select 1 from " +
             sql::quote_identifier(relations_[inner.relation].name) + " " + inner.name + " where " + inner.name +
             "." + sql::quote_identifier(inner_col) + " = " + sql::quote_identifier(ref.name) + "." +
             sql::quote_identifier(outer_col) + ")";
    }
  }
  return simple_predicate(ref, c);
}

std::string QueryGenerator::next() {
  alias_counter_ = 0;
  std::vector<Ref> scope;
  const auto first = pick(relations_.size());
  scope.push_back({chance(0.25) ? "t0" : relations_[first].name, first});
  std::string from = sql::quote_identifier(relations_[first].name);
  if (scope[0].name != relations_[first].name) from += " " + scope[0].name;

  std::vector<const Link*> usable;
  for (const auto& l : links_) {
    if (l.from == first || l.to == first) usable.push_back(&l);
  }
  if (!usable.empty() && chance(0.35)) {
    const auto& l = *pick_of(usable);
    const bool first_is_from = l.from == first;
    const auto other = first_is_from ? l.to : l.from;
    const auto& other_name = relations_[other].name;
    Ref ref{other_name, other};
    if (iequals(other_name, scope[0].name) || chance(0.3)) ref.name = "t1";
    from += std::string(chance(0.5) ? " inner join " : " left join ") + sql::quote_identifier(other_name);
    if (ref.name != other_name) from += " " + ref.name;
    from += " on " + sql::quote_identifier(scope[0].name) + "." +
            sql::quote_identifier(first_is_from ? l.from_column : l.to_column) + " = " + ref.name + "." +
            sql::quote_identifier(first_is_from ? l.to_column : l.from_column);
    scope.push_back(ref);
  }

  std::vector<std::string> items;
  std::vector<std::string> group_by;
  bool aggregate = false;
  const auto shape = pick(20);
  if (shape < 2 && scope.size() == 1) {
    items.push_back("*");
  } else if (shape < 13) {
    const auto n = 1 + pick(4);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& ref = pick_of(scope);
      const auto item = column_ref(ref, pick_of(relations_[ref.relation].columns));
      if (std::find(items.begin(), items.end(), item) == items.end()) items.push_back(item);
    }
  } else {
    aggregate = true;
    if (chance(0.5)) {
      const auto& ref = pick_of(scope);
      group_by.push_back(column_ref(ref, pick_of(relations_[ref.relation].columns)));
      items.push_back(group_by.back());
    }
    const auto n = 1 + pick(2);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& ref = pick_of(scope);
      const auto& c = pick_of(relations_[ref.relation].columns);
      std::string fn = kAggregates[pick(5)];
      if ((fn == "sum" || fn == "avg") && !c.numeric) fn = "count";
      if (fn == "count" && chance(0.3)) {
        items.push_back("count(*)");
      } else {
        items.push_back(fn + "(" + (fn == "count" && chance(0.3) ? "distinct " : "") + column_ref(ref, c) + ")");
      }
    }
  }

  std::string sql = "select ";
  if (!aggregate && items[0] != "*" && chance(0.15)) sql += "distinct ";
  sql += join(items, ", ") + " from " + from;

  const auto conjuncts = pick(4);
  std::vector<std::string> where;
  for (std::size_t i = 0; i < conjuncts; ++i) where.push_back(predicate(scope, 0));
  if (!where.empty()) sql += " where " + join(where, " and ");
  if (!group_by.empty()) sql += " group by " + join(group_by, ", ");

  const bool single_row = aggregate && group_by.empty();
  if (items[0] != "*" && !single_row && chance(0.3)) {
    std::vector<std::string> keys;
    for (const auto& item : items) keys.push_back(item + (chance(0.3) ? " desc" : ""));
    sql += " order by " + join(keys, ", ");
    if (chance(0.5)) sql += " limit " + std::to_string(1 + pick(5));
  }
  return sql;
}

}  // namespace vsql::cli
