#include <algorithm>
#include <filesystem>

#include "vsql/error.hpp"
#include "vsql/sql/parser.hpp"
#include "vsql/views.hpp"

namespace vsql {

namespace {

void check_prefix(const std::string& name) {
  if (!istarts_with(name, "v_")) {
    throw ValidationError("view name must start with v_: " + name);
  }
}

void check_plain(const std::string& view, const sql::QueryAst& q) {
  const char* found = nullptr;
  if (q.distinct) found = "DISTINCT";
  else if (q.where_clause) found = "WHERE";
  else if (!q.group_by.empty()) found = "GROUP BY";
  else if (q.having) found = "HAVING";
  else if (!q.order_by.empty()) found = "ORDER BY";
  else if (q.limit || q.offset) found = "LIMIT";
  if (found) {
    throw ValidationError("view " + view + ": mapping rules must be plain select-join statements (found " +
                          found + ")");
  }
  if (!q.from_item) throw ValidationError("view " + view + ": missing FROM clause");
}

const TableDef& base_table_of(const std::string& view, const std::string& relation,
                              const DatabaseSchema& schema) {
  if (const auto* t = schema.find_table(relation)) return *t;
  if (istarts_with(relation, "v_")) {
    throw ValidationError("view " + view + " selects from another view: " + relation);
  }
  throw ResolutionError(ResolutionError::Reason::unknown_relation, relation,
                        "view " + view + ": no such table: " + relation);
}

bool declared_fk(const DatabaseSchema& schema, const std::string& from_table,
                 const std::string& from_column, const std::string& to_table,
                 const std::string& to_column) {
  const auto* t = schema.find_table(from_table);
  if (!t) return false;
  for (const auto& fk : t->foreign_keys) {
    if (iequals(fk.from_column, from_column) && iequals(fk.to_table, to_table) &&
        iequals(fk.to_column, to_column)) {
      return true;
    }
  }
  return false;
}

}  // namespace

ViewDefinition ingest_view_sql(std::string_view text, const DatabaseSchema& schema) {
  const auto cv = sql::parse_create_view(text);
  check_prefix(cv.name);
  check_plain(cv.name, cv.query);

  // Resolve every relation first so a view-over-view is reported as such
  // rather than as an unknown table.
  CiMap<std::string> table_of;  // exposed name -> table
  std::vector<std::string> order;
  auto add = [&](const sql::TableRef& ref) {
    const auto& t = base_table_of(cv.name, ref.name, schema);
    table_of.emplace(ref.exposed_name(), t.name);
    order.push_back(ref.exposed_name());
  };
  add(*cv.query.from_item);
  for (const auto& j : cv.query.joins) add(j.relation);

  const auto q = sql::qualify_columns(cv.query, table_relations(schema));

  ViewDefinition v;
  v.view_name = cv.name;
  v.base_table = schema.table(q.from_item->name).name;
  v.base_alias = q.from_item->alias;

  for (std::size_t i = 0; i < q.joins.size(); ++i) {
    const auto& j = q.joins[i];
    const auto& exposed = j.relation.exposed_name();
    const auto* eq = j.on_condition.as<sql::Binary>();
    if (!eq || eq->op != sql::BinaryOp::eq) {
      throw UnsupportedError("multi-column join condition in view " + cv.name + " (join " + exposed + ")");
    }
    const auto* a = eq->lhs->as<sql::ColumnRef>();
    const auto* b = eq->rhs->as<sql::ColumnRef>();
    if (!a || !b) {
      throw ValidationError("view " + cv.name + ": join condition for " + exposed +
                            " must compare two columns");
    }
    if (iequals(a->relation, exposed)) std::swap(a, b);
    // order[0..i] are the relations before this join (order[i + 1] is the join itself).
    const std::vector<std::string> before(order.begin(), order.begin() + static_cast<long>(i) + 1);
    const bool earlier = contains_ci(before, a->relation);
    if (!iequals(b->relation, exposed) || !earlier) {
      throw ValidationError("view " + cv.name + ": join condition for " + exposed +
                            " must relate it to a relation joined before it");
    }
    MappedJoin m;
    m.alias = exposed;
    m.target_table = table_of.at(exposed);
    m.join_type = j.join_type;
    m.left_relation = a->relation;
    m.left_column = a->column;
    m.target_column = b->column;
    m.ad_hoc = !declared_fk(schema, table_of.at(a->relation), a->column, m.target_table, m.target_column);
    v.join_chain.push_back(std::move(m));
  }

  auto expand = [&](const std::string& exposed) {
    for (const auto& c : schema.table(table_of.at(exposed)).columns) {
      v.output_columns.push_back({c.name, exposed, c.name});
    }
  };
  for (std::size_t i = 0; i < q.select_items.size(); ++i) {
    const auto& item = q.select_items[i];
    if (const auto* s = item.expr.as<sql::Star>()) {
      if (s->relation.empty()) {
        for (const auto& name : order) expand(name);
      } else {
        expand(s->relation);
      }
    } else if (const auto* c = item.expr.as<sql::ColumnRef>()) {
      v.output_columns.push_back({item.alias ? *item.alias : c->column, c->relation, c->column});
    } else {
      throw ValidationError("view " + cv.name + ": output column " + std::to_string(i + 1) +
                            " is not a plain column reference");
    }
  }

  validate_view(v, schema);
  return v;
}

void validate_view(const ViewDefinition& v, const DatabaseSchema& schema) {
  check_prefix(v.view_name);
  if (v.output_columns.empty()) throw ValidationError("view " + v.view_name + " exposes no columns");

  CiMap<const TableDef*> scope;
  scope.emplace(v.base_exposed_name(), &base_table_of(v.view_name, v.base_table, schema));
  for (const auto& j : v.join_chain) {
    const auto left = scope.find(j.left_relation);
    if (left == scope.end()) {
      throw ValidationError("view " + v.view_name + ": join " + j.alias + " refers to '" +
                            j.left_relation + "', which is not joined before it");
    }
    if (!left->second->has_column(j.left_column)) {
      const auto name = j.left_relation + "." + j.left_column;
      throw ResolutionError(ResolutionError::Reason::unknown_column, name,
                            "view " + v.view_name + ": no such column: " + name);
    }
    const auto& target = base_table_of(v.view_name, j.target_table, schema);
    if (!target.has_column(j.target_column)) {
      const auto name = j.target_table + "." + j.target_column;
      throw ResolutionError(ResolutionError::Reason::unknown_column, name,
                            "view " + v.view_name + ": no such column: " + name);
    }
    if (!scope.emplace(j.alias, &target).second) {
      throw ValidationError("view " + v.view_name + ": duplicate relation name '" + j.alias + "'");
    }
  }

  CiSet names;
  for (const auto& c : v.output_columns) {
    if (!names.insert(c.exposed_name).second) {
      throw ValidationError("view " + v.view_name + ": duplicate output column '" + c.exposed_name + "'");
    }
    const auto rel = scope.find(c.source_relation);
    if (rel == scope.end()) {
      throw ValidationError("view " + v.view_name + ": column " + c.exposed_name +
                            " comes from unknown relation '" + c.source_relation + "'");
    }
    if (!rel->second->has_column(c.source_column)) {
      const auto name = c.source_relation + "." + c.source_column;
      throw ResolutionError(ResolutionError::Reason::unknown_column, name,
                            "view " + v.view_name + ": no such column: " + name);
    }
  }
}

void validate(const ViewCatalog& catalog) {
  validate(catalog.schema);
  CiSet names;
  for (const auto& v : catalog.views) {
    if (catalog.schema.find_table(v.view_name)) {
      throw ValidationError("view name " + v.view_name + " clashes with a table");
    }
    if (!names.insert(v.view_name).second) {
      throw ValidationError("duplicate view name " + v.view_name);
    }
    validate_view(v, catalog.schema);
  }
}

ViewCatalog load_view_catalog(std::string_view text, const DatabaseSchema& schema) {
  ViewCatalog catalog;
  catalog.schema = schema;
  for (const auto& stmt : sql::split_statements(text)) {
    catalog.views.push_back(ingest_view_sql(stmt, schema));
  }
  validate(catalog);
  return catalog;
}

ViewCatalog load_view_catalog_file(const std::string& path, const DatabaseSchema& schema) {
  if (!std::filesystem::exists(path)) throw IoError("view file not found: " + path);
  return load_view_catalog(read_file(path), schema);
}

}  // namespace vsql
