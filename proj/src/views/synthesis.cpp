#include <cctype>

#include "vsql/error.hpp"
#include "vsql/sql/lexer.hpp"
#include "vsql/sql/printer.hpp"
#include "vsql/views.hpp"

namespace vsql {

const OutputColumn* ViewDefinition::find_column(std::string_view exposed) const {
  for (const auto& c : output_columns) {
    if (iequals(c.exposed_name, exposed)) return &c;
  }
  return nullptr;
}

const MappedJoin* ViewDefinition::find_join(std::string_view alias) const {
  for (const auto& j : join_chain) {
    if (iequals(j.alias, alias)) return &j;
  }
  return nullptr;
}

std::vector<std::string> ViewDefinition::column_names() const {
  std::vector<std::string> names;
  for (const auto& c : output_columns) names.push_back(c.exposed_name);
  return names;
}

bool ViewDefinition::has_ad_hoc_joins() const {
  for (const auto& j : join_chain) {
    if (j.ad_hoc) return true;
  }
  return false;
}

const ViewDefinition* ViewCatalog::find_view(std::string_view name) const {
  for (const auto& v : views) {
    if (iequals(v.view_name, name)) return &v;
  }
  return nullptr;
}

sql::RelationCatalog table_relations(const DatabaseSchema& schema) {
  sql::RelationCatalog out;
  for (const auto& t : schema.tables) out.emplace(t.name, t.column_names());
  return out;
}

sql::RelationCatalog ViewCatalog::relations() const {
  auto out = table_relations(schema);
  for (const auto& v : views) out.emplace(v.view_name, v.column_names());
  return out;
}

const char* to_string(SynthesisPolicy::Kind kind) noexcept {
  switch (kind) {
    case SynthesisPolicy::Kind::all_tables:
      return "all-tables";
    case SynthesisPolicy::Kind::listed_tables:
      return "listed-tables";
    case SynthesisPolicy::Kind::hand_authored_only:
      return "hand-authored-only";
    case SynthesisPolicy::Kind::llm_proposed:
      return "llm-proposed";
  }
  return "all-tables";
}

SynthesisPolicy::Kind parse_policy_kind(std::string_view text) {
  for (auto k : {SynthesisPolicy::Kind::all_tables, SynthesisPolicy::Kind::listed_tables,
                 SynthesisPolicy::Kind::hand_authored_only, SynthesisPolicy::Kind::llm_proposed}) {
    if (iequals(text, to_string(k))) return k;
  }
  throw ConfigError("unknown view policy '" + std::string(text) +
                    "' (expected all-tables, listed-tables, hand-authored-only or llm-proposed)");
}

namespace {

std::vector<const ColumnDef*> lookup_columns(const TableDef& target) {
  std::vector<const ColumnDef*> out;
  for (const auto& c : target.columns) {
    if (!target.is_primary_key(c.name)) out.push_back(&c);
  }
  return out;
}

std::string role_of(const std::string& fk_column) {
  if (fk_column.size() > 3 && iends_with(fk_column, "_id")) {
    return fk_column.substr(0, fk_column.size() - 3);
  }
  return fk_column;
}

bool is_plain(std::string_view name) {
  if (name.empty() || std::isdigit(static_cast<unsigned char>(name.front()))) return false;
  for (char ch : name) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
  }
  return !sql::is_reserved_word(name);
}

std::string bare_or_quoted(std::string_view name) {
  return is_plain(name) ? std::string(name) : sql::quote_identifier(name);
}

std::string qualified(std::string_view relation, std::string_view column) {
  return sql::quote_identifier(relation) + "." + sql::quote_identifier(column);
}

}  // namespace

ViewDefinition synthesize_view(const DatabaseSchema& schema, std::string_view table_name) {
  const TableDef& t = schema.table(table_name);
  ViewDefinition v;
  v.view_name = "v_" + t.name;
  v.base_table = t.name;

  auto joined = [&](const ColumnDef& c) -> const ForeignKey* {
    const auto* fk = t.foreign_key_from(c.name);
    if (!fk) return nullptr;
    const auto* target = schema.find_table(fk->to_table);
    if (!target) throw ValidationError("foreign key target '" + fk->to_table + "' does not exist");
    if (target->primary_key.size() != 1) {
      throw ValidationError("foreign key " + t.name + "." + c.name + " -> " + target->name +
                            ": target table has no single-column primary key");
    }
    return lookup_columns(*target).empty() ? nullptr : fk;
  };

  // Names of base columns that stay in the view are claimed first so a
  // lookup column can never shadow them.
  CiSet taken;
  for (const auto& c : t.columns) {
    if (!joined(c) || t.is_primary_key(c.name)) taken.insert(c.name);
  }

  CiSet scope{t.name};
  for (const auto& c : t.columns) {
    const auto* fk = joined(c);
    if (!fk || t.is_primary_key(c.name)) v.output_columns.push_back({c.name, t.name, c.name});
    if (!fk) continue;

    const TableDef& target = schema.table(fk->to_table);
    const std::string role = role_of(c.name);
    std::string alias = role;
    if (scope.count(alias)) alias += "_ref";
    if (scope.count(alias)) {
      throw ValidationError("view " + v.view_name + ": join alias '" + alias + "' for " + t.name +
                            "." + c.name + " collides with a relation already in scope");
    }
    scope.insert(alias);
    v.join_chain.push_back(
        {alias, target.name, sql::JoinType::left, t.name, c.name, fk->to_column, false});

    const auto cols = lookup_columns(target);
    for (const auto* col : cols) {
      std::string name;
      if (iequals(role, target.name)) {
        name = col->name;
      } else if (cols.size() == 1) {
        name = role;
      } else {
        name = role + "_" + col->name;
      }
      if (taken.count(name)) name = role + "_" + col->name;
      if (taken.count(name)) {
        throw ValidationError("view " + v.view_name + ": cannot name column " + target.name + "." +
                              col->name + " joined via " + t.name + "." + c.name + " ('" + name +
                              "' is already exposed)");
      }
      taken.insert(name);
      v.output_columns.push_back({name, alias, col->name});
    }
  }
  return v;
}

ViewCatalog synthesize_views(const DatabaseSchema& schema, const SynthesisPolicy& policy) {
  using Kind = SynthesisPolicy::Kind;
  if (policy.kind == Kind::hand_authored_only || policy.kind == Kind::llm_proposed) {
    throw ConfigError(std::string("view policy '") + to_string(policy.kind) +
                      "' takes its views from a file or the model, not from synthesis");
  }
  ViewCatalog catalog;
  catalog.schema = schema;
  if (policy.kind == Kind::listed_tables) {
    for (const auto& name : policy.tables) schema.table(name);  // throws on unknown
  }
  for (const auto& t : schema.tables) {
    if (policy.kind == Kind::listed_tables && !contains_ci(policy.tables, t.name)) continue;
    catalog.views.push_back(synthesize_view(schema, t.name));
  }
  validate(catalog);
  return catalog;
}

std::string emit_view_sql(const ViewDefinition& view) {
  std::string out = "create view " + bare_or_quoted(view.view_name) + " as\nselect\n";
  for (std::size_t i = 0; i < view.output_columns.size(); ++i) {
    const auto& c = view.output_columns[i];
    out += "  " + qualified(c.source_relation, c.source_column);
    if (c.exposed_name != c.source_column) out += " as " + sql::quote_identifier(c.exposed_name);
    out += i + 1 < view.output_columns.size() ? ",\n" : "\n";
  }
  out += "from\n  " + sql::quote_identifier(view.base_table);
  if (view.base_alias) out += " " + bare_or_quoted(*view.base_alias);
  for (const auto& j : view.join_chain) {
    out += "\n";
    out += j.join_type == sql::JoinType::left ? "left join " : "inner join ";
    out += sql::quote_identifier(j.target_table);
    if (j.alias != j.target_table) out += " " + bare_or_quoted(j.alias);
    out += " on " + qualified(j.left_relation, j.left_column) + " = " +
           qualified(j.alias, j.target_column);
  }
  return out;
}

std::string emit_catalog_sql(const ViewCatalog& catalog) {
  std::string out;
  for (const auto& v : catalog.views) {
    if (!out.empty()) out += "\n";
    out += emit_view_sql(v) + ";\n";
  }
  return out;
}

std::string render_view_schema_text(const ViewCatalog& catalog,
                                    const std::optional<std::vector<std::string>>& views) {
  if (views) {
    for (const auto& name : *views) {
      if (!catalog.find_view(name)) {
        throw ResolutionError(ResolutionError::Reason::unknown_relation, name,
                              "unknown view '" + name + "'");
      }
    }
  }
  std::string out;
  for (const auto& v : catalog.views) {
    if (views && !contains_ci(*views, v.view_name)) continue;
    if (!out.empty()) out += "\n";
    out += "# view: " + v.view_name + "\ncolumns:\n";
    for (const auto& c : v.output_columns) {
      std::string table = v.base_table;
      if (const auto* j = v.find_join(c.source_relation)) table = j->target_table;
      const ColumnDef* def = nullptr;
      if (const auto* t = catalog.schema.find_table(table)) def = t->find_column(c.source_column);
      out += "  - " + c.exposed_name + ": ";
      out += def ? to_string(def->data_format) : "text";
      out += ", ";
      out += def && !def->description.empty() ? def->description : c.exposed_name;
      out += "\n";
    }
  }
  return out;
}

}  // namespace vsql
