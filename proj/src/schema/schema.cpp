#include "vsql/schema.hpp"

#include <filesystem>

#include "vsql/error.hpp"

namespace vsql {

const char* to_string(DataFormat format) noexcept {
  switch (format) {
    case DataFormat::integer:
      return "integer";
    case DataFormat::real:
      return "real";
    case DataFormat::text:
      return "text";
    case DataFormat::blob:
      return "blob";
    case DataFormat::date:
      return "date";
  }
  return "text";
}

DataFormat parse_data_format(std::string_view text) {
  if (iequals(text, "integer")) return DataFormat::integer;
  if (iequals(text, "real")) return DataFormat::real;
  if (iequals(text, "text")) return DataFormat::text;
  if (iequals(text, "blob")) return DataFormat::blob;
  if (iequals(text, "date")) return DataFormat::date;
  throw ValidationError("unknown data_format '" + std::string(text) +
                        "' (expected integer, real, text, blob or date)");
}

const ColumnDef* TableDef::find_column(std::string_view column) const {
  for (const auto& c : columns) {
    if (iequals(c.name, column)) return &c;
  }
  return nullptr;
}

const ForeignKey* TableDef::foreign_key_from(std::string_view column) const {
  for (const auto& fk : foreign_keys) {
    if (iequals(fk.from_column, column)) return &fk;
  }
  return nullptr;
}

std::vector<std::string> TableDef::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

const TableDef* DatabaseSchema::find_table(std::string_view table) const {
  for (const auto& t : tables) {
    if (iequals(t.name, table)) return &t;
  }
  return nullptr;
}

const TableDef& DatabaseSchema::table(std::string_view table) const {
  if (const auto* t = find_table(table)) return *t;
  throw ResolutionError(ResolutionError::Reason::unknown_relation, std::string(table),
                        "unknown table '" + std::string(table) + "'");
}

std::size_t DatabaseSchema::foreign_key_count() const {
  std::size_t n = 0;
  for (const auto& t : tables) n += t.foreign_keys.size();
  return n;
}

void validate(const DatabaseSchema& schema) {
  if (schema.db_id.empty()) throw ValidationError("schema db_id is empty");
  CiSet table_names;
  for (const auto& t : schema.tables) {
    if (t.name.empty()) throw ValidationError("table with empty name");
    if (!table_names.insert(t.name).second) {
      throw ValidationError("duplicate table name '" + t.name + "'");
    }
    if (t.columns.empty()) throw ValidationError("table '" + t.name + "' has no columns");
    CiSet column_names;
    for (const auto& c : t.columns) {
      if (c.name.empty()) throw ValidationError("table '" + t.name + "' has a column with empty name");
      if (!column_names.insert(c.name).second) {
        throw ValidationError("duplicate column name '" + c.name + "' in table '" + t.name + "'");
      }
    }
    for (const auto& pk : t.primary_key) {
      if (!t.has_column(pk)) {
        throw ValidationError("primary key column '" + pk + "' does not exist in table '" + t.name + "'");
      }
    }
  }
  for (const auto& t : schema.tables) {
    for (const auto& fk : t.foreign_keys) {
      const std::string where = "foreign key " + fk.from_table + "." + fk.from_column + " -> " +
                                fk.to_table + "." + fk.to_column;
      if (!iequals(fk.from_table, t.name)) {
        throw ValidationError(where + ": declared on table '" + t.name + "'");
      }
      if (!t.has_column(fk.from_column)) {
        throw ValidationError(where + ": column '" + fk.from_column + "' does not exist in table '" +
                              t.name + "'");
      }
      const auto* target = schema.find_table(fk.to_table);
      if (!target) {
        throw ValidationError(where + ": referenced table '" + fk.to_table + "' does not exist");
      }
      if (!target->has_column(fk.to_column)) {
        throw ValidationError(where + ": referenced column '" + fk.to_column +
                              "' does not exist in table '" + target->name + "'");
      }
      if (target->primary_key.size() != 1 || !target->is_primary_key(fk.to_column)) {
        throw ValidationError(where + ": referenced column must be the primary key of '" +
                              target->name + "'");
      }
    }
  }
}

DatabaseSchema load_schema_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("schema source not found: " + path);
  const auto ext = to_lower(std::filesystem::path(path).extension().string());
  const auto format = (ext == ".sql" || ext == ".ddl") ? SchemaFormat::ddl : SchemaFormat::json;
  return load_schema(read_file(path), format, std::filesystem::path(path).stem().string());
}

// ---- FkGraph ----------------------------------------------------------------

FkGraph::FkGraph(const DatabaseSchema& schema) {
  for (const auto& t : schema.tables) nodes_.push_back(t.name);
  for (const auto& t : schema.tables) {
    for (const auto& fk : t.foreign_keys) {
      const auto from = index_of(fk.from_table);
      const auto to = index_of(fk.to_table);
      if (!from || !to) continue;  // unreachable on validated schemas
      edges_.push_back({*from, *to, &fk});
    }
  }
}

std::optional<std::size_t> FkGraph::index_of(std::string_view table) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (iequals(nodes_[i], table)) return i;
  }
  return std::nullopt;
}

std::vector<FkGraph::Edge> FkGraph::out_edges(std::string_view table) const {
  std::vector<Edge> out;
  if (const auto i = index_of(table)) {
    for (const auto& e : edges_) {
      if (e.from == *i) out.push_back(e);
    }
  }
  return out;
}

std::vector<FkGraph::Edge> FkGraph::in_edges(std::string_view table) const {
  std::vector<Edge> out;
  if (const auto i = index_of(table)) {
    for (const auto& e : edges_) {
      if (e.to == *i) out.push_back(e);
    }
  }
  return out;
}

FkGraph fk_graph(const DatabaseSchema& schema) { return FkGraph(schema); }

// ---- rendering ---------------------------------------------------------------

std::string render_schema_text(const DatabaseSchema& schema,
                               const std::optional<std::vector<std::string>>& tables) {
  if (tables) {
    for (const auto& name : *tables) {
      if (!schema.find_table(name)) {
        throw ResolutionError(ResolutionError::Reason::unknown_relation, name,
                              "unknown table '" + name + "' in render subset");
      }
    }
  }
  std::string out;
  for (const auto& t : schema.tables) {
    if (tables && !contains_ci(*tables, t.name)) continue;
    if (!out.empty()) out += "\n";
    out += "# table: " + t.name + "\n";
    out += "columns:\n";
    for (const auto& c : t.columns) {
      out += "  - " + c.name;
      if (!c.display_name.empty() && c.display_name != c.name) out += " (" + c.display_name + ")";
      out += ": ";
      out += to_string(c.data_format);
      out += ", ";
      out += c.description.empty() ? c.name : c.description;
      out += "\n";
    }
    if (!t.primary_key.empty()) out += "primary key: " + join(t.primary_key, ", ") + "\n";
    if (!t.foreign_keys.empty()) {
      out += "foreign keys:\n";
      for (const auto& fk : t.foreign_keys) {
        out += "  - " + fk.from_column + " -> " + fk.to_table + "." + fk.to_column + "\n";
      }
    }
  }
  return out;
}

}  // namespace vsql
