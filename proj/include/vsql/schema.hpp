#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vsql/identifiers.hpp"

namespace vsql {

enum class DataFormat { integer, real, text, blob, date };

const char* to_string(DataFormat format) noexcept;
DataFormat parse_data_format(std::string_view text);

struct ColumnDef {
  std::string name;
  std::string display_name;  // human-readable name, e.g. "superhero name"
  std::string description;   // empty when the source carries none
  DataFormat data_format = DataFormat::text;

  bool operator==(const ColumnDef&) const = default;
};

struct ForeignKey {
  std::string from_table;
  std::string from_column;
  std::string to_table;
  std::string to_column;

  bool operator==(const ForeignKey&) const = default;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;

  const ColumnDef* find_column(std::string_view column) const;
  bool has_column(std::string_view column) const { return find_column(column) != nullptr; }
  bool is_primary_key(std::string_view column) const { return contains_ci(primary_key, column); }
  // The foreign key whose from_column is `column`, if any.
  const ForeignKey* foreign_key_from(std::string_view column) const;
  std::vector<std::string> column_names() const;

  bool operator==(const TableDef&) const = default;
};

struct DatabaseSchema {
  std::string db_id;
  std::vector<TableDef> tables;

  const TableDef* find_table(std::string_view table) const;
  const TableDef& table(std::string_view table) const;  // throws ResolutionError
  std::size_t foreign_key_count() const;

  bool operator==(const DatabaseSchema&) const = default;
};

enum class SchemaFormat { json, ddl };

// Parses and validates a schema document. Throws ParseError for malformed
// documents and ValidationError for invariant violations; every message
// names the offending element.
DatabaseSchema load_schema(std::string_view source, SchemaFormat format);
// DDL carries no database name; `ddl_db_id` supplies it (ignored for JSON).
DatabaseSchema load_schema(std::string_view source, SchemaFormat format, std::string_view ddl_db_id);

// Loads from disk; the format is picked from the extension (.json or
// .sql/.ddl). DDL schemas take their db_id from the file stem.
DatabaseSchema load_schema_file(const std::string& path);

// Checks every schema invariant, throwing ValidationError on the first violation.
void validate(const DatabaseSchema& schema);

// Directed multigraph of foreign keys: one edge per ForeignKey, parallel
// edges and self loops preserved.
class FkGraph {
 public:
  struct Edge {
    std::size_t from;
    std::size_t to;
    const ForeignKey* key;
  };

  explicit FkGraph(const DatabaseSchema& schema);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::vector<Edge> out_edges(std::string_view table) const;
  std::vector<Edge> in_edges(std::string_view table) const;
  std::size_t out_degree(std::string_view table) const { return out_edges(table).size(); }

 private:
  std::optional<std::size_t> index_of(std::string_view table) const;

  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
};

FkGraph fk_graph(const DatabaseSchema& schema);

// Prompt-ready rendering of the schema (or of a subset of its tables, kept
// in schema order). Byte-identical for equal inputs.
std::string render_schema_text(const DatabaseSchema& schema,
                               const std::optional<std::vector<std::string>>& tables = std::nullopt);

}  // namespace vsql
