#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vsql/schema.hpp"
#include "vsql/sql/analysis.hpp"
#include "vsql/sql/ast.hpp"

namespace vsql {

namespace llm {
class Gateway;
struct TemplateSet;
}

struct OutputColumn {
  std::string exposed_name;
  std::string source_relation;  // the base table's exposed name or a join alias
  std::string source_column;

  bool operator==(const OutputColumn&) const = default;
};

// One join of a view's chain: `join target_table [alias] on
// left_relation.left_column = alias.target_column`.
struct MappedJoin {
  std::string alias;  // equal to target_table when the join is unaliased
  std::string target_table;
  sql::JoinType join_type = sql::JoinType::left;
  std::string left_relation;
  std::string left_column;
  std::string target_column;
  // Set when the ON condition matches no declared foreign key.
  bool ad_hoc = false;

  bool operator==(const MappedJoin&) const = default;
};

struct ViewDefinition {
  std::string view_name;
  std::string base_table;
  std::optional<std::string> base_alias;
  std::vector<OutputColumn> output_columns;
  std::vector<MappedJoin> join_chain;

  const std::string& base_exposed_name() const { return base_alias ? *base_alias : base_table; }
  const OutputColumn* find_column(std::string_view exposed) const;
  const MappedJoin* find_join(std::string_view alias) const;
  std::vector<std::string> column_names() const;
  bool has_ad_hoc_joins() const;

  bool operator==(const ViewDefinition&) const = default;
};

struct ViewCatalog {
  DatabaseSchema schema;
  std::vector<ViewDefinition> views;

  const ViewDefinition* find_view(std::string_view name) const;
  bool is_view(std::string_view name) const { return find_view(name) != nullptr; }
  // Views and base tables -> exposed columns, for qualify_columns.
  sql::RelationCatalog relations() const;
};

// Base tables only.
sql::RelationCatalog table_relations(const DatabaseSchema& schema);

struct SynthesisPolicy {
  enum class Kind { all_tables, listed_tables, hand_authored_only, llm_proposed };

  Kind kind = Kind::all_tables;
  std::vector<std::string> tables;  // listed_tables only
};

const char* to_string(SynthesisPolicy::Kind kind) noexcept;
SynthesisPolicy::Kind parse_policy_kind(std::string_view text);

// Deterministic one-hop denormalization. Handles all_tables and
// listed_tables; the other policies need a view source and are rejected
// with ConfigError.
//
// Column naming for a foreign key `<role>_id -> target`:
//   - role equal to the target table name: target columns keep their names
//     (gender.gender -> gender, publisher.publisher_name -> publisher_name);
//   - otherwise a single contributed column is exposed as `<role>`
//     (eye_colour_id -> colour.colour -> eye_colour), several as
//     `<role>_<column>`;
//   - a name already taken falls back to `<role>_<column>`; if that is
//     taken too the synthesis fails.
// Join alias is `<role>`, with `_ref` appended if that name is already in
// scope. A lookup table contributing no non-key column is not joined and
// the foreign key column is kept as is.
ViewCatalog synthesize_views(const DatabaseSchema& schema, const SynthesisPolicy& policy = {});
ViewDefinition synthesize_view(const DatabaseSchema& schema, std::string_view table);

// Multi-line CREATE VIEW text in the layout of a hand-written mapping rule.
std::string emit_view_sql(const ViewDefinition& view);

// Parses and checks one CREATE VIEW statement against the schema.
// Throws ParseError / UnsupportedError / ResolutionError / ValidationError.
ViewDefinition ingest_view_sql(std::string_view sql, const DatabaseSchema& schema);

// Structural checks on a definition (prefix, unique columns, sources exist,
// join chain well-formed). Throws ValidationError or ResolutionError.
void validate_view(const ViewDefinition& view, const DatabaseSchema& schema);
// Per-view checks plus unique view names disjoint from table names.
void validate(const ViewCatalog& catalog);

// View catalog files: semicolon-separated CREATE VIEW statements.
ViewCatalog load_view_catalog(std::string_view text, const DatabaseSchema& schema);
ViewCatalog load_view_catalog_file(const std::string& path, const DatabaseSchema& schema);
std::string emit_catalog_sql(const ViewCatalog& catalog);

// Flat prompt rendering of the views (no keys: views carry none).
std::string render_view_schema_text(const ViewCatalog& catalog,
                                    const std::optional<std::vector<std::string>>& views = std::nullopt);

struct ViewProposal {
  std::string raw_sql;
  std::optional<ViewDefinition> view;
  std::string error;  // set when view is empty

  bool valid() const { return view.has_value(); }
};

// Asks the model for views over the rendered schema and validates each
// proposed statement independently. Transport errors propagate.
std::vector<ViewProposal> llm_propose_views(const DatabaseSchema& schema, llm::Gateway& gateway);

// The view-creation prompt llm_propose_views sends.
std::string view_creation_prompt(const DatabaseSchema& schema, const llm::TemplateSet& templates);

}  // namespace vsql
