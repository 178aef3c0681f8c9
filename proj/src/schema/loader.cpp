// Schema document loaders: the JSON schema format and SQLite CREATE TABLE DDL.

#include <json.hpp>

#include "vsql/error.hpp"
#include "vsql/schema.hpp"
#include "vsql/sql/lexer.hpp"
#include "vsql/sql/parser.hpp"

namespace vsql {

namespace {

using nlohmann::json;

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::string string_field(const json& obj, const char* key, const std::string& where, bool required) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw ValidationError(where + ": missing required field '" + key + "'");
    return {};
  }
  if (!it->is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

DatabaseSchema from_json(std::string_view source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    const auto offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, column] = line_column(source, offset);
    throw ParseError(std::string("malformed schema JSON: ") + e.what(), offset, line, column);
  }
  if (!doc.is_object()) throw ValidationError("schema document must be a JSON object");

  DatabaseSchema schema;
  schema.db_id = string_field(doc, "db_id", "schema", true);
  const auto tables = doc.find("tables");
  if (tables == doc.end() || !tables->is_array()) {
    throw ValidationError("schema: field 'tables' must be an array");
  }
  for (std::size_t ti = 0; ti < tables->size(); ++ti) {
    const json& jt = (*tables)[ti];
    const std::string at = "tables[" + std::to_string(ti) + "]";
    if (!jt.is_object()) throw ValidationError(at + " must be an object");
    TableDef table;
    table.name = string_field(jt, "name", at, true);
    const std::string where = "table '" + table.name + "'";

    const auto columns = jt.find("columns");
    if (columns == jt.end() || !columns->is_array()) {
      throw ValidationError(where + ": field 'columns' must be an array");
    }
    for (std::size_t ci = 0; ci < columns->size(); ++ci) {
      const json& jc = (*columns)[ci];
      const std::string cat = where + " columns[" + std::to_string(ci) + "]";
      if (!jc.is_object()) throw ValidationError(cat + " must be an object");
      ColumnDef col;
      col.name = string_field(jc, "name", cat, true);
      const std::string cwhere = "column '" + table.name + "." + col.name + "'";
      col.display_name = string_field(jc, "display_name", cwhere, false);
      col.description = string_field(jc, "description", cwhere, false);
      const auto format = string_field(jc, "data_format", cwhere, true);
      try {
        col.data_format = parse_data_format(format);
      } catch (const ValidationError& e) {
        throw ValidationError(cwhere + ": " + e.what());
      }
      table.columns.push_back(std::move(col));
    }

    if (const auto pk = jt.find("primary_key"); pk != jt.end() && !pk->is_null()) {
      if (!pk->is_array()) throw ValidationError(where + ": field 'primary_key' must be an array");
      for (const auto& p : *pk) {
        if (!p.is_string()) throw ValidationError(where + ": primary_key entries must be strings");
        table.primary_key.push_back(p.get<std::string>());
      }
    }

    if (const auto fks = jt.find("foreign_keys"); fks != jt.end() && !fks->is_null()) {
      if (!fks->is_array()) throw ValidationError(where + ": field 'foreign_keys' must be an array");
      for (std::size_t fi = 0; fi < fks->size(); ++fi) {
        const json& jf = (*fks)[fi];
        const std::string fat = where + " foreign_keys[" + std::to_string(fi) + "]";
        if (!jf.is_object()) throw ValidationError(fat + " must be an object");
        for (const char* key : {"column", "ref_column"}) {
          if (const auto it = jf.find(key); it != jf.end() && it->is_array()) {
            throw ValidationError(fat + ": composite foreign keys are not supported");
          }
        }
        ForeignKey fk;
        fk.from_table = table.name;
        fk.from_column = string_field(jf, "column", fat, true);
        fk.to_table = string_field(jf, "ref_table", fat, true);
        fk.to_column = string_field(jf, "ref_column", fat, true);
        table.foreign_keys.push_back(std::move(fk));
      }
    }
    schema.tables.push_back(std::move(table));
  }
  return schema;
}

// ---- DDL ---------------------------------------------------------------------

DataFormat affinity(const std::string& declared) {
  const auto t = to_lower(declared);
  if (t.find("date") != std::string::npos || t.find("time") != std::string::npos) return DataFormat::date;
  if (t.find("int") != std::string::npos) return DataFormat::integer;
  if (t.find("char") != std::string::npos || t.find("clob") != std::string::npos ||
      t.find("text") != std::string::npos) {
    return DataFormat::text;
  }
  if (t.empty() || t.find("blob") != std::string::npos) return DataFormat::blob;
  return DataFormat::real;  // REAL, FLOAT, DOUBLE, NUMERIC, DECIMAL, ...
}

struct PendingForeignKey {
  ForeignKey key;
  bool column_given;
};

class DdlReader {
 public:
  DdlReader(std::string_view statement, std::vector<PendingForeignKey>& pending)
      : tokens_(sql::tokenize(statement)), pending_(pending) {}

  bool is_create_table() const {
    std::size_t i = 0;
    if (!tokens_[i].is_keyword("create")) return false;
    ++i;
    if (tokens_[i].is_keyword("temp") || tokens_[i].is_keyword("temporary")) ++i;
    return tokens_[i].is_keyword("table");
  }

  TableDef read() {
    expect_keyword("create");
    if (peek().is_keyword("temp") || peek().is_keyword("temporary")) advance();
    expect_keyword("table");
    if (accept_keyword("if")) {
      expect_keyword("not");
      expect_keyword("exists");
    }
    TableDef table;
    table.name = name("table name");
    if (accept_symbol(".")) table.name = name("table name");
    if (peek().is_keyword("as")) throw UnsupportedError("CREATE TABLE ... AS SELECT");
    expect_symbol("(");
    do {
      if (at_table_constraint()) {
        table_constraint(table);
      } else {
        column_def(table);
      }
    } while (accept_symbol(","));
    expect_symbol(")");
    return table;
  }

 private:
  const sql::Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const sql::Token& advance() {
    const auto& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void error(const std::string& message) const {
    const auto& t = peek();
    throw ParseError(message, t.offset, t.line, t.column);
  }
  bool accept_keyword(std::string_view w) {
    if (!peek().is_keyword(w)) return false;
    advance();
    return true;
  }
  bool accept_symbol(std::string_view s) {
    if (!peek().is_symbol(s)) return false;
    advance();
    return true;
  }
  void expect_keyword(std::string_view w) {
    if (!accept_keyword(w)) error("expected '" + std::string(w) + "' but found '" + peek().text + "'");
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) error("expected '" + std::string(s) + "' but found '" + peek().text + "'");
  }
  std::string name(const char* what) {
    if (!peek().is_name() && peek().kind != sql::TokenKind::string) {
      error(std::string("expected ") + what + " but found '" + peek().text + "'");
    }
    return advance().text;
  }

  void skip_parenthesized() {
    expect_symbol("(");
    int depth = 1;
    while (depth > 0) {
      if (peek().kind == sql::TokenKind::end) error("unbalanced parentheses");
      if (peek().is_symbol("(")) ++depth;
      if (peek().is_symbol(")")) --depth;
      advance();
    }
  }

  std::vector<std::string> name_list() {
    std::vector<std::string> names;
    expect_symbol("(");
    do {
      names.push_back(name("column name"));
      accept_keyword("asc") || accept_keyword("desc");
    } while (accept_symbol(","));
    expect_symbol(")");
    return names;
  }

  bool at_table_constraint() const {
    const auto& t = peek();
    return t.is_keyword("constraint") || t.is_keyword("primary") || t.is_keyword("foreign") ||
           t.is_keyword("unique") || t.is_keyword("check");
  }

  void references(TableDef& table, const std::vector<std::string>& from_columns) {
    expect_keyword("references");
    const std::string target = name("referenced table");
    std::vector<std::string> to_columns;
    if (peek().is_symbol("(")) to_columns = name_list();
    if (from_columns.size() != 1 || to_columns.size() > 1) {
      throw ValidationError("table '" + table.name + "': composite foreign key (" +
                            join(from_columns, ", ") + ") -> " + target + " is not supported");
    }
    PendingForeignKey fk{{table.name, from_columns.front(), target,
                          to_columns.empty() ? std::string() : to_columns.front()},
                         !to_columns.empty()};
    pending_.push_back(std::move(fk));
    // ON DELETE / ON UPDATE / MATCH / DEFERRABLE clauses carry no schema information.
    while (true) {
      if (accept_keyword("on")) {
        advance();  // DELETE | UPDATE
        if (accept_keyword("set")) {
          advance();
        } else if (accept_keyword("no")) {
          advance();
        } else {
          advance();
        }
      } else if (accept_keyword("match")) {
        advance();
      } else if (accept_keyword("not")) {
        expect_keyword("deferrable");
        if (accept_keyword("initially")) advance();
      } else if (accept_keyword("deferrable")) {
        if (accept_keyword("initially")) advance();
      } else {
        break;
      }
    }
  }

  void table_constraint(TableDef& table) {
    if (accept_keyword("constraint")) name("constraint name");
    if (accept_keyword("primary")) {
      expect_keyword("key");
      table.primary_key = name_list();
    } else if (accept_keyword("foreign")) {
      expect_keyword("key");
      const auto from = name_list();
      references(table, from);
    } else if (accept_keyword("unique")) {
      name_list();
    } else if (accept_keyword("check")) {
      skip_parenthesized();
    } else {
      error("expected table constraint");
    }
  }

  void column_def(TableDef& table) {
    ColumnDef col;
    col.name = name("column name");
    std::vector<std::string> type_words;
    while (peek().kind == sql::TokenKind::identifier && !is_constraint_start(peek())) {
      type_words.push_back(advance().text);
    }
    if (peek().is_symbol("(")) skip_parenthesized();  // VARCHAR(50), DECIMAL(10, 2)
    col.data_format = affinity(join(type_words, " "));
    col.display_name = col.name;

    while (true) {
      if (accept_keyword("constraint")) name("constraint name");
      if (accept_keyword("primary")) {
        expect_keyword("key");
        accept_keyword("asc") || accept_keyword("desc");
        if (peek().is_keyword("on")) {  // ON CONFLICT ...
          advance();
          advance();
          advance();
        }
        accept_keyword("autoincrement");
        table.primary_key = {col.name};
      } else if (accept_keyword("not")) {
        expect_keyword("null");
      } else if (accept_keyword("null")) {
      } else if (accept_keyword("unique")) {
      } else if (accept_keyword("default")) {
        if (peek().is_symbol("(")) {
          skip_parenthesized();
        } else {
          if (peek().is_symbol("-") || peek().is_symbol("+")) advance();
          advance();
        }
      } else if (accept_keyword("check")) {
        skip_parenthesized();
      } else if (accept_keyword("collate")) {
        advance();
      } else if (peek().is_keyword("references")) {
        references(table, {col.name});
      } else if (accept_keyword("generated")) {
        throw UnsupportedError("generated column '" + col.name + "'");
      } else {
        break;
      }
    }
    table.columns.push_back(std::move(col));
  }

  static bool is_constraint_start(const sql::Token& t) {
    for (const char* w : {"constraint", "primary", "not", "null", "unique", "default", "check",
                          "collate", "references", "generated"}) {
      if (t.is_keyword(w)) return true;
    }
    return false;
  }

  std::vector<sql::Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<PendingForeignKey>& pending_;
};

DatabaseSchema from_ddl(std::string_view source, std::string_view db_id) {
  DatabaseSchema schema;
  schema.db_id = std::string(db_id);
  std::vector<PendingForeignKey> pending;
  for (const auto& statement : sql::split_statements(source)) {
    DdlReader reader(statement, pending);
    if (!reader.is_create_table()) continue;  // indexes, inserts, pragmas: not schema
    schema.tables.push_back(reader.read());
  }
  for (auto& p : pending) {
    if (!p.column_given) {
      const auto* target = schema.find_table(p.key.to_table);
      if (!target) {
        throw ValidationError("foreign key " + p.key.from_table + "." + p.key.from_column +
                              ": referenced table '" + p.key.to_table + "' does not exist");
      }
      if (target->primary_key.size() != 1) {
        throw ValidationError("foreign key " + p.key.from_table + "." + p.key.from_column +
                              ": referenced table '" + target->name +
                              "' has no single-column primary key");
      }
      p.key.to_column = target->primary_key.front();
    }
    for (auto& t : schema.tables) {
      if (iequals(t.name, p.key.from_table)) t.foreign_keys.push_back(p.key);
    }
  }
  return schema;
}

}  // namespace

DatabaseSchema load_schema(std::string_view source, SchemaFormat format) {
  return load_schema(source, format, "main");
}

DatabaseSchema load_schema(std::string_view source, SchemaFormat format, std::string_view ddl_db_id) {
  DatabaseSchema schema = format == SchemaFormat::json ? from_json(source) : from_ddl(source, ddl_db_id);
  validate(schema);
  return schema;
}

}  // namespace vsql
