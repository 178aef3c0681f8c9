#include "vsql/sql/parser.hpp"

#include <charconv>

#include "vsql/error.hpp"
#include "vsql/identifiers.hpp"
#include "vsql/sql/lexer.hpp"

namespace vsql::sql {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view sql) : tokens_(tokenize(sql)) {}

  QueryAst statement() {
    if (peek().is_keyword("with")) unsupported("common table expression (WITH)");
    QueryAst q = query();
    finish();
    return q;
  }

  CreateView create_view() {
    expect_keyword("create");
    if (peek().is_keyword("temp") || peek().is_keyword("temporary")) advance();
    expect_keyword("view");
    if (peek().is_keyword("if")) {
      advance();
      expect_keyword("not");
      expect_keyword("exists");
    }
    CreateView view;
    view.name = name("view name");
    if (peek().is_symbol(".")) unsupported("schema-qualified view name");
    if (peek().is_symbol("(")) unsupported("view column list");
    expect_keyword("as");
    if (peek().is_keyword("with")) unsupported("common table expression (WITH)");
    view.query = query();
    finish();
    return view;
  }

  Expr standalone_expression() {
    Expr e = expression();
    if (peek().kind != TokenKind::end) error("unexpected token '" + peek().text + "'");
    return e;
  }

 private:
  // ---- token helpers ------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    const auto i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }

  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void error(const std::string& message) const {
    const Token& t = peek();
    throw ParseError(message, t.offset, t.line, t.column);
  }

  [[noreturn]] static void unsupported(const std::string& construct) {
    throw UnsupportedError(construct);
  }

  static std::string describe(const Token& t) {
    return t.kind == TokenKind::end ? std::string("end of input") : "'" + t.text + "'";
  }

  bool accept_keyword(std::string_view word) {
    if (peek().is_keyword(word)) {
      advance();
      return true;
    }
    return false;
  }

  bool accept_symbol(std::string_view sym) {
    if (peek().is_symbol(sym)) {
      advance();
      return true;
    }
    return false;
  }

  void expect_keyword(std::string_view word) {
    if (!accept_keyword(word)) {
      error("expected '" + std::string(word) + "' but found " + describe(peek()));
    }
  }

  void expect_symbol(std::string_view sym) {
    if (!accept_symbol(sym)) {
      error("expected '" + std::string(sym) + "' but found " + describe(peek()));
    }
  }

  bool at_name() const {
    const Token& t = peek();
    return t.kind == TokenKind::quoted_identifier ||
           (t.kind == TokenKind::identifier && !is_reserved_word(t.text));
  }

  std::string name(const char* what) {
    if (!at_name()) error(std::string("expected ") + what + " but found " + describe(peek()));
    return advance().text;
  }

  void finish() {
    accept_symbol(";");
    if (peek().kind == TokenKind::end) return;
    const Token& t = peek();
    if (t.is_keyword("union") || t.is_keyword("intersect") || t.is_keyword("except")) {
      unsupported("set operation (" + to_lower(t.text) + ")");
    }
    error("unexpected token " + describe(t) + " after end of statement");
  }

  // ---- query --------------------------------------------------------------

  QueryAst query() {
    if (peek().is_keyword("values")) unsupported("VALUES clause");
    expect_keyword("select");
    QueryAst q;
    if (accept_keyword("distinct")) {
      q.distinct = true;
    } else {
      accept_keyword("all");
    }
    do {
      q.select_items.push_back(select_item());
    } while (accept_symbol(","));

    if (accept_keyword("from")) {
      q.from_item = table_ref();
      joins(q);
    }
    if (accept_keyword("where")) q.where_clause = expression();
    if (peek().is_keyword("group")) {
      advance();
      expect_keyword("by");
      do {
        q.group_by.push_back(expression());
      } while (accept_symbol(","));
    }
    if (accept_keyword("having")) q.having = expression();
    if (peek().is_keyword("window")) unsupported("window function (WINDOW clause)");
    if (peek().is_keyword("order")) {
      advance();
      expect_keyword("by");
      do {
        OrderItem item;
        item.expr = expression();
        if (peek().is_keyword("collate")) unsupported("COLLATE");
        if (accept_keyword("desc")) {
          item.direction = SortDirection::desc;
        } else {
          accept_keyword("asc");
        }
        if (peek().is_keyword("nulls")) unsupported("NULLS FIRST/LAST");
        q.order_by.push_back(std::move(item));
      } while (accept_symbol(","));
    }
    if (accept_keyword("limit")) {
      const auto first = limit_count();
      if (accept_symbol(",")) {
        if (!first) error("OFFSET must be non-negative");
        q.offset = first;
        q.limit = limit_count();
      } else {
        q.limit = first;
        if (accept_keyword("offset")) q.offset = count("OFFSET");
      }
    }
    check_scope(q);
    return q;
  }

  // A negative LIMIT means "no limit" in SQLite.
  std::optional<std::uint64_t> limit_count() {
    if (accept_symbol("-")) {
      count("LIMIT");
      return std::nullopt;
    }
    return count("LIMIT");
  }

  std::uint64_t count(const char* clause) {
    const Token& t = peek();
    if (t.kind != TokenKind::integer) {
      error(std::string(clause) + " expects a non-negative integer but found " + describe(t));
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      error(std::string(clause) + " value out of range");
    }
    advance();
    return value;
  }

  SelectItem select_item() {
    SelectItem item;
    if (peek().is_symbol("*")) {
      advance();
      item.expr = Star{};
      return item;
    }
    if (at_name() && peek(1).is_symbol(".") && peek(2).is_symbol("*")) {
      Star star{advance().text};
      advance();
      advance();
      item.expr = std::move(star);
      return item;
    }
    item.expr = expression();
    if (accept_keyword("as")) {
      if (peek().kind == TokenKind::string) {
        item.alias = advance().text;
      } else {
        item.alias = name("column alias");
      }
    } else if (at_name()) {
      item.alias = advance().text;
    } else if (peek().kind == TokenKind::string) {
      item.alias = advance().text;
    }
    return item;
  }

  TableRef table_ref() {
    if (peek().is_symbol("(")) unsupported("derived table (subquery in FROM)");
    TableRef ref;
    ref.name = name("table name");
    if (peek().is_symbol(".")) unsupported("schema-qualified table name");
    if (peek().is_symbol("(")) unsupported("table-valued function");
    if (accept_keyword("as")) {
      ref.alias = name("table alias");
    } else if (at_name()) {
      ref.alias = advance().text;
    }
    if (peek().is_keyword("indexed")) unsupported("INDEXED BY");
    return ref;
  }

  void joins(QueryAst& q) {
    while (true) {
      const Token& t = peek();
      JoinType type;
      if (t.is_symbol(",")) {
        unsupported("comma join (implicit cross join)");
      } else if (t.is_keyword("join")) {
        advance();
        type = JoinType::inner;
      } else if (t.is_keyword("inner")) {
        advance();
        expect_keyword("join");
        type = JoinType::inner;
      } else if (t.is_keyword("left")) {
        advance();
        accept_keyword("outer");
        expect_keyword("join");
        type = JoinType::left;
      } else if (t.is_keyword("right") || t.is_keyword("full") || t.is_keyword("cross") ||
                 t.is_keyword("natural")) {
        unsupported(to_lower(t.text) + " join");
      } else {
        return;
      }
      JoinClause join;
      join.join_type = type;
      join.relation = table_ref();
      if (peek().is_keyword("using")) unsupported("join USING clause");
      if (!accept_keyword("on")) {
        error("join on '" + join.relation.name + "' requires an ON condition");
      }
      join.on_condition = expression();
      if (!is_equality_chain(join.on_condition)) unsupported("non-equality join condition");
      q.joins.push_back(std::move(join));
    }
  }

  void check_scope(const QueryAst& q) const {
    if (!q.from_item) return;
    CiSet seen;
    seen.insert(q.from_item->exposed_name());
    for (const auto& j : q.joins) {
      if (!seen.insert(j.relation.exposed_name()).second) {
        throw ValidationError("duplicate relation name or alias '" + j.relation.exposed_name() +
                              "' in FROM clause");
      }
    }
  }

  // ---- expressions --------------------------------------------------------

  Expr expression() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (accept_keyword("or")) lhs = binary(BinaryOp::logical_or, std::move(lhs), and_expr());
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = not_expr();
    while (accept_keyword("and")) lhs = binary(BinaryOp::logical_and, std::move(lhs), not_expr());
    return lhs;
  }

  Expr not_expr() {
    if (peek().is_keyword("not")) {
      if (peek(1).is_keyword("exists")) {
        advance();
        advance();
        return Exists{Box<QueryAst>(subquery_body()), true};
      }
      advance();
      return Unary{UnaryOp::logical_not, Box<Expr>(not_expr())};
    }
    return equality();
  }

  Expr equality() {
    Expr lhs = comparison();
    while (true) {
      const Token& t = peek();
      if (t.is_symbol("=") || t.is_symbol("==")) {
        advance();
        lhs = binary(BinaryOp::eq, std::move(lhs), comparison());
      } else if (t.is_symbol("!=") || t.is_symbol("<>")) {
        advance();
        lhs = binary(BinaryOp::ne, std::move(lhs), comparison());
      } else if (t.is_keyword("is")) {
        advance();
        const bool negated = accept_keyword("not");
        if (accept_keyword("null")) {
          lhs = IsNull{Box<Expr>(std::move(lhs)), negated};
        } else {
          if (peek().is_keyword("distinct")) unsupported("IS DISTINCT FROM");
          lhs = binary(negated ? BinaryOp::is_not : BinaryOp::is, std::move(lhs), comparison());
        }
      } else if (t.is_keyword("isnull")) {
        advance();
        lhs = IsNull{Box<Expr>(std::move(lhs)), false};
      } else if (t.is_keyword("notnull")) {
        advance();
        lhs = IsNull{Box<Expr>(std::move(lhs)), true};
      } else if (t.is_keyword("not") &&
                 (peek(1).is_keyword("like") || peek(1).is_keyword("glob") ||
                  peek(1).is_keyword("in") || peek(1).is_keyword("between") ||
                  peek(1).is_keyword("null"))) {
        advance();
        lhs = postfix(std::move(lhs), true);
      } else if (t.is_keyword("like") || t.is_keyword("glob") || t.is_keyword("in") ||
                 t.is_keyword("between")) {
        lhs = postfix(std::move(lhs), false);
      } else if (t.is_keyword("regexp") || t.is_keyword("match")) {
        unsupported(to_lower(t.text) + " operator");
      } else {
        return lhs;
      }
    }
  }

  Expr postfix(Expr lhs, bool negated) {
    if (accept_keyword("null")) return IsNull{Box<Expr>(std::move(lhs)), true};  // NOT NULL
    if (accept_keyword("like")) {
      Expr pattern = comparison();
      if (peek().is_keyword("escape")) unsupported("LIKE ... ESCAPE");
      return binary(negated ? BinaryOp::not_like : BinaryOp::like, std::move(lhs), std::move(pattern));
    }
    if (accept_keyword("glob")) {
      if (negated) unsupported("NOT GLOB");
      return binary(BinaryOp::glob, std::move(lhs), comparison());
    }
    if (accept_keyword("between")) {
      Between b;
      b.operand = Box<Expr>(std::move(lhs));
      b.low = Box<Expr>(comparison());
      expect_keyword("and");
      b.high = Box<Expr>(comparison());
      b.negated = negated;
      return b;
    }
    expect_keyword("in");
    expect_symbol("(");
    if (peek().is_keyword("select")) {
      InSubquery in;
      in.operand = Box<Expr>(std::move(lhs));
      in.query = Box<QueryAst>(query());
      in.negated = negated;
      expect_symbol(")");
      return in;
    }
    InList in;
    in.operand = Box<Expr>(std::move(lhs));
    in.negated = negated;
    if (!peek().is_symbol(")")) {
      do {
        in.items.push_back(expression());
      } while (accept_symbol(","));
    }
    expect_symbol(")");
    return in;
  }

  Expr comparison() {
    Expr lhs = additive();
    while (true) {
      const Token& t = peek();
      BinaryOp op;
      if (t.is_symbol("<")) {
        op = BinaryOp::lt;
      } else if (t.is_symbol("<=")) {
        op = BinaryOp::le;
      } else if (t.is_symbol(">")) {
        op = BinaryOp::gt;
      } else if (t.is_symbol(">=")) {
        op = BinaryOp::ge;
      } else {
        return lhs;
      }
      advance();
      lhs = binary(op, std::move(lhs), additive());
    }
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (true) {
      if (accept_symbol("+")) {
        lhs = binary(BinaryOp::add, std::move(lhs), multiplicative());
      } else if (accept_symbol("-")) {
        lhs = binary(BinaryOp::sub, std::move(lhs), multiplicative());
      } else {
        return lhs;
      }
    }
  }

  Expr multiplicative() {
    Expr lhs = concat();
    while (true) {
      if (accept_symbol("*")) {
        lhs = binary(BinaryOp::mul, std::move(lhs), concat());
      } else if (accept_symbol("/")) {
        lhs = binary(BinaryOp::div, std::move(lhs), concat());
      } else if (accept_symbol("%")) {
        lhs = binary(BinaryOp::mod, std::move(lhs), concat());
      } else {
        return lhs;
      }
    }
  }

  Expr concat() {
    Expr lhs = unary();
    while (accept_symbol("||")) lhs = binary(BinaryOp::concat, std::move(lhs), unary());
    return lhs;
  }

  Expr unary() {
    if (accept_symbol("-")) return Unary{UnaryOp::negate, Box<Expr>(unary())};
    if (accept_symbol("+")) return Unary{UnaryOp::plus, Box<Expr>(unary())};
    Expr e = primary();
    if (peek().is_keyword("collate")) unsupported("COLLATE");
    return e;
  }

  QueryAst subquery_body() {
    expect_symbol("(");
    if (peek().is_keyword("with")) unsupported("common table expression (WITH)");
    QueryAst q = query();
    if (peek().is_keyword("union") || peek().is_keyword("intersect") || peek().is_keyword("except")) {
      unsupported("set operation (" + to_lower(peek().text) + ")");
    }
    expect_symbol(")");
    return q;
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::integer:
        return Literal{Literal::Kind::integer, advance().text};
      case TokenKind::real:
        return Literal{Literal::Kind::real, advance().text};
      case TokenKind::string:
        return Literal{Literal::Kind::string, advance().text};
      case TokenKind::end:
        error("unexpected end of input in expression");
      default:
        break;
    }
    if (t.is_symbol("(")) {
      if (peek(1).is_keyword("select")) return ScalarSubquery{Box<QueryAst>(subquery_body())};
      advance();
      Expr inner = expression();
      if (peek().is_symbol(",")) unsupported("row value");
      expect_symbol(")");
      return inner;
    }
    if (t.is_keyword("null")) {
      advance();
      return Literal{Literal::Kind::null, "null"};
    }
    if (t.is_keyword("true") || t.is_keyword("false")) {
      return Literal{Literal::Kind::boolean, to_lower(advance().text)};
    }
    if (t.is_keyword("exists")) {
      advance();
      return Exists{Box<QueryAst>(subquery_body()), false};
    }
    if (t.is_keyword("case")) return case_expr();
    if (t.is_keyword("cast")) return cast_expr();
    if (t.is_keyword("select")) error("subquery must be parenthesized");
    if (t.kind == TokenKind::symbol && t.text == "*") error("unexpected '*' in expression");

    if (t.is_name() && peek(1).is_symbol("(") &&
        (t.kind == TokenKind::identifier ? !is_reserved_word(t.text) || t.is_keyword("like") ||
                                               t.is_keyword("glob")
                                         : true)) {
      return function_call();
    }
    if (!at_name()) error("unexpected token " + describe(t) + " in expression");
    std::string first = advance().text;
    if (accept_symbol(".")) {
      if (peek().is_symbol("*")) error("'*' is only allowed in the select list");
      std::string col = name("column name");
      if (peek().is_symbol(".")) unsupported("schema-qualified column reference");
      return ColumnRef{std::move(first), std::move(col)};
    }
    return ColumnRef{"", std::move(first)};
  }

  Expr function_call() {
    FunctionCall call;
    call.name = to_lower(advance().text);
    expect_symbol("(");
    if (accept_symbol("*")) {
      call.star = true;
    } else if (!peek().is_symbol(")")) {
      if (accept_keyword("distinct")) call.distinct = true;
      do {
        call.args.push_back(expression());
      } while (accept_symbol(","));
    }
    if (peek().is_keyword("order")) unsupported("ordered aggregate arguments");
    expect_symbol(")");
    if (peek().is_keyword("filter")) unsupported("aggregate FILTER clause");
    if (peek().is_keyword("over")) unsupported("window function");
    return call;
  }

  Expr case_expr() {
    expect_keyword("case");
    Case c;
    if (!peek().is_keyword("when")) c.subject = Box<Expr>(expression());
    while (accept_keyword("when")) {
      WhenClause w;
      w.condition = expression();
      expect_keyword("then");
      w.result = expression();
      c.whens.push_back(std::move(w));
    }
    if (c.whens.empty()) error("CASE requires at least one WHEN");
    if (accept_keyword("else")) c.otherwise = Box<Expr>(expression());
    expect_keyword("end");
    return c;
  }

  Expr cast_expr() {
    expect_keyword("cast");
    expect_symbol("(");
    Cast c;
    c.operand = Box<Expr>(expression());
    expect_keyword("as");
    std::vector<std::string> words;
    while (peek().kind == TokenKind::identifier && !peek().is_keyword("as")) {
      words.push_back(to_lower(advance().text));
    }
    if (words.empty()) error("CAST requires a type name");
    c.type_name = join(words, " ");
    if (accept_symbol("(")) {
      c.type_name += "(";
      c.type_name += advance().text;
      while (accept_symbol(",")) c.type_name += "," + advance().text;
      expect_symbol(")");
      c.type_name += ")";
    }
    expect_symbol(")");
    return c;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void validate_expr(const Expr& e);

void validate_query(const QueryAst& q) {
  if (q.select_items.empty()) throw ValidationError("select list is empty");
  if (q.from_item) {
    CiSet seen;
    seen.insert(q.from_item->exposed_name());
    for (const auto& j : q.joins) {
      if (!seen.insert(j.relation.exposed_name()).second) {
        throw ValidationError("duplicate relation name or alias '" + j.relation.exposed_name() +
                              "' in FROM clause");
      }
    }
  } else if (!q.joins.empty()) {
    throw ValidationError("JOIN without FROM");
  }
  for (const auto& j : q.joins) {
    if (!is_equality_chain(j.on_condition)) {
      throw ValidationError("join on '" + j.relation.exposed_name() +
                            "' must have an equality ON condition");
    }
    validate_expr(j.on_condition);
  }
  for (const auto& item : q.select_items) validate_expr(item.expr);
  if (q.where_clause) validate_expr(*q.where_clause);
  for (const auto& g : q.group_by) validate_expr(g);
  if (q.having) validate_expr(*q.having);
  for (const auto& o : q.order_by) validate_expr(o.expr);
}

void validate_expr(const Expr& e) {
  std::visit(
      [](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Unary>) {
          validate_expr(*n.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          validate_expr(*n.lhs);
          validate_expr(*n.rhs);
        } else if constexpr (std::is_same_v<T, Between>) {
          validate_expr(*n.operand);
          validate_expr(*n.low);
          validate_expr(*n.high);
        } else if constexpr (std::is_same_v<T, InList>) {
          validate_expr(*n.operand);
          for (const auto& i : n.items) validate_expr(i);
        } else if constexpr (std::is_same_v<T, InSubquery>) {
          validate_expr(*n.operand);
          validate_query(*n.query);
        } else if constexpr (std::is_same_v<T, IsNull>) {
          validate_expr(*n.operand);
        } else if constexpr (std::is_same_v<T, FunctionCall>) {
          for (const auto& a : n.args) validate_expr(a);
        } else if constexpr (std::is_same_v<T, Cast>) {
          validate_expr(*n.operand);
        } else if constexpr (std::is_same_v<T, Case>) {
          if (n.subject) validate_expr(*n.subject);
          for (const auto& w : n.whens) {
            validate_expr(w.condition);
            validate_expr(w.result);
          }
          if (n.otherwise) validate_expr(*n.otherwise);
        } else if constexpr (std::is_same_v<T, ScalarSubquery> || std::is_same_v<T, Exists>) {
          validate_query(*n.query);
        }
      },
      e.node);
}

}  // namespace

Dialect parse_dialect(std::string_view tag) {
  if (iequals(tag, "sqlite")) return Dialect::sqlite;
  throw ConfigError("unknown SQL dialect '" + std::string(tag) + "' (supported: sqlite)");
}

QueryAst parse(std::string_view sql, Dialect) { return Parser(sql).statement(); }

CreateView parse_create_view(std::string_view sql, Dialect) { return Parser(sql).create_view(); }

Expr parse_expression(std::string_view sql, Dialect) { return Parser(sql).standalone_expression(); }

bool is_equality_chain(const Expr& on) {
  const auto* b = on.as<Binary>();
  if (!b) return false;
  if (b->op == BinaryOp::logical_and) return is_equality_chain(*b->lhs) && is_equality_chain(*b->rhs);
  return b->op == BinaryOp::eq;
}

void validate(const QueryAst& ast) { validate_query(ast); }

std::vector<std::string> split_statements(std::string_view script) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    auto s = trim(current);
    if (!s.empty()) out.push_back(std::move(s));
    current.clear();
  };
  for (std::size_t i = 0; i < script.size(); ++i) {
    const char c = script[i];
    if (c == '\'' || c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : c;
      current += c;
      ++i;
      while (i < script.size()) {
        current += script[i];
        if (script[i] == close) {
          if (close != ']' && i + 1 < script.size() && script[i + 1] == close) {
            current += script[++i];
          } else {
            break;
          }
        }
        ++i;
      }
    } else if (c == '-' && i + 1 < script.size() && script[i + 1] == '-') {
      while (i < script.size() && script[i] != '\n') ++i;
      current += '\n';
    } else if (c == '/' && i + 1 < script.size() && script[i + 1] == '*') {
      const auto end = script.find("*/", i + 2);
      i = end == std::string_view::npos ? script.size() : end + 1;
      current += ' ';
    } else if (c == ';') {
      flush();
    } else {
      current += c;
    }
  }
  flush();
  return out;
}

}  // namespace vsql::sql
