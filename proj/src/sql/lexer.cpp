#include "vsql/sql/lexer.hpp"

#include <array>
#include <cctype>

#include "vsql/error.hpp"
#include "vsql/identifiers.hpp"

namespace vsql::sql {

namespace {

constexpr std::array kReserved = {
    "select", "from",   "where",  "group",  "by",        "having", "order",   "limit",
    "offset", "join",   "inner",  "left",   "right",     "full",   "outer",   "cross",
    "natural", "on",    "using",  "as",     "and",       "or",     "not",     "in",
    "is",     "null",   "like",   "glob",   "between",   "case",   "when",    "then",
    "else",   "end",    "distinct", "all",  "exists",    "union",  "intersect", "except",
    "with",   "asc",    "desc",   "cast",   "over",      "create", "view",    "table",
    "escape", "window", "values", "into",   "collate",
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_char(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '$';
}

class Lexer {
 public:
  explicit Lexer(std::string_view sql) : sql_(sql) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (true) {
      skip_trivia();
      if (pos_ >= sql_.size()) break;
      tokens.push_back(next());
    }
    Token end;
    end.kind = TokenKind::end;
    end.offset = pos_;
    end.line = line_;
    end.column = column_;
    tokens.push_back(end);
    return tokens;
  }

 private:
  [[noreturn]] void fail(const std::string& message, std::size_t offset, std::size_t line,
                         std::size_t column) const {
    throw ParseError(message, offset, line, column);
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < sql_.size() ? sql_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (sql_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < sql_.size()) {
      const char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '-' && peek(1) == '-') {
        while (pos_ < sql_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        const auto offset = pos_;
        const auto line = line_;
        const auto column = column_;
        advance();
        advance();
        while (pos_ < sql_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        if (pos_ >= sql_.size()) fail("unterminated comment", offset, line, column);
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  Token start(TokenKind kind) const {
    Token t;
    t.kind = kind;
    t.offset = pos_;
    t.line = line_;
    t.column = column_;
    return t;
  }

  // Reads a run delimited by `close`, where a doubled `close` is an escape.
  std::string delimited(char close, Token& t, const char* what) {
    advance();  // opening delimiter
    std::string value;
    while (true) {
      if (pos_ >= sql_.size()) fail(std::string("unterminated ") + what, t.offset, t.line, t.column);
      const char c = peek();
      if (c == close) {
        if (peek(1) == close && close != ']') {
          value += close;
          advance();
          advance();
          continue;
        }
        advance();
        break;
      }
      value += c;
      advance();
    }
    return value;
  }

  Token next() {
    const char c = peek();
    if (c == '\'') {
      Token t = start(TokenKind::string);
      t.text = delimited('\'', t, "string literal");
      return t;
    }
    if (c == '`' || c == '"' || c == '[') {
      Token t = start(TokenKind::quoted_identifier);
      t.text = delimited(c == '[' ? ']' : c, t, "quoted identifier");
      if (t.text.empty()) fail("empty quoted identifier", t.offset, t.line, t.column);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return number();
    }
    if (is_ident_start(c)) {
      Token t = start(TokenKind::identifier);
      while (pos_ < sql_.size() && is_ident_char(peek())) {
        t.text += peek();
        advance();
      }
      return t;
    }
    return symbol();
  }

  Token number() {
    Token t = start(TokenKind::integer);
    auto digits = [&] {
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        t.text += peek();
        advance();
      }
    };
    digits();
    if (peek() == '.') {
      t.kind = TokenKind::real;
      t.text += '.';
      advance();
      digits();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      t.kind = TokenKind::real;
      t.text += peek();
      advance();
      if (peek() == '+' || peek() == '-') {
        t.text += peek();
        advance();
      }
      digits();
    }
    if (is_ident_start(peek())) fail("malformed number", t.offset, t.line, t.column);
    return t;
  }

  Token symbol() {
    static constexpr std::array kTwoChar = {"<=", ">=", "<>", "!=", "==", "||"};
    Token t = start(TokenKind::symbol);
    for (const char* two : kTwoChar) {
      if (peek() == two[0] && peek(1) == two[1]) {
        t.text = two;
        advance();
        advance();
        return t;
      }
    }
    const char c = peek();
    static constexpr std::string_view kSingle = "(),.;*+-/%<>=";
    if (kSingle.find(c) == std::string_view::npos) {
      fail(std::string("unexpected character '") + c + "'", t.offset, t.line, t.column);
    }
    t.text = std::string(1, c);
    advance();
    return t;
  }

  std::string_view sql_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace

bool Token::is_keyword(std::string_view word) const {
  return kind == TokenKind::identifier && iequals(text, word);
}

bool is_reserved_word(std::string_view word) {
  for (const char* r : kReserved) {
    if (iequals(word, r)) return true;
  }
  return false;
}

std::vector<Token> tokenize(std::string_view sql) { return Lexer(sql).run(); }

}  // namespace vsql::sql
