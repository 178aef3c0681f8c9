#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vsql::sql {

enum class TokenKind {
  identifier,         // bare word (keywords included; see Token::is_keyword)
  quoted_identifier,  // `x`, "x" or [x]; text holds the unquoted name
  string,             // 'x'; text holds the unescaped value
  integer,
  real,
  symbol,             // operators and punctuation
  end,
};

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;
  std::size_t offset = 0;
  std::size_t line = 1;
  std::size_t column = 1;

  // Case-insensitive keyword test; quoted identifiers are never keywords.
  bool is_keyword(std::string_view word) const;
  bool is_symbol(std::string_view sym) const { return kind == TokenKind::symbol && text == sym; }
  bool is_name() const { return kind == TokenKind::identifier || kind == TokenKind::quoted_identifier; }
};

// Splits SQL text into tokens. Comments (`--` and `/* */`) are dropped.
// Throws ParseError on unterminated strings / quoted identifiers / comments
// and on characters outside the dialect.
std::vector<Token> tokenize(std::string_view sql);

// True for words the parser treats as reserved (cannot be a bare alias).
bool is_reserved_word(std::string_view word);

}  // namespace vsql::sql
