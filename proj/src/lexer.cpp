#include "lexer.hpp"

#include <array>
#include <cctype>

namespace locelim::detail {

std::vector<Token> tokenize(std::string_view text) {
  static constexpr std::array<std::string_view, 7> kTwo = {"..", "->", "<=", ">=", "!=", "=>", "<>"};
  static constexpr std::string_view kOne = "()[]{};:,'=<>!&|+-*/?";
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (text.substr(i, 2) == "//") {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (text.substr(i, 2) == "/*") {
      std::size_t l0 = line, c0 = col;
      advance(2);
      while (i < text.size() && text.substr(i, 2) != "*/") advance(1);
      if (i >= text.size()) throw SyntaxError(l0, c0, "unterminated comment");
      advance(2);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      t.kind = Token::Kind::Ident;
      t.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      t.kind = Token::Kind::Int;
      if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        t.kind = Token::Kind::Decimal;
      }
      t.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"' && text[j] != '\n') ++j;
      if (j >= text.size() || text[j] != '"') throw SyntaxError(line, col, "unterminated string");
      t.kind = Token::Kind::String;
      t.text = std::string(text.substr(i + 1, j - i - 1));
      advance(j - i + 1);
    } else {
      t.kind = Token::Kind::Sym;
      for (auto two : kTwo)
        if (text.substr(i, 2) == two) t.text = std::string(two);
      if (t.text.empty()) {
        if (kOne.find(c) == std::string_view::npos)
          throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

}  // namespace locelim::detail
