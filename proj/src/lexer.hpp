#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "locelim/error.hpp"

namespace locelim::detail {

struct Token {
  enum class Kind { Ident, Int, Decimal, String, Sym, End };
  Kind kind = Kind::End;
  std::string text;
  std::size_t line = 1;
  std::size_t col = 1;

  [[nodiscard]] bool is(std::string_view sym) const { return kind == Kind::Sym && text == sym; }
  [[nodiscard]] bool is_word(std::string_view w) const { return kind == Kind::Ident && text == w; }
};

// C-style comments are skipped. Throws SyntaxError on stray characters.
std::vector<Token> tokenize(std::string_view text);

}  // namespace locelim::detail
