#include "sqlrefine/tokenizer.hpp"

#include <cctype>

namespace sqlrefine {

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_';
}

bool is_space_byte(unsigned char c) {
  return std::isspace(c) != 0;
}

}  // namespace

TokenId WordTokenizer::token_id(std::string_view token) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<TokenId> WordTokenizer::encode(std::string_view text) const {
  std::vector<TokenId> out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_space_byte(c)) {
      ++i;
      continue;
    }
    if (is_word_byte(c)) {
      std::size_t start = i;
      while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back(token_id(text.substr(start, i - start)));
    } else {
      out.push_back(token_id(text.substr(i, 1)));
      ++i;
    }
  }
  return out;
}

}  // namespace sqlrefine
