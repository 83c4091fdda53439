#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace sqlrefine {

using TokenId = std::uint64_t;

/// Token counting and identity for prompt accounting and the prefix cache.
/// Implementations must be deterministic: the same text always yields the
/// same token id sequence, across calls and across processes.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::vector<TokenId> encode(std::string_view text) const = 0;

  std::size_t count(std::string_view text) const { return encode(text).size(); }
};

/// Splits text into maximal runs of [A-Za-z0-9_] plus single-byte symbol
/// tokens; whitespace only separates. Ids are 64-bit FNV-1a hashes of the
/// token bytes, so no vocabulary registry is needed and ids are stable.
class WordTokenizer final : public Tokenizer {
 public:
  std::vector<TokenId> encode(std::string_view text) const override;

  static TokenId token_id(std::string_view token);
};

}  // namespace sqlrefine
