#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sqlrefine/tokenizer.hpp"

namespace sqlrefine {

struct SamplingParams {
  double temperature = 0.1;
  double top_p = 1.0;
  int max_tokens = 32168;
};

enum class AgentRole { selector, generator, verifier, critiquer, refiner, evaluator };

std::string_view to_string(AgentRole role);
AgentRole parse_agent_role(std::string_view name);

/// The four prompt segments, in the only order they are ever concatenated.
/// Schema and few-shot examples come first so that prompts sharing them
/// share a token prefix; the varying instruction and feedback go last.
struct PromptParts {
  std::string schema_text;
  std::string few_shot_block;
  std::string instruction_block;
  std::string feedback_block;
};

struct AssembledPrompt {
  std::string text;
  std::vector<TokenId> tokens;
};

/// Joins the non-empty parts in fixed order, each terminated by a newline so
/// adjacent parts never merge into one token. Throws OversizeError when the
/// result exceeds max_context_tokens.
AssembledPrompt assemble(const PromptParts& parts, const Tokenizer& tokenizer,
                         std::size_t max_context_tokens = 32168);

/// Token length of the prefix of assemble(parts) that stays invariant while
/// instruction and feedback vary: the schema and few-shot segments.
std::size_t invariant_prefix_tokens(const PromptParts& parts, const Tokenizer& tokenizer);

/// Server-side (or simulated) state covering a token prefix of a prompt.
/// A session can be narrowed to a shorter prefix of itself.
class PrefillSession {
 public:
  virtual ~PrefillSession() = default;
  virtual std::size_t covered_tokens() const = 0;
  virtual std::shared_ptr<const PrefillSession> slice(std::size_t prefix_len) const = 0;
  /// True when this session covers exactly the first covered_tokens() of the
  /// given prompt token sequence.
  virtual bool matches_prefix(const std::vector<TokenId>& prompt_tokens) const = 0;
};

using SessionHandle = std::shared_ptr<const PrefillSession>;

/// In-process session: remembers the token ids it covers.
class TokenPrefillSession final : public PrefillSession {
 public:
  TokenPrefillSession(std::shared_ptr<const std::vector<TokenId>> tokens,
                      std::size_t covered);
  static SessionHandle over(const std::vector<TokenId>& tokens);

  std::size_t covered_tokens() const override { return covered_; }
  std::shared_ptr<const PrefillSession> slice(std::size_t prefix_len) const override;
  bool matches_prefix(const std::vector<TokenId>& prompt_tokens) const override;

 private:
  std::shared_ptr<const std::vector<TokenId>> tokens_;
  std::size_t covered_;
};

struct Completion {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  /// Prompt tokens actually prefilled for this call. Equals prompt_tokens
  /// unless a session restored a prefix.
  std::int64_t prefill_tokens_computed = 0;
  /// Session covering the full prompt, when the backend can restore state.
  SessionHandle session;
};

class ModelEndpoint {
 public:
  virtual ~ModelEndpoint() = default;

  /// session, when non-null, must cover a prefix of this prompt.
  virtual Completion complete(const AssembledPrompt& prompt, const SamplingParams& params,
                              AgentRole role, const SessionHandle& session) = 0;

  /// Whether complete() honours sessions and returns them.
  virtual bool supports_sessions() const = 0;
};

}  // namespace sqlrefine
