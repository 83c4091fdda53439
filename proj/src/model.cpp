#include "sqlrefine/model.hpp"

#include <algorithm>

#include "sqlrefine/errors.hpp"

namespace sqlrefine {

std::string_view to_string(AgentRole role) {
  switch (role) {
    case AgentRole::selector: return "selector";
    case AgentRole::generator: return "generator";
    case AgentRole::verifier: return "verifier";
    case AgentRole::critiquer: return "critiquer";
    case AgentRole::refiner: return "refiner";
    case AgentRole::evaluator: return "evaluator";
  }
  return "unknown";
}

AgentRole parse_agent_role(std::string_view name) {
  for (AgentRole role : {AgentRole::selector, AgentRole::generator, AgentRole::verifier,
                         AgentRole::critiquer, AgentRole::refiner, AgentRole::evaluator}) {
    if (name == to_string(role)) return role;
  }
  throw ConfigError("unknown agent role '" + std::string(name) + "'");
}

AssembledPrompt assemble(const PromptParts& parts, const Tokenizer& tokenizer,
                         std::size_t max_context_tokens) {
  AssembledPrompt prompt;
  for (const std::string* part : {&parts.schema_text, &parts.few_shot_block,
                                  &parts.instruction_block, &parts.feedback_block}) {
    if (part->empty()) continue;
    prompt.text += *part;
    prompt.text += '\n';
  }
  prompt.tokens = tokenizer.encode(prompt.text);
  if (prompt.tokens.size() > max_context_tokens) {
    throw OversizeError("prompt is " + std::to_string(prompt.tokens.size()) +
                        " tokens, context budget is " + std::to_string(max_context_tokens));
  }
  return prompt;
}

std::size_t invariant_prefix_tokens(const PromptParts& parts, const Tokenizer& tokenizer) {
  PromptParts invariant;
  invariant.schema_text = parts.schema_text;
  invariant.few_shot_block = parts.few_shot_block;
  std::string text;
  for (const std::string* part : {&invariant.schema_text, &invariant.few_shot_block}) {
    if (part->empty()) continue;
    text += *part;
    text += '\n';
  }
  return tokenizer.count(text);
}

TokenPrefillSession::TokenPrefillSession(std::shared_ptr<const std::vector<TokenId>> tokens,
                                         std::size_t covered)
    : tokens_(std::move(tokens)), covered_(covered) {
  if (!tokens_ || covered_ > tokens_->size()) {
    throw Error("prefill session covers more tokens than it holds");
  }
}

SessionHandle TokenPrefillSession::over(const std::vector<TokenId>& tokens) {
  auto copy = std::make_shared<const std::vector<TokenId>>(tokens);
  return std::make_shared<TokenPrefillSession>(copy, copy->size());
}

std::shared_ptr<const PrefillSession> TokenPrefillSession::slice(std::size_t prefix_len) const {
  if (prefix_len > covered_) {
    throw Error("cannot widen a prefill session");
  }
  return std::make_shared<TokenPrefillSession>(tokens_, prefix_len);
}

bool TokenPrefillSession::matches_prefix(const std::vector<TokenId>& prompt_tokens) const {
  if (covered_ > prompt_tokens.size()) return false;
  return std::equal(tokens_->begin(), tokens_->begin() + static_cast<std::ptrdiff_t>(covered_),
                    prompt_tokens.begin());
}

}  // namespace sqlrefine
