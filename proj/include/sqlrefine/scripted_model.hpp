#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sqlrefine/model.hpp"

namespace sqlrefine {

/// One scripted response rule. A rule fires when the role matches and either
/// the per-role call index equals `index` or the prompt text contains
/// `contains`. Rules holding several responses hand them out one per match
/// and keep repeating the last one.
struct ScriptRule {
  AgentRole role;
  std::optional<std::string> contains;
  std::optional<std::int64_t> index;
  std::vector<std::string> responses;
};

/// Deterministic in-process endpoint driven entirely by rules. Index rules
/// are checked before contains rules; contains rules fire in registration
/// order. A request no rule matches throws ScriptError. Responses never
/// depend on whether a session was passed, only accounting does.
class ScriptedModel final : public ModelEndpoint {
 public:
  explicit ScriptedModel(std::vector<ScriptRule> rules);

  /// Rules from a JSON array: [{"role": "generator", "contains": "...",
  /// "response": "..."}, {"role": "refiner", "index": 0, "responses":
  /// ["...", "..."]}]
  static std::vector<ScriptRule> load_rules(const std::string& json_path);
  static std::vector<ScriptRule> parse_rules(const std::string& json_text);

  Completion complete(const AssembledPrompt& prompt, const SamplingParams& params,
                      AgentRole role, const SessionHandle& session) override;
  bool supports_sessions() const override { return true; }

  std::int64_t calls(AgentRole role) const;
  std::int64_t total_calls() const;

 private:
  struct RuleState {
    ScriptRule rule;
    std::size_t next_response = 0;
  };

  const std::string* match_locked(AgentRole role, std::int64_t call_index,
                                  const std::string& prompt_text);

  mutable std::mutex mu_;
  std::vector<RuleState> rules_;
  std::map<AgentRole, std::int64_t> calls_by_role_;
  WordTokenizer tokenizer_;
};

}  // namespace sqlrefine
