#pragma once

#include <string>

#include "sqlrefine/prefix_cache.hpp"
#include "sqlrefine/result.hpp"
#include "sqlrefine/schema.hpp"
#include "sqlrefine/templates.hpp"
#include "sqlrefine/trace.hpp"

namespace sqlrefine {

/// Everything an agent prompt needs about the question at hand. desc_str and
/// fk_str are pre-rendered (full schema for the selector, pruned for the
/// rest).
struct QuestionContext {
  std::string db_id;
  std::string desc_str;
  std::string fk_str;
  std::string query;
  std::string evidence;
};

struct SelectorDecision {
  SchemaSubset subset;
  bool used_fallback = false;  // parsing failed twice, full schema substituted
};

struct GenerationResult {
  std::string sql;
  std::string rationale;  // prose around the statement, possibly empty
};

struct Verdict {
  bool accepted = false;
  std::string explanation;
};

struct RewardScore {
  int value = 0;
  bool fallback_used = false;  // parsing failed twice, floor value substituted
};

/// Rewards live in [-95, 95]; parse fallback pins to the floor.
constexpr int kRewardFloor = -95;
constexpr int kRewardCeiling = 95;

// Model output parsers, pure and independently testable.

/// Strict JSON object mapping kept tables to "keep_all" (or "keep-all") or a
/// column list, validated against the schema and the pruning rules: known
/// names only, at least 3 tables when the schema has 3, explicit lists only
/// for tables wider than 10 columns and at most 6 names long.
Result<SchemaSubset> parse_selector_json(const std::string& text,
                                         const DatabaseSchema& schema);

/// Pulls one SQL statement out of a model response: a ```sql fence, a bare
/// fence opening with SELECT/WITH, or the first word-boundary SELECT/WITH
/// run to end of text. Text before the statement becomes the rationale.
Result<GenerationResult> extract_sql(const std::string& text);

/// Leading YES or NO (case-insensitive, markdown decoration ignored), rest
/// is the explanation.
Result<Verdict> parse_verdict(const std::string& text);

/// First integer in the text, clamped to [-95, 95].
Result<int> parse_reward(const std::string& text);

/// The six prompt-driven operations. Each assembles its prompt from the
/// role's template, runs it through the cached runner and parses the
/// response. The selector and evaluator reprompt once with the parse error
/// appended before falling back; the other roles surface parse failures to
/// the caller.
class Agents {
 public:
  Agents(const AgentTemplates& templates, CachedRunner& runner, SamplingParams sampling,
         TraceSink* trace = nullptr);

  SelectorDecision select_schema(const QuestionContext& ctx, const DatabaseSchema& schema);
  Result<GenerationResult> generate_sql(const QuestionContext& ctx);
  Result<Verdict> verify(const QuestionContext& ctx, const std::string& sql);
  Result<std::string> critique(const QuestionContext& ctx, const std::string& sql,
                               const std::string& sql_error);
  Result<GenerationResult> refine(const QuestionContext& ctx, const std::string& sql,
                                  const std::string& sql_error, const std::string& critique);
  RewardScore evaluate(const QuestionContext& ctx, const std::string& sql,
                       const std::string& sql_error);

 private:
  std::map<std::string, std::string> base_vars(const QuestionContext& ctx) const;
  Completion run_role(AgentRole role, const PromptParts& parts, int attempt);
  PromptParts reprompt_parts(PromptParts parts, const std::string& parse_error) const;

  const AgentTemplates& templates_;
  CachedRunner& runner_;
  SamplingParams sampling_;
  TraceSink* trace_;
};

}  // namespace sqlrefine
