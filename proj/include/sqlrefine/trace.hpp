#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlrefine/model.hpp"

namespace sqlrefine {

/// Collects one question's trace as JSONL records plus token totals. Key
/// order inside a record is fixed, so a scripted run reproduces the trace
/// byte for byte. Not thread safe; use one sink per question.
class TraceSink {
 public:
  /// Appends a record, injecting a monotonically increasing "seq" field.
  void emit(nlohmann::ordered_json record);

  /// Standard record for one endpoint call. The prompt itself is logged as
  /// a 64-bit fingerprint and token count, the response in full.
  void note_exchange(AgentRole role, int attempt, const AssembledPrompt& prompt,
                     const Completion& completion);

  const std::vector<std::string>& lines() const { return lines_; }
  std::string joined() const;
  void write_to(const std::string& path) const;

  std::int64_t prompt_tokens() const { return prompt_tokens_; }
  std::int64_t completion_tokens() const { return completion_tokens_; }
  std::int64_t prefill_tokens_computed() const { return prefill_tokens_; }

 private:
  std::vector<std::string> lines_;
  int seq_ = 0;
  std::int64_t prompt_tokens_ = 0;
  std::int64_t completion_tokens_ = 0;
  std::int64_t prefill_tokens_ = 0;
};

/// Fingerprint used for prompts in traces.
std::string text_fingerprint(const std::string& text);

}  // namespace sqlrefine
