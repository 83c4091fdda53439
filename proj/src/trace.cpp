#include "sqlrefine/trace.hpp"

#include <cstdio>
#include <fstream>

#include "sqlrefine/errors.hpp"

namespace sqlrefine {

std::string text_fingerprint(const std::string& text) {
  std::uint64_t h = WordTokenizer::token_id(text);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void TraceSink::emit(nlohmann::ordered_json record) {
  nlohmann::ordered_json line;
  line["seq"] = seq_++;
  for (auto& [key, value] : record.items()) line[key] = value;
  lines_.push_back(line.dump());
}

void TraceSink::note_exchange(AgentRole role, int attempt, const AssembledPrompt& prompt,
                              const Completion& completion) {
  prompt_tokens_ += completion.prompt_tokens;
  completion_tokens_ += completion.completion_tokens;
  prefill_tokens_ += completion.prefill_tokens_computed;
  emit({{"type", "agent_exchange"},
        {"role", std::string(to_string(role))},
        {"attempt", attempt},
        {"prompt_hash", text_fingerprint(prompt.text)},
        {"prompt_tokens", completion.prompt_tokens},
        {"completion_tokens", completion.completion_tokens},
        {"prefill_tokens_computed", completion.prefill_tokens_computed},
        {"response", completion.text}});
}

std::string TraceSink::joined() const {
  std::string out;
  for (const auto& line : lines_) {
    out += line;
    out += '\n';
  }
  return out;
}

void TraceSink::write_to(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace '" + path + "'");
  out << joined();
}

}  // namespace sqlrefine
