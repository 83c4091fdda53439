#include "sqlrefine/scripted_model.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sqlrefine/errors.hpp"

namespace sqlrefine {

ScriptedModel::ScriptedModel(std::vector<ScriptRule> rules) {
  for (auto& rule : rules) {
    if (rule.responses.empty()) {
      throw ConfigError("scripted rule without responses");
    }
    if (!rule.contains && !rule.index) {
      throw ConfigError("scripted rule needs a 'contains' or 'index' condition");
    }
    rules_.push_back(RuleState{std::move(rule), 0});
  }
}

std::vector<ScriptRule> ScriptedModel::parse_rules(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad script JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ConfigError("script JSON must be an array of rules");
  std::vector<ScriptRule> rules;
  for (const auto& item : doc) {
    ScriptRule rule;
    rule.role = parse_agent_role(item.at("role").get<std::string>());
    if (item.contains("contains")) rule.contains = item.at("contains").get<std::string>();
    if (item.contains("index")) rule.index = item.at("index").get<std::int64_t>();
    if (item.contains("response")) {
      rule.responses.push_back(item.at("response").get<std::string>());
    }
    if (item.contains("responses")) {
      for (const auto& r : item.at("responses")) {
        rule.responses.push_back(r.get<std::string>());
      }
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<ScriptRule> ScriptedModel::load_rules(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open script file '" + json_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rules(buf.str());
}

const std::string* ScriptedModel::match_locked(AgentRole role, std::int64_t call_index,
                                               const std::string& prompt_text) {
  auto take = [](RuleState& state) -> const std::string* {
    const std::string* response = &state.rule.responses[state.next_response];
    if (state.next_response + 1 < state.rule.responses.size()) ++state.next_response;
    return response;
  };
  for (auto& state : rules_) {
    if (state.rule.role != role || !state.rule.index) continue;
    if (*state.rule.index == call_index) return take(state);
  }
  for (auto& state : rules_) {
    if (state.rule.role != role || !state.rule.contains) continue;
    if (prompt_text.find(*state.rule.contains) != std::string::npos) return take(state);
  }
  return nullptr;
}

Completion ScriptedModel::complete(const AssembledPrompt& prompt, const SamplingParams&,
                                   AgentRole role, const SessionHandle& session) {
  std::lock_guard<std::mutex> lock(mu_);
  std::int64_t call_index = calls_by_role_[role]++;
  const std::string* response = match_locked(role, call_index, prompt.text);
  if (!response) {
    std::string head = prompt.text.substr(0, 160);
    throw ScriptError("no scripted response for " + std::string(to_string(role)) +
                      " call " + std::to_string(call_index) + "; prompt starts: " + head);
  }
  if (session && !session->matches_prefix(prompt.tokens)) {
    throw Error("scripted endpoint got a session that is not a prefix of the prompt");
  }

  Completion c;
  c.text = *response;
  c.prompt_tokens = static_cast<std::int64_t>(prompt.tokens.size());
  c.completion_tokens = static_cast<std::int64_t>(tokenizer_.count(*response));
  std::size_t restored = session ? session->covered_tokens() : 0;
  c.prefill_tokens_computed = c.prompt_tokens - static_cast<std::int64_t>(restored);
  c.session = TokenPrefillSession::over(prompt.tokens);
  return c;
}

std::int64_t ScriptedModel::calls(AgentRole role) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = calls_by_role_.find(role);
  return it == calls_by_role_.end() ? 0 : it->second;
}

std::int64_t ScriptedModel::total_calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::int64_t n = 0;
  for (const auto& [role, count] : calls_by_role_) n += count;
  return n;
}

}  // namespace sqlrefine
