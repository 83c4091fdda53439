#include "sqlrefine/agents.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "json.hpp"
#include "sqlrefine/errors.hpp"

namespace sqlrefine {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string head_of(const std::string& s, std::size_t n = 120) {
  return s.size() <= n ? s : s.substr(0, n) + "...";
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

bool equals_ci(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(a[i])) !=
        std::toupper(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

/// Position of the first word-bounded, case-insensitive occurrence of kw at
/// or after from; npos when absent.
std::size_t find_keyword(const std::string& text, std::size_t from, std::string_view kw) {
  for (std::size_t i = from; i + kw.size() <= text.size(); ++i) {
    if (!equals_ci(std::string_view(text).substr(i, kw.size()), kw)) continue;
    bool left_ok = i == 0 || !is_word_byte(static_cast<unsigned char>(text[i - 1]));
    std::size_t after = i + kw.size();
    bool right_ok =
        after >= text.size() || !is_word_byte(static_cast<unsigned char>(text[after]));
    if (left_ok && right_ok) return i;
  }
  return std::string::npos;
}

std::size_t find_ci(const std::string& text, std::string_view needle) {
  if (needle.empty()) return 0;
  for (std::size_t i = 0; i + needle.size() <= text.size(); ++i) {
    if (equals_ci(std::string_view(text).substr(i, needle.size()), needle)) return i;
  }
  return std::string::npos;
}

bool starts_with_statement(const std::string& s) {
  return find_keyword(s, 0, "SELECT") == 0 || find_keyword(s, 0, "WITH") == 0;
}

/// Statement cleanup shared by every extraction path: cut at the first
/// semicolon, drop stray fence backticks, trim.
std::string finish_statement(std::string sql) {
  std::size_t semi = sql.find(';');
  if (semi != std::string::npos) sql.resize(semi);
  std::size_t fence = sql.find("```");
  if (fence != std::string::npos) sql.resize(fence);
  return trim(sql);
}

}  // namespace

Result<SchemaSubset> parse_selector_json(const std::string& text,
                                         const DatabaseSchema& schema) {
  using Fail = Result<SchemaSubset>;
  nlohmann::ordered_json doc;
  bool parsed = false;
  try {
    doc = nlohmann::ordered_json::parse(trim(text));
    parsed = true;
  } catch (const nlohmann::json::exception&) {
  }
  if (!parsed) {
    std::size_t first = text.find('{');
    std::size_t last = text.rfind('}');
    if (first == std::string::npos || last == std::string::npos || last < first) {
      return Fail::fail("response contains no JSON object: " + head_of(text));
    }
    try {
      doc = nlohmann::ordered_json::parse(text.substr(first, last - first + 1));
    } catch (const nlohmann::json::exception& e) {
      return Fail::fail(std::string("response is not valid JSON: ") + e.what());
    }
  }
  if (!doc.is_object()) {
    return Fail::fail("selector response is not a JSON object");
  }
  if (doc.empty()) {
    return Fail::fail("selector JSON keeps no tables");
  }

  SchemaSubset subset;
  for (const auto& [table, value] : doc.items()) {
    TableChoice choice;
    if (value.is_string()) {
      std::string s = value.get<std::string>();
      if (s != "keep_all" && s != "keep-all") {
        return Fail::fail("table '" + table + "' maps to '" + s +
                          "', expected \"keep_all\" or a column list");
      }
      choice.keep_all = true;
    } else if (value.is_array()) {
      for (const auto& col : value) {
        if (!col.is_string()) {
          return Fail::fail("column list for '" + table + "' holds a non-string");
        }
        choice.columns.push_back(col.get<std::string>());
      }
    } else {
      return Fail::fail("table '" + table +
                        "' maps to neither \"keep_all\" nor a column list");
    }
    subset.tables.emplace_back(table, std::move(choice));
  }

  try {
    schema.validate_subset(subset);
  } catch (const SubsetError& e) {
    return Fail::fail(e.what());
  }
  for (const auto& [table, choice] : subset.tables) {
    if (choice.keep_all) continue;
    const TableInfo* info = schema.find_table(table);
    if (info->columns.size() <= 10) {
      return Fail::fail("table '" + table + "' has only " +
                        std::to_string(info->columns.size()) +
                        " columns and must be kept with \"keep_all\"");
    }
  }
  return Fail::ok(std::move(subset));
}

Result<GenerationResult> extract_sql(const std::string& text) {
  using Fail = Result<GenerationResult>;

  // Fenced ```sql block.
  std::size_t fence = find_ci(text, "```sql");
  if (fence != std::string::npos) {
    std::size_t body = text.find('\n', fence);
    if (body != std::string::npos) {
      ++body;
      std::size_t end = text.find("```", body);
      std::string sql = text.substr(body, end == std::string::npos ? end : end - body);
      sql = finish_statement(std::move(sql));
      if (!sql.empty() && starts_with_statement(sql)) {
        return Fail::ok({sql, trim(text.substr(0, fence))});
      }
    }
  }

  // Bare fence whose content opens with a statement.
  std::size_t bare = text.find("```");
  if (bare != std::string::npos) {
    std::size_t body = text.find('\n', bare);
    if (body != std::string::npos) {
      ++body;
      std::size_t end = text.find("```", body);
      std::string sql = text.substr(body, end == std::string::npos ? end : end - body);
      sql = finish_statement(std::move(sql));
      if (!sql.empty() && starts_with_statement(sql)) {
        return Fail::ok({sql, trim(text.substr(0, bare))});
      }
    }
  }

  // A line opening with SELECT or WITH, then anywhere in the text.
  std::size_t start = std::string::npos;
  std::size_t line_begin = 0;
  while (line_begin <= text.size()) {
    std::size_t line_end = text.find('\n', line_begin);
    std::string line = text.substr(line_begin, line_end == std::string::npos
                                                   ? std::string::npos
                                                   : line_end - line_begin);
    std::string stripped = trim(line);
    if (starts_with_statement(stripped)) {
      start = line_begin + line.find_first_not_of(" \t\r");
      break;
    }
    if (line_end == std::string::npos) break;
    line_begin = line_end + 1;
  }
  if (start == std::string::npos) {
    std::size_t sel = find_keyword(text, 0, "SELECT");
    std::size_t with = find_keyword(text, 0, "WITH");
    start = std::min(sel, with);
  }
  if (start == std::string::npos) {
    return Fail::fail("no SQL statement found in response: " + head_of(text));
  }
  std::string sql = finish_statement(text.substr(start));
  if (sql.empty()) {
    return Fail::fail("empty SQL statement in response: " + head_of(text));
  }
  return Fail::ok({sql, trim(text.substr(0, start))});
}

Result<Verdict> parse_verdict(const std::string& text) {
  using Fail = Result<Verdict>;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c) || c == '*' || c == '#' || c == '`' || c == '>' || c == '-') {
      ++i;
    } else {
      break;
    }
  }
  std::size_t word_end = i;
  while (word_end < text.size() &&
         std::isalpha(static_cast<unsigned char>(text[word_end]))) {
    ++word_end;
  }
  std::string word = text.substr(i, word_end - i);
  Verdict v;
  if (equals_ci(word, "YES")) {
    v.accepted = true;
  } else if (equals_ci(word, "NO")) {
    v.accepted = false;
  } else {
    return Fail::fail("verdict must start with YES or NO: " + head_of(text));
  }
  std::size_t rest = word_end;
  while (rest < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[rest]);
    if (std::isspace(c) || c == ':' || c == ',' || c == '.' || c == ';' || c == '-' ||
        c == '*') {
      ++rest;
    } else {
      break;
    }
  }
  v.explanation = trim(text.substr(rest));
  return Fail::ok(std::move(v));
}

Result<int> parse_reward(const std::string& text) {
  using Fail = Result<int>;
  static const std::regex integer(R"([-+]?\d+)");
  std::smatch m;
  if (!std::regex_search(text, m, integer)) {
    return Fail::fail("no integer score in response: " + head_of(text));
  }
  long long value = 0;
  try {
    value = std::stoll(m.str());
  } catch (const std::out_of_range&) {
    value = m.str()[0] == '-' ? kRewardFloor : kRewardCeiling;
  }
  value = std::clamp<long long>(value, kRewardFloor, kRewardCeiling);
  return Fail::ok(static_cast<int>(value));
}

Agents::Agents(const AgentTemplates& templates, CachedRunner& runner,
               SamplingParams sampling, TraceSink* trace)
    : templates_(templates), runner_(runner), sampling_(sampling), trace_(trace) {}

std::map<std::string, std::string> Agents::base_vars(const QuestionContext& ctx) const {
  return {{"db_id", ctx.db_id},
          {"desc_str", ctx.desc_str},
          {"fk_str", ctx.fk_str},
          {"query", ctx.query},
          {"evidence", ctx.evidence}};
}

Completion Agents::run_role(AgentRole role, const PromptParts& parts, int attempt) {
  AssembledPrompt assembled;
  Completion completion = runner_.run(parts, sampling_, role, &assembled);
  if (trace_) trace_->note_exchange(role, attempt, assembled, completion);
  return completion;
}

PromptParts Agents::reprompt_parts(PromptParts parts, const std::string& parse_error) const {
  std::string note = "[Format error]\nYour previous response could not be used: " +
                     parse_error + "\nAnswer again in the required format.\n\n";
  parts.feedback_block = note + parts.feedback_block;
  return parts;
}

SelectorDecision Agents::select_schema(const QuestionContext& ctx,
                                       const DatabaseSchema& schema) {
  PromptParts parts = templates_.selector.bind(base_vars(ctx));
  Completion first = run_role(AgentRole::selector, parts, 0);
  Result<SchemaSubset> parsed = parse_selector_json(first.text, schema);
  if (!parsed) {
    Completion second =
        run_role(AgentRole::selector, reprompt_parts(parts, parsed.error()), 1);
    parsed = parse_selector_json(second.text, schema);
  }
  if (!parsed) {
    if (trace_) {
      trace_->emit({{"type", "selector_fallback"}, {"error", parsed.error()}});
    }
    return {schema.full_subset(), true};
  }
  return {std::move(parsed).value(), false};
}

Result<GenerationResult> Agents::generate_sql(const QuestionContext& ctx) {
  PromptParts parts = templates_.generator.bind(base_vars(ctx));
  Completion completion = run_role(AgentRole::generator, parts, 0);
  return extract_sql(completion.text);
}

Result<Verdict> Agents::verify(const QuestionContext& ctx, const std::string& sql) {
  auto vars = base_vars(ctx);
  vars["sql"] = sql;
  PromptParts parts = templates_.verifier.bind(vars);
  Completion completion = run_role(AgentRole::verifier, parts, 0);
  return parse_verdict(completion.text);
}

Result<std::string> Agents::critique(const QuestionContext& ctx, const std::string& sql,
                                     const std::string& sql_error) {
  auto vars = base_vars(ctx);
  vars["sql"] = sql;
  vars["sql_error"] = sql_error;
  PromptParts parts = templates_.critiquer.bind(vars);
  Completion completion = run_role(AgentRole::critiquer, parts, 0);
  std::string text = trim(completion.text);
  if (text.empty()) {
    return Result<std::string>::fail("critique response is empty");
  }
  return Result<std::string>::ok(std::move(text));
}

Result<GenerationResult> Agents::refine(const QuestionContext& ctx, const std::string& sql,
                                        const std::string& sql_error,
                                        const std::string& critique) {
  auto vars = base_vars(ctx);
  vars["sql"] = sql;
  vars["sql_error"] = sql_error;
  vars["critique"] = critique;
  PromptParts parts = templates_.refiner.bind(vars);
  Completion completion = run_role(AgentRole::refiner, parts, 0);
  return extract_sql(completion.text);
}

RewardScore Agents::evaluate(const QuestionContext& ctx, const std::string& sql,
                             const std::string& sql_error) {
  auto vars = base_vars(ctx);
  vars["sql"] = sql;
  vars["sql_error"] = sql_error;
  PromptParts parts = templates_.evaluator.bind(vars);
  Completion first = run_role(AgentRole::evaluator, parts, 0);
  Result<int> parsed = parse_reward(first.text);
  if (!parsed) {
    Completion second =
        run_role(AgentRole::evaluator, reprompt_parts(parts, parsed.error()), 1);
    parsed = parse_reward(second.text);
  }
  if (!parsed) {
    if (trace_) {
      trace_->emit({{"type", "evaluator_fallback"}, {"error", parsed.error()}});
    }
    return {kRewardFloor, true};
  }
  return {parsed.value(), false};
}

}  // namespace sqlrefine
