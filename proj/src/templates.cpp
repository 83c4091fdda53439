#include "sqlrefine/templates.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "sqlrefine/errors.hpp"

namespace sqlrefine {

namespace {

const std::array<std::string, 8> kPlaceholderVocabulary = {
    "db_id", "desc_str", "fk_str", "query", "evidence", "sql", "sql_error", "critique"};

bool is_known_placeholder(const std::string& name) {
  for (const auto& p : kPlaceholderVocabulary) {
    if (p == name) return true;
  }
  return false;
}

bool is_name_start(unsigned char c) { return std::isalpha(c) != 0 || c == '_'; }
bool is_name_byte(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

void strip_trailing_newlines(std::string& s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
}

}  // namespace

std::string substitute_placeholders(const std::string& text,
                                    const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c != '{') {
      out += c;
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (j < text.size() && is_name_start(static_cast<unsigned char>(text[j]))) {
      std::size_t k = j + 1;
      while (k < text.size() && is_name_byte(static_cast<unsigned char>(text[k]))) ++k;
      if (k < text.size() && text[k] == '}') {
        std::string name = text.substr(j, k - j);
        auto it = vars.find(name);
        if (it != vars.end()) {
          out += it->second;
          i = k + 1;
          continue;
        }
        if (is_known_placeholder(name)) {
          throw TemplateError("placeholder {" + name + "} is not bound");
        }
      }
    }
    out += c;
    ++i;
  }
  return out;
}

PromptTemplate PromptTemplate::parse(const std::string& text) {
  PromptTemplate t;
  std::string* current = nullptr;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "[[schema]]") {
      current = &t.schema_section;
    } else if (line == "[[few_shot]]") {
      current = &t.few_shot_section;
    } else if (line == "[[instruction]]") {
      current = &t.instruction_section;
    } else if (line == "[[feedback]]") {
      current = &t.feedback_section;
    } else if (current) {
      *current += line;
      *current += '\n';
    } else if (!line.empty()) {
      throw TemplateError("template line " + std::to_string(line_no) +
                          " precedes any [[section]] marker");
    }
  }
  for (std::string* s : {&t.schema_section, &t.few_shot_section, &t.instruction_section,
                         &t.feedback_section}) {
    strip_trailing_newlines(*s);
  }
  return t;
}

PromptTemplate PromptTemplate::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TemplateError("cannot open template '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

PromptParts PromptTemplate::bind(const std::map<std::string, std::string>& vars) const {
  PromptParts parts;
  parts.schema_text = substitute_placeholders(schema_section, vars);
  parts.few_shot_block = substitute_placeholders(few_shot_section, vars);
  parts.instruction_block = substitute_placeholders(instruction_section, vars);
  parts.feedback_block = substitute_placeholders(feedback_section, vars);
  return parts;
}

AgentTemplates AgentTemplates::load_dir(const std::string& dir) {
  AgentTemplates t;
  t.selector = PromptTemplate::load(dir + "/selector.txt");
  t.generator = PromptTemplate::load(dir + "/generator.txt");
  t.verifier = PromptTemplate::load(dir + "/verifier.txt");
  t.critiquer = PromptTemplate::load(dir + "/critiquer.txt");
  t.refiner = PromptTemplate::load(dir + "/refiner.txt");
  t.evaluator = PromptTemplate::load(dir + "/evaluator.txt");
  return t;
}

const PromptTemplate& AgentTemplates::for_role(AgentRole role) const {
  switch (role) {
    case AgentRole::selector: return selector;
    case AgentRole::generator: return generator;
    case AgentRole::verifier: return verifier;
    case AgentRole::critiquer: return critiquer;
    case AgentRole::refiner: return refiner;
    case AgentRole::evaluator: return evaluator;
  }
  throw ConfigError("bad agent role");
}

}  // namespace sqlrefine
