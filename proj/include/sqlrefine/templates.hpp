#pragma once

#include <map>
#include <string>

#include "sqlrefine/model.hpp"

namespace sqlrefine {

/// Replaces {name} occurrences with vars.at(name). Names not bound by vars
/// are left alone unless they belong to the fixed placeholder vocabulary
/// (db_id, desc_str, fk_str, query, evidence, sql, sql_error, critique), in
/// which case an unbound occurrence throws TemplateError. Substituted values
/// are never rescanned.
std::string substitute_placeholders(const std::string& text,
                                    const std::map<std::string, std::string>& vars);

/// A prompt template file holds up to four sections introduced by marker
/// lines [[schema]], [[few_shot]], [[instruction]] and [[feedback]]. Section
/// text is kept verbatim except for trailing newlines.
class PromptTemplate {
 public:
  static PromptTemplate parse(const std::string& text);
  static PromptTemplate load(const std::string& path);

  /// Renders each section with the given variables.
  PromptParts bind(const std::map<std::string, std::string>& vars) const;

  std::string schema_section;
  std::string few_shot_section;
  std::string instruction_section;
  std::string feedback_section;
};

/// The six agent templates, loaded from <dir>/<role>.txt.
struct AgentTemplates {
  PromptTemplate selector;
  PromptTemplate generator;
  PromptTemplate verifier;
  PromptTemplate critiquer;
  PromptTemplate refiner;
  PromptTemplate evaluator;

  static AgentTemplates load_dir(const std::string& dir);
  const PromptTemplate& for_role(AgentRole role) const;
};

}  // namespace sqlrefine
