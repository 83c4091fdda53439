#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "sqlrefine/agents.hpp"
#include "sqlrefine/clock.hpp"
#include "sqlrefine/pipeline.hpp"
#include "sqlrefine/prefix_cache.hpp"
#include "sqlrefine/schema.hpp"
#include "sqlrefine/scripted_model.hpp"
#include "sqlrefine/templates.hpp"
#include "sqlrefine/trace.hpp"

namespace sqlrefine::testing {

/// Scripted agents over the repository's real prompt templates.
struct AgentHarness {
  WordTokenizer tokenizer;
  PrefixCache cache{CacheConfig{}};
  ScriptedModel model;
  CachedRunner runner;
  AgentTemplates templates;
  TickClock clock;
  TraceSink trace;
  Agents agents;

  explicit AgentHarness(std::vector<ScriptRule> rules)
      : model(std::move(rules)),
        runner(model, cache, tokenizer, RunnerConfig{}),
        templates(AgentTemplates::load_dir(repo_dir() + "/templates")),
        agents(templates, runner, SamplingParams{}, &trace) {}

  Services services(PipelineConfig config = {}) {
    return Services{model, cache, tokenizer, templates, clock, config};
  }
};

inline DatabaseSchema build_schools_schema(const TempDir& dir) {
  const std::string db = dir.file("schools.sqlite");
  build_schools_db(db);
  return introspect_sqlite(db, "schools");
}

inline QuestionContext schools_context(const DatabaseSchema& schema) {
  QuestionContext ctx;
  ctx.db_id = "schools";
  ctx.desc_str = schema.render_tables();
  ctx.fk_str = schema.render_foreign_keys();
  ctx.query = "How many charter schools are there?";
  ctx.evidence = "charter = 1 means a charter school";
  return ctx;
}

inline std::string keep_all_json() {
  return R"({"districts": "keep_all", "schools": "keep_all", "scores": "keep_all"})";
}

}  // namespace sqlrefine::testing
