#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "sqlrefine/config.hpp"
#include "sqlrefine/errors.hpp"
#include "sqlrefine/http_model.hpp"
#include "sqlrefine/pipeline.hpp"
#include "sqlrefine/scripted_model.hpp"

namespace {

using namespace sqlrefine;

struct Overrides {
  std::string config_path;
  std::string model_name;
  std::string script_path;
  std::string templates_dir;
  std::string db_root;
  std::string out_dir;
  std::optional<int> max_rollouts;
  std::optional<int> child_nodes;
  std::optional<double> timeout_s;
  std::optional<int> workers;
  bool no_cache = false;
  bool no_refine = false;
};

RunConfig effective_config(const Overrides& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig() : RunConfig::load(o.config_path);
  if (!o.model_name.empty()) cfg.model.model_name = o.model_name;
  if (!o.script_path.empty()) {
    cfg.model.script_path = o.script_path;
    cfg.model.backend = "mock";
  }
  if (!o.templates_dir.empty()) cfg.templates_dir = o.templates_dir;
  if (!o.db_root.empty()) cfg.db_root = o.db_root;
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.max_rollouts) cfg.search.max_rollouts = *o.max_rollouts;
  if (o.child_nodes) cfg.search.child_count = *o.child_nodes;
  if (o.timeout_s) cfg.sql_timeout_s = *o.timeout_s;
  if (o.workers) cfg.workers = *o.workers;
  if (o.no_cache) cfg.cache.enabled = false;
  if (o.no_refine) cfg.refiner_enabled = false;
  return cfg;
}

struct Runtime {
  std::unique_ptr<ModelEndpoint> endpoint;
  std::unique_ptr<PrefixCache> cache;
  std::unique_ptr<Clock> clock;
  WordTokenizer tokenizer;
  AgentTemplates templates;
  PipelineConfig pipeline;

  Services services() {
    return Services{*endpoint, *cache, tokenizer, templates, *clock, pipeline};
  }
};

Runtime build_runtime(const RunConfig& cfg) {
  Runtime rt;
  if (cfg.model.backend == "mock") {
    if (cfg.model.script_path.empty())
      throw ConfigError("mock backend needs a script (model.script or --script)");
    rt.endpoint =
        std::make_unique<ScriptedModel>(ScriptedModel::load_rules(cfg.model.script_path));
  } else {
    HttpEndpointConfig http = cfg.http_endpoint_config();
    if (http.base_url.empty())
      throw ConfigError("http backend needs a base URL (model.base_url or SQLREFINE_ENDPOINT)");
    rt.endpoint = std::make_unique<HttpChatEndpoint>(http);
  }
  rt.cache = std::make_unique<PrefixCache>(cfg.cache);
  if (cfg.use_tick_clock())
    rt.clock = std::make_unique<TickClock>();
  else
    rt.clock = std::make_unique<SteadyClock>();
  rt.templates = AgentTemplates::load_dir(cfg.templates_dir);
  rt.pipeline = cfg.pipeline_config();
  return rt;
}

int cmd_run(const Overrides& overrides, const std::string& db, const std::string& question_text,
            const std::string& evidence, const std::string& gold_sql) {
  RunConfig cfg = effective_config(overrides);
  Runtime rt = build_runtime(cfg);
  Services services = rt.services();

  // --db accepts either a database file or a db_id under paths.db_root.
  std::string db_root = cfg.db_root;
  std::string db_id = db;
  if (std::filesystem::exists(db) && !std::filesystem::is_directory(db)) {
    std::filesystem::path p = std::filesystem::absolute(db);
    db_root = p.parent_path().string();
    db_id = p.stem().string();
  } else if (db_root.empty()) {
    throw ConfigError("--db is not a file and no db_root is configured");
  }
  SchemaRegistry registry(db_root);

  Question q;
  q.question_id = "cli";
  q.db_id = db_id;
  q.text = question_text;
  q.evidence = evidence;
  q.gold_sql = gold_sql;

  AnswerResult answer = answer_question(q, services, registry);
  std::cout << answer.sql << '\n';
  std::cerr << "path=" << to_string(answer.record.path)
            << " rollouts=" << answer.record.rollouts
            << " prompt_tokens=" << answer.record.prompt_tokens
            << " completion_tokens=" << answer.record.completion_tokens << '\n';

  if (!gold_sql.empty()) {
    const std::string path = registry.db_path(db_id);
    const ExecutionOutcome pred = execute_sql(path, answer.sql, cfg.sql_timeout_s, *rt.clock);
    const ExecutionOutcome gold = execute_sql(path, gold_sql, cfg.sql_timeout_s, *rt.clock);
    const ComparisonResult cmp = compare_outcomes(pred, gold, gold_sql);
    std::cerr << "ex_match=" << (cmp.match ? "1" : "0");
    if (!cmp.match) std::cerr << " reason=\"" << cmp.reason << '"';
    std::cerr << '\n';
  }
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string trace_path = (std::filesystem::path(cfg.out_dir) / "cli.jsonl").string();
    answer.trace.write_to(trace_path);
    std::cerr << "trace=" << trace_path << '\n';
  }
  return answer.record.error.empty() ? 0 : 1;
}

int cmd_bench(const Overrides& overrides, const std::string& dataset_path, int limit) {
  RunConfig cfg = effective_config(overrides);
  if (cfg.db_root.empty()) throw ConfigError("bench needs a database root (--db-root or paths.db_root)");
  Runtime rt = build_runtime(cfg);
  Services services = rt.services();
  SchemaRegistry registry(cfg.db_root);

  std::vector<Question> questions = load_questions(dataset_path);
  if (limit > 0 && static_cast<std::size_t>(limit) < questions.size())
    questions.resize(static_cast<std::size_t>(limit));

  BenchReport report = run_benchmark(questions, services, registry, cfg.out_dir);
  std::cout << report.summary.dump(2) << '\n';
  if (!cfg.out_dir.empty()) std::cerr << "reports written to " << cfg.out_dir << '\n';

  for (const auto& r : report.records)
    if (!r.error.empty()) return 1;
  return 0;
}

int cmd_schema(const std::string& db_path, const std::string& descriptions_path) {
  SchemaDescriptions descriptions;
  if (!descriptions_path.empty()) descriptions = SchemaDescriptions::load(descriptions_path);
  const std::string db_id = std::filesystem::path(db_path).stem().string();
  const DatabaseSchema schema = introspect_sqlite(db_path, db_id, &descriptions);
  std::cout << schema.render(nullptr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-to-SQL generation with execution-guided tree-search refinement"};
  app.require_subcommand(1);

  Overrides overrides;
  app.add_option("--config", overrides.config_path, "JSON config file");

  const auto add_common = [&overrides](CLI::App* cmd) {
    cmd->add_option("--model", overrides.model_name, "model name for the http backend");
    cmd->add_option("--script", overrides.script_path, "scripted responses JSON (forces mock backend)");
    cmd->add_option("--templates", overrides.templates_dir, "prompt templates directory");
    cmd->add_option("--max-rollouts", overrides.max_rollouts, "refinement rollout budget");
    cmd->add_option("--child-nodes", overrides.child_nodes, "children per node during search");
    cmd->add_option("--timeout", overrides.timeout_s, "SQL execution timeout in seconds");
    cmd->add_option("--out-dir", overrides.out_dir, "directory for reports and traces");
    cmd->add_flag("--no-cache", overrides.no_cache, "disable the prefix cache");
    cmd->add_flag("--no-refine", overrides.no_refine, "return the first generated query unrefined");
  };

  auto* run = app.add_subcommand("run", "answer a single question");
  std::string db, question_text, evidence, gold_sql;
  run->add_option("--db", db, "database file, or db_id under the configured root")->required();
  run->add_option("--question", question_text, "natural language question")->required();
  run->add_option("--evidence", evidence, "external knowledge hint");
  run->add_option("--gold", gold_sql, "gold SQL to compare against");
  add_common(run);

  auto* bench = app.add_subcommand("bench", "run a question set and report EX/VES");
  std::string dataset_path;
  int limit = 0;
  bench->add_option("--dataset", dataset_path, "questions JSON file")->required();
  bench->add_option("--db-root", overrides.db_root, "directory holding the databases");
  bench->add_option("--limit", limit, "answer only the first N questions");
  bench->add_option("--workers", overrides.workers, "parallel question workers");
  add_common(bench);

  auto* schema_cmd = app.add_subcommand("schema", "print a database schema rendering");
  std::string schema_db, descriptions_path;
  schema_cmd->add_option("--db", schema_db, "database file")->required();
  schema_cmd->add_option("--descriptions", descriptions_path, "descriptions JSON sidecar");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(overrides, db, question_text, evidence, gold_sql);
    if (bench->parsed()) return cmd_bench(overrides, dataset_path, limit);
    if (schema_cmd->parsed()) return cmd_schema(schema_db, descriptions_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
