#include "sqlrefine/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "sqlrefine/errors.hpp"

namespace fs = std::filesystem;

namespace sqlrefine {
namespace {

std::string sanitize_filename(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? std::string("question") : out;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];
}

}  // namespace

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::simple: return "simple";
    case Difficulty::moderate: return "moderate";
    case Difficulty::challenging: return "challenging";
    case Difficulty::unknown: return "unknown";
  }
  return "unknown";
}

Difficulty parse_difficulty(std::string_view name) {
  if (name == "simple") return Difficulty::simple;
  if (name == "moderate") return Difficulty::moderate;
  if (name == "challenging") return Difficulty::challenging;
  return Difficulty::unknown;
}

std::string_view to_string(AnswerPath path) {
  switch (path) {
    case AnswerPath::direct: return "direct";
    case AnswerPath::mcts: return "mcts";
    case AnswerPath::degraded: return "degraded";
  }
  return "degraded";
}

std::vector<Question> load_questions(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open dataset: " + json_path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("dataset " + json_path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_array()) throw ConfigError("dataset " + json_path + " must be a JSON array");

  std::vector<Question> questions;
  questions.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    if (!item.is_object()) throw ConfigError("dataset entry " + std::to_string(i) + " is not an object");
    Question q;
    q.question_id = std::to_string(i);
    if (item.contains("question_id")) {
      const auto& qid = item["question_id"];
      if (qid.is_string()) q.question_id = qid.get<std::string>();
      else if (qid.is_number_integer()) q.question_id = std::to_string(qid.get<long long>());
      else throw ConfigError("dataset entry " + std::to_string(i) + " has a non-scalar question_id");
    }
    q.db_id = item.value("db_id", "");
    q.text = item.value("question", "");
    q.evidence = item.value("evidence", "");
    q.gold_sql = item.value("SQL", item.value("gold_sql", ""));
    q.difficulty = parse_difficulty(item.value("difficulty", "unknown"));
    if (q.db_id.empty()) throw ConfigError("dataset entry " + q.question_id + " has no db_id");
    if (q.text.empty()) throw ConfigError("dataset entry " + q.question_id + " has no question");
    questions.push_back(std::move(q));
  }
  return questions;
}

SchemaRegistry::SchemaRegistry(std::string db_root) : root_(std::move(db_root)) {}

std::string SchemaRegistry::db_path(const std::string& db_id) const {
  const fs::path root(root_);
  const fs::path flat = root / (db_id + ".sqlite");
  if (fs::exists(flat)) return flat.string();
  const fs::path nested = root / db_id / (db_id + ".sqlite");
  if (fs::exists(nested)) return nested.string();
  throw IoError("no database for '" + db_id + "' under " + root_);
}

const DatabaseSchema& SchemaRegistry::schema(const std::string& db_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = schemas_.find(db_id);
  if (it != schemas_.end()) return it->second;

  const std::string path = db_path(db_id);
  SchemaDescriptions descriptions;
  const fs::path sidecar = fs::path(path).parent_path() / (db_id + ".descriptions.json");
  if (fs::exists(sidecar)) descriptions = SchemaDescriptions::load(sidecar.string());
  auto schema = introspect_sqlite(path, db_id, &descriptions);
  return schemas_.emplace(db_id, std::move(schema)).first->second;
}

AnswerResult answer_question(const Question& question, Services& services,
                             SchemaRegistry& registry) {
  AnswerResult result;
  BenchRecord& record = result.record;
  record.question_id = question.question_id;
  record.db_id = question.db_id;
  record.difficulty = question.difficulty;

  const double started = services.clock.now_s();
  const DatabaseSchema& schema = registry.schema(question.db_id);
  const std::string db_path = registry.db_path(question.db_id);

  CachedRunner runner(services.endpoint, services.cache, services.tokenizer,
                      RunnerConfig{services.config.max_context_tokens});
  Agents agents(services.templates, runner, services.config.sampling, &result.trace);

  const auto finish = [&](AnswerPath path, std::string sql, int rollouts) {
    record.path = path;
    record.rollouts = rollouts;
    record.predicted_sql = std::move(sql);
    result.sql = record.predicted_sql;
    record.prompt_tokens = result.trace.prompt_tokens();
    record.completion_tokens = result.trace.completion_tokens();
    record.prefill_tokens_computed = result.trace.prefill_tokens_computed();
    record.latency_s = services.clock.now_s() - started;
    result.trace.emit({{"type", "result"},
                       {"path", std::string(to_string(path))},
                       {"rollouts", rollouts},
                       {"sql", record.predicted_sql}});
  };

  QuestionContext ctx;
  ctx.db_id = question.db_id;
  ctx.desc_str = schema.render_tables(nullptr);
  ctx.fk_str = schema.render_foreign_keys(nullptr);
  ctx.query = question.text;
  ctx.evidence = question.evidence;

  SelectorDecision decision;
  try {
    decision = agents.select_schema(ctx, schema);
  } catch (const EndpointError& e) {
    decision.subset = schema.full_subset();
    decision.used_fallback = true;
    result.trace.emit({{"type", "selector_fallback"}, {"cause", "endpoint_error"}, {"error", e.what()}});
  }
  record.selector_fallback = decision.used_fallback;
  ctx.desc_str = schema.render_tables(&decision.subset);
  ctx.fk_str = schema.render_foreign_keys(&decision.subset);

  Result<GenerationResult> generated = Result<GenerationResult>::fail("not attempted");
  try {
    generated = agents.generate_sql(ctx);
  } catch (const EndpointError& e) {
    generated = Result<GenerationResult>::fail(std::string("endpoint error: ") + e.what());
  }
  if (!generated.has_value()) {
    result.trace.emit({{"type", "generation_failed"}, {"error", generated.error()}});
    finish(AnswerPath::degraded, "", 0);
    return result;
  }
  const std::string direct_sql = generated.value().sql;

  const auto execute = [&](const std::string& sql) {
    return execute_sql(db_path, sql, services.config.sql_timeout_s, services.clock);
  };
  const ExecutionOutcome direct_exec = execute(direct_sql);

  bool accepted = false;
  std::string rejection;
  try {
    Result<Verdict> verdict = agents.verify(ctx, direct_sql);
    if (verdict.has_value()) {
      accepted = verdict.value().accepted;
      rejection = verdict.value().explanation;
    } else {
      result.trace.emit({{"type", "verdict_unparsed"}, {"error", verdict.error()}});
    }
  } catch (const EndpointError& e) {
    result.trace.emit({{"type", "verdict_unparsed"}, {"error", std::string("endpoint error: ") + e.what()}});
  }

  if (direct_exec.ok() && accepted) {
    finish(AnswerPath::direct, direct_sql, 0);
    return result;
  }
  if (!services.config.refiner_enabled) {
    finish(AnswerPath::direct, direct_sql, 0);
    return result;
  }

  RootInfo root;
  root.sql = direct_sql;
  root.executed_ok = direct_exec.ok();
  root.feedback = direct_exec.error ? *direct_exec.error : rejection;

  try {
    SearchOutcome outcome =
        run_search(root, agents, execute, ctx, services.config.search, &result.trace);
    finish(outcome.degraded ? AnswerPath::degraded : AnswerPath::mcts, outcome.best_sql,
           outcome.rollouts_used);
  } catch (const EndpointError& e) {
    record.error = std::string("endpoint error during search: ") + e.what();
    result.trace.emit({{"type", "search_aborted"}, {"error", record.error}});
    finish(AnswerPath::degraded, direct_sql, 0);
  }
  return result;
}

namespace {

void score_record(BenchRecord& record, const Question& question, const std::string& db_path,
                  double timeout_s, Clock& clock) {
  if (question.gold_sql.empty()) return;
  record.has_gold = true;

  std::vector<double> gold_times, pred_times;
  ExecutionOutcome gold_first, pred_first;
  for (int i = 0; i < 3; ++i) {
    ExecutionOutcome gold = execute_sql(db_path, question.gold_sql, timeout_s, clock);
    ExecutionOutcome pred = execute_sql(db_path, record.predicted_sql, timeout_s, clock);
    gold_times.push_back(gold.duration_s);
    pred_times.push_back(pred.duration_s);
    if (i == 0) {
      gold_first = std::move(gold);
      pred_first = std::move(pred);
    }
  }
  record.gold_duration_s = median_of(std::move(gold_times));
  record.predicted_duration_s = median_of(std::move(pred_times));

  const ComparisonResult cmp = compare_outcomes(pred_first, gold_first, question.gold_sql);
  record.ex_match = cmp.match;
  record.mismatch_reason = cmp.reason;
}

}  // namespace

nlohmann::ordered_json summarize_records(const std::vector<BenchRecord>& records,
                                         const CacheStats& cache_stats) {
  nlohmann::ordered_json summary;
  summary["questions"] = records.size();
  std::size_t answered = 0;
  std::int64_t prompt = 0, completion = 0, prefill = 0;
  int rollouts = 0, selector_fallbacks = 0;
  double latency_total = 0.0;
  std::map<std::string, int, std::less<>> paths{{"direct", 0}, {"mcts", 0}, {"degraded", 0}};
  std::vector<MetricRecord> scored;
  for (const auto& r : records) {
    if (r.error.empty()) ++answered;
    prompt += r.prompt_tokens;
    completion += r.completion_tokens;
    prefill += r.prefill_tokens_computed;
    rollouts += r.rollouts;
    selector_fallbacks += r.selector_fallback ? 1 : 0;
    latency_total += r.latency_s;
    ++paths[std::string(to_string(r.path))];
    if (r.has_gold)
      scored.push_back({r.ex_match, std::string(to_string(r.difficulty)), r.gold_duration_s,
                        r.predicted_duration_s});
  }
  summary["answered"] = answered;
  summary["paths"] = {{"direct", paths["direct"]}, {"mcts", paths["mcts"]}, {"degraded", paths["degraded"]}};
  summary["rollouts_total"] = rollouts;
  summary["selector_fallbacks"] = selector_fallbacks;
  summary["mean_latency_s"] =
      records.empty() ? 0.0 : latency_total / static_cast<double>(records.size());
  const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
  summary["tokens"] = {{"prompt", prompt},
                       {"completion", completion},
                       {"prefill_computed", prefill},
                       {"prompt_mean", static_cast<double>(prompt) / n},
                       {"completion_mean", static_cast<double>(completion) / n}};

  if (scored.empty()) {
    summary["ex"] = nullptr;
    summary["ex_by_difficulty"] = nlohmann::ordered_json::object();
    summary["ves"] = nullptr;
  } else {
    const ExBreakdown ex = ex_metric(scored);
    summary["ex"] = ex.overall;
    nlohmann::ordered_json by_diff = nlohmann::ordered_json::object();
    for (const auto& [name, value] : ex.by_difficulty) by_diff[name] = value;
    summary["ex_by_difficulty"] = by_diff;
    summary["ves"] = ves_metric(scored);
  }

  summary["cache"] = {{"lookups", cache_stats.lookups},
                      {"hits", cache_stats.hits},
                      {"hit_rate", cache_stats.hit_rate()},
                      {"tokens_saved", cache_stats.tokens_saved},
                      {"tokens_computed", cache_stats.tokens_computed},
                      {"entries", cache_stats.entries},
                      {"evictions", cache_stats.evictions}};
  return summary;
}

std::string records_to_csv(const std::vector<BenchRecord>& records) {
  std::string csv =
      "question_id,db_id,difficulty,path,rollouts,ex_match,mismatch_reason,selector_fallback,"
      "prompt_tokens,completion_tokens,prefill_tokens_computed,latency_s,gold_duration_s,"
      "predicted_duration_s,error,predicted_sql\n";
  for (const auto& r : records) {
    csv += csv_field(r.question_id) + ',' + csv_field(r.db_id) + ',';
    csv += std::string(to_string(r.difficulty)) + ',' + std::string(to_string(r.path)) + ',';
    csv += std::to_string(r.rollouts) + ',';
    csv += r.has_gold ? (r.ex_match ? "1" : "0") : "";
    csv += ',' + csv_field(r.mismatch_reason) + ',';
    csv += r.selector_fallback ? "1" : "0";
    csv += ',' + std::to_string(r.prompt_tokens) + ',' + std::to_string(r.completion_tokens) + ',' +
           std::to_string(r.prefill_tokens_computed) + ',' + format_double(r.latency_s) + ',' +
           format_double(r.gold_duration_s) + ',' + format_double(r.predicted_duration_s) + ',' +
           csv_field(r.error) + ',' + csv_field(r.predicted_sql) + '\n';
  }
  return csv;
}

std::string ex_by_difficulty_csv(const std::vector<BenchRecord>& records) {
  std::vector<MetricRecord> scored;
  for (const auto& r : records)
    if (r.has_gold)
      scored.push_back({r.ex_match, std::string(to_string(r.difficulty)), r.gold_duration_s,
                        r.predicted_duration_s});
  std::string csv = "difficulty,questions,ex_percent\n";
  if (scored.empty()) return csv;
  const ExBreakdown ex = ex_metric(scored);
  std::map<std::string, int, std::less<>> counts;
  for (const auto& m : scored) ++counts[m.difficulty];
  for (const auto& [name, value] : ex.by_difficulty)
    csv += name + ',' + std::to_string(counts[name]) + ',' + format_double(value) + '\n';
  csv += "overall," + std::to_string(scored.size()) + ',' + format_double(ex.overall) + '\n';
  return csv;
}

BenchReport run_benchmark(const std::vector<Question>& questions, Services& services,
                          SchemaRegistry& registry, const std::string& out_dir) {
  BenchReport report;
  report.records.resize(questions.size());
  std::vector<TraceSink> traces(questions.size());

  // Schemas introspect up front so workers mostly read the registry cache.
  // Failures are left for the worker, which records them per question.
  for (const auto& q : questions) {
    try {
      registry.schema(q.db_id);
    } catch (const std::exception&) {
    }
  }

  const int worker_count = std::max(
      1, std::min(services.config.workers, static_cast<int>(questions.size())));
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= questions.size()) return;
      const Question& q = questions[i];
      BenchRecord& record = report.records[i];
      try {
        AnswerResult answer = answer_question(q, services, registry);
        record = std::move(answer.record);
        traces[i] = std::move(answer.trace);
        score_record(record, q, registry.db_path(q.db_id), services.config.sql_timeout_s,
                     services.clock);
      } catch (const std::exception& e) {
        record.question_id = q.question_id;
        record.db_id = q.db_id;
        record.difficulty = q.difficulty;
        record.path = AnswerPath::degraded;
        record.error = e.what();
      }
    }
  };

  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count));
    for (int i = 0; i < worker_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  report.cache_stats = services.cache.stats();
  report.summary = summarize_records(report.records, report.cache_stats);

  if (!out_dir.empty()) {
    fs::create_directories(fs::path(out_dir) / "traces");
    nlohmann::ordered_json doc;
    doc["summary"] = report.summary;
    nlohmann::ordered_json recs = nlohmann::ordered_json::array();
    for (const auto& r : report.records) {
      nlohmann::ordered_json j;
      j["question_id"] = r.question_id;
      j["db_id"] = r.db_id;
      j["difficulty"] = std::string(to_string(r.difficulty));
      j["path"] = std::string(to_string(r.path));
      j["rollouts"] = r.rollouts;
      j["predicted_sql"] = r.predicted_sql;
      j["selector_fallback"] = r.selector_fallback;
      if (r.has_gold) {
        j["ex_match"] = r.ex_match;
        j["mismatch_reason"] = r.mismatch_reason;
        j["gold_duration_s"] = r.gold_duration_s;
        j["predicted_duration_s"] = r.predicted_duration_s;
      }
      j["prompt_tokens"] = r.prompt_tokens;
      j["completion_tokens"] = r.completion_tokens;
      j["prefill_tokens_computed"] = r.prefill_tokens_computed;
      j["latency_s"] = r.latency_s;
      if (!r.error.empty()) j["error"] = r.error;
      recs.push_back(std::move(j));
    }
    doc["records"] = std::move(recs);

    std::ofstream(fs::path(out_dir) / "report.json") << doc.dump(2) << '\n';
    std::ofstream(fs::path(out_dir) / "records.csv") << records_to_csv(report.records);
    std::ofstream(fs::path(out_dir) / "ex_by_difficulty.csv")
        << ex_by_difficulty_csv(report.records);
    for (std::size_t i = 0; i < questions.size(); ++i) {
      const fs::path path =
          fs::path(out_dir) / "traces" / (sanitize_filename(questions[i].question_id) + ".jsonl");
      traces[i].write_to(path.string());
    }
  }
  return report;
}

}  // namespace sqlrefine
