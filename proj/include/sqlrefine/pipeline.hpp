#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlrefine/agents.hpp"
#include "sqlrefine/clock.hpp"
#include "sqlrefine/mcts.hpp"
#include "sqlrefine/prefix_cache.hpp"
#include "sqlrefine/schema.hpp"
#include "sqlrefine/sqlexec.hpp"
#include "sqlrefine/templates.hpp"
#include "sqlrefine/trace.hpp"

namespace sqlrefine {

enum class Difficulty { simple, moderate, challenging, unknown };
std::string_view to_string(Difficulty d);
Difficulty parse_difficulty(std::string_view name);

struct Question {
  std::string question_id;
  std::string db_id;
  std::string text;
  std::string evidence;
  std::string gold_sql;  // empty when the dataset carries no gold
  Difficulty difficulty = Difficulty::unknown;
};

/// Dataset file: a JSON array of objects with question_id (optional, index
/// used otherwise), db_id, question, evidence, SQL and difficulty.
std::vector<Question> load_questions(const std::string& json_path);

enum class AnswerPath { direct, mcts, degraded };
std::string_view to_string(AnswerPath path);

struct BenchRecord {
  std::string question_id;
  std::string db_id;
  Difficulty difficulty = Difficulty::unknown;
  AnswerPath path = AnswerPath::degraded;
  int rollouts = 0;
  std::string predicted_sql;
  bool selector_fallback = false;
  bool has_gold = false;
  bool ex_match = false;
  std::string mismatch_reason;
  double gold_duration_s = 0.0;
  double predicted_duration_s = 0.0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t prefill_tokens_computed = 0;
  double latency_s = 0.0;
  std::string error;  // unexpected per-question failure, isolated
};

struct PipelineConfig {
  RolloutConfig search;
  SamplingParams sampling;
  double sql_timeout_s = 30.0;
  int workers = 4;
  bool refiner_enabled = true;
  std::size_t max_context_tokens = 32168;
};

/// Shared immutable services for a run. The endpoint, cache and clock are
/// shared across workers and must be thread safe (they are).
struct Services {
  ModelEndpoint& endpoint;
  PrefixCache& cache;
  const Tokenizer& tokenizer;
  const AgentTemplates& templates;
  Clock& clock;
  PipelineConfig config;
};

/// Finds database files under a root directory, accepting both
/// <root>/<db_id>.sqlite and <root>/<db_id>/<db_id>.sqlite, and caches one
/// schema introspection per database. A sidecar named
/// <db_id>.descriptions.json next to the database is picked up when present.
class SchemaRegistry {
 public:
  explicit SchemaRegistry(std::string db_root);

  std::string db_path(const std::string& db_id) const;
  const DatabaseSchema& schema(const std::string& db_id);

 private:
  std::string root_;
  std::mutex mu_;
  std::map<std::string, DatabaseSchema> schemas_;
};

struct AnswerResult {
  std::string sql;
  BenchRecord record;  // gold comparison fields left empty here
  TraceSink trace;
};

/// One question through the pipeline: select schema (full schema fallback on
/// selector failure), generate (degraded empty SQL on failure), execute,
/// verify, and return directly when execution succeeded and the verifier
/// accepted; otherwise run the refinement search from the failing query.
AnswerResult answer_question(const Question& question, Services& services,
                             SchemaRegistry& registry);

struct BenchReport {
  std::vector<BenchRecord> records;
  CacheStats cache_stats;
  nlohmann::ordered_json summary;
};

/// Answers every question with a bounded worker pool (per-question failures
/// become error records, never a crashed run), scores records that carry
/// gold SQL, and, when out_dir is non-empty, writes report.json,
/// records.csv, ex_by_difficulty.csv and traces/<question_id>.jsonl.
BenchReport run_benchmark(const std::vector<Question>& questions, Services& services,
                          SchemaRegistry& registry, const std::string& out_dir);

/// Summary EX/VES come from ex_metric/ves_metric over the emitted records.
nlohmann::ordered_json summarize_records(const std::vector<BenchRecord>& records,
                                         const CacheStats& cache_stats);

std::string records_to_csv(const std::vector<BenchRecord>& records);
std::string ex_by_difficulty_csv(const std::vector<BenchRecord>& records);

}  // namespace sqlrefine
