#include "sqlrefine/config.hpp"

#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "sqlrefine/errors.hpp"

namespace sqlrefine {
namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

std::string env_or_empty(const std::string& name) {
  if (name.empty()) return "";
  const char* value = std::getenv(name.c_str());
  return value ? std::string(value) : std::string();
}

}  // namespace

RunConfig RunConfig::load(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open config: " + json_path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config " + json_path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config " + json_path + " must be a JSON object");

  RunConfig cfg;
  if (doc.contains("model")) {
    const json& m = doc["model"];
    cfg.model.backend = get_or<std::string>(m, "backend", cfg.model.backend);
    cfg.model.script_path = get_or<std::string>(m, "script", cfg.model.script_path);
    cfg.model.base_url = get_or<std::string>(m, "base_url", cfg.model.base_url);
    cfg.model.model_name = get_or<std::string>(m, "model_name", cfg.model.model_name);
    cfg.model.api_key_env = get_or<std::string>(m, "api_key_env", cfg.model.api_key_env);
    cfg.model.max_attempts = get_or<int>(m, "max_attempts", cfg.model.max_attempts);
    cfg.model.backoff_initial_s = get_or<double>(m, "backoff_initial_s", cfg.model.backoff_initial_s);
    cfg.model.request_timeout_s = get_or<double>(m, "request_timeout_s", cfg.model.request_timeout_s);
    if (cfg.model.backend != "mock" && cfg.model.backend != "http")
      throw ConfigError("model.backend must be \"mock\" or \"http\", got \"" + cfg.model.backend + "\"");
  }
  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    cfg.sampling.temperature = get_or<double>(s, "temperature", cfg.sampling.temperature);
    cfg.sampling.top_p = get_or<double>(s, "top_p", cfg.sampling.top_p);
    cfg.sampling.max_tokens = get_or<int>(s, "max_tokens", cfg.sampling.max_tokens);
    if (cfg.sampling.max_tokens < 1) throw ConfigError("sampling.max_tokens must be >= 1");
  }
  if (doc.contains("search")) {
    const json& s = doc["search"];
    cfg.search.max_rollouts = get_or<int>(s, "max_rollouts", cfg.search.max_rollouts);
    cfg.search.child_count = get_or<int>(s, "child_count", cfg.search.child_count);
    cfg.search.exploration_c = get_or<double>(s, "exploration_c", cfg.search.exploration_c);
    cfg.search.epsilon = get_or<double>(s, "epsilon", cfg.search.epsilon);
    cfg.search.early_stop = get_or<bool>(s, "early_stop", cfg.search.early_stop);
    cfg.search.early_stop_reward = get_or<int>(s, "early_stop_reward", cfg.search.early_stop_reward);
    if (cfg.search.max_rollouts < 0) throw ConfigError("search.max_rollouts must be >= 0");
    if (cfg.search.child_count < 1) throw ConfigError("search.child_count must be >= 1");
  }
  if (doc.contains("cache")) {
    const json& c = doc["cache"];
    cfg.cache.enabled = get_or<bool>(c, "enabled", cfg.cache.enabled);
    cfg.cache.max_entries = get_or<std::size_t>(c, "max_entries", cfg.cache.max_entries);
    cfg.cache.max_total_key_tokens =
        get_or<std::size_t>(c, "max_total_key_tokens", cfg.cache.max_total_key_tokens);
  }
  if (doc.contains("execution")) {
    cfg.sql_timeout_s = get_or<double>(doc["execution"], "timeout_s", cfg.sql_timeout_s);
    if (cfg.sql_timeout_s <= 0) throw ConfigError("execution.timeout_s must be positive");
  }
  if (doc.contains("pipeline")) {
    const json& p = doc["pipeline"];
    cfg.workers = get_or<int>(p, "workers", cfg.workers);
    cfg.refiner_enabled = get_or<bool>(p, "refiner_enabled", cfg.refiner_enabled);
    cfg.max_context_tokens = get_or<std::size_t>(p, "max_context_tokens", cfg.max_context_tokens);
    if (cfg.workers < 1) throw ConfigError("pipeline.workers must be >= 1");
  }
  if (doc.contains("paths")) {
    const json& p = doc["paths"];
    cfg.templates_dir = get_or<std::string>(p, "templates", cfg.templates_dir);
    cfg.db_root = get_or<std::string>(p, "db_root", cfg.db_root);
    cfg.out_dir = get_or<std::string>(p, "out_dir", cfg.out_dir);
  }
  cfg.clock_mode = get_or<std::string>(doc, "clock", cfg.clock_mode);
  if (cfg.clock_mode != "auto" && cfg.clock_mode != "tick" && cfg.clock_mode != "steady")
    throw ConfigError("clock must be \"auto\", \"tick\" or \"steady\", got \"" + cfg.clock_mode + "\"");
  return cfg;
}

std::string RunConfig::resolved_base_url() const {
  const std::string env = env_or_empty("SQLREFINE_ENDPOINT");
  return env.empty() ? model.base_url : env;
}

std::string RunConfig::resolved_api_key() const { return env_or_empty(model.api_key_env); }

HttpEndpointConfig RunConfig::http_endpoint_config() const {
  HttpEndpointConfig http;
  http.base_url = resolved_base_url();
  http.api_key = resolved_api_key();
  http.model_name = model.model_name;
  http.max_attempts = model.max_attempts;
  http.backoff_initial_s = model.backoff_initial_s;
  http.request_timeout_s = model.request_timeout_s;
  return http;
}

PipelineConfig RunConfig::pipeline_config() const {
  PipelineConfig p;
  p.search = search;
  p.sampling = sampling;
  p.sql_timeout_s = sql_timeout_s;
  p.workers = workers;
  p.refiner_enabled = refiner_enabled;
  p.max_context_tokens = max_context_tokens;
  return p;
}

bool RunConfig::use_tick_clock() const {
  if (clock_mode == "tick") return true;
  if (clock_mode == "steady") return false;
  return model.backend == "mock";
}

}  // namespace sqlrefine
