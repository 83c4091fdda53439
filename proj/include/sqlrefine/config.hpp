#pragma once

#include <string>

#include "sqlrefine/http_model.hpp"
#include "sqlrefine/pipeline.hpp"
#include "sqlrefine/prefix_cache.hpp"

namespace sqlrefine {

struct ModelConfig {
  std::string backend = "mock";  // "mock" or "http"
  std::string script_path;       // mock backend: scripted rules JSON
  std::string base_url;          // http backend; SQLREFINE_ENDPOINT overrides
  std::string model_name = "default";
  std::string api_key_env = "SQLREFINE_API_KEY";  // key read from this env var, never stored
  int max_attempts = 3;
  double backoff_initial_s = 0.5;
  double request_timeout_s = 120.0;
};

/// Full run configuration. Everything is optional in the JSON file; defaults
/// here apply. The clock is "auto" (ticking when the backend is mock, wall
/// time otherwise), "tick" or "steady".
struct RunConfig {
  ModelConfig model;
  SamplingParams sampling;
  RolloutConfig search;
  CacheConfig cache;
  double sql_timeout_s = 30.0;
  int workers = 4;
  bool refiner_enabled = true;
  std::size_t max_context_tokens = 32168;
  std::string templates_dir = "templates";
  std::string db_root;
  std::string out_dir;
  std::string clock_mode = "auto";

  static RunConfig load(const std::string& json_path);

  /// Resolved endpoint URL: SQLREFINE_ENDPOINT env var wins over the file.
  std::string resolved_base_url() const;
  /// API key from the configured env var; empty when unset.
  std::string resolved_api_key() const;

  HttpEndpointConfig http_endpoint_config() const;
  PipelineConfig pipeline_config() const;
  bool use_tick_clock() const;
};

}  // namespace sqlrefine
