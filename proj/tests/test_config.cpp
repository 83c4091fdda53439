#include <cstdlib>

#include "doctest.h"
#include "sqlrefine/config.hpp"
#include "sqlrefine/errors.hpp"
#include "support/fixtures.hpp"

using namespace sqlrefine;
using namespace sqlrefine::testing;

namespace {

RunConfig load_text(const TempDir& dir, const std::string& text) {
  const std::string path = dir.file("config.json");
  write_file(path, text);
  return RunConfig::load(path);
}

/// Sets an environment variable for the lifetime of one scope.
struct EnvVar {
  std::string name;
  EnvVar(std::string n, const std::string& value) : name(std::move(n)) {
    setenv(name.c_str(), value.c_str(), 1);
  }
  ~EnvVar() { unsetenv(name.c_str()); }
};

}  // namespace

TEST_CASE("an empty config file keeps every default") {
  TempDir dir;
  const RunConfig cfg = load_text(dir, "{}");
  CHECK(cfg.model.backend == "mock");
  CHECK(cfg.model.model_name == "default");
  CHECK(cfg.sampling.temperature == doctest::Approx(0.1));
  CHECK(cfg.sampling.top_p == doctest::Approx(1.0));
  CHECK(cfg.sampling.max_tokens == 32168);
  CHECK(cfg.search.max_rollouts == 5);
  CHECK(cfg.search.child_count == 2);
  CHECK(cfg.cache.enabled);
  CHECK(cfg.sql_timeout_s == doctest::Approx(30.0));
  CHECK(cfg.workers == 4);
  CHECK(cfg.refiner_enabled);
  CHECK(cfg.templates_dir == "templates");
  CHECK(cfg.clock_mode == "auto");
}

TEST_CASE("config fields override defaults section by section") {
  TempDir dir;
  const RunConfig cfg = load_text(dir, R"({
    "model": {"backend": "http", "base_url": "http://host:8000", "model_name": "m1"},
    "sampling": {"temperature": 0.7, "max_tokens": 2048},
    "search": {"max_rollouts": 9, "child_count": 3, "early_stop": true},
    "cache": {"enabled": false, "max_entries": 8},
    "execution": {"timeout_s": 5.5},
    "pipeline": {"workers": 2, "refiner_enabled": false},
    "paths": {"templates": "t", "db_root": "dbs", "out_dir": "out"},
    "clock": "steady"
  })");
  CHECK(cfg.model.backend == "http");
  CHECK(cfg.model.base_url == "http://host:8000");
  CHECK(cfg.model.model_name == "m1");
  CHECK(cfg.sampling.temperature == doctest::Approx(0.7));
  CHECK(cfg.sampling.max_tokens == 2048);
  CHECK(cfg.search.max_rollouts == 9);
  CHECK(cfg.search.child_count == 3);
  CHECK(cfg.search.early_stop);
  CHECK_FALSE(cfg.cache.enabled);
  CHECK(cfg.cache.max_entries == 8);
  CHECK(cfg.sql_timeout_s == doctest::Approx(5.5));
  CHECK(cfg.workers == 2);
  CHECK_FALSE(cfg.refiner_enabled);
  CHECK(cfg.db_root == "dbs");
  CHECK_FALSE(cfg.use_tick_clock());

  const PipelineConfig pipeline = cfg.pipeline_config();
  CHECK(pipeline.search.max_rollouts == 9);
  CHECK(pipeline.workers == 2);
  CHECK_FALSE(pipeline.refiner_enabled);
}

TEST_CASE("config validation rejects bad values") {
  TempDir dir;
  CHECK_THROWS_AS(load_text(dir, R"({"model": {"backend": "carrier-pigeon"}})"), ConfigError);
  CHECK_THROWS_AS(load_text(dir, R"({"search": {"max_rollouts": -1}})"), ConfigError);
  CHECK_THROWS_AS(load_text(dir, R"({"search": {"child_count": 0}})"), ConfigError);
  CHECK_THROWS_AS(load_text(dir, R"({"execution": {"timeout_s": 0}})"), ConfigError);
  CHECK_THROWS_AS(load_text(dir, R"({"pipeline": {"workers": 0}})"), ConfigError);
  CHECK_THROWS_AS(load_text(dir, R"({"sampling": {"max_tokens": 0}})"), ConfigError);
  CHECK_THROWS_AS(load_text(dir, R"({"clock": "sundial"})"), ConfigError);
  CHECK_THROWS_AS(load_text(dir, R"({"pipeline": {"workers": "many"}})"), ConfigError);
  CHECK_THROWS_AS(load_text(dir, "not json"), ConfigError);
  CHECK_THROWS_AS(load_text(dir, "[]"), ConfigError);
  CHECK_THROWS_AS(RunConfig::load(dir.file("missing.json")), IoError);
}

TEST_CASE("endpoint URL and API key resolve from the environment") {
  TempDir dir;
  const RunConfig cfg = load_text(dir, R"({
    "model": {"backend": "http", "base_url": "http://from-file", "api_key_env": "SQLREFINE_TEST_KEY"}
  })");

  SUBCASE("the file URL is used when the env var is unset") {
    unsetenv("SQLREFINE_ENDPOINT");
    CHECK(cfg.resolved_base_url() == "http://from-file");
  }
  SUBCASE("SQLREFINE_ENDPOINT wins over the file") {
    EnvVar endpoint("SQLREFINE_ENDPOINT", "http://from-env");
    CHECK(cfg.resolved_base_url() == "http://from-env");
  }
  SUBCASE("the key comes from the configured variable, empty when unset") {
    CHECK(cfg.resolved_api_key().empty());
    EnvVar key("SQLREFINE_TEST_KEY", "s3cret");
    CHECK(cfg.resolved_api_key() == "s3cret");
    CHECK(cfg.http_endpoint_config().api_key == "s3cret");
  }
}

TEST_CASE("clock mode auto follows the backend") {
  TempDir dir;
  CHECK(load_text(dir, R"({"model": {"backend": "mock"}})").use_tick_clock());
  CHECK_FALSE(load_text(dir, R"({"model": {"backend": "http"}})").use_tick_clock());
  CHECK(load_text(dir, R"({"model": {"backend": "http"}, "clock": "tick"})").use_tick_clock());
  CHECK_FALSE(load_text(dir, R"({"model": {"backend": "mock"}, "clock": "steady"})").use_tick_clock());
}
