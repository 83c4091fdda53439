#include "sqlrefine/http_model.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "sqlrefine/errors.hpp"

namespace sqlrefine {

namespace {

std::chrono::milliseconds to_ms(double seconds) {
  return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
}

}  // namespace

HttpChatEndpoint::HttpChatEndpoint(HttpEndpointConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw ConfigError("http endpoint needs a base URL");
  }
  if (config_.max_attempts < 1) config_.max_attempts = 1;
}

Completion HttpChatEndpoint::complete(const AssembledPrompt& prompt,
                                      const SamplingParams& params, AgentRole,
                                      const SessionHandle&) {
  std::int64_t prompt_tokens_local = static_cast<std::int64_t>(prompt.tokens.size());
  std::int64_t completion_budget =
      static_cast<std::int64_t>(params.max_tokens) - prompt_tokens_local;
  if (completion_budget <= 0) {
    throw EndpointError("no completion budget left for a " +
                            std::to_string(prompt_tokens_local) + " token prompt",
                        false);
  }

  nlohmann::json body = {
      {"model", config_.model_name},
      {"messages", {{{"role", "user"}, {"content", prompt.text}}}},
      {"temperature", params.temperature},
      {"top_p", params.top_p},
      {"max_tokens", completion_budget},
  };
  std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      double delay = config_.backoff_initial_s * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(to_ms(delay));
    }
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(to_ms(config_.request_timeout_s));
    client.set_read_timeout(to_ms(config_.request_timeout_s));
    client.set_write_timeout(to_ms(config_.request_timeout_s));

    auto res = client.Post(config_.path, headers, payload, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_failure = "server returned status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw EndpointError("endpoint rejected request with status " +
                              std::to_string(res->status) + ": " + res->body.substr(0, 200),
                          false);
    }

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw EndpointError(std::string("unparseable endpoint response: ") + e.what(), false);
    }
    try {
      Completion c;
      c.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
      if (doc.contains("usage")) {
        const auto& usage = doc.at("usage");
        c.prompt_tokens = usage.value("prompt_tokens", prompt_tokens_local);
        c.completion_tokens =
            usage.value("completion_tokens",
                        static_cast<std::int64_t>(tokenizer_.count(c.text)));
      } else {
        c.prompt_tokens = prompt_tokens_local;
        c.completion_tokens = static_cast<std::int64_t>(tokenizer_.count(c.text));
      }
      // No restorable state over plain HTTP: the full prompt was prefilled.
      c.prefill_tokens_computed = c.prompt_tokens;
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw EndpointError(std::string("endpoint response missing fields: ") + e.what(),
                          false);
    }
  }
  throw EndpointError("endpoint failed after " + std::to_string(config_.max_attempts) +
                          " attempts; last: " + last_failure,
                      true);
}

}  // namespace sqlrefine
