#pragma once

#include <string>

#include "sqlrefine/model.hpp"

namespace sqlrefine {

struct HttpEndpointConfig {
  std::string base_url;            // e.g. http://host:port
  std::string path = "/v1/chat/completions";
  std::string api_key;             // sent as a bearer token when non-empty
  std::string model_name;
  int max_attempts = 3;
  double backoff_initial_s = 0.5;  // doubles per retry
  double request_timeout_s = 120.0;
};

/// Chat-completions client over HTTP. Transport failures and 5xx responses
/// are retried with exponential backoff up to max_attempts; 4xx responses
/// and unparseable bodies fail immediately. Cannot restore server state, so
/// supports_sessions() is false and every call prefills the whole prompt.
class HttpChatEndpoint final : public ModelEndpoint {
 public:
  explicit HttpChatEndpoint(HttpEndpointConfig config);

  Completion complete(const AssembledPrompt& prompt, const SamplingParams& params,
                      AgentRole role, const SessionHandle& session) override;
  bool supports_sessions() const override { return false; }

 private:
  HttpEndpointConfig config_;
  WordTokenizer tokenizer_;
};

}  // namespace sqlrefine
