#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <json.hpp>

#include "vsql/identifiers.hpp"
#include "vsql/llm.hpp"

namespace vsql::llm {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("provider base URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  Endpoint e{url.substr(0, slash), slash == std::string::npos ? "" : url.substr(slash)};
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

}  // namespace

HttpProvider::HttpProvider(std::string base_url, std::optional<std::string> api_key, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), timeout_(timeout) {
  if (!api_key_) {
    if (const char* env = std::getenv(kApiKeyEnv); env && *env) api_key_ = env;
  }
  split_url(base_url_);
}

Completion HttpProvider::complete(const std::string& prompt, const GenerationSettings& settings) {
  if (!api_key_ || api_key_->empty()) {
    throw GatewayError(GatewayError::Reason::auth,
                       std::string("no API key: set ") + kApiKeyEnv + " (credentials are never read from config)");
  }
  const auto endpoint = split_url(base_url_);
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  client.set_bearer_token_auth(*api_key_);

  const nlohmann::json body = {
      {"model", settings.model_id},
      {"messages", {{{"role", "user"}, {"content", prompt}}}},
      {"temperature", settings.temperature},
      {"top_p", settings.top_p},
      {"max_tokens", settings.max_tokens},
  };
  const auto res = client.Post(endpoint.path + "/chat/completions", body.dump(), "application/json");
  if (!res) {
    throw GatewayError(GatewayError::Reason::transient,
                       "transport failure talking to " + endpoint.origin + ": " + httplib::to_string(res.error()));
  }
  const auto status = res->status;
  if (status == 401 || status == 403) {
    throw GatewayError(GatewayError::Reason::auth, "provider rejected credentials (HTTP " + std::to_string(status) + ")");
  }
  if (status == 429 || status >= 500) {
    throw GatewayError(GatewayError::Reason::transient, "provider returned HTTP " + std::to_string(status));
  }
  if (status != 200) {
    const bool overflow = res->body.find("context_length") != std::string::npos ||
                          res->body.find("maximum context") != std::string::npos;
    throw GatewayError(overflow ? GatewayError::Reason::context_overflow : GatewayError::Reason::bad_response,
                       "provider returned HTTP " + std::to_string(status) + ": " + res->body.substr(0, 300));
  }

  try {
    const auto j = nlohmann::json::parse(res->body);
    Completion c;
    c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      const auto& u = j["usage"];
      if (u.contains("prompt_tokens")) c.prompt_tokens = u["prompt_tokens"].get<std::size_t>();
      if (u.contains("completion_tokens")) c.completion_tokens = u["completion_tokens"].get<std::size_t>();
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError(GatewayError::Reason::bad_response, std::string("unexpected provider response: ") + e.what());
  }
}

}  // namespace vsql::llm
