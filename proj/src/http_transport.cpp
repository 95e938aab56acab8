#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <nlohmann/json.hpp>

#include <cstdlib>

#include "roundtable/llm_provider.hpp"

namespace roundtable::llm {

using nlohmann::json;

namespace {

std::string api_key_from_env(const ProviderConfig& config) {
  const char* key = std::getenv(config.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ProviderError("API key environment variable " + config.api_key_env + " is not set");
  }
  return key;
}

json post_json(const ProviderConfig& config, const std::string& path, const json& body) {
  httplib::Client client(config.base_url);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  client.set_connection_timeout(seconds);
  client.set_read_timeout(seconds);
  client.set_write_timeout(seconds);
  client.set_bearer_token_auth(api_key_from_env(config));

  auto result = client.Post(config.path_prefix + path, body.dump(), "application/json");
  if (!result) {
    throw TransportError("network error calling " + config.base_url + config.path_prefix + path +
                             ": " + httplib::to_string(result.error()),
                         /*retryable=*/true);
  }
  if (result->status < 200 || result->status >= 300) {
    const bool retryable = result->status == 429 || result->status >= 500;
    throw TransportError("HTTP " + std::to_string(result->status) + " from " + path + ": " +
                             result->body.substr(0, 512),
                         retryable, result->status);
  }
  try {
    return json::parse(result->body);
  } catch (const json::exception& e) {
    throw ProviderError("malformed endpoint payload from " + path + ": " + e.what());
  }
}

class HttpTransport final : public Transport {
public:
  ChatResponse complete(const ProviderConfig& config, const ChatRequest& request) override {
    json messages = json::array();
    for (const auto& m : request.messages) {
      messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    json body{{"model", request.model_name},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};

    json payload = post_json(config, "/chat/completions", body);
    try {
      const auto& choice = payload.at("choices").at(0);
      ChatResponse response;
      response.content = choice.at("message").at("content").get<std::string>();
      response.finish_reason = finish_reason_from_name(choice.value("finish_reason", "unknown"));
      if (payload.contains("usage")) {
        const auto& usage = payload.at("usage");
        response.usage.prompt_tokens = usage.value("prompt_tokens", 0L);
        response.usage.completion_tokens = usage.value("completion_tokens", 0L);
        response.usage.total_tokens = usage.value("total_tokens", 0L);
      }
      return response;
    } catch (const json::exception& e) {
      throw ProviderError(std::string("malformed endpoint payload (chat): ") + e.what());
    }
  }

  std::vector<EmbeddingVector> embed(const ProviderConfig& config,
                                     const std::vector<std::string>& texts) override {
    json body{{"model", config.embedding_model}, {"input", texts}};
    json payload = post_json(config, "/embeddings", body);
    try {
      const auto& data = payload.at("data");
      std::vector<EmbeddingVector> vectors(data.size());
      for (const auto& item : data) {
        const auto index = item.at("index").get<std::size_t>();
        if (index >= vectors.size()) throw ProviderError("embedding index out of range");
        vectors[index] = {item.at("embedding").get<std::vector<double>>(),
                          config.embedding_model};
      }
      return vectors;
    } catch (const json::exception& e) {
      throw ProviderError(std::string("malformed endpoint payload (embeddings): ") + e.what());
    }
  }
};

}  // namespace

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttpTransport>(); }

}  // namespace roundtable::llm
