#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "roundtable/errors.hpp"

namespace roundtable::llm {

enum class Role { system, user, assistant };
std::string_view role_name(Role role);
Role role_from_name(std::string_view name);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct ChatRequest {
  std::string model_name;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  /// Free-text label carried into fixtures and the request log. Excluded
  /// from request_key by contract.
  std::string request_tag;
};

enum class FinishReason { stop, length, content_filter, unknown };
std::string_view finish_reason_name(FinishReason r);
FinishReason finish_reason_from_name(std::string_view name);

struct TokenUsage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long total_tokens = 0;
};

struct ChatResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::unknown;
  TokenUsage usage;
  bool cached = false;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_name;
  int dim() const { return static_cast<int>(values.size()); }
};

enum class ProviderMode { live, replay, record };
std::string_view mode_name(ProviderMode mode);
ProviderMode mode_from_name(std::string_view name);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{200};
};

struct ProviderConfig {
  std::string base_url = "https://api.openai.com";
  std::string path_prefix = "/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string chat_model = "gpt-4";
  std::string embedding_model = "text-embedding-3-large";
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry;
  ProviderMode mode = ProviderMode::replay;
  std::filesystem::path fixture_dir;
  bool cache_enabled = true;
  int max_concurrent = 4;
};

/// Raised by transports; `retryable` distinguishes transient network/server
/// failures from hard request errors.
class TransportError : public ProviderError {
public:
  TransportError(const std::string& what, bool retryable, int http_status = 0)
      : ProviderError(what), retryable_(retryable), http_status_(http_status) {}
  bool retryable() const { return retryable_; }
  int http_status() const { return http_status_; }

private:
  bool retryable_;
  int http_status_;
};

/// Seam between the provider and the outside world. The default
/// implementation speaks the OpenAI-compatible HTTP protocol; tests inject
/// in-process stand-ins.
class Transport {
public:
  virtual ~Transport() = default;
  virtual ChatResponse complete(const ProviderConfig& config, const ChatRequest& request) = 0;
  virtual std::vector<EmbeddingVector> embed(const ProviderConfig& config,
                                             const std::vector<std::string>& texts) = 0;
};

/// OpenAI-compatible client: POST {base_url}{path_prefix}/chat/completions
/// and .../embeddings with bearer auth from the configured env var.
std::unique_ptr<Transport> make_http_transport();

/// Stable digest over (model_name, messages, temperature, max_tokens).
/// request_tag is excluded by contract.
std::string request_key(const ChatRequest& request);

/// Stable digest over (model_name, texts) for embedding calls.
std::string embedding_key(const std::string& model_name, const std::vector<std::string>& texts);

struct RequestLogEntry {
  std::string tag;
  std::string kind;  // "chat" | "embedding"
  std::string key;
  std::string payload;  // concatenated message contents / embedded texts
};

class RequestLimiter;

/// Chat-completion and embedding access with a response cache, bounded
/// retries, a concurrency limiter for live calls, and a directory-backed
/// record/replay fixture store (one file per request key).
class Provider {
public:
  explicit Provider(ProviderConfig config, std::shared_ptr<Transport> transport = nullptr);

  ChatResponse complete(const ChatRequest& request);
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

  const ProviderConfig& config() const { return config_; }

  /// Copy of every request seen so far, in issue order. Used by tests that
  /// assert on prompt contents (e.g. that vanilla supplements never see
  /// transcript text).
  std::vector<RequestLogEntry> request_log() const;
  void clear_request_log();

private:
  ChatResponse complete_uncached(const ChatRequest& request, const std::string& key);
  std::vector<EmbeddingVector> embed_uncached(const std::vector<std::string>& texts,
                                              const std::string& key);
  template <typename Fn>
  auto with_retries(Fn&& fn) -> decltype(fn());
  void log_request(RequestLogEntry entry);

  ProviderConfig config_;
  std::shared_ptr<Transport> transport_;

  mutable std::mutex cache_mutex_;
  std::map<std::string, ChatResponse> chat_cache_;
  std::map<std::string, std::vector<EmbeddingVector>> embedding_cache_;

  mutable std::mutex log_mutex_;
  std::vector<RequestLogEntry> request_log_;

  std::shared_ptr<RequestLimiter> limiter_;
};

}  // namespace roundtable::llm
