#include "roundtable/llm_provider.hpp"

#include <nlohmann/json.hpp>

#include <condition_variable>
#include <cstdlib>
#include <thread>

#include "roundtable/io.hpp"

namespace roundtable::llm {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view role_name(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_name(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  if (name == "assistant") return Role::assistant;
  throw ParseError("unknown message role: " + std::string(name));
}

std::string_view finish_reason_name(FinishReason r) {
  switch (r) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::content_filter: return "content_filter";
    case FinishReason::unknown: return "unknown";
  }
  return "unknown";
}

FinishReason finish_reason_from_name(std::string_view name) {
  if (name == "stop") return FinishReason::stop;
  if (name == "length") return FinishReason::length;
  if (name == "content_filter") return FinishReason::content_filter;
  return FinishReason::unknown;
}

std::string_view mode_name(ProviderMode mode) {
  switch (mode) {
    case ProviderMode::live: return "live";
    case ProviderMode::replay: return "replay";
    case ProviderMode::record: return "record";
  }
  return "replay";
}

ProviderMode mode_from_name(std::string_view name) {
  if (name == "live") return ProviderMode::live;
  if (name == "replay") return ProviderMode::replay;
  if (name == "record") return ProviderMode::record;
  throw ParseError("unknown provider mode: " + std::string(name));
}

namespace {

void validate_chat_request(const ChatRequest& request) {
  if (request.messages.empty()) throw ValidationError("chat request has no messages");
  Role first = request.messages.front().role;
  if (first != Role::system && first != Role::user) {
    throw ValidationError("first chat message must be system or user");
  }
  if (request.temperature < 0) throw ValidationError("temperature must be >= 0");
  if (request.max_tokens <= 0) throw ValidationError("max_tokens must be positive");
}

json canonical_chat_payload(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  // Plain nlohmann::json orders keys alphabetically, which gives a canonical
  // byte string for hashing.
  return json{{"kind", "chat"},
              {"model", request.model_name},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens},
              {"messages", std::move(messages)}};
}

void check_stop_content(const ChatResponse& response, const std::string& origin) {
  if (response.finish_reason == FinishReason::stop && response.content.empty()) {
    throw ValidationError("empty content with finish_reason=stop (" + origin + ")");
  }
}

ordered_json response_to_json(const ChatResponse& r) {
  return ordered_json{{"content", r.content},
                      {"finish_reason", finish_reason_name(r.finish_reason)},
                      {"usage",
                       {{"prompt_tokens", r.usage.prompt_tokens},
                        {"completion_tokens", r.usage.completion_tokens},
                        {"total_tokens", r.usage.total_tokens}}}};
}

ChatResponse response_from_json(const json& j, const std::string& origin) {
  ChatResponse r;
  r.content = j.at("content").get<std::string>();
  r.finish_reason = finish_reason_from_name(j.at("finish_reason").get<std::string>());
  if (j.contains("usage")) {
    const auto& u = j.at("usage");
    r.usage.prompt_tokens = u.value("prompt_tokens", 0L);
    r.usage.completion_tokens = u.value("completion_tokens", 0L);
    r.usage.total_tokens = u.value("total_tokens", 0L);
  }
  check_stop_content(r, origin);
  return r;
}

}  // namespace

std::string request_key(const ChatRequest& request) {
  return io::sha256_hex(canonical_chat_payload(request).dump());
}

std::string embedding_key(const std::string& model_name, const std::vector<std::string>& texts) {
  json payload{{"kind", "embedding"}, {"model", model_name}, {"texts", texts}};
  return io::sha256_hex(payload.dump());
}

// ---------------------------------------------------------------------------
// Concurrency limiter (runtime-sized semaphore)

class RequestLimiter {
public:
  explicit RequestLimiter(int slots) : slots_(slots > 0 ? slots : 1) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_flight_ < slots_; });
    ++in_flight_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      --in_flight_;
    }
    cv_.notify_one();
  }

private:
  int slots_;
  int in_flight_ = 0;
  std::mutex mutex_;
  std::condition_variable cv_;
};

namespace {

struct LimiterGuard {
  RequestLimiter* limiter;
  ~LimiterGuard() { limiter->release(); }
};

}  // namespace

// ---------------------------------------------------------------------------
// Provider

Provider::Provider(ProviderConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (config_.retry.max_attempts < 1) {
    throw ValidationError("retry.max_attempts must be >= 1");
  }
  if (config_.mode != ProviderMode::live && config_.fixture_dir.empty()) {
    throw ValidationError("fixture_dir is required in " + std::string(mode_name(config_.mode)) +
                          " mode");
  }
  const bool needs_transport = config_.mode != ProviderMode::replay;
  if (needs_transport && !transport_) {
    // Live traffic needs credentials up front so a misconfigured run fails
    // before any work happens.
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ProviderError("API key environment variable " + config_.api_key_env + " is not set");
    }
    transport_ = make_http_transport();
  }
  limiter_ = std::make_shared<RequestLimiter>(config_.max_concurrent);
}

std::vector<RequestLogEntry> Provider::request_log() const {
  std::lock_guard lock(log_mutex_);
  return request_log_;
}

void Provider::clear_request_log() {
  std::lock_guard lock(log_mutex_);
  request_log_.clear();
}

void Provider::log_request(RequestLogEntry entry) {
  std::lock_guard lock(log_mutex_);
  request_log_.push_back(std::move(entry));
}

template <typename Fn>
auto Provider::with_retries(Fn&& fn) -> decltype(fn()) {
  int attempt = 0;
  auto backoff = config_.retry.base_backoff;
  for (;;) {
    ++attempt;
    try {
      limiter_->acquire();
      LimiterGuard guard{limiter_.get()};
      return fn();
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= config_.retry.max_attempts) throw;
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
}

ChatResponse Provider::complete(const ChatRequest& request) {
  validate_chat_request(request);
  const std::string key = request_key(request);

  {
    std::string payload;
    for (const auto& m : request.messages) {
      payload += m.content;
      payload.push_back('\n');
    }
    log_request({request.request_tag, "chat", key, std::move(payload)});
  }

  if (config_.cache_enabled) {
    std::lock_guard lock(cache_mutex_);
    auto it = chat_cache_.find(key);
    if (it != chat_cache_.end()) {
      ChatResponse hit = it->second;
      hit.cached = true;
      return hit;
    }
  }

  ChatResponse response = complete_uncached(request, key);
  response.cached = false;
  if (config_.cache_enabled) {
    std::lock_guard lock(cache_mutex_);
    chat_cache_.emplace(key, response);
  }
  return response;
}

ChatResponse Provider::complete_uncached(const ChatRequest& request, const std::string& key) {
  const auto fixture_path = config_.fixture_dir / (key + ".json");

  if (config_.mode == ProviderMode::replay) {
    if (!std::filesystem::exists(fixture_path)) throw MissingFixtureError(key);
    json record;
    try {
      record = json::parse(io::read_file(fixture_path));
    } catch (const json::exception& e) {
      throw ParseError("fixture " + fixture_path.string() + " is malformed: " + e.what());
    }
    return response_from_json(record.at("response"), "fixture " + key);
  }

  ChatResponse response =
      with_retries([&] { return transport_->complete(config_, request); });
  check_stop_content(response, "endpoint response");

  if (config_.mode == ProviderMode::record) {
    ordered_json messages = ordered_json::array();
    for (const auto& m : request.messages) {
      messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    ordered_json record{
        {"key", key},
        {"kind", "chat"},
        {"request",
         {{"model", request.model_name},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens},
          {"tag", request.request_tag},
          {"messages", std::move(messages)}}},
        {"response", response_to_json(response)}};
    io::write_file_atomic(fixture_path, record.dump(2) + "\n");
  }
  return response;
}

std::vector<EmbeddingVector> Provider::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw ValidationError("embed: texts list is empty");
  for (const auto& t : texts) {
    if (t.empty()) throw ValidationError("embed: empty text in batch");
  }
  const std::string key = embedding_key(config_.embedding_model, texts);

  {
    std::string payload;
    for (const auto& t : texts) {
      payload += t;
      payload.push_back('\n');
    }
    log_request({"", "embedding", key, std::move(payload)});
  }

  if (config_.cache_enabled) {
    std::lock_guard lock(cache_mutex_);
    auto it = embedding_cache_.find(key);
    if (it != embedding_cache_.end()) return it->second;
  }

  std::vector<EmbeddingVector> vectors = embed_uncached(texts, key);

  if (vectors.size() != texts.size()) {
    throw ProviderError("embedding count mismatch: got " + std::to_string(vectors.size()) +
                        " vectors for " + std::to_string(texts.size()) + " texts");
  }
  for (const auto& v : vectors) {
    if (v.values.empty()) throw ValidationError("embedding vector is empty");
    if (v.dim() != vectors.front().dim()) {
      throw ProviderError("inconsistent embedding dimensions within batch");
    }
    bool all_zero = true;
    for (double x : v.values) {
      if (x != 0.0) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) throw ValidationError("embedding vector is all-zero");
  }

  if (config_.cache_enabled) {
    std::lock_guard lock(cache_mutex_);
    embedding_cache_.emplace(key, vectors);
  }
  return vectors;
}

std::vector<EmbeddingVector> Provider::embed_uncached(const std::vector<std::string>& texts,
                                                      const std::string& key) {
  const auto fixture_path = config_.fixture_dir / (key + ".json");

  if (config_.mode == ProviderMode::replay) {
    if (!std::filesystem::exists(fixture_path)) throw MissingFixtureError(key);
    json record;
    try {
      record = json::parse(io::read_file(fixture_path));
    } catch (const json::exception& e) {
      throw ParseError("fixture " + fixture_path.string() + " is malformed: " + e.what());
    }
    std::vector<EmbeddingVector> vectors;
    for (const auto& values : record.at("response").at("vectors")) {
      vectors.push_back({values.get<std::vector<double>>(), config_.embedding_model});
    }
    return vectors;
  }

  std::vector<EmbeddingVector> vectors =
      with_retries([&] { return transport_->embed(config_, texts); });

  if (config_.mode == ProviderMode::record) {
    ordered_json vecs = ordered_json::array();
    for (const auto& v : vectors) vecs.push_back(v.values);
    ordered_json record{{"key", key},
                        {"kind", "embedding"},
                        {"request", {{"model", config_.embedding_model}, {"texts", texts}}},
                        {"response", {{"vectors", std::move(vecs)}}}};
    io::write_file_atomic(fixture_path, record.dump(2) + "\n");
  }
  return vectors;
}

}  // namespace roundtable::llm
