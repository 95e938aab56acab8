#pragma once

#include <memory>
#include <string>
#include <vector>

#include "roundtable/llm_provider.hpp"

namespace httplib {
class Server;
}

namespace roundtable::testing {

/// Deterministic stand-in for a chat model. The reply is a pure function of
/// the prompt text and always follows the documented response layouts, so
/// recorded fixtures and scripted runs agree byte for byte.
std::string scripted_chat_reply(const std::string& prompt);

/// Bag-of-words embedding over a fixed vocabulary plus a bias slot, so no
/// vector is ever all-zero and lexically closer texts get higher cosine.
std::vector<double> scripted_embedding(const std::string& text);

int scripted_embedding_dim();

/// Transport that answers from the scripted model without any networking.
class ScriptedTransport final : public llm::Transport {
public:
  llm::ChatResponse complete(const llm::ProviderConfig& config,
                             const llm::ChatRequest& request) override;
  std::vector<llm::EmbeddingVector> embed(const llm::ProviderConfig& config,
                                          const std::vector<std::string>& texts) override;

  int chat_calls() const { return chat_calls_; }
  int embed_calls() const { return embed_calls_; }

private:
  int chat_calls_ = 0;
  int embed_calls_ = 0;
};

/// Mounts OpenAI-compatible /v1/chat/completions and /v1/embeddings routes
/// backed by the scripted model.
void install_openai_routes(httplib::Server& server);

}  // namespace roundtable::testing
