#pragma once

#include <string>

#include "taxoforge/embedder.hpp"
#include "taxoforge/gateway.hpp"

namespace taxoforge {

// Connection settings for an OpenAI-style HTTP service. `url` is the
// server base (scheme://host[:port][/prefix]); the standard route is
// appended. Credentials go out as a bearer token.
struct RemoteEndpoint {
    std::string url;
    std::string api_key;
    std::string model;
    double temperature = 0.2;
    int max_tokens = 1024;
    int timeout_s = 120;
};

// env: TAXOFORGE_LLM_URL / TAXOFORGE_LLM_KEY
RemoteEndpoint llm_endpoint_from_env();
// env: TAXOFORGE_EMB_URL / TAXOFORGE_EMB_KEY
RemoteEndpoint embedding_endpoint_from_env();

// POSTs a chat-completion request and returns the first choice's content.
// Connection and 5xx failures surface as TransportError so the gateway's
// retry policy applies.
class RemoteChatBackend : public ChatBackend {
public:
    explicit RemoteChatBackend(RemoteEndpoint endpoint);
    std::string complete(const GatewayRequest& request) override;
    std::string id() const override;

private:
    RemoteEndpoint endpoint_;
};

// Builds the JSON request body; exposed for wire-format tests.
std::string chat_request_body(const RemoteEndpoint& endpoint, const std::string& prompt);
std::string parse_chat_response(const std::string& body);

class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dimension, std::size_t batch_size = 64);
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
    std::size_t dimension() const override { return dim_; }
    std::string id() const override;

private:
    RemoteEndpoint endpoint_;
    std::size_t dim_;
    std::size_t batch_size_;
};

std::string embedding_request_body(const RemoteEndpoint& endpoint,
                                   const std::vector<std::string>& texts);
std::vector<EmbeddingVector> parse_embedding_response(const std::string& body);

} // namespace taxoforge
