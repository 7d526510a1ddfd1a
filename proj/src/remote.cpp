#include "taxoforge/remote.hpp"

#include <cmath>
#include <cstdlib>
#include <memory>

#include "taxoforge/errors.hpp"

#include <httplib.h>
#include <json.hpp>

namespace taxoforge {

using nlohmann::json;

namespace {

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string{};
}

// scheme://host[:port][/prefix] -> (base for the client, path prefix)
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw config_error("endpoint url '" + url + "' lacks a scheme");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    if (prefix == "/") prefix.clear();
    return {url.substr(0, path_start), prefix};
}

std::string post_json(const RemoteEndpoint& endpoint, const std::string& route,
                      const std::string& body) {
    auto [base, prefix] = split_url(endpoint.url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (base.rfind("https://", 0) == 0)
        throw config_error("built without TLS support; use an http:// endpoint");
#endif
    httplib::Client client(base);
    client.set_connection_timeout(endpoint.timeout_s, 0);
    client.set_read_timeout(endpoint.timeout_s, 0);
    httplib::Headers headers;
    if (!endpoint.api_key.empty())
        headers.emplace("Authorization", "Bearer " + endpoint.api_key);

    auto res = client.Post(prefix + route, headers, body, "application/json");
    if (!res)
        throw TransportError("no response from " + base + ": " + httplib::to_string(res.error()));
    if (res->status >= 500)
        throw TransportError("server error " + std::to_string(res->status) + " from " + base);
    if (res->status != 200)
        throw gateway_error("request to " + base + route + " failed with status " +
                            std::to_string(res->status) + ": " + res->body);
    return res->body;
}

} // namespace

RemoteEndpoint llm_endpoint_from_env() {
    RemoteEndpoint e;
    e.url = env_or_empty("TAXOFORGE_LLM_URL");
    e.api_key = env_or_empty("TAXOFORGE_LLM_KEY");
    return e;
}

RemoteEndpoint embedding_endpoint_from_env() {
    RemoteEndpoint e;
    e.url = env_or_empty("TAXOFORGE_EMB_URL");
    e.api_key = env_or_empty("TAXOFORGE_EMB_KEY");
    return e;
}

// ---------------------------------------------------------------------------
// chat

std::string chat_request_body(const RemoteEndpoint& endpoint, const std::string& prompt) {
    json body;
    body["model"] = endpoint.model;
    body["temperature"] = endpoint.temperature;
    body["max_tokens"] = endpoint.max_tokens;
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
    return body.dump();
}

std::string parse_chat_response(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw gateway_error(std::string("chat response is not JSON: ") + e.what());
    }
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw gateway_error("chat response lacks choices[0].message.content");
    }
}

RemoteChatBackend::RemoteChatBackend(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.url.empty())
        throw config_error("chat backend requires a url (flag, config, or TAXOFORGE_LLM_URL)");
}

std::string RemoteChatBackend::complete(const GatewayRequest& request) {
    std::string body = post_json(endpoint_, "/v1/chat/completions",
                                 chat_request_body(endpoint_, request.prompt));
    return parse_chat_response(body);
}

std::string RemoteChatBackend::id() const {
    return "remote-chat/" + endpoint_.model + "@" + endpoint_.url;
}

// ---------------------------------------------------------------------------
// embeddings

std::string embedding_request_body(const RemoteEndpoint& endpoint,
                                   const std::vector<std::string>& texts) {
    json body;
    body["model"] = endpoint.model;
    body["input"] = texts;
    return body.dump();
}

std::vector<EmbeddingVector> parse_embedding_response(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw gateway_error(std::string("embedding response is not JSON: ") + e.what());
    }
    if (!j.contains("data") || !j["data"].is_array())
        throw gateway_error("embedding response lacks 'data'");
    std::vector<std::pair<int, EmbeddingVector>> indexed;
    for (const auto& item : j["data"]) {
        EmbeddingVector v = item.at("embedding").get<EmbeddingVector>();
        indexed.emplace_back(item.value("index", static_cast<int>(indexed.size())), std::move(v));
    }
    std::sort(indexed.begin(), indexed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<EmbeddingVector> out;
    out.reserve(indexed.size());
    for (auto& [idx, v] : indexed) out.push_back(std::move(v));
    return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dimension, std::size_t batch_size)
    : endpoint_(std::move(endpoint)), dim_(dimension), batch_size_(batch_size ? batch_size : 64) {
    if (endpoint_.url.empty())
        throw config_error("embedding backend requires a url (flag, config, or TAXOFORGE_EMB_URL)");
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty())
            throw contract_error("embed_batch: empty text at index " + std::to_string(i));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
        std::vector<std::string> chunk(texts.begin() + start,
                                       texts.begin() + std::min(texts.size(), start + batch_size_));
        std::string body = post_json(endpoint_, "/v1/embeddings",
                                     embedding_request_body(endpoint_, chunk));
        auto vectors = parse_embedding_response(body);
        if (vectors.size() != chunk.size())
            throw gateway_error("embedding response count " + std::to_string(vectors.size()) +
                                " does not match request count " + std::to_string(chunk.size()));
        for (auto& v : vectors) {
            if (dim_ == 0) dim_ = v.size();
            if (v.size() != dim_)
                throw gateway_error("embedding dimension " + std::to_string(v.size()) +
                                    " does not match expected " + std::to_string(dim_));
            double norm2 = 0.0;
            for (double x : v) norm2 += x * x;
            if (norm2 <= 0.0) throw gateway_error("embedding service returned a zero vector");
            double inv = 1.0 / std::sqrt(norm2);
            for (double& x : v) x *= inv;
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::string RemoteEmbedder::id() const {
    return "remote-emb/" + endpoint_.model + "@" + endpoint_.url;
}

} // namespace taxoforge
