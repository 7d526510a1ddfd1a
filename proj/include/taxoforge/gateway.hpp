#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxoforge/corpus.hpp"
#include "taxoforge/prompts.hpp"

namespace taxoforge {

// Root-to-node facet labels, root topic first.
using NodeTrace = std::vector<std::string>;

struct Aspect {
    std::string name;         // short phrase, at most 8 words
    std::string description;
    std::string origin_node;
};

struct AspectSet {
    std::vector<Aspect> aspects;
    NodeTrace trace;

    std::size_t size() const { return aspects.size(); }
};

struct Summary {
    std::string paper_id;
    std::string aspect_name;
    std::string text;
};

enum class RequestKind { AspectsFirstLevel, AspectsOtherLevel, Summary, Facet };

struct PaperView {
    std::string id;
    std::string title;
    std::string body;   // abstract, or introduction fallback
};

// What a backend sees. Remote backends use only `prompt`; the mock reads
// the structured fields so it can answer deterministically.
struct GatewayRequest {
    RequestKind kind = RequestKind::Summary;
    std::string prompt;
    std::vector<PaperView> papers;   // node papers (aspects) / subset (facet)
    std::vector<PaperView> parent;   // parent papers, facet requests only
    PaperView paper;                 // summary requests only
    std::string aspect_name;
    NodeTrace trace;
    int level = 0;
    int max_aspects = 6;
};

// Thrown by backends on connection-level failures; the gateway retries these.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const GatewayRequest& request) = 0;
    virtual std::string id() const = 0;
};

// Pure function of (request, seed): aspect names come from the most
// frequent content tokens, summaries from sentences mentioning the aspect,
// facet labels from tf-idf against the parent set.
class MockChatBackend : public ChatBackend {
public:
    explicit MockChatBackend(int aspect_count = 3, std::uint64_t seed = 0)
        : aspect_count_(aspect_count), seed_(seed) {}

    std::string complete(const GatewayRequest& request) override;
    std::string id() const override { return "mock-chat/" + std::to_string(seed_); }

private:
    int aspect_count_;
    std::uint64_t seed_;
};

struct GatewayConfig {
    int a_max = 6;                 // aspect cap; prompts ask for 2..a_max
    int summary_budget = 120;      // whitespace tokens
    int facet_max_words = 12;
    int retries = 3;               // transport attempts per call
    int backoff_ms = 500;          // doubled per attempt
    int max_inflight = 8;
    int prompt_paper_chars = 600;  // per-paper text budget inside prompts
};

// All generation steps behind one contract. Two backends: a stronger one
// for aspects and facets, a lighter one for summaries; they may be the
// same object.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<ChatBackend> aspect_backend,
               std::shared_ptr<ChatBackend> summary_backend,
               GatewayConfig config = {},
               PromptLibrary prompts = {});

    AspectSet generate_aspects(const NodeTrace& trace, const std::vector<Paper>& papers,
                               int level, const std::string& node_id = "");

    Summary summarize_paper(const Aspect& aspect, const Paper& paper);

    // One summary per (aspect, paper) pair, issued concurrently and merged
    // by key; result[a * papers.size() + p] pairs aspect a with paper p.
    std::vector<Summary> summarize_all(const std::vector<Aspect>& aspects,
                                       const std::vector<Paper>& papers);

    // `parent` provides the contrast set for naming; falls back to the
    // subset itself when empty.
    std::string name_facet(const NodeTrace& trace, const std::vector<Paper>& subset,
                           const std::string& aspect_name,
                           const std::vector<Paper>& parent = {});

    // Fixed aspect template set used when dynamic generation is disabled.
    std::vector<Aspect> fixed_aspects(const std::string& node_id = "") const;

    const GatewayConfig& config() const { return config_; }
    const PromptLibrary& prompts() const { return prompts_; }
    std::string aspect_backend_id() const { return aspect_backend_->id(); }
    std::string summary_backend_id() const { return summary_backend_->id(); }

private:
    std::string complete_with_retry(ChatBackend& backend, const GatewayRequest& request);

    std::shared_ptr<ChatBackend> aspect_backend_;
    std::shared_ptr<ChatBackend> summary_backend_;
    GatewayConfig config_;
    PromptLibrary prompts_;
};

PaperView to_view(const Paper& p);

// First fenced code block if present, otherwise the whole string.
std::string extract_fenced_block(const std::string& response);

} // namespace taxoforge
