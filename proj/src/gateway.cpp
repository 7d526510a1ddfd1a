#include "taxoforge/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <sstream>
#include <thread>

#include "taxoforge/errors.hpp"
#include "taxoforge/text.hpp"

#include <json.hpp>

namespace taxoforge {

using nlohmann::json;

PaperView to_view(const Paper& p) {
    return {p.id, p.title, p.body()};
}

std::string extract_fenced_block(const std::string& response) {
    auto open = response.find("```");
    if (open == std::string::npos) return response;
    auto body_start = response.find('\n', open);
    if (body_start == std::string::npos) return response;
    auto close = response.find("```", body_start);
    if (close == std::string::npos) return response;
    return response.substr(body_start + 1, close - body_start - 1);
}

// ---------------------------------------------------------------------------
// MockChatBackend

namespace {

std::vector<std::string> view_texts(const std::vector<PaperView>& papers) {
    std::vector<std::string> texts;
    texts.reserve(papers.size());
    for (const auto& p : papers) texts.push_back(p.title + " " + p.body);
    return texts;
}

std::string mock_aspects_response(const GatewayRequest& req, int aspect_count) {
    int want = std::clamp(aspect_count, 2, req.max_aspects);
    auto names = text::top_frequent_tokens(view_texts(req.papers), static_cast<std::size_t>(want));
    const char* padding[] = {"general", "other", "misc", "extra"};
    for (int i = 0; names.size() < 2 && i < 4; ++i) {
        if (std::find(names.begin(), names.end(), padding[i]) == names.end())
            names.push_back(padding[i]);
    }
    json arr = json::array();
    for (const auto& n : names) {
        arr.push_back({{"name", n}, {"description", "Groups papers by the '" + n + "' dimension."}});
    }
    return "```json\n" + arr.dump() + "\n```";
}

std::string mock_summary_response(const GatewayRequest& req) {
    const auto& p = req.paper;
    auto aspect_tokens = text::tokenize(req.aspect_name);
    std::ostringstream out;
    out << p.title;
    for (const auto& sentence : text::split_sentences(p.body)) {
        auto sent_tokens = text::tokenize(sentence);
        bool hit = std::any_of(aspect_tokens.begin(), aspect_tokens.end(), [&](const std::string& a) {
            return std::find(sent_tokens.begin(), sent_tokens.end(), a) != sent_tokens.end();
        });
        if (hit) out << ' ' << sentence;
    }
    return out.str();
}

std::string mock_facet_response(const GatewayRequest& req) {
    auto subset_texts = view_texts(req.papers);
    auto parent_texts = req.parent.empty() ? subset_texts : view_texts(req.parent);
    auto toks = text::top_tfidf_tokens(subset_texts, parent_texts, 2);
    if (toks.empty()) toks.push_back("general");
    std::sort(toks.begin(), toks.end());
    return text::join(toks, " ");
}

} // namespace

std::string MockChatBackend::complete(const GatewayRequest& request) {
    switch (request.kind) {
        case RequestKind::AspectsFirstLevel:
        case RequestKind::AspectsOtherLevel:
            return mock_aspects_response(request, aspect_count_);
        case RequestKind::Summary:
            return mock_summary_response(request);
        case RequestKind::Facet:
            return mock_facet_response(request);
    }
    throw gateway_error("mock backend: unknown request kind");
}

// ---------------------------------------------------------------------------
// LlmGateway

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> aspect_backend,
                       std::shared_ptr<ChatBackend> summary_backend,
                       GatewayConfig config, PromptLibrary prompts)
    : aspect_backend_(std::move(aspect_backend)),
      summary_backend_(std::move(summary_backend)),
      config_(config),
      prompts_(std::move(prompts)) {
    if (!aspect_backend_ || !summary_backend_) throw config_error("gateway requires two backends");
}

std::string LlmGateway::complete_with_retry(ChatBackend& backend, const GatewayRequest& request) {
    std::string last_error;
    for (int attempt = 0; attempt < config_.retries; ++attempt) {
        try {
            return backend.complete(request);
        } catch (const TransportError& e) {
            last_error = e.what();
            if (attempt + 1 < config_.retries && config_.backoff_ms > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms << attempt));
            }
        }
    }
    throw gateway_error("backend '" + backend.id() + "' failed after " +
                        std::to_string(config_.retries) + " attempts: " + last_error);
}

namespace {

std::string clip(const std::string& s, std::size_t max_chars) {
    if (s.size() <= max_chars) return s;
    return s.substr(0, max_chars) + "...";
}

std::string papers_slot(const std::vector<PaperView>& papers, int per_paper_chars) {
    std::ostringstream out;
    for (std::size_t i = 0; i < papers.size(); ++i) {
        out << (i + 1) << ". " << papers[i].title << ": "
            << clip(papers[i].body, static_cast<std::size_t>(per_paper_chars)) << '\n';
    }
    return out.str();
}

std::string trace_slot(const NodeTrace& trace) {
    return text::join(trace, " > ");
}

// Parse a JSON array of {name, description} objects; empty on failure.
std::vector<Aspect> parse_aspect_array(const std::string& response) {
    std::vector<Aspect> out;
    json arr;
    try {
        arr = json::parse(extract_fenced_block(response));
    } catch (const json::exception&) {
        try {
            arr = json::parse(response);
        } catch (const json::exception&) {
            return out;
        }
    }
    if (!arr.is_array()) return out;
    for (const auto& item : arr) {
        if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) continue;
        Aspect a;
        a.name = item["name"].get<std::string>();
        if (item.contains("description") && item["description"].is_string())
            a.description = item["description"].get<std::string>();
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace

AspectSet LlmGateway::generate_aspects(const NodeTrace& trace, const std::vector<Paper>& papers,
                                       int level, const std::string& node_id) {
    if (papers.empty()) throw contract_error("generate_aspects: empty paper set");
    if (level < 0) throw contract_error("generate_aspects: negative level");
    if (trace.empty()) throw contract_error("generate_aspects: empty trace");

    GatewayRequest req;
    req.kind = level == 0 ? RequestKind::AspectsFirstLevel : RequestKind::AspectsOtherLevel;
    req.trace = trace;
    req.level = level;
    req.max_aspects = config_.a_max;
    req.papers.reserve(papers.size());
    for (const auto& p : papers) req.papers.push_back(to_view(p));

    std::map<std::string, std::string> slots = {
        {"topic", trace.front()},
        {"trace", trace_slot(trace)},
        {"papers", papers_slot(req.papers, config_.prompt_paper_chars)},
        {"level", std::to_string(level)},
        {"max_aspects", std::to_string(config_.a_max)},
    };
    const char* tpl = level == 0 ? PromptLibrary::kAspectsFirstLevel : PromptLibrary::kAspectsOtherLevel;
    req.prompt = prompts_.render(tpl, slots);

    // one automatic reprompt on an unparseable or invalid reply
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response = complete_with_retry(*aspect_backend_, req);
        auto parsed = parse_aspect_array(response);

        std::vector<Aspect> accepted;
        std::set<std::string> seen;
        for (auto& a : parsed) {
            a.name = text::truncate_words(a.name, 8);
            if (a.name.empty()) continue;
            std::string key = text::to_lower(a.name);
            if (!seen.insert(key).second) continue;
            a.origin_node = node_id;
            accepted.push_back(std::move(a));
            if (accepted.size() == static_cast<std::size_t>(config_.a_max)) break;
        }
        if (accepted.size() >= 2) {
            AspectSet set;
            set.aspects = std::move(accepted);
            set.trace = trace;
            return set;
        }
        req.prompt += "\n\nYour previous reply could not be used. Output only a fenced JSON array "
                      "of objects with string fields \"name\" and \"description\", with between 2 and " +
                      std::to_string(config_.a_max) + " elements.";
    }
    throw format_error("aspect generation returned no usable aspect list after one reprompt");
}

Summary LlmGateway::summarize_paper(const Aspect& aspect, const Paper& paper) {
    if (paper.body().empty())
        throw contract_error("summarize_paper: paper '" + paper.id + "' has no abstract or introduction");

    GatewayRequest req;
    req.kind = RequestKind::Summary;
    req.aspect_name = aspect.name;
    req.paper = to_view(paper);
    req.prompt = prompts_.render(PromptLibrary::kSummary,
                                 {{"aspect", aspect.name},
                                  {"paper", req.paper.title + "\n" + req.paper.body}});

    std::string response = complete_with_retry(*summary_backend_, req);
    std::string body = text::truncate_words(response, static_cast<std::size_t>(config_.summary_budget));
    if (body.empty())
        throw format_error("empty summary for paper '" + paper.id + "' under aspect '" + aspect.name + "'");
    return Summary{paper.id, aspect.name, std::move(body)};
}

std::vector<Summary> LlmGateway::summarize_all(const std::vector<Aspect>& aspects,
                                               const std::vector<Paper>& papers) {
    const std::size_t total = aspects.size() * papers.size();
    std::vector<Summary> out(total);
    std::vector<char> done(total, 0);

    std::atomic<std::size_t> cursor{0};
    std::atomic<std::size_t> first_error{total};
    std::vector<std::exception_ptr> errors(total);

    auto worker = [&] {
        for (;;) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= total) return;
            const auto& aspect = aspects[i / papers.size()];
            const auto& paper = papers[i % papers.size()];
            try {
                out[i] = summarize_paper(aspect, paper);
                done[i] = 1;
            } catch (...) {
                errors[i] = std::current_exception();
                std::size_t prev = first_error.load();
                while (i < prev && !first_error.compare_exchange_weak(prev, i)) {}
            }
        }
    };

    const std::size_t n_threads =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(config_.max_inflight), total));
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    std::size_t err = first_error.load();
    if (err < total) std::rethrow_exception(errors[err]);
    return out;
}

std::string LlmGateway::name_facet(const NodeTrace& trace, const std::vector<Paper>& subset,
                                   const std::string& aspect_name,
                                   const std::vector<Paper>& parent) {
    if (subset.empty()) throw contract_error("name_facet: empty subset");

    GatewayRequest req;
    req.kind = RequestKind::Facet;
    req.trace = trace;
    req.aspect_name = aspect_name;
    req.papers.reserve(subset.size());
    for (const auto& p : subset) req.papers.push_back(to_view(p));
    for (const auto& p : parent) req.parent.push_back(to_view(p));
    req.prompt = prompts_.render(PromptLibrary::kFacet,
                                 {{"trace", trace_slot(trace)},
                                  {"aspect", aspect_name},
                                  {"subset", papers_slot(req.papers, config_.prompt_paper_chars)}});

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response = complete_with_retry(*aspect_backend_, req);
        // strip whitespace and surrounding quotes
        auto b = response.find_first_not_of(" \t\n\r\"'");
        auto e = response.find_last_not_of(" \t\n\r\"'");
        std::string label =
            b == std::string::npos ? std::string{} : response.substr(b, e - b + 1);
        label = text::truncate_words(label, static_cast<std::size_t>(config_.facet_max_words));
        if (!label.empty()) return label;
        req.prompt += "\n\nYour previous reply was empty. Respond with the heading only.";
    }
    throw format_error("facet naming returned an empty label after one reprompt");
}

std::vector<Aspect> LlmGateway::fixed_aspects(const std::string& node_id) const {
    json arr;
    try {
        arr = json::parse(prompts_.raw(PromptLibrary::kFixedAspects));
    } catch (const json::exception& e) {
        throw config_error(std::string("fixed aspect template is not valid JSON: ") + e.what());
    }
    std::vector<Aspect> out;
    for (const auto& item : arr) {
        Aspect a;
        a.name = item.at("name").get<std::string>();
        a.description = item.value("description", std::string{});
        a.origin_node = node_id;
        out.push_back(std::move(a));
    }
    if (out.size() < 2) throw config_error("fixed aspect template must define at least 2 aspects");
    return out;
}

} // namespace taxoforge
