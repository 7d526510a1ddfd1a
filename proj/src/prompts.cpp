#include "taxoforge/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "taxoforge/errors.hpp"

namespace taxoforge {

namespace {

const char* kAspectsFirstLevelText = R"(You are organizing a collection of research papers on the topic "{topic}".

Analyze how the papers below are distributed and identify the semantic aspects that best characterize and separate them, for example dimensions such as the research problem being addressed or the application domain. Choose aspects under which the papers spread into distinct groups rather than aspects every paper shares.

Papers:
{papers}

Respond with between 2 and {max_aspects} aspects as a fenced JSON array, each element an object with fields "name" (a short phrase of at most 8 words) and "description" (one sentence explaining what the aspect captures). Output only the fenced JSON block.)";

const char* kAspectsOtherLevelText = R"(You are refining one branch of a hierarchical taxonomy of research papers on the topic "{topic}".

The current branch, from the root to the node being expanded, is:
{trace}

The node sits at level {level}. Analyze how the papers below are distributed within this branch and identify the semantic aspects that best separate them into finer subtopics. The aspects must be more specific than the branch headings above and must reflect distinctions actually present in these papers.

Papers:
{papers}

Respond with between 2 and {max_aspects} aspects as a fenced JSON array, each element an object with fields "name" (a short phrase of at most 8 words) and "description" (one sentence explaining what the aspect captures). Output only the fenced JSON block.)";

const char* kSummaryText = R"(Summarize the following paper strictly from the point of view of the aspect "{aspect}". Keep only material relevant to that aspect; omit everything else. Write plain prose, at most 120 words, no preamble.

Paper:
{paper})";

const char* kFacetText = R"(You are naming one node of a hierarchical taxonomy of research papers.

The branch from the root to the parent node is:
{trace}

The papers grouped under the new node were brought together along the aspect "{aspect}". They are:
{subset}

Produce one short heading (at most 12 words) that states the specific topic facet shared by these papers. The heading must be more specific than the branch headings above. Respond with the heading only.)";

// Manual aspect set used when aspect generation is disabled.
const char* kFixedAspectsText = R"([
  {"name": "research problem", "description": "The core problem or task the paper addresses."},
  {"name": "methodology", "description": "The technical approach or algorithmic machinery employed."},
  {"name": "application domain", "description": "The domain or setting the work targets."},
  {"name": "evaluation setting", "description": "How the work is evaluated, including data and metrics."}
])";

std::string strip_version_line(const std::string& s) {
    if (s.rfind("version:", 0) == 0) {
        auto nl = s.find('\n');
        if (nl != std::string::npos) return s.substr(nl + 1);
        return {};
    }
    return s;
}

} // namespace

PromptLibrary::PromptLibrary() {
    templates_[kAspectsFirstLevel] = kAspectsFirstLevelText;
    templates_[kAspectsOtherLevel] = kAspectsOtherLevelText;
    templates_[kSummary] = kSummaryText;
    templates_[kFacet] = kFacetText;
    templates_[kFixedAspects] = kFixedAspectsText;
}

void PromptLibrary::load_overrides(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw config_error("prompt directory '" + dir + "' does not exist");
    for (auto& [name, body] : templates_) {
        fs::path p = fs::path(dir) / (name + ".txt");
        if (!fs::exists(p)) continue;
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        body = strip_version_line(ss.str());
    }
}

const std::string& PromptLibrary::raw(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw config_error("unknown prompt template '" + name + "'");
    return it->second;
}

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& slots) const {
    const std::string& tpl = raw(name);
    std::string out;
    out.reserve(tpl.size());
    for (std::size_t i = 0; i < tpl.size();) {
        if (tpl[i] == '{') {
            auto end = tpl.find('}', i);
            if (end != std::string::npos) {
                std::string key = tpl.substr(i + 1, end - i - 1);
                auto it = slots.find(key);
                if (it == slots.end())
                    throw config_error("prompt '" + name + "' uses slot {" + key + "} with no value");
                out += it->second;
                i = end + 1;
                continue;
            }
        }
        out.push_back(tpl[i]);
        ++i;
    }
    return out;
}

} // namespace taxoforge
