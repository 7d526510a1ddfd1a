#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace taxoforge {

struct Paper {
    std::string id;
    std::string title;
    std::string abstract_text;
    std::string introduction;                 // empty when absent
    std::map<std::string, std::string> metadata;
    bool is_noise = false;

    // Abstract, falling back to the introduction when the abstract is empty.
    const std::string& body() const { return abstract_text.empty() ? introduction : abstract_text; }
};

// Ordered paper collection for one topic. The ingestion order is the
// canonical order; every downstream module that needs a deterministic
// iteration order uses it.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::string topic, std::vector<Paper> papers);

    const std::string& topic() const { return topic_; }
    void set_topic(std::string t) { topic_ = std::move(t); }

    const std::vector<Paper>& papers() const { return papers_; }
    std::size_t size() const { return papers_.size(); }
    bool empty() const { return papers_.empty(); }

    const Paper& at(std::size_t i) const { return papers_.at(i); }
    const Paper* find(const std::string& id) const;
    bool contains(const std::string& id) const { return index_.count(id) > 0; }

    // Position in canonical order; throws identity error for unknown ids.
    std::size_t rank(const std::string& id) const;

    void add(Paper p);  // throws identity error on duplicate id

private:
    std::string topic_;
    std::vector<Paper> papers_;
    std::map<std::string, std::size_t> index_;
};

// JSON-lines file, one paper per line. Fields: id, title, abstract,
// introduction?, metadata?, is_noise?.
Corpus load_corpus(const std::string& path, const std::string& topic = "");
void save_corpus(const Corpus& corpus, const std::string& path);

// Returns base plus round(ratio * |base|) papers drawn without replacement
// from pool (seeded), flagged is_noise and appended in draw order.
// ratio must lie in [0, 0.5]; rounding is half-up.
Corpus inject_noise(const Corpus& base, const Corpus& pool, double ratio, std::uint64_t seed);

std::uint64_t file_digest(const std::string& path);

} // namespace taxoforge
