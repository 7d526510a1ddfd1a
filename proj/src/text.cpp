#include "taxoforge/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace taxoforge::text {

namespace {

const std::unordered_set<std::string>& stopword_set() {
    static const std::unordered_set<std::string> words = {
        "a", "an", "the", "and", "or", "but", "if", "then", "else", "of", "in",
        "on", "at", "to", "from", "by", "for", "with", "without", "about", "as",
        "is", "are", "was", "were", "be", "been", "being", "it", "its", "this",
        "that", "these", "those", "we", "our", "us", "you", "your", "they",
        "their", "them", "he", "she", "his", "her", "i", "my", "me", "not",
        "no", "nor", "so", "such", "than", "too", "very", "can", "will",
        "would", "should", "could", "may", "might", "must", "do", "does",
        "did", "have", "has", "had", "into", "over", "under", "between",
        "through", "during", "before", "after", "above", "below", "up",
        "down", "out", "off", "again", "further", "more", "most", "other",
        "some", "any", "each", "both", "all", "own", "same", "also", "via",
        "per", "which", "what", "who", "whom", "where", "when", "how", "why",
        "based", "using", "used", "use", "new", "paper", "papers", "method",
        "methods", "approach", "approaches", "propose", "proposed", "results",
        "show", "shows", "study", "studies", "one", "two",
    };
    return words;
}

} // namespace

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool is_stopword(const std::string& token) {
    return stopword_set().count(token) > 0;
}

std::vector<std::string> content_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (auto& t : tokenize(s)) {
        if (!is_stopword(t)) out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < s.size(); ++i) {
        cur.push_back(s[i]);
        char c = s[i];
        if (c == '.' || c == '!' || c == '?') {
            bool at_end = (i + 1 == s.size());
            bool before_space = !at_end && std::isspace(static_cast<unsigned char>(s[i + 1]));
            if (at_end || before_space) {
                // trim
                std::size_t b = cur.find_first_not_of(" \t\n\r");
                std::size_t e = cur.find_last_not_of(" \t\n\r");
                if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
                cur.clear();
            }
        }
    }
    std::size_t b = cur.find_first_not_of(" \t\n\r");
    if (b != std::string::npos) {
        std::size_t e = cur.find_last_not_of(" \t\n\r");
        out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

std::map<std::string, std::size_t> term_frequencies(const std::vector<std::string>& texts) {
    std::map<std::string, std::size_t> freq;
    for (const auto& t : texts) {
        for (auto& tok : content_tokens(t)) ++freq[tok];
    }
    return freq;
}

std::vector<std::string> top_frequent_tokens(const std::vector<std::string>& texts, std::size_t count) {
    auto freq = term_frequencies(texts);
    std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < items.size() && out.size() < count; ++i) out.push_back(items[i].first);
    return out;
}

std::vector<std::string> top_tfidf_tokens(const std::vector<std::string>& subset,
                                          const std::vector<std::string>& parent,
                                          std::size_t count) {
    auto tf = term_frequencies(subset);
    // document frequency over the parent texts
    std::map<std::string, std::size_t> df;
    for (const auto& t : parent) {
        std::set<std::string> seen;
        for (auto& tok : content_tokens(t)) seen.insert(std::move(tok));
        for (const auto& tok : seen) ++df[tok];
    }
    const double n_parent = static_cast<double>(parent.empty() ? subset.size() : parent.size());
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(tf.size());
    for (const auto& [tok, f] : tf) {
        auto it = df.find(tok);
        double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
        double idf = std::log((1.0 + n_parent) / (1.0 + d));
        scored.emplace_back(tok, static_cast<double>(f) * idf);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < scored.size() && out.size() < count; ++i) out.push_back(scored[i].first);
    return out;
}

double jaccard_similarity(const std::string& a, const std::string& b) {
    auto ta = content_tokens(a);
    auto tb = content_tokens(b);
    std::set<std::string> sa(ta.begin(), ta.end());
    std::set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) return to_lower(a) == to_lower(b) ? 1.0 : 0.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char ch : s) {
        bool space = std::isspace(static_cast<unsigned char>(ch));
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::string truncate_words(const std::string& s, std::size_t max_words) {
    std::istringstream in(s);
    std::string word, out;
    std::size_t n = 0;
    while (n < max_words && in >> word) {
        if (n) out.push_back(' ');
        out += word;
        ++n;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace taxoforge::text
