#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace taxoforge::text {

// Lowercased [a-z0-9]+ runs; everything else is a separator.
std::vector<std::string> tokenize(std::string_view s);

bool is_stopword(const std::string& token);

// tokenize() minus stopwords.
std::vector<std::string> content_tokens(std::string_view s);

// Naive sentence split on ./!/? followed by whitespace or end.
std::vector<std::string> split_sentences(std::string_view s);

// Token counts aggregated over several texts, stopwords removed.
std::map<std::string, std::size_t> term_frequencies(const std::vector<std::string>& texts);

// Most frequent content tokens; ties broken by token ascending.
std::vector<std::string> top_frequent_tokens(const std::vector<std::string>& texts, std::size_t count);

// Top-scoring tokens of `subset` by tf-idf against `parent`
// (tf over the subset, document frequency over the parent texts).
std::vector<std::string> top_tfidf_tokens(const std::vector<std::string>& subset,
                                          const std::vector<std::string>& parent,
                                          std::size_t count);

// Token-set Jaccard over lowercased, stopword-stripped strings. Empty
// token sets on both sides fall back to exact string comparison so that
// sim(x, x) = 1 always holds.
double jaccard_similarity(const std::string& a, const std::string& b);

std::size_t word_count(std::string_view s);

// First `max_words` whitespace-separated words.
std::string truncate_words(const std::string& s, std::size_t max_words);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

std::string to_lower(std::string_view s);

} // namespace taxoforge::text
