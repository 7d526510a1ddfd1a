#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "taxoforge/taxonomy.hpp"

namespace taxoforge {

// Flat categorization view of a tree: each paper labeled by the deepest
// node containing it.
struct FlatClustering {
    std::map<std::string, std::string> labels;  // paper id -> cluster label
    std::vector<std::string> vocabulary;        // distinct labels, first-seen order
    std::size_t duplicates = 0;                 // papers attached to more than one leaf
};

using Similarity = std::function<double(const std::string&, const std::string&)>;

// Token-set Jaccard over lowercased, stopword-stripped headings.
double lexical_similarity(const std::string& a, const std::string& b);

// Papers at multiple leaves keep their first occurrence in canonical
// (depth-first) order and are counted in `duplicates`.
FlatClustering leaf_assignments(const Taxonomy& tree);

// Mutual information normalized by the arithmetic mean of the entropies.
// Identical partitions score 1 (including both-trivial); if exactly one
// side has zero entropy the score is 0.
double nmi(const FlatClustering& pred, const FlatClustering& gold);

// Pair-counting adjusted Rand index in [-1, 1].
double ari(const FlatClustering& pred, const FlatClustering& gold);

double purity(const FlatClustering& pred, const FlatClustering& gold);

// Heading soft recall: soft cardinality |A| = sum_i 1 / sum_j sim(a_i, a_j);
// recall = (|G| + |P| - |G u P|) / |G| over exact-deduplicated heading sets.
double hsr(const std::vector<std::string>& gold_headings,
           const std::vector<std::string>& gen_headings,
           const Similarity& sim = lexical_similarity);

// 1 - TED / max(|gold|, |gen|): ordered tree edit distance over
// heading-labeled nodes (children sorted canonically by label),
// insertion/deletion cost 1, substitution cost 1 - sim(labels).
double ceds(const GoldTaxonomy& gold, const Taxonomy& gen,
            const Similarity& sim = lexical_similarity);

// Generated labeled node count over gold labeled node count, roots and
// leaf paper attachments excluded.
double nodes_ratio(const Taxonomy& gen, const GoldTaxonomy& gold);

struct EvalOptions {
    Similarity sim = lexical_similarity;
    std::set<std::string> noise_ids;             // scored as the reserved gold class
    std::string noise_label = "__noise__";
};

struct EvalReport {
    double nmi = 0.0;
    double ari = 0.0;
    double purity = 0.0;
    double ceds = 0.0;
    double hsr = 0.0;
    double nodes_ratio = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped_not_in_gold = 0;  // generated papers absent from gold, not noise
    std::size_t skipped_not_in_gen = 0;   // gold papers absent from the generated tree
    std::size_t gold_duplicates = 0;
    std::size_t noise_count = 0;          // evaluated under the reserved class

    std::string to_json_string() const;
    std::string table_row(const std::string& name) const;
    static std::string table_header();
};

EvalReport evaluate(const Taxonomy& gen, const GoldTaxonomy& gold, const EvalOptions& options = {});

} // namespace taxoforge
