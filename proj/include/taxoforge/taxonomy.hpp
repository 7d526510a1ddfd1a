#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace taxoforge {

class Corpus;

// How a child node came to exist: the (aspect, cluster) pair it was
// extracted from plus the search context at its parent.
struct NodeProvenance {
    std::string aspect_name;
    int cluster_index = 0;
    double score = 0.0;          // max_score of the winning combination
    int effective_kv = 0;        // non-empty children actually attached
    int chosen_kv = 0;           // k_v the policy selected
    std::vector<std::string> aspects_considered;

    bool operator==(const NodeProvenance&) const = default;
};

struct TaxonomyNode {
    std::string id;
    std::string label;
    int depth = 0;
    std::vector<std::string> paper_ids;          // canonical corpus order
    std::vector<TaxonomyNode> children;
    std::optional<NodeProvenance> provenance;
    bool terminal = false;                       // expansion stopped early

    bool is_leaf() const { return children.empty(); }
    bool operator==(const TaxonomyNode&) const = default;
};

struct Taxonomy {
    std::string topic;
    int max_depth = 0;       // the depth cap L the tree was built under
    TaxonomyNode root;

    bool operator==(const Taxonomy&) const = default;
};

// Gold trees share the node schema minus provenance.
using GoldTaxonomy = Taxonomy;

struct Violation {
    std::string kind;      // coverage_gap | overlap | depth_skip | depth_exceeds_max |
                           // empty_node | foreign_paper | duplicate_node_id | root_depth
    std::string node_id;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Report-only structural checks: children partition the parent set,
// depths increase by one per edge, depth stays within the cap, no empty
// non-root nodes, unique node ids.
ValidationReport validate_tree(const Taxonomy& tree);

// Every attached paper id must resolve to a corpus id.
ValidationReport validate_against_corpus(const Taxonomy& tree, const Corpus& corpus);

inline constexpr int kTaxonomySchemaVersion = 1;

void save_taxonomy(const Taxonomy& tree, const std::string& path);
Taxonomy load_taxonomy(const std::string& path);
GoldTaxonomy load_gold_taxonomy(const std::string& path);

std::string taxonomy_to_json_string(const Taxonomy& tree);
Taxonomy taxonomy_from_json_string(const std::string& text);

std::size_t count_nodes(const TaxonomyNode& node);
// Labeled category nodes: everything except the root (leaf paper
// attachments are ids on nodes, not nodes themselves).
std::size_t count_non_root_nodes(const Taxonomy& tree);
std::vector<std::string> non_root_headings(const Taxonomy& tree);

template <typename Fn>
void for_each_node(const TaxonomyNode& node, Fn&& fn) {
    fn(node);
    for (const auto& c : node.children) for_each_node(c, fn);
}

} // namespace taxoforge
