#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taxoforge/corpus.hpp"
#include "taxoforge/embedder.hpp"
#include "taxoforge/gateway.hpp"
#include "taxoforge/gmm.hpp"
#include "taxoforge/search.hpp"
#include "taxoforge/taxonomy.hpp"

namespace taxoforge {

struct KvPolicy {
    enum class Mode { Fixed, SilhouetteAdaptive };
    Mode mode = Mode::Fixed;
    int fixed_kv = 4;
    std::vector<int> candidates = {3, 4, 5, 6};  // adaptive mode
};

enum class AspectMode { Dynamic, FixedTemplate };

struct BuildConfig {
    int k = 4;                 // clusters per aspect
    KvPolicy kv_policy;
    int max_depth = 3;         // L
    int min_papers = 5;        // expand only nodes with strictly more papers
    AspectMode aspect_mode = AspectMode::Dynamic;
    bool prune = false;
    bool strict_nonempty = false;
    std::uint64_t seed = 0;
    GmmConfig gmm;
    ExecMode exec = default_exec_mode();
    std::uint64_t max_combinations = 2'000'000;
    std::string partial_path;  // partial tree persisted here on failure

    void validate() const;     // throws config errors
};

struct BuildServices {
    LlmGateway& gateway;
    Embedder& embedder;
};

// One structured record per node expansion, for the audit log.
struct ExpansionRecord {
    std::string node_id;
    int depth = 0;
    std::size_t n_papers = 0;
    NodeTrace trace;
    std::vector<std::string> aspect_names;
    int chosen_kv = 0;
    int effective_kv = 0;
    std::uint64_t combinations_total = 0;
    std::uint64_t combinations_pruned = 0;
    std::size_t warmup = 0;
    double max_score = 0.0;
    bool collapsed = false;  // all summaries identical under every aspect
    std::vector<std::pair<int, double>> silhouettes;  // adaptive: (k_v, mean score)
    std::vector<std::string> child_ids;

    std::string to_json_line() const;
};

struct BuildResult {
    Taxonomy taxonomy;
    std::vector<ExpansionRecord> log;
};

// Mean silhouette of the children partition, each child measured in its
// own aspect's embedding space; -1 when fewer than two children.
double partition_silhouette(const std::vector<AspectEmbeddings>& spaces,
                            const std::vector<std::pair<int, std::vector<std::size_t>>>& children);

// Expands one node: aspects, summaries, embeddings, per-aspect GMM,
// combination search, facet naming. Returns the attached children (empty
// when a stopping rule applies). `record` receives the expansion log entry.
std::vector<TaxonomyNode> expand_node(const TaxonomyNode& node, const NodeTrace& trace,
                                      const Corpus& corpus, BuildServices services,
                                      const BuildConfig& config,
                                      ExpansionRecord* record = nullptr);

// Breadth-first expansion from the root until every frontier node hits a
// stopping rule. The output passes validate_tree.
BuildResult build_taxonomy(const Corpus& corpus, BuildServices services,
                           const BuildConfig& config);

} // namespace taxoforge
