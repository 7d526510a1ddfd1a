#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "taxoforge/gmm.hpp"
#include "taxoforge/parallel.hpp"

namespace taxoforge {

// One cluster inside one aspect space; the atoms combinations are made of.
struct PairId {
    int aspect = 0;
    int cluster = 0;
    auto operator<=>(const PairId&) const = default;
};

struct Combination {
    std::vector<PairId> pairs;                        // canonical (sorted) order
    double score = 0.0;
    std::map<PairId, std::vector<std::string>> state; // pair -> papers, processing order
};

struct PruneStats {
    std::uint64_t combinations_total = 0;
    std::uint64_t pruned = 0;
    std::uint64_t survivors = 0;
    std::size_t warmup = 0;
};

struct SearchResult {
    Combination best;
    double max_score = 0.0;
    std::map<std::string, PairId> assignment;  // paper id -> pair in best
    bool best_fully_used = false;              // every pair of best got a paper
    PruneStats stats;
    std::vector<std::size_t> order;            // row processing order
    // oracle only: per-combination flag, canonical enumeration order
    std::vector<std::uint8_t> fully_used;
};

struct SearchOptions {
    bool prune = false;
    std::uint64_t seed = 0;          // paper order when pruning
    bool strict_nonempty = false;    // reject combinations with unused pairs
    int keep_min = 32;               // pruning survivor floor
    double prune_sigma = 2.0;        // drop score < mean - sigma * stddev
    ExecMode exec = default_exec_mode();
    std::uint64_t max_combinations = 2'000'000;
    std::vector<std::string> paper_ids;  // defaults to row indices
    // after each processed paper: (position, scores, alive mask)
    std::function<void(std::size_t, const std::vector<double>&, const std::vector<std::uint8_t>&)>
        observer;
};

// C(aspect_count * k, k_v); throws on k_v outside [1, aspect_count * k].
std::uint64_t combination_count(int aspect_count, int k, int k_v);

// Canonical lexicographic enumeration over global pair indices
// (pair p = aspect * k + cluster).
void for_each_combination(int aspect_count, int k, int k_v,
                          const std::function<void(const std::vector<int>&)>& fn);

// Best combination of k_v (aspect, cluster) pairs by total assignment
// probability. Without pruning the search is exhaustive and ties break to
// the canonical first combination; scores accumulate serially per
// combination in the processing order, so results do not depend on the
// execution mode.
SearchResult search_optimal(const std::vector<SoftAssignment>& assignments, int k_v,
                            const SearchOptions& options = {});

// Independent exhaustive maximization of the same objective, guarded to
// instances with aspect_count * k <= 16. Reports, per combination, whether
// all k_v pairs ended up used.
SearchResult assignment_oracle(const std::vector<SoftAssignment>& assignments, int k_v,
                               const std::vector<std::string>& paper_ids = {});

} // namespace taxoforge
