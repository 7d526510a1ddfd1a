#include "taxoforge/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taxoforge/errors.hpp"
#include "taxoforge/rng.hpp"

namespace taxoforge {

namespace {

struct Instance {
    std::size_t rows = 0;
    int aspect_count = 0;
    int k = 0;
    int pair_count = 0;
    std::vector<double> prob;  // rows x pair_count, pair p = aspect * k + cluster
    std::vector<std::string> ids;
};

Instance flatten(const std::vector<SoftAssignment>& assignments, int k_v,
                 const std::vector<std::string>& paper_ids) {
    if (assignments.empty()) throw contract_error("search: no soft assignments");
    Instance inst;
    inst.rows = assignments.front().rows;
    inst.aspect_count = static_cast<int>(assignments.size());
    inst.k = static_cast<int>(assignments.front().k);
    for (const auto& a : assignments) {
        if (a.rows != inst.rows)
            throw contract_error("search: soft assignments disagree on paper count");
        if (static_cast<int>(a.k) != inst.k)
            throw contract_error("search: soft assignments disagree on cluster count");
    }
    if (inst.rows == 0) throw contract_error("search: empty paper set");
    if (k_v < 1) throw contract_error("search: k_v must be positive");
    if (k_v > inst.aspect_count * inst.k)
        throw contract_error("search: k_v=" + std::to_string(k_v) + " exceeds aspect_count*k=" +
                             std::to_string(inst.aspect_count * inst.k));

    inst.pair_count = inst.aspect_count * inst.k;
    inst.prob.resize(inst.rows * static_cast<std::size_t>(inst.pair_count));
    for (std::size_t d = 0; d < inst.rows; ++d) {
        double* out = inst.prob.data() + d * inst.pair_count;
        for (int a = 0; a < inst.aspect_count; ++a)
            for (int i = 0; i < inst.k; ++i) out[a * inst.k + i] = assignments[a].at(d, i);
    }

    if (!paper_ids.empty()) {
        if (paper_ids.size() != inst.rows)
            throw contract_error("search: paper id count does not match rows");
        inst.ids = paper_ids;
    } else {
        inst.ids.reserve(inst.rows);
        for (std::size_t d = 0; d < inst.rows; ++d) inst.ids.push_back(std::to_string(d));
    }
    return inst;
}

PairId to_pair(int p, int k) { return {p / k, p % k}; }

// argmax over the combination's pairs, canonical pair order on ties
int argmax_pair(const double* row, const std::vector<int>& combo) {
    int best_pair = combo.front();
    double best = row[combo.front()];
    for (std::size_t j = 1; j < combo.size(); ++j) {
        double v = row[combo[j]];
        if (v > best) {
            best = v;
            best_pair = combo[j];
        }
    }
    return best_pair;
}

double max_over_pairs(const double* row, const std::vector<int>& combo) {
    double best = row[combo.front()];
    for (std::size_t j = 1; j < combo.size(); ++j) best = std::max(best, row[combo[j]]);
    return best;
}

// Fills state/assignment for the chosen combination by replaying the
// processing order; per-document choices depend only on the combination.
void replay(const Instance& inst, const std::vector<int>& combo,
            const std::vector<std::size_t>& order, int k, SearchResult& result) {
    result.best.pairs.clear();
    for (int p : combo) result.best.pairs.push_back(to_pair(p, k));
    result.best.state.clear();
    result.assignment.clear();
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        std::size_t d = order[pos];
        int p = argmax_pair(inst.prob.data() + d * inst.pair_count, combo);
        PairId pair = to_pair(p, k);
        result.best.state[pair].push_back(inst.ids[d]);
        result.assignment[inst.ids[d]] = pair;
    }
    std::size_t used = 0;
    for (int p : combo) used += result.best.state.count(to_pair(p, k)) ? 1 : 0;
    result.best_fully_used = used == combo.size();
}

} // namespace

std::uint64_t combination_count(int aspect_count, int k, int k_v) {
    if (aspect_count < 1 || k < 1) throw contract_error("combination_count: empty pair space");
    const int pairs = aspect_count * k;
    if (k_v < 1 || k_v > pairs)
        throw contract_error("combination_count: k_v=" + std::to_string(k_v) +
                             " outside [1, " + std::to_string(pairs) + "]");
    unsigned __int128 acc = 1;
    for (int i = 0; i < k_v; ++i) {
        acc = acc * static_cast<unsigned>(pairs - i) / static_cast<unsigned>(i + 1);
        if (acc > static_cast<unsigned __int128>(std::numeric_limits<std::uint64_t>::max()))
            throw capacity_error("combination_count overflows 64 bits");
    }
    return static_cast<std::uint64_t>(acc);
}

void for_each_combination(int aspect_count, int k, int k_v,
                          const std::function<void(const std::vector<int>&)>& fn) {
    combination_count(aspect_count, k, k_v);  // validates bounds
    const int pairs = aspect_count * k;
    std::vector<int> idx(k_v);
    for (int i = 0; i < k_v; ++i) idx[i] = i;
    for (;;) {
        fn(idx);
        int i = k_v - 1;
        while (i >= 0 && idx[i] == pairs - k_v + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k_v; ++j) idx[j] = idx[j - 1] + 1;
    }
}

SearchResult search_optimal(const std::vector<SoftAssignment>& assignments, int k_v,
                            const SearchOptions& options) {
    Instance inst = flatten(assignments, k_v, options.paper_ids);
    const std::uint64_t total = combination_count(inst.aspect_count, inst.k, k_v);
    if (total > options.max_combinations)
        throw capacity_error("search space of " + std::to_string(total) +
                             " combinations exceeds the limit of " +
                             std::to_string(options.max_combinations));

    std::vector<std::vector<int>> combos;
    combos.reserve(static_cast<std::size_t>(total));
    for_each_combination(inst.aspect_count, inst.k, k_v,
                         [&](const std::vector<int>& c) { combos.push_back(c); });

    // processing order: canonical, or seeded when pruning
    std::vector<std::size_t> order(inst.rows);
    for (std::size_t d = 0; d < inst.rows; ++d) order[d] = d;
    if (options.prune) {
        Rng rng(options.seed);
        rng.shuffle(order);
    }

    std::vector<double> scores(combos.size(), 0.0);
    std::vector<std::uint8_t> alive(combos.size(), 1);
    PruneStats stats;
    stats.combinations_total = total;
    stats.warmup = std::max<std::size_t>(8, (inst.rows + 3) / 4);

    const bool paper_major = options.prune || static_cast<bool>(options.observer);
    const long long n_combos = static_cast<long long>(combos.size());

    if (!paper_major) {
        // combination-major: one serial document fold per combination
#ifdef TAXOFORGE_HAVE_OPENMP
        if (options.exec == ExecMode::OpenMP) {
            #pragma omp parallel for schedule(static)
            for (long long c = 0; c < n_combos; ++c) {
                double s = 0.0;
                for (std::size_t pos = 0; pos < order.size(); ++pos)
                    s += max_over_pairs(inst.prob.data() + order[pos] * inst.pair_count,
                                        combos[static_cast<std::size_t>(c)]);
                scores[static_cast<std::size_t>(c)] = s;
            }
        } else
#endif
        {
            for (long long c = 0; c < n_combos; ++c) {
                double s = 0.0;
                for (std::size_t pos = 0; pos < order.size(); ++pos)
                    s += max_over_pairs(inst.prob.data() + order[pos] * inst.pair_count,
                                        combos[static_cast<std::size_t>(c)]);
                scores[static_cast<std::size_t>(c)] = s;
            }
        }
    } else {
        std::size_t alive_count = combos.size();
        std::vector<std::size_t> prune_order;
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const double* row = inst.prob.data() + order[pos] * inst.pair_count;
#ifdef TAXOFORGE_HAVE_OPENMP
            if (options.exec == ExecMode::OpenMP) {
                #pragma omp parallel for schedule(static)
                for (long long c = 0; c < n_combos; ++c) {
                    if (alive[static_cast<std::size_t>(c)])
                        scores[static_cast<std::size_t>(c)] +=
                            max_over_pairs(row, combos[static_cast<std::size_t>(c)]);
                }
            } else
#endif
            {
                for (long long c = 0; c < n_combos; ++c) {
                    if (alive[static_cast<std::size_t>(c)])
                        scores[static_cast<std::size_t>(c)] +=
                            max_over_pairs(row, combos[static_cast<std::size_t>(c)]);
                }
            }

            if (options.prune && pos + 1 > stats.warmup &&
                alive_count > static_cast<std::size_t>(options.keep_min)) {
                double mean = 0.0;
                for (std::size_t c = 0; c < combos.size(); ++c)
                    if (alive[c]) mean += scores[c];
                mean /= static_cast<double>(alive_count);
                double var = 0.0;
                for (std::size_t c = 0; c < combos.size(); ++c)
                    if (alive[c]) {
                        double d = scores[c] - mean;
                        var += d * d;
                    }
                var /= static_cast<double>(alive_count);
                const double threshold = mean - options.prune_sigma * std::sqrt(var);

                prune_order.clear();
                for (std::size_t c = 0; c < combos.size(); ++c)
                    if (alive[c] && scores[c] < threshold) prune_order.push_back(c);
                // drop worst first, never below the survivor floor
                std::stable_sort(prune_order.begin(), prune_order.end(),
                                 [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
                for (std::size_t c : prune_order) {
                    if (alive_count <= static_cast<std::size_t>(options.keep_min)) break;
                    alive[c] = 0;
                    --alive_count;
                    ++stats.pruned;
                }
            }
            if (options.observer) options.observer(pos, scores, alive);
        }
        stats.survivors = alive_count;
    }
    if (!options.prune) stats.survivors = combos.size();

    // canonical-first tie break: strict improvement only
    auto pick_best = [&](const std::function<bool(std::size_t)>& eligible) {
        std::size_t best = combos.size();
        for (std::size_t c = 0; c < combos.size(); ++c) {
            if (!alive[c] || !eligible(c)) continue;
            if (best == combos.size() || scores[c] > scores[best]) best = c;
        }
        return best;
    };

    SearchResult result;
    result.order = order;
    std::size_t best = combos.size();
    if (options.strict_nonempty) {
        // try candidates by descending score until one uses all its pairs
        std::vector<std::size_t> ranked;
        for (std::size_t c = 0; c < combos.size(); ++c)
            if (alive[c]) ranked.push_back(c);
        std::stable_sort(ranked.begin(), ranked.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
        for (std::size_t c : ranked) {
            replay(inst, combos[c], order, inst.k, result);
            if (result.best_fully_used) {
                best = c;
                break;
            }
        }
        if (best == combos.size())
            throw contract_error("search: no combination uses all " + std::to_string(k_v) + " pairs");
    } else {
        best = pick_best([](std::size_t) { return true; });
        replay(inst, combos[best], order, inst.k, result);
    }

    result.best.score = scores[best];
    result.max_score = scores[best];
    result.stats = stats;
    return result;
}

SearchResult assignment_oracle(const std::vector<SoftAssignment>& assignments, int k_v,
                               const std::vector<std::string>& paper_ids) {
    Instance inst = flatten(assignments, k_v, paper_ids);
    if (inst.pair_count > 16)
        throw capacity_error("oracle guard: " + std::to_string(inst.pair_count) +
                             " pairs exceed the enumerable bound of 16");

    const std::uint64_t total = combination_count(inst.aspect_count, inst.k, k_v);
    SearchResult result;
    result.stats.combinations_total = total;
    result.stats.survivors = total;
    result.fully_used.reserve(static_cast<std::size_t>(total));
    result.order.resize(inst.rows);
    for (std::size_t d = 0; d < inst.rows; ++d) result.order[d] = d;

    std::vector<int> best_combo;
    double best_score = -std::numeric_limits<double>::infinity();
    bool have = false;

    for_each_combination(inst.aspect_count, inst.k, k_v, [&](const std::vector<int>& combo) {
        // straightforward restatement of the objective: each document
        // contributes its best pair's probability
        double score = 0.0;
        std::vector<std::uint8_t> used(combo.size(), 0);
        for (std::size_t d = 0; d < inst.rows; ++d) {
            const double* row = inst.prob.data() + d * inst.pair_count;
            double best = row[combo[0]];
            std::size_t arg = 0;
            for (std::size_t j = 1; j < combo.size(); ++j) {
                if (row[combo[j]] > best) {
                    best = row[combo[j]];
                    arg = j;
                }
            }
            score += best;
            used[arg] = 1;
        }
        bool all_used = std::all_of(used.begin(), used.end(), [](std::uint8_t u) { return u != 0; });
        result.fully_used.push_back(all_used ? 1 : 0);
        if (!have || score > best_score) {
            have = true;
            best_score = score;
            best_combo = combo;
        }
    });

    // materialize the winning trajectory
    for (int p : best_combo) result.best.pairs.push_back(to_pair(p, inst.k));
    for (std::size_t d = 0; d < inst.rows; ++d) {
        const double* row = inst.prob.data() + d * inst.pair_count;
        int p = best_combo[0];
        double best = row[best_combo[0]];
        for (std::size_t j = 1; j < best_combo.size(); ++j) {
            if (row[best_combo[j]] > best) {
                best = row[best_combo[j]];
                p = best_combo[j];
            }
        }
        PairId pair = to_pair(p, inst.k);
        result.best.state[pair].push_back(inst.ids[d]);
        result.assignment[inst.ids[d]] = pair;
    }
    result.best.score = best_score;
    result.max_score = best_score;
    std::size_t used_pairs = 0;
    for (int p : best_combo) used_pairs += result.best.state.count(to_pair(p, inst.k)) ? 1 : 0;
    result.best_fully_used = used_pairs == best_combo.size();
    return result;
}

} // namespace taxoforge
