#include "taxoforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "taxoforge/errors.hpp"
#include "taxoforge/text.hpp"

#include <json.hpp>

namespace taxoforge {

using nlohmann::json;

double lexical_similarity(const std::string& a, const std::string& b) {
    return text::jaccard_similarity(a, b);
}

FlatClustering leaf_assignments(const Taxonomy& tree) {
    struct Site {
        int depth;
        std::size_t dfs;
        std::string label;
    };
    std::map<std::string, Site> best;
    std::map<std::string, std::size_t> leaf_hits;
    std::size_t dfs = 0;

    for_each_node(tree.root, [&](const TaxonomyNode& node) {
        std::size_t this_dfs = dfs++;
        std::string label = node.id.empty() ? "node" + std::to_string(this_dfs) : node.id;
        if (node.is_leaf()) {
            for (const auto& pid : node.paper_ids) ++leaf_hits[pid];
        }
        for (const auto& pid : node.paper_ids) {
            auto it = best.find(pid);
            if (it == best.end() || node.depth > it->second.depth) {
                best[pid] = {node.depth, this_dfs, label};
            }
            // equal depth keeps the earlier (first-occurrence) site
        }
    });

    FlatClustering out;
    std::vector<std::pair<std::size_t, std::string>> ordered;  // (dfs, pid) for stable vocab
    for (const auto& [pid, site] : best) {
        out.labels[pid] = site.label;
        ordered.emplace_back(site.dfs, site.label);
    }
    std::sort(ordered.begin(), ordered.end());
    std::set<std::string> seen;
    for (const auto& [d, label] : ordered) {
        if (seen.insert(label).second) out.vocabulary.push_back(label);
    }
    for (const auto& [pid, hits] : leaf_hits) {
        if (hits > 1) ++out.duplicates;
    }
    return out;
}

namespace {

struct Contingency {
    std::vector<std::vector<double>> cell;  // pred x gold counts
    std::vector<double> pred_sizes;
    std::vector<double> gold_sizes;
    double n = 0.0;
    bool identical_partitions = false;
};

Contingency contingency(const FlatClustering& pred, const FlatClustering& gold) {
    if (pred.labels.size() != gold.labels.size())
        throw contract_error("metrics: paper id sets differ in size (" +
                             std::to_string(pred.labels.size()) + " vs " +
                             std::to_string(gold.labels.size()) + ")");
    std::map<std::string, std::size_t> pi, gi;
    for (const auto& [id, label] : pred.labels) {
        if (!gold.labels.count(id)) throw contract_error("metrics: paper '" + id + "' missing from gold");
        if (!pi.count(label)) pi.emplace(label, pi.size());
    }
    for (const auto& [id, label] : gold.labels) {
        if (!gi.count(label)) gi.emplace(label, gi.size());
    }
    Contingency c;
    c.cell.assign(pi.size(), std::vector<double>(gi.size(), 0.0));
    c.pred_sizes.assign(pi.size(), 0.0);
    c.gold_sizes.assign(gi.size(), 0.0);
    for (const auto& [id, label] : pred.labels) {
        std::size_t a = pi.at(label);
        std::size_t b = gi.at(gold.labels.at(id));
        c.cell[a][b] += 1.0;
        c.pred_sizes[a] += 1.0;
        c.gold_sizes[b] += 1.0;
        c.n += 1.0;
    }
    // partitions are identical iff every cell row and column has one entry
    c.identical_partitions = pi.size() == gi.size();
    if (c.identical_partitions) {
        for (std::size_t a = 0; a < pi.size() && c.identical_partitions; ++a) {
            std::size_t nonzero = 0;
            double mass = 0.0;
            for (double v : c.cell[a]) {
                if (v > 0.0) ++nonzero, mass = v;
            }
            if (nonzero != 1 || mass != c.pred_sizes[a]) c.identical_partitions = false;
        }
    }
    return c;
}

double entropy(const std::vector<double>& sizes, double n) {
    double h = 0.0;
    for (double s : sizes) {
        if (s > 0.0) h -= (s / n) * std::log(s / n);
    }
    return h;
}

double choose2(double m) { return m * (m - 1.0) / 2.0; }

} // namespace

double nmi(const FlatClustering& pred, const FlatClustering& gold) {
    auto c = contingency(pred, gold);
    if (c.n == 0.0) throw contract_error("nmi: empty clusterings");
    if (c.identical_partitions) return 1.0;
    double hu = entropy(c.pred_sizes, c.n);
    double hv = entropy(c.gold_sizes, c.n);
    if (hu == 0.0 || hv == 0.0) return 0.0;
    double mi = 0.0;
    for (std::size_t a = 0; a < c.cell.size(); ++a) {
        for (std::size_t b = 0; b < c.cell[a].size(); ++b) {
            double nij = c.cell[a][b];
            if (nij <= 0.0) continue;
            mi += (nij / c.n) * std::log(c.n * nij / (c.pred_sizes[a] * c.gold_sizes[b]));
        }
    }
    return mi / ((hu + hv) / 2.0);
}

double ari(const FlatClustering& pred, const FlatClustering& gold) {
    auto c = contingency(pred, gold);
    if (c.n == 0.0) throw contract_error("ari: empty clusterings");
    double sum_cells = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (std::size_t a = 0; a < c.cell.size(); ++a)
        for (double v : c.cell[a]) sum_cells += choose2(v);
    for (double v : c.pred_sizes) sum_a += choose2(v);
    for (double v : c.gold_sizes) sum_b += choose2(v);
    double pairs = choose2(c.n);
    if (pairs == 0.0) return c.identical_partitions ? 1.0 : 0.0;
    double expected = sum_a * sum_b / pairs;
    double maximum = (sum_a + sum_b) / 2.0;
    double denom = maximum - expected;
    if (denom == 0.0) return c.identical_partitions ? 1.0 : 0.0;
    return (sum_cells - expected) / denom;
}

double purity(const FlatClustering& pred, const FlatClustering& gold) {
    auto c = contingency(pred, gold);
    if (c.n == 0.0) throw contract_error("purity: empty clusterings");
    double total = 0.0;
    for (const auto& row : c.cell) {
        double best = 0.0;
        for (double v : row) best = std::max(best, v);
        total += best;
    }
    return total / c.n;
}

namespace {

double soft_cardinality(const std::vector<std::string>& items, const Similarity& sim) {
    double total = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        double denom = 0.0;
        for (std::size_t j = 0; j < items.size(); ++j) denom += sim(items[i], items[j]);
        total += 1.0 / denom;  // sim(x, x) = 1 keeps denom >= 1
    }
    return total;
}

std::vector<std::string> dedup(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& s : items)
        if (seen.insert(s).second) out.push_back(s);
    return out;
}

} // namespace

double hsr(const std::vector<std::string>& gold_headings,
           const std::vector<std::string>& gen_headings, const Similarity& sim) {
    if (gold_headings.empty()) throw contract_error("hsr: empty gold heading list");
    auto gold = dedup(gold_headings);
    auto gen = dedup(gen_headings);
    std::vector<std::string> uni = gold;
    std::set<std::string> seen(gold.begin(), gold.end());
    for (const auto& s : gen)
        if (seen.insert(s).second) uni.push_back(s);

    double g = soft_cardinality(gold, sim);
    double p = soft_cardinality(gen, sim);
    double u = soft_cardinality(uni, sim);
    double covered = g + p - u;
    double value = covered / g;
    return std::clamp(value, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// ordered tree edit distance (Zhang & Shasha) over heading-labeled nodes

namespace {

struct OrderedTree {
    std::vector<std::string> labels;  // postorder
    std::vector<int> lml;             // leftmost leaf per postorder index
    std::vector<int> keyroots;
    int size() const { return static_cast<int>(labels.size()); }
};

int build_postorder(const TaxonomyNode& node, OrderedTree& tree) {
    std::vector<const TaxonomyNode*> kids;
    kids.reserve(node.children.size());
    for (const auto& c : node.children) kids.push_back(&c);
    std::stable_sort(kids.begin(), kids.end(), [](const TaxonomyNode* a, const TaxonomyNode* b) {
        auto la = text::to_lower(a->label), lb = text::to_lower(b->label);
        if (la != lb) return la < lb;
        return a->label < b->label;
    });
    int leftmost = -1;
    for (const auto* c : kids) {
        int l = build_postorder(*c, tree);
        if (leftmost < 0) leftmost = l;
    }
    tree.labels.push_back(node.label);
    int self = tree.size() - 1;
    tree.lml.push_back(leftmost < 0 ? self : leftmost);
    return leftmost < 0 ? self : leftmost;
}

OrderedTree to_ordered(const TaxonomyNode& root) {
    OrderedTree t;
    build_postorder(root, t);
    for (int i = 0; i < t.size(); ++i) {
        bool keyroot = true;
        for (int j = i + 1; j < t.size() && keyroot; ++j)
            if (t.lml[j] == t.lml[i]) keyroot = false;
        if (keyroot) t.keyroots.push_back(i);
    }
    return t;
}

double tree_edit_distance(const OrderedTree& t1, const OrderedTree& t2, const Similarity& sim) {
    const int m = t1.size(), n = t2.size();
    std::vector<std::vector<double>> td(m, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> fd(m + 1, std::vector<double>(n + 1, 0.0));

    auto sub_cost = [&](int i, int j) { return 1.0 - sim(t1.labels[i], t2.labels[j]); };

    for (int x : t1.keyroots) {
        for (int y : t2.keyroots) {
            const int li = t1.lml[x], lj = t2.lml[y];
            // fd indices are offset by the leftmost leaf: fd[i][j] covers
            // forests t1[li..li+i-1], t2[lj..lj+j-1]
            const int im = x - li + 1, jn = y - lj + 1;
            fd[0][0] = 0.0;
            for (int i = 1; i <= im; ++i) fd[i][0] = fd[i - 1][0] + 1.0;
            for (int j = 1; j <= jn; ++j) fd[0][j] = fd[0][j - 1] + 1.0;
            for (int i = 1; i <= im; ++i) {
                for (int j = 1; j <= jn; ++j) {
                    const int ni = li + i - 1, nj = lj + j - 1;
                    if (t1.lml[ni] == li && t2.lml[nj] == lj) {
                        fd[i][j] = std::min({fd[i - 1][j] + 1.0, fd[i][j - 1] + 1.0,
                                             fd[i - 1][j - 1] + sub_cost(ni, nj)});
                        td[ni][nj] = fd[i][j];
                    } else {
                        const int pi = t1.lml[ni] - li, pj = t2.lml[nj] - lj;
                        fd[i][j] = std::min({fd[i - 1][j] + 1.0, fd[i][j - 1] + 1.0,
                                             fd[pi][pj] + td[ni][nj]});
                    }
                }
            }
        }
    }
    return td[m - 1][n - 1];
}

} // namespace

double ceds(const GoldTaxonomy& gold, const Taxonomy& gen, const Similarity& sim) {
    OrderedTree t1 = to_ordered(gold.root);
    OrderedTree t2 = to_ordered(gen.root);
    double ted = tree_edit_distance(t1, t2, sim);
    double denom = static_cast<double>(std::max(t1.size(), t2.size()));
    return 1.0 - ted / denom;
}

double nodes_ratio(const Taxonomy& gen, const GoldTaxonomy& gold) {
    std::size_t gold_nodes = count_non_root_nodes(gold);
    if (gold_nodes == 0) throw contract_error("nodes_ratio: gold tree has no non-root nodes");
    return static_cast<double>(count_non_root_nodes(gen)) / static_cast<double>(gold_nodes);
}

EvalReport evaluate(const Taxonomy& gen, const GoldTaxonomy& gold, const EvalOptions& options) {
    FlatClustering pred_all = leaf_assignments(gen);
    FlatClustering gold_all = leaf_assignments(gold);

    EvalReport report;
    report.gold_duplicates = gold_all.duplicates;

    FlatClustering pred, goldc;
    for (const auto& [id, label] : pred_all.labels) {
        auto git = gold_all.labels.find(id);
        if (git != gold_all.labels.end()) {
            pred.labels[id] = label;
            goldc.labels[id] = git->second;
        } else if (options.noise_ids.count(id)) {
            pred.labels[id] = label;
            goldc.labels[id] = options.noise_label;
            ++report.noise_count;
        } else {
            ++report.skipped_not_in_gold;
        }
    }
    for (const auto& [id, label] : gold_all.labels) {
        if (!pred_all.labels.count(id)) ++report.skipped_not_in_gen;
    }
    report.evaluated = pred.labels.size();
    if (pred.labels.empty()) throw contract_error("evaluate: no papers shared between trees");

    report.nmi = nmi(pred, goldc);
    report.ari = ari(pred, goldc);
    report.purity = purity(pred, goldc);
    auto gold_headings = non_root_headings(gold);
    auto gen_headings = non_root_headings(gen);
    report.hsr = gold_headings.empty() ? 1.0 : hsr(gold_headings, gen_headings, options.sim);
    report.ceds = ceds(gold, gen, options.sim);
    report.nodes_ratio = nodes_ratio(gen, gold);
    return report;
}

std::string EvalReport::to_json_string() const {
    json j;
    j["nmi"] = nmi;
    j["ari"] = ari;
    j["purity"] = purity;
    j["ceds"] = ceds;
    j["hsr"] = hsr;
    j["nodes_ratio"] = nodes_ratio;
    j["evaluated"] = evaluated;
    j["skipped"] = {{"not_in_gold", skipped_not_in_gold}, {"not_in_gen", skipped_not_in_gen}};
    j["gold_duplicates"] = gold_duplicates;
    j["noise_count"] = noise_count;
    return j.dump(2) + "\n";
}

std::string EvalReport::table_header() {
    std::ostringstream out;
    out << std::left << std::setw(24) << "name" << std::right << std::setw(8) << "NMI"
        << std::setw(8) << "ARI" << std::setw(8) << "Purity" << std::setw(8) << "CEDS"
        << std::setw(8) << "HSR" << std::setw(8) << "Nodes";
    return out.str();
}

std::string EvalReport::table_row(const std::string& name) const {
    std::ostringstream out;
    out << std::left << std::setw(24) << name << std::right << std::fixed << std::setprecision(3)
        << std::setw(8) << nmi << std::setw(8) << ari << std::setw(8) << purity << std::setw(8)
        << ceds << std::setw(8) << hsr << std::setw(8) << nodes_ratio;
    return out.str();
}

} // namespace taxoforge
