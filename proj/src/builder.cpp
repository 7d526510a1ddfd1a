#include "taxoforge/builder.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "taxoforge/errors.hpp"
#include "taxoforge/rng.hpp"

#include <json.hpp>

namespace taxoforge {

using nlohmann::json;

void BuildConfig::validate() const {
    if (k < 1) throw config_error("k must be at least 1");
    if (kv_policy.mode == KvPolicy::Mode::Fixed && kv_policy.fixed_kv < 2)
        throw config_error("fixed k_v must be at least 2");
    if (kv_policy.mode == KvPolicy::Mode::SilhouetteAdaptive && kv_policy.candidates.empty())
        throw config_error("adaptive k_v needs a non-empty candidate set");
    if (max_depth < 1) throw config_error("max depth L must be at least 1");
    if (min_papers < 1) throw config_error("min_papers must be at least 1");
}

std::string ExpansionRecord::to_json_line() const {
    json j;
    j["node_id"] = node_id;
    j["depth"] = depth;
    j["n_papers"] = n_papers;
    j["trace"] = trace;
    j["aspects"] = aspect_names;
    j["chosen_kv"] = chosen_kv;
    j["effective_kv"] = effective_kv;
    j["combinations_total"] = combinations_total;
    j["combinations_pruned"] = combinations_pruned;
    j["warmup"] = warmup;
    j["max_score"] = max_score;
    j["collapsed"] = collapsed;
    if (!silhouettes.empty()) {
        json s = json::object();
        for (const auto& [kv, score] : silhouettes) s[std::to_string(kv)] = score;
        j["silhouettes"] = s;
    }
    j["children"] = child_ids;
    return j.dump();
}

double partition_silhouette(const std::vector<AspectEmbeddings>& spaces,
                            const std::vector<std::pair<int, std::vector<std::size_t>>>& children) {
    if (children.size() < 2) return -1.0;

    auto dist = [&](const AspectEmbeddings& m, std::size_t a, std::size_t b) {
        double s = 0.0;
        const double* x = m.row(a);
        const double* y = m.row(b);
        for (std::size_t t = 0; t < m.dim; ++t) {
            double d = x[t] - y[t];
            s += d * d;
        }
        return std::sqrt(s);
    };

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < children.size(); ++c) {
        const auto& space = spaces[static_cast<std::size_t>(children[c].first)];
        const auto& rows = children[c].second;
        for (std::size_t r : rows) {
            double a = 0.0;
            if (rows.size() > 1) {
                for (std::size_t o : rows)
                    if (o != r) a += dist(space, r, o);
                a /= static_cast<double>(rows.size() - 1);
            } else {
                // singleton: silhouette defined as 0
                ++count;
                continue;
            }
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t c2 = 0; c2 < children.size(); ++c2) {
                if (c2 == c || children[c2].second.empty()) continue;
                double m = 0.0;
                for (std::size_t o : children[c2].second) m += dist(space, r, o);
                m /= static_cast<double>(children[c2].second.size());
                b = std::min(b, m);
            }
            double denom = std::max(a, b);
            total += denom > 0.0 ? (b - a) / denom : 0.0;
            ++count;
        }
    }
    return count ? total / static_cast<double>(count) : -1.0;
}

namespace {

std::vector<Paper> resolve_papers(const TaxonomyNode& node, const Corpus& corpus) {
    std::vector<Paper> papers;
    papers.reserve(node.paper_ids.size());
    for (const auto& pid : node.paper_ids) {
        const Paper* p = corpus.find(pid);
        if (!p) throw identity_error("node '" + node.id + "' references unknown paper '" + pid + "'");
        papers.push_back(*p);
    }
    return papers;
}

// children extracted from the winning combination, in canonical pair order
struct ChildSlice {
    PairId pair;
    std::vector<std::size_t> rows;
};

std::vector<ChildSlice> slices_from_result(const SearchResult& result,
                                           const std::vector<std::string>& ids) {
    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < ids.size(); ++i) rank[ids[i]] = i;
    std::vector<ChildSlice> slices;
    for (const auto& pair : result.best.pairs) {
        auto it = result.best.state.find(pair);
        if (it == result.best.state.end() || it->second.empty()) continue;
        ChildSlice s;
        s.pair = pair;
        for (const auto& pid : it->second) s.rows.push_back(rank.at(pid));
        std::sort(s.rows.begin(), s.rows.end());  // canonical corpus order
        slices.push_back(std::move(s));
    }
    return slices;
}

} // namespace

std::vector<TaxonomyNode> expand_node(const TaxonomyNode& node, const NodeTrace& trace,
                                      const Corpus& corpus, BuildServices services,
                                      const BuildConfig& config, ExpansionRecord* record) {
    if (!node.children.empty()) throw contract_error("expand_node: node '" + node.id + "' already expanded");
    if (node.terminal || node.depth >= config.max_depth ||
        node.paper_ids.size() <= static_cast<std::size_t>(config.min_papers)) {
        return {};
    }

    ExpansionRecord local;
    ExpansionRecord& rec = record ? *record : local;
    rec.node_id = node.id;
    rec.depth = node.depth;
    rec.n_papers = node.paper_ids.size();
    rec.trace = trace;

    try {
        const std::vector<Paper> papers = resolve_papers(node, corpus);

        // 1. aspects
        std::vector<Aspect> aspects;
        if (config.aspect_mode == AspectMode::Dynamic) {
            aspects = services.gateway.generate_aspects(trace, papers, node.depth, node.id).aspects;
        } else {
            aspects = services.gateway.fixed_aspects(node.id);
        }
        for (const auto& a : aspects) rec.aspect_names.push_back(a.name);

        // 2. aspect-guided summaries for every (aspect, paper) pair
        const auto summaries = services.gateway.summarize_all(aspects, papers);

        // collapse: no aspect separates the papers at all
        bool all_collapsed = true;
        for (std::size_t a = 0; a < aspects.size() && all_collapsed; ++a) {
            const std::string& first = summaries[a * papers.size()].text;
            for (std::size_t p = 1; p < papers.size(); ++p) {
                if (summaries[a * papers.size() + p].text != first) {
                    all_collapsed = false;
                    break;
                }
            }
        }
        if (all_collapsed) {
            rec.collapsed = true;
            TaxonomyNode child;
            child.id = node.id + ".1";
            child.depth = node.depth + 1;
            child.paper_ids = node.paper_ids;
            child.terminal = true;
            child.label = services.gateway.name_facet(trace, papers, "", papers);
            NodeProvenance prov;
            prov.aspect_name = "";
            prov.cluster_index = -1;
            prov.effective_kv = 1;
            prov.chosen_kv = 0;
            prov.aspects_considered = rec.aspect_names;
            child.provenance = std::move(prov);
            rec.effective_kv = 1;
            rec.child_ids.push_back(child.id);
            return {child};
        }

        // 3. embeddings + per-aspect mixture fits
        const int k_eff = std::min<int>(config.k, static_cast<int>(papers.size()));
        std::vector<AspectEmbeddings> spaces;
        std::vector<SoftAssignment> assignments;
        spaces.reserve(aspects.size());
        for (std::size_t a = 0; a < aspects.size(); ++a) {
            std::vector<std::string> texts;
            texts.reserve(papers.size());
            for (std::size_t p = 0; p < papers.size(); ++p)
                texts.push_back(summaries[a * papers.size() + p].text);
            auto vectors = services.embedder.embed_batch(texts);
            spaces.push_back(make_aspect_embeddings(aspects[a].name, vectors));

            GmmConfig gc = config.gmm;
            gc.exec = config.exec;
            std::uint64_t fit_seed = mix_seed(config.seed, fnv1a64(node.id + "/" + aspects[a].name));
            GmmModel model = fit_gmm(spaces.back(), k_eff, fit_seed, gc);
            auto soft = soft_assign(model, spaces.back());
            soft.aspect_name = aspects[a].name;
            assignments.push_back(std::move(soft));
        }

        // 4. k_v selection and combination search
        const int bound = static_cast<int>(aspects.size()) * k_eff;
        SearchOptions opts;
        opts.prune = config.prune;
        opts.strict_nonempty = config.strict_nonempty;
        opts.exec = config.exec;
        opts.max_combinations = config.max_combinations;
        opts.seed = mix_seed(config.seed, fnv1a64(node.id + "/search"));
        opts.paper_ids = node.paper_ids;

        SearchResult result;
        int chosen_kv = 0;
        if (config.kv_policy.mode == KvPolicy::Mode::Fixed) {
            chosen_kv = std::min(config.kv_policy.fixed_kv, bound);
            result = search_optimal(assignments, chosen_kv, opts);
        } else {
            std::vector<int> usable;
            for (int kv : config.kv_policy.candidates)
                if (kv >= 2 && kv <= bound) usable.push_back(kv);
            if (usable.empty()) usable.push_back(std::min(2, bound));
            double best_sil = -std::numeric_limits<double>::infinity();
            for (int kv : usable) {
                SearchResult candidate = search_optimal(assignments, kv, opts);
                std::vector<std::pair<int, std::vector<std::size_t>>> parts;
                for (auto& s : slices_from_result(candidate, node.paper_ids))
                    parts.emplace_back(s.pair.aspect, s.rows);
                double sil = partition_silhouette(spaces, parts);
                rec.silhouettes.emplace_back(kv, sil);
                if (sil > best_sil) {  // ties keep the smaller k_v (candidates ascend)
                    best_sil = sil;
                    chosen_kv = kv;
                    result = std::move(candidate);
                }
            }
        }

        rec.chosen_kv = chosen_kv;
        rec.combinations_total = result.stats.combinations_total;
        rec.combinations_pruned = result.stats.pruned;
        rec.warmup = result.stats.warmup;
        rec.max_score = result.max_score;

        // 5. children with facet labels and provenance
        auto slices = slices_from_result(result, node.paper_ids);
        rec.effective_kv = static_cast<int>(slices.size());
        std::vector<TaxonomyNode> children;
        children.reserve(slices.size());
        for (std::size_t t = 0; t < slices.size(); ++t) {
            TaxonomyNode child;
            child.id = node.id + "." + std::to_string(t + 1);
            child.depth = node.depth + 1;
            for (std::size_t r : slices[t].rows) child.paper_ids.push_back(node.paper_ids[r]);

            std::vector<Paper> subset;
            subset.reserve(child.paper_ids.size());
            for (std::size_t r : slices[t].rows) subset.push_back(papers[r]);
            const std::string& aspect_name =
                assignments[static_cast<std::size_t>(slices[t].pair.aspect)].aspect_name;
            child.label = services.gateway.name_facet(trace, subset, aspect_name, papers);

            NodeProvenance prov;
            prov.aspect_name = aspect_name;
            prov.cluster_index = slices[t].pair.cluster;
            prov.score = result.max_score;
            prov.effective_kv = static_cast<int>(slices.size());
            prov.chosen_kv = chosen_kv;
            prov.aspects_considered = rec.aspect_names;
            child.provenance = std::move(prov);

            // an expansion that degenerates to a single child stops there
            if (slices.size() == 1) child.terminal = true;
            rec.child_ids.push_back(child.id);
            children.push_back(std::move(child));
        }
        return children;
    } catch (const TaxoError& e) {
        throw TaxoError(e.category(), "node '" + node.id + "': " + e.what());
    }
}

BuildResult build_taxonomy(const Corpus& corpus, BuildServices services, const BuildConfig& config) {
    config.validate();
    if (corpus.empty()) throw contract_error("build_taxonomy: empty corpus");

    BuildResult result;
    result.taxonomy.topic = corpus.topic().empty() ? "root" : corpus.topic();
    result.taxonomy.max_depth = config.max_depth;
    TaxonomyNode& root = result.taxonomy.root;
    root.id = "n0";
    root.label = result.taxonomy.topic;
    root.depth = 0;
    for (const auto& p : corpus.papers()) root.paper_ids.push_back(p.id);

    struct Item {
        TaxonomyNode* node;
        NodeTrace trace;
    };
    std::deque<Item> frontier;
    frontier.push_back({&root, {root.label}});

    while (!frontier.empty()) {
        Item item = frontier.front();
        frontier.pop_front();

        ExpansionRecord rec;
        std::vector<TaxonomyNode> children;
        try {
            children = expand_node(*item.node, item.trace, corpus, services, config, &rec);
        } catch (const TaxoError&) {
            if (!config.partial_path.empty()) save_taxonomy(result.taxonomy, config.partial_path);
            throw;
        }
        if (children.empty()) continue;

        item.node->children = std::move(children);
        result.log.push_back(std::move(rec));
        for (auto& child : item.node->children) {
            if (child.terminal) continue;
            NodeTrace child_trace = item.trace;
            child_trace.push_back(child.label);
            frontier.push_back({&child, std::move(child_trace)});
        }
    }
    return result;
}

} // namespace taxoforge
