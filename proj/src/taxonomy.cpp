#include "taxoforge/taxonomy.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "taxoforge/corpus.hpp"
#include "taxoforge/errors.hpp"

#include <json.hpp>

namespace taxoforge {

using nlohmann::json;

namespace {

json node_to_json(const TaxonomyNode& node) {
    json j;
    j["id"] = node.id;
    j["label"] = node.label;
    j["depth"] = node.depth;
    j["paper_ids"] = node.paper_ids;
    if (node.provenance) {
        const auto& p = *node.provenance;
        json pj;
        pj["aspect_name"] = p.aspect_name;
        pj["cluster_index"] = p.cluster_index;
        pj["score"] = p.score;
        pj["effective_kv"] = p.effective_kv;
        pj["chosen_kv"] = p.chosen_kv;
        pj["aspects_considered"] = p.aspects_considered;
        j["provenance"] = pj;
    } else {
        j["provenance"] = nullptr;
    }
    if (node.terminal) j["terminal"] = true;
    json kids = json::array();
    for (const auto& c : node.children) kids.push_back(node_to_json(c));
    j["children"] = kids;
    return j;
}

TaxonomyNode node_from_json(const json& j, int expected_depth) {
    auto fail = [&](const std::string& what) { throw parse_error("taxonomy node: " + what); };
    if (!j.is_object()) fail("not an object");
    TaxonomyNode node;
    if (!j.contains("id") || !j["id"].is_string()) fail("missing 'id'");
    node.id = j["id"].get<std::string>();
    if (!j.contains("label") || !j["label"].is_string()) fail("missing 'label' on node '" + node.id + "'");
    node.label = j["label"].get<std::string>();
    if (!j.contains("depth") || !j["depth"].is_number_integer()) fail("missing 'depth' on node '" + node.id + "'");
    node.depth = j["depth"].get<int>();
    if (node.depth != expected_depth)
        fail("node '" + node.id + "' has depth " + std::to_string(node.depth) +
             ", expected " + std::to_string(expected_depth));
    if (j.contains("paper_ids")) {
        if (!j["paper_ids"].is_array()) fail("'paper_ids' is not an array on node '" + node.id + "'");
        for (const auto& v : j["paper_ids"]) {
            if (!v.is_string()) fail("paper id is not a string on node '" + node.id + "'");
            node.paper_ids.push_back(v.get<std::string>());
        }
    }
    if (j.contains("provenance") && !j["provenance"].is_null()) {
        const auto& pj = j["provenance"];
        if (!pj.is_object()) fail("'provenance' is not an object on node '" + node.id + "'");
        NodeProvenance p;
        p.aspect_name = pj.value("aspect_name", std::string{});
        p.cluster_index = pj.value("cluster_index", 0);
        p.score = pj.value("score", 0.0);
        p.effective_kv = pj.value("effective_kv", 0);
        p.chosen_kv = pj.value("chosen_kv", 0);
        if (pj.contains("aspects_considered"))
            p.aspects_considered = pj["aspects_considered"].get<std::vector<std::string>>();
        node.provenance = std::move(p);
    }
    node.terminal = j.value("terminal", false);
    if (j.contains("children")) {
        if (!j["children"].is_array()) fail("'children' is not an array on node '" + node.id + "'");
        for (const auto& cj : j["children"]) node.children.push_back(node_from_json(cj, expected_depth + 1));
    }
    return node;
}

} // namespace

std::string taxonomy_to_json_string(const Taxonomy& tree) {
    json j;
    j["schema_version"] = kTaxonomySchemaVersion;
    j["topic"] = tree.topic;
    j["max_depth"] = tree.max_depth;
    j["root"] = node_to_json(tree.root);
    return j.dump(2) + "\n";
}

Taxonomy taxonomy_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("taxonomy document: ") + e.what());
    }
    if (!j.is_object()) throw parse_error("taxonomy document is not a JSON object");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw version_error("taxonomy document lacks 'schema_version'");
    const int version = j["schema_version"].get<int>();
    if (version != kTaxonomySchemaVersion)
        throw version_error("unsupported taxonomy schema_version " + std::to_string(version) +
                            " (expected " + std::to_string(kTaxonomySchemaVersion) + ")");
    Taxonomy tree;
    tree.topic = j.value("topic", std::string{});
    if (!j.contains("root")) throw parse_error("taxonomy document lacks 'root'");
    tree.root = node_from_json(j["root"], 0);
    tree.max_depth = j.value("max_depth", 0);
    if (tree.max_depth == 0) {
        for_each_node(tree.root, [&](const TaxonomyNode& n) {
            tree.max_depth = std::max(tree.max_depth, n.depth);
        });
    }
    return tree;
}

void save_taxonomy(const Taxonomy& tree, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write taxonomy file '" + path + "'");
    out << taxonomy_to_json_string(tree);
    if (!out) throw io_error("write failed for '" + path + "'");
}

Taxonomy load_taxonomy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open taxonomy file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return taxonomy_from_json_string(ss.str());
}

GoldTaxonomy load_gold_taxonomy(const std::string& path) {
    return load_taxonomy(path);
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& v : violations)
        out << v.kind << " at node '" << v.node_id << "': " << v.detail << '\n';
    return out.str();
}

ValidationReport validate_tree(const Taxonomy& tree) {
    ValidationReport report;
    auto add = [&](std::string kind, const std::string& node_id, std::string detail) {
        report.violations.push_back({std::move(kind), node_id, std::move(detail)});
    };

    if (tree.root.depth != 0)
        add("root_depth", tree.root.id, "root depth is " + std::to_string(tree.root.depth));

    std::set<std::string> seen_ids;
    for_each_node(tree.root, [&](const TaxonomyNode& node) {
        if (!seen_ids.insert(node.id).second)
            add("duplicate_node_id", node.id, "node id appears more than once");
        if (node.depth > tree.max_depth)
            add("depth_exceeds_max", node.id,
                "depth " + std::to_string(node.depth) + " > max " + std::to_string(tree.max_depth));
        if (node.paper_ids.empty() && &node != &tree.root)
            add("empty_node", node.id, "non-root node holds no papers");

        if (node.children.empty()) return;

        std::set<std::string> parent_set(node.paper_ids.begin(), node.paper_ids.end());
        std::map<std::string, int> child_count;
        for (const auto& child : node.children) {
            if (child.depth != node.depth + 1)
                add("depth_skip", child.id,
                    "child depth " + std::to_string(child.depth) + " under parent depth " +
                        std::to_string(node.depth));
            for (const auto& pid : child.paper_ids) {
                ++child_count[pid];
                if (!parent_set.count(pid))
                    add("foreign_paper", child.id, "paper '" + pid + "' is not in parent '" + node.id + "'");
            }
        }
        for (const auto& [pid, n] : child_count) {
            if (n > 1)
                add("overlap", node.id, "paper '" + pid + "' appears in " + std::to_string(n) + " children");
        }
        for (const auto& pid : node.paper_ids) {
            if (!child_count.count(pid))
                add("coverage_gap", node.id, "paper '" + pid + "' is in no child");
        }
    });
    return report;
}

ValidationReport validate_against_corpus(const Taxonomy& tree, const Corpus& corpus) {
    ValidationReport report;
    for_each_node(tree.root, [&](const TaxonomyNode& node) {
        for (const auto& pid : node.paper_ids) {
            if (!corpus.contains(pid))
                report.violations.push_back(
                    {"unknown_paper", node.id, "paper '" + pid + "' not present in the corpus"});
        }
    });
    return report;
}

std::size_t count_nodes(const TaxonomyNode& node) {
    std::size_t n = 1;
    for (const auto& c : node.children) n += count_nodes(c);
    return n;
}

std::size_t count_non_root_nodes(const Taxonomy& tree) {
    return count_nodes(tree.root) - 1;
}

std::vector<std::string> non_root_headings(const Taxonomy& tree) {
    std::vector<std::string> out;
    for_each_node(tree.root, [&](const TaxonomyNode& n) {
        if (&n != &tree.root) out.push_back(n.label);
    });
    return out;
}

} // namespace taxoforge
