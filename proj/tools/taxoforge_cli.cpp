// Command-line front end: build taxonomies, evaluate against gold trees,
// inject noise, export renderings.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "taxoforge/builder.hpp"
#include "taxoforge/corpus.hpp"
#include "taxoforge/embedder.hpp"
#include "taxoforge/errors.hpp"
#include "taxoforge/gateway.hpp"
#include "taxoforge/metrics.hpp"
#include "taxoforge/remote.hpp"
#include "taxoforge/rng.hpp"
#include "taxoforge/taxonomy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace taxoforge;

namespace {

constexpr const char* kToolVersion = "taxoforge 0.1.0";

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Config: return 2;
        case ErrorCategory::Io: return 3;
        case ErrorCategory::Gateway: return 4;
        case ErrorCategory::Contract: return 5;
    }
    return 1;
}

// Plain key = value lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw config_error("config line " + std::to_string(line_no) + " is not 'key = value'");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("config line " + std::to_string(line_no) + " has an empty key");
        out[key] = value;
    }
    return out;
}

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << v;
    return out.str();
}

// Settings assembled from flags > config file > environment > defaults.
struct BuildSettings {
    std::string corpus_path;
    std::string topic;
    std::string out_path;
    std::string config_path;
    std::string log_path;
    std::string manifest_path;
    std::string prompt_dir;

    bool mock = false;
    std::uint64_t seed = 0;
    int k = 4;
    int kv = 4;
    bool adaptive_kv = false;
    std::vector<int> kv_candidates = {3, 4, 5, 6};
    int depth = 3;
    int min_papers = 5;
    int a_max = 6;
    std::string aspect_mode = "dynamic";
    bool prune = false;
    bool strict = false;
    std::string exec = "openmp";
    int mock_aspect_count = 3;
    std::size_t embedding_dim = 256;
    int summary_budget = 120;
    int max_inflight = 8;

    RemoteEndpoint llm;       // aspects + facets
    RemoteEndpoint summarizer;
    RemoteEndpoint embedding;
    std::size_t remote_embedding_dim = 0;  // 0 = take from the service
};

void apply_config_file(BuildSettings& s, const std::map<std::string, std::string>& kv,
                       const std::set<std::string>& flag_overrides) {
    auto want = [&](const char* key) { return kv.count(key) && !flag_overrides.count(key); };
    auto get_int = [&](const char* key) { return std::stoi(kv.at(key)); };
    auto get_bool = [&](const char* key) {
        const std::string& v = kv.at(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw config_error(std::string("config key '") + key + "' is not a boolean: " + v);
    };
    if (want("topic")) s.topic = kv.at("topic");
    if (want("mock")) s.mock = get_bool("mock");
    if (want("seed")) s.seed = std::stoull(kv.at("seed"));
    if (want("k")) s.k = get_int("k");
    if (want("kv")) s.kv = get_int("kv");
    if (want("adaptive_kv")) s.adaptive_kv = get_bool("adaptive_kv");
    if (want("kv_candidates")) {
        s.kv_candidates.clear();
        std::stringstream ss(kv.at("kv_candidates"));
        std::string item;
        while (std::getline(ss, item, ',')) s.kv_candidates.push_back(std::stoi(item));
    }
    if (want("depth")) s.depth = get_int("depth");
    if (want("min_papers")) s.min_papers = get_int("min_papers");
    if (want("a_max")) s.a_max = get_int("a_max");
    if (want("aspect_mode")) s.aspect_mode = kv.at("aspect_mode");
    if (want("prune")) s.prune = get_bool("prune");
    if (want("strict_nonempty")) s.strict = get_bool("strict_nonempty");
    if (want("exec")) s.exec = kv.at("exec");
    if (want("mock_aspect_count")) s.mock_aspect_count = get_int("mock_aspect_count");
    if (want("embedding_dim")) s.embedding_dim = static_cast<std::size_t>(get_int("embedding_dim"));
    if (want("summary_budget")) s.summary_budget = get_int("summary_budget");
    if (want("max_inflight")) s.max_inflight = get_int("max_inflight");
    if (want("prompt_dir")) s.prompt_dir = kv.at("prompt_dir");
    if (kv.count("llm_url")) s.llm.url = kv.at("llm_url");
    if (kv.count("llm_key")) s.llm.api_key = kv.at("llm_key");
    if (kv.count("llm_model")) s.llm.model = kv.at("llm_model");
    if (kv.count("summary_url")) s.summarizer.url = kv.at("summary_url");
    if (kv.count("summary_key")) s.summarizer.api_key = kv.at("summary_key");
    if (kv.count("summary_model")) s.summarizer.model = kv.at("summary_model");
    if (kv.count("emb_url")) s.embedding.url = kv.at("emb_url");
    if (kv.count("emb_key")) s.embedding.api_key = kv.at("emb_key");
    if (kv.count("emb_model")) s.embedding.model = kv.at("emb_model");
    if (kv.count("emb_dim")) s.remote_embedding_dim = static_cast<std::size_t>(get_int("emb_dim"));
}

ExecMode parse_exec(const std::string& s) {
    if (s == "serial") return ExecMode::Serial;
    if (s == "openmp") return default_exec_mode();
    throw config_error("unknown exec mode '" + s + "' (serial|openmp)");
}

struct Backends {
    std::shared_ptr<ChatBackend> aspects;
    std::shared_ptr<ChatBackend> summaries;
    std::unique_ptr<Embedder> embedder;
};

Backends make_backends(const BuildSettings& s) {
    Backends b;
    if (s.mock) {
        auto mock = std::make_shared<MockChatBackend>(s.mock_aspect_count, s.seed);
        b.aspects = mock;
        b.summaries = mock;
        b.embedder = std::make_unique<MockEmbedder>(s.embedding_dim, s.seed);
        return b;
    }
    RemoteEndpoint llm = s.llm;
    if (llm.url.empty()) llm = llm_endpoint_from_env();
    if (!s.llm.model.empty()) llm.model = s.llm.model;
    RemoteEndpoint sum = s.summarizer;
    if (sum.url.empty()) {
        sum = llm;
        if (!s.summarizer.model.empty()) sum.model = s.summarizer.model;
    }
    RemoteEndpoint emb = s.embedding;
    if (emb.url.empty()) {
        auto env = embedding_endpoint_from_env();
        emb.url = env.url;
        if (emb.api_key.empty()) emb.api_key = env.api_key;
    }
    b.aspects = std::make_shared<RemoteChatBackend>(llm);
    b.summaries = std::make_shared<RemoteChatBackend>(sum);
    b.embedder = std::make_unique<RemoteEmbedder>(emb, s.remote_embedding_dim);
    return b;
}

BuildConfig to_build_config(const BuildSettings& s) {
    BuildConfig config;
    config.k = s.k;
    if (s.adaptive_kv) {
        config.kv_policy.mode = KvPolicy::Mode::SilhouetteAdaptive;
        config.kv_policy.candidates = s.kv_candidates;
    } else {
        config.kv_policy.mode = KvPolicy::Mode::Fixed;
        config.kv_policy.fixed_kv = s.kv;
    }
    config.max_depth = s.depth;
    config.min_papers = s.min_papers;
    config.aspect_mode = s.aspect_mode == "fixed" ? AspectMode::FixedTemplate : AspectMode::Dynamic;
    if (s.aspect_mode != "fixed" && s.aspect_mode != "dynamic")
        throw config_error("aspect mode must be 'dynamic' or 'fixed', got '" + s.aspect_mode + "'");
    config.prune = s.prune;
    config.strict_nonempty = s.strict;
    config.seed = s.seed;
    config.exec = parse_exec(s.exec);
    config.gmm.exec = config.exec;
    return config;
}

json settings_json(const BuildSettings& s) {
    json j;
    j["topic"] = s.topic;
    j["mock"] = s.mock;
    j["seed"] = s.seed;
    j["k"] = s.k;
    j["kv"] = s.kv;
    j["kv_policy"] = s.adaptive_kv ? "silhouette_adaptive" : "fixed";
    j["kv_candidates"] = s.kv_candidates;
    j["depth"] = s.depth;
    j["min_papers"] = s.min_papers;
    j["a_max"] = s.a_max;
    j["aspect_mode"] = s.aspect_mode;
    j["prune"] = s.prune;
    j["strict_nonempty"] = s.strict;
    j["exec"] = s.exec;
    j["mock_aspect_count"] = s.mock_aspect_count;
    j["embedding_dim"] = s.embedding_dim;
    j["summary_budget"] = s.summary_budget;
    j["max_inflight"] = s.max_inflight;
    return j;
}

int run_build(const BuildSettings& settings_in, const std::set<std::string>& flag_overrides) {
    BuildSettings s = settings_in;
    if (!s.config_path.empty()) apply_config_file(s, read_config_file(s.config_path), flag_overrides);
    if (s.log_path.empty()) s.log_path = s.out_path + ".runlog.jsonl";
    if (s.manifest_path.empty()) s.manifest_path = s.out_path + ".manifest.json";

    // inputs first; nothing is written if they fail
    Corpus corpus = load_corpus(s.corpus_path, s.topic);
    Backends backends = make_backends(s);

    GatewayConfig gc;
    gc.a_max = s.a_max;
    gc.summary_budget = s.summary_budget;
    gc.max_inflight = s.max_inflight;
    PromptLibrary prompts;
    if (!s.prompt_dir.empty()) prompts.load_overrides(s.prompt_dir);
    LlmGateway gateway(backends.aspects, backends.summaries, gc, prompts);

    // the manifest precedes every other output
    json manifest;
    manifest["manifest_version"] = 1;
    manifest["tool"] = kToolVersion;
    manifest["created_utc"] = utc_now();
    manifest["command"] = "build";
    manifest["config"] = settings_json(s);
    manifest["backends"] = {{"aspects", gateway.aspect_backend_id()},
                            {"summaries", gateway.summary_backend_id()},
                            {"embedder", backends.embedder->id()}};
    manifest["inputs"] = {{"corpus",
                           {{"path", s.corpus_path},
                            {"digest", hex64(file_digest(s.corpus_path))},
                            {"papers", corpus.size()}}}};
    manifest["outputs"] = {{"taxonomy", s.out_path}, {"run_log", s.log_path}};
    {
        std::ofstream out(s.manifest_path);
        if (!out) throw io_error("cannot write manifest '" + s.manifest_path + "'");
        out << manifest.dump(2) << '\n';
    }

    BuildConfig config = to_build_config(s);
    config.partial_path = s.out_path + ".partial.json";
    BuildServices services{gateway, *backends.embedder};
    BuildResult result = build_taxonomy(corpus, services, config);

    auto report = validate_tree(result.taxonomy);
    if (!report.ok())
        throw contract_error("built tree failed validation:\n" + report.to_string());

    save_taxonomy(result.taxonomy, s.out_path);
    {
        std::ofstream log(s.log_path);
        if (!log) throw io_error("cannot write run log '" + s.log_path + "'");
        for (const auto& rec : result.log) log << rec.to_json_line() << '\n';
    }
    std::cout << "built taxonomy over " << corpus.size() << " papers: "
              << count_nodes(result.taxonomy.root) << " nodes, " << result.log.size()
              << " expansions -> " << s.out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// eval

Similarity make_similarity(const std::string& kind, const BuildSettings& s) {
    if (kind == "lexical") return lexical_similarity;
    if (kind == "embedding") {
        std::shared_ptr<Embedder> embedder;
        if (s.mock || s.embedding.url.empty()) {
            embedder = std::make_shared<MockEmbedder>(s.embedding_dim, s.seed);
        } else {
            embedder = std::make_shared<RemoteEmbedder>(s.embedding, s.remote_embedding_dim);
        }
        auto cache = std::make_shared<std::map<std::string, EmbeddingVector>>();
        return [embedder, cache](const std::string& a, const std::string& b) {
            if (a == b) return 1.0;
            auto fetch = [&](const std::string& t) -> const EmbeddingVector& {
                auto it = cache->find(t);
                if (it == cache->end())
                    it = cache->emplace(t, embedder->embed_batch({t}).front()).first;
                return it->second;
            };
            return std::max(0.0, cosine_similarity(fetch(a), fetch(b)));
        };
    }
    throw config_error("unknown similarity '" + kind + "' (lexical|embedding)");
}

EvalReport eval_pair(const std::string& gen_path, const std::string& gold_path,
                     const std::string& corpus_path, const Similarity& sim) {
    Taxonomy gen = load_taxonomy(gen_path);
    GoldTaxonomy gold = load_gold_taxonomy(gold_path);
    auto report = validate_tree(gen);
    if (!report.ok())
        throw contract_error("generated tree failed validation:\n" + report.to_string());

    EvalOptions options;
    options.sim = sim;
    if (!corpus_path.empty()) {
        Corpus corpus = load_corpus(corpus_path);
        for (const auto& p : corpus.papers())
            if (p.is_noise) options.noise_ids.insert(p.id);
    }
    return evaluate(gen, gold, options);
}

int run_eval(const std::string& gen_path, const std::string& gold_path,
             const std::string& corpus_path, const std::string& out_path,
             const std::string& sim_kind, const std::string& batch_dir,
             const BuildSettings& s) {
    Similarity sim = make_similarity(sim_kind, s);

    if (batch_dir.empty()) {
        EvalReport report = eval_pair(gen_path, gold_path, corpus_path, sim);
        std::cout << EvalReport::table_header() << '\n'
                  << report.table_row(fs::path(gen_path).filename().string()) << '\n';
        if (!out_path.empty()) {
            std::ofstream out(out_path);
            if (!out) throw io_error("cannot write report '" + out_path + "'");
            out << report.to_json_string();
        }
        return 0;
    }

    // batch: every *.gen.json paired with <stem>.gold.json
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& entry : fs::directory_iterator(batch_dir)) {
        std::string name = entry.path().filename().string();
        const std::string suffix = ".gen.json";
        if (name.size() <= suffix.size() || name.substr(name.size() - suffix.size()) != suffix)
            continue;
        std::string stem = name.substr(0, name.size() - suffix.size());
        fs::path gold = entry.path().parent_path() / (stem + ".gold.json");
        if (fs::exists(gold)) pairs.emplace_back(entry.path().string(), gold.string());
    }
    std::sort(pairs.begin(), pairs.end());
    if (pairs.empty()) throw io_error("no (*.gen.json, *.gold.json) pairs under '" + batch_dir + "'");

    std::cout << EvalReport::table_header() << '\n';
    EvalReport mean;
    json all = json::array();
    for (const auto& [gen_p, gold_p] : pairs) {
        EvalReport r = eval_pair(gen_p, gold_p, "", sim);
        std::cout << r.table_row(fs::path(gen_p).filename().string()) << '\n';
        mean.nmi += r.nmi;
        mean.ari += r.ari;
        mean.purity += r.purity;
        mean.ceds += r.ceds;
        mean.hsr += r.hsr;
        mean.nodes_ratio += r.nodes_ratio;
        mean.evaluated += r.evaluated;
        all.push_back(json::parse(r.to_json_string()));
    }
    const double n = static_cast<double>(pairs.size());
    mean.nmi /= n;
    mean.ari /= n;
    mean.purity /= n;
    mean.ceds /= n;
    mean.hsr /= n;
    mean.nodes_ratio /= n;
    std::cout << mean.table_row("mean over " + std::to_string(pairs.size())) << '\n';
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw io_error("cannot write report '" + out_path + "'");
        out << json{{"pairs", all}, {"mean", json::parse(mean.to_json_string())}}.dump(2) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// export

void collect_dot(const TaxonomyNode& node, std::size_t& counter,
                 std::map<const TaxonomyNode*, std::size_t>& ids, std::ostream& out) {
    ids[&node] = counter++;
    std::string label = node.label;
    for (auto pos = label.find('"'); pos != std::string::npos; pos = label.find('"', pos + 2))
        label.replace(pos, 1, "\\\"");
    out << "  n" << ids[&node] << " [label=\"" << label << " (" << node.paper_ids.size()
        << ")\"];\n";
    for (const auto& c : node.children) {
        collect_dot(c, counter, ids, out);
        out << "  n" << ids[&node] << " -> n" << ids[&c] << ";\n";
    }
}

std::string latex_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\textbackslash{}"; break;
            case '#': case '$': case '%': case '&': case '_': out += '\\'; out += c; break;
            case '{': out += "\\{"; break;
            case '}': out += "\\}"; break;
            case '~': out += "\\textasciitilde{}"; break;
            case '^': out += "\\textasciicircum{}"; break;
            case '[': out += "{[}"; break;
            case ']': out += "{]}"; break;
            default: out += c;
        }
    }
    return out;
}

void forest_node(const TaxonomyNode& node, int indent, std::ostream& out) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    out << pad << "[{" << latex_escape(node.label) << "}";
    if (node.is_leaf()) {
        out << "\n" << pad << "  [{";
        for (std::size_t i = 0; i < node.paper_ids.size(); ++i) {
            if (i) out << ", ";
            out << latex_escape(node.paper_ids[i]);
        }
        out << "}]\n" << pad << "]";
    } else {
        out << '\n';
        for (const auto& c : node.children) {
            forest_node(c, indent + 1, out);
            out << '\n';
        }
        out << pad << "]";
    }
}

void markdown_node(const TaxonomyNode& node, int indent, std::ostream& out) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    out << pad << "- **" << node.label << "** (" << node.paper_ids.size() << " papers)\n";
    if (node.is_leaf()) {
        out << pad << "  - papers: ";
        for (std::size_t i = 0; i < node.paper_ids.size(); ++i) {
            if (i) out << ", ";
            out << "`" << node.paper_ids[i] << "`";
        }
        out << '\n';
    } else {
        for (const auto& c : node.children) markdown_node(c, indent + 1, out);
    }
}

int run_export(const std::string& tree_path, const std::string& format,
               const std::string& out_path) {
    Taxonomy tree = load_taxonomy(tree_path);
    auto report = validate_tree(tree);
    if (!report.ok()) throw contract_error("tree failed validation:\n" + report.to_string());

    std::ostringstream body;
    if (format == "dot") {
        body << "digraph taxonomy {\n  rankdir=LR;\n  node [shape=box];\n";
        std::size_t counter = 0;
        std::map<const TaxonomyNode*, std::size_t> ids;
        collect_dot(tree.root, counter, ids, body);
        body << "}\n";
    } else if (format == "forest") {
        body << "% requires \\usepackage[linguistics]{forest}\n";
        body << "\\begin{forest} for tree={grow=east, draw, rounded corners, align=left}\n";
        forest_node(tree.root, 1, body);
        body << "\n\\end{forest}\n";
    } else if (format == "markdown") {
        body << "# " << tree.topic << "\n\n";
        markdown_node(tree.root, 0, body);
    } else {
        throw config_error("unknown export format '" + format + "' (dot|forest|markdown)");
    }

    if (out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(out_path);
        if (!out) throw io_error("cannot write '" + out_path + "'");
        out << body.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"taxoforge: aspect-guided hierarchical taxonomy construction over paper corpora"};
    app.require_subcommand(1);

    BuildSettings s;
    std::set<std::string> overridden;

    auto* build = app.add_subcommand("build", "build a taxonomy from a corpus");
    build->add_option("--corpus", s.corpus_path, "corpus JSON-lines file")->required();
    build->add_option("--topic", s.topic, "root topic");
    build->add_option("--out", s.out_path, "output taxonomy JSON path")->required();
    build->add_option("--config", s.config_path, "key = value config file");
    build->add_flag("--mock", s.mock, "deterministic offline backends");
    auto* o_seed = build->add_option("--seed", s.seed, "master seed");
    auto* o_k = build->add_option("--k", s.k, "clusters per aspect");
    auto* o_kv = build->add_option("--kv", s.kv, "children per node");
    auto* o_akv = build->add_flag("--adaptive-kv", s.adaptive_kv, "silhouette-adaptive k_v");
    auto* o_depth = build->add_option("--depth", s.depth, "maximum depth L");
    auto* o_minp = build->add_option("--min-papers", s.min_papers, "expansion threshold");
    auto* o_amax = build->add_option("--amax", s.a_max, "aspect cap");
    auto* o_amode = build->add_option("--aspect-mode", s.aspect_mode, "dynamic|fixed");
    auto* o_prune = build->add_flag("--prune", s.prune, "prune low-scoring combinations");
    auto* o_exec = build->add_option("--exec", s.exec, "serial|openmp");
    build->add_option("--log", s.log_path, "run log path (default <out>.runlog.jsonl)");
    build->add_option("--manifest", s.manifest_path, "manifest path (default <out>.manifest.json)");
    build->add_option("--prompt-dir", s.prompt_dir, "prompt template overrides");

    std::string gen_path, gold_path, eval_corpus, eval_out, sim_kind = "lexical", batch_dir;
    auto* eval = app.add_subcommand("eval", "score a taxonomy against a gold tree");
    eval->add_option("--gen", gen_path, "generated taxonomy JSON");
    eval->add_option("--gold", gold_path, "gold taxonomy JSON");
    eval->add_option("--corpus", eval_corpus, "corpus with noise flags");
    eval->add_option("--out", eval_out, "report JSON path");
    eval->add_option("--sim", sim_kind, "heading similarity: lexical|embedding");
    eval->add_option("--batch", batch_dir, "directory of *.gen.json / *.gold.json pairs");

    std::string base_path, pool_path, noise_out, noise_topic;
    double ratio = 0.0;
    std::uint64_t noise_seed = 0;
    auto* noise = app.add_subcommand("noise", "inject unrelated papers into a corpus");
    noise->add_option("--base", base_path, "curated corpus")->required();
    noise->add_option("--pool", pool_path, "pool of unrelated papers")->required();
    noise->add_option("--ratio", ratio, "noise ratio in [0, 0.5]")->required();
    noise->add_option("--seed", noise_seed, "draw seed");
    noise->add_option("--out", noise_out, "output corpus path")->required();
    noise->add_option("--topic", noise_topic, "topic for the output corpus");

    std::string tree_path, format = "markdown", export_out;
    auto* exp = app.add_subcommand("export", "render a taxonomy (dot|forest|markdown)");
    exp->add_option("--tree", tree_path, "taxonomy JSON")->required();
    exp->add_option("--format", format, "dot|forest|markdown");
    exp->add_option("--out", export_out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    // flags beat config-file keys
    auto mark = [&](CLI::Option* opt, const char* key) {
        if (opt->count() > 0) overridden.insert(key);
    };
    mark(o_seed, "seed");
    mark(o_k, "k");
    mark(o_kv, "kv");
    mark(o_akv, "adaptive_kv");
    mark(o_depth, "depth");
    mark(o_minp, "min_papers");
    mark(o_amax, "a_max");
    mark(o_amode, "aspect_mode");
    mark(o_prune, "prune");
    mark(o_exec, "exec");

    try {
        if (build->parsed()) return run_build(s, overridden);
        if (eval->parsed()) {
            if (batch_dir.empty() && (gen_path.empty() || gold_path.empty()))
                throw config_error("eval needs --gen and --gold, or --batch");
            return run_eval(gen_path, gold_path, eval_corpus, eval_out, sim_kind, batch_dir, s);
        }
        if (noise->parsed()) {
            Corpus base = load_corpus(base_path, noise_topic);
            Corpus pool = load_corpus(pool_path);
            Corpus mixed = inject_noise(base, pool, ratio, noise_seed);
            save_corpus(mixed, noise_out);
            std::cout << "wrote " << mixed.size() << " papers (" << (mixed.size() - base.size())
                      << " noise) -> " << noise_out << '\n';
            return 0;
        }
        if (exp->parsed()) return run_export(tree_path, format, export_out);
    } catch (const TaxoError& e) {
        std::cerr << "error [" << category_name(e.category()) << "]: " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
