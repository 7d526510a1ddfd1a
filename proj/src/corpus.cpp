#include "taxoforge/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "taxoforge/errors.hpp"
#include "taxoforge/rng.hpp"

#include <json.hpp>

namespace taxoforge {

using nlohmann::json;

Corpus::Corpus(std::string topic, std::vector<Paper> papers) : topic_(std::move(topic)) {
    papers_.reserve(papers.size());
    for (auto& p : papers) add(std::move(p));
}

const Paper* Corpus::find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &papers_[it->second];
}

std::size_t Corpus::rank(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw identity_error("unknown paper id '" + id + "'");
    return it->second;
}

void Corpus::add(Paper p) {
    if (p.id.empty()) throw identity_error("paper with empty id");
    if (index_.count(p.id)) throw identity_error("duplicate paper id '" + p.id + "'");
    index_.emplace(p.id, papers_.size());
    papers_.push_back(std::move(p));
}

namespace {

Paper paper_from_json(const json& j, std::size_t line_no) {
    auto fail = [&](const std::string& what) {
        throw parse_error("line " + std::to_string(line_no) + ": " + what);
    };
    if (!j.is_object()) fail("record is not a JSON object");
    Paper p;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
        fail("missing or empty 'id'");
    p.id = j["id"].get<std::string>();
    if (!j.contains("title") || !j["title"].is_string() || j["title"].get<std::string>().empty())
        fail("missing or empty 'title'");
    p.title = j["title"].get<std::string>();
    if (j.contains("abstract") && j["abstract"].is_string())
        p.abstract_text = j["abstract"].get<std::string>();
    if (j.contains("introduction") && j["introduction"].is_string())
        p.introduction = j["introduction"].get<std::string>();
    if (p.abstract_text.empty() && p.introduction.empty())
        fail("record '" + p.id + "' has neither abstract nor introduction");
    if (j.contains("metadata")) {
        if (!j["metadata"].is_object()) fail("'metadata' is not an object");
        for (auto it = j["metadata"].begin(); it != j["metadata"].end(); ++it) {
            if (!it.value().is_string()) fail("metadata value for '" + it.key() + "' is not a string");
            p.metadata[it.key()] = it.value().get<std::string>();
        }
    }
    if (j.contains("is_noise")) {
        if (!j["is_noise"].is_boolean()) fail("'is_noise' is not a boolean");
        p.is_noise = j["is_noise"].get<bool>();
    }
    return p;
}

json paper_to_json(const Paper& p) {
    json j;
    j["id"] = p.id;
    j["title"] = p.title;
    j["abstract"] = p.abstract_text;
    if (!p.introduction.empty()) j["introduction"] = p.introduction;
    if (!p.metadata.empty()) j["metadata"] = p.metadata;
    if (p.is_noise) j["is_noise"] = true;
    return j;
}

} // namespace

Corpus load_corpus(const std::string& path, const std::string& topic) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open corpus file '" + path + "'");
    Corpus corpus;
    corpus.set_topic(topic);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw parse_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        corpus.add(paper_from_json(j, line_no));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write corpus file '" + path + "'");
    for (const auto& p : corpus.papers()) out << paper_to_json(p).dump() << '\n';
    if (!out) throw io_error("write failed for '" + path + "'");
}

Corpus inject_noise(const Corpus& base, const Corpus& pool, double ratio, std::uint64_t seed) {
    if (ratio < 0.0 || ratio > 0.5)
        throw contract_error("noise ratio " + std::to_string(ratio) + " outside [0, 0.5]");
    for (const auto& p : pool.papers()) {
        if (base.contains(p.id)) throw identity_error("pool shares id '" + p.id + "' with base");
    }
    const std::size_t need = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(base.size()) + 0.5));
    if (need > pool.size())
        throw capacity_error("pool of " + std::to_string(pool.size()) + " cannot supply " +
                             std::to_string(need) + " noise papers");

    Corpus out;
    out.set_topic(base.topic());
    for (const auto& p : base.papers()) out.add(p);
    if (need == 0) return out;

    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(seed);
    // partial Fisher-Yates: the first `need` slots are the draw order
    for (std::size_t i = 0; i < need; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.bounded(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    for (std::size_t i = 0; i < need; ++i) {
        Paper p = pool.at(idx[i]);
        p.is_noise = true;
        out.add(std::move(p));
    }
    return out;
}

std::uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for digest");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[8192];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
        if (!in) break;
    }
    return h;
}

} // namespace taxoforge
