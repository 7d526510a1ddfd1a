#include "taxoforge/embedder.hpp"

#include <cmath>

#include "taxoforge/errors.hpp"
#include "taxoforge/rng.hpp"
#include "taxoforge/text.hpp"

namespace taxoforge {

std::vector<EmbeddingVector> MockEmbedder::embed_batch(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t t = 0; t < texts.size(); ++t) {
        const auto& text_in = texts[t];
        if (text_in.empty())
            throw contract_error("embed_batch: empty text at index " + std::to_string(t));
        EmbeddingVector v(dim_, 0.0);
        for (const auto& tok : text::tokenize(text_in)) {
            std::uint64_t h = fnv1a64(tok, mix_seed(seed_, 0x9d5c0e3ull));
            v[h % dim_] += 1.0;
        }
        double norm2 = 0.0;
        for (double x : v) norm2 += x * x;
        if (norm2 <= 0.0)
            throw contract_error("embed_batch: text at index " + std::to_string(t) +
                                 " produced a zero vector");
        double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v) x *= inv;
        out.push_back(std::move(v));
    }
    return out;
}

AspectEmbeddings make_aspect_embeddings(const std::string& aspect_name,
                                        const std::vector<EmbeddingVector>& vectors) {
    AspectEmbeddings m;
    m.aspect_name = aspect_name;
    m.rows = vectors.size();
    m.dim = vectors.empty() ? 0 : vectors.front().size();
    m.data.reserve(m.rows * m.dim);
    for (const auto& v : vectors) {
        if (v.size() != m.dim)
            throw contract_error("embedding rows disagree on dimension for aspect '" + aspect_name + "'");
        m.data.insert(m.data.end(), v.begin(), v.end());
    }
    return m;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) throw contract_error("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

} // namespace taxoforge
