#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace taxoforge {

// Unit-normalized dense vector.
using EmbeddingVector = std::vector<double>;

// Row-major |papers| x dim matrix for one aspect, rows in canonical
// paper order.
struct AspectEmbeddings {
    std::string aspect_name;
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    double* row(std::size_t r) { return data.data() + r * dim; }
    const double* row(std::size_t r) const { return data.data() + r * dim; }
};

class Embedder {
public:
    virtual ~Embedder() = default;

    // One unit-normalized vector per text, in input order.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;

    virtual std::size_t dimension() const = 0;
    virtual std::string id() const = 0;
};

// Hashed bag-of-words: each token lands in one of `dim` buckets via a
// seeded stable hash, weighted by term frequency, then unit-normalized.
// Pure function of (texts, seed, dim).
class MockEmbedder : public Embedder {
public:
    explicit MockEmbedder(std::size_t dim = 256, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
    std::size_t dimension() const override { return dim_; }
    std::string id() const override {
        return "mock-bow/" + std::to_string(dim_) + "/" + std::to_string(seed_);
    }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

AspectEmbeddings make_aspect_embeddings(const std::string& aspect_name,
                                        const std::vector<EmbeddingVector>& vectors);

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

} // namespace taxoforge
