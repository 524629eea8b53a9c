#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reap/error.hpp"

namespace reap {

/// Fixed-length vector of finite reals. Dimension is implied by the
/// length of `values` and must match across all vectors produced by
/// one provider.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const noexcept { return values.size(); }
};

/// Throws when the vector is empty or contains NaN/Inf entries.
void validate_embedding(const EmbeddingVector& v);

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual const std::string& name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual EmbeddingVector embed(const std::string& text) = 0;

    /// Default implementation embeds one text at a time; remote
    /// providers override with batched transport.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);
};

/// Validates the input and the produced vector on top of
/// provider.embed(). Throws EmptyText when `text` is empty after
/// trimming.
EmbeddingVector embed_text(EmbeddingProvider& provider, const std::string& text);

/// Deterministic hashed bag-of-tokens embedder: lowercase, split on
/// anything outside [a-z0-9], hash each token into one of `dim`
/// buckets with seeded FNV-1a, accumulate counts, L2-normalize.
class MockEmbeddingProvider : public EmbeddingProvider {
public:
    static constexpr std::uint64_t kDefaultHashSeed = 0x72656170;  // "reap"
    static constexpr std::size_t kDefaultDim = 256;

    explicit MockEmbeddingProvider(std::size_t dim = kDefaultDim,
                                   std::uint64_t hash_seed = kDefaultHashSeed);

    const std::string& name() const override { return name_; }
    std::size_t dim() const override { return dim_; }
    EmbeddingVector embed(const std::string& text) override;

private:
    std::string name_;
    std::size_t dim_;
    std::uint64_t hash_seed_;
};

}  // namespace reap
