#include "reap/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace reap {

void validate_embedding(const EmbeddingVector& v) {
    if (v.values.empty()) {
        throw Error(ErrorCode::InvalidArgument, "embedding vector must be non-empty");
    }
    for (double x : v.values) {
        if (!std::isfinite(x)) {
            throw Error(ErrorCode::InvalidArgument, "embedding entries must be finite");
        }
    }
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "cosine over dims " + std::to_string(a.dim()) + " and " +
                        std::to_string(b.dim()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cosine undefined for a zero vector");
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(embed(text));
    return out;
}

namespace {

bool is_blank(const std::string& text) {
    return std::all_of(text.begin(), text.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const std::string& token, std::uint64_t seed) {
    std::uint64_t h = kFnvOffset ^ seed;
    for (unsigned char c : token) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace

EmbeddingVector embed_text(EmbeddingProvider& provider, const std::string& text) {
    if (text.empty() || is_blank(text)) {
        throw Error(ErrorCode::EmptyText, "cannot embed empty text");
    }
    EmbeddingVector v = provider.embed(text);
    validate_embedding(v);
    if (provider.dim() != 0 && v.dim() != provider.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "provider '" + provider.name() + "' returned dim " +
                        std::to_string(v.dim()) + ", expected " + std::to_string(provider.dim()));
    }
    return v;
}

MockEmbeddingProvider::MockEmbeddingProvider(std::size_t dim, std::uint64_t hash_seed)
    : name_("mock-bow-" + std::to_string(dim)), dim_(dim), hash_seed_(hash_seed) {
    if (dim == 0) {
        throw Error(ErrorCode::InvalidArgument, "embedding dim must be positive");
    }
}

EmbeddingVector MockEmbeddingProvider::embed(const std::string& text) {
    EmbeddingVector v;
    v.values.assign(dim_, 0.0);

    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            v.values[fnv1a(token, hash_seed_) % dim_] += 1.0;
            token.clear();
        }
    };
    for (unsigned char c : text) {
        unsigned char lower = static_cast<unsigned char>(std::tolower(c));
        if (std::isalnum(lower)) {
            token.push_back(static_cast<char>(lower));
        } else {
            flush();
        }
    }
    flush();

    double norm_sq = 0.0;
    for (double x : v.values) norm_sq += x * x;
    if (norm_sq == 0.0) {
        // No alphanumeric tokens (e.g. "!!!"): hash the raw text as a
        // single token so the output stays a valid unit vector.
        v.values[fnv1a(text, hash_seed_) % dim_] = 1.0;
        norm_sq = 1.0;
    }
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v.values) x *= inv;
    return v;
}

}  // namespace reap
