#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reap/knowledge.hpp"

namespace reap {

enum class OutcomeFilter {
    All,
    PositiveOnly,
    NegativeOnly,
};

const char* to_string(OutcomeFilter filter);
OutcomeFilter outcome_filter_from_string(const std::string& s);

/// Searchable collection of KnowledgeRecords. Immutable after build;
/// at most one record per (task_id, knowledge_type) pair, later
/// inserts replace earlier ones in place.
class MemoryIndex {
public:
    MemoryIndex(std::string provider_name, std::size_t dim, KnowledgeType knowledge_type);

    const std::string& provider_name() const noexcept { return provider_name_; }
    std::size_t dim() const noexcept { return dim_; }
    KnowledgeType knowledge_type() const noexcept { return knowledge_type_; }

    const std::vector<KnowledgeRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    /// Replaces any existing record with the same (task_id, type).
    void insert(KnowledgeRecord record);

private:
    std::string provider_name_;
    std::size_t dim_;
    KnowledgeType knowledge_type_;
    std::vector<KnowledgeRecord> records_;
};

struct RetrievalResult {
    KnowledgeRecord record;
    double score = 0.0;
    int rank = 0;  // 1-based
};

struct SkippedItem {
    std::string task_id;
    std::string message;
};

struct BuildOptions {
    OutcomeFilter filter = OutcomeFilter::All;
    ExtractionOptions extraction;
    bool skip_failed_items = false;  // abort on first failure by default
};

/// BuildMemory: one record per surviving (task, trajectory) after
/// outcome filtering. Extraction runs with bounded parallelism;
/// records are merged in stable task_id order.
MemoryIndex build_memory(const Dataset& dataset, KnowledgeType type, GenerationProvider& gen,
                         EmbeddingProvider& embedder, const BuildOptions& options = {},
                         std::vector<SkippedItem>* skipped = nullptr);

struct RetrieveOptions {
    /// Leave-one-out support: drop records whose task_id equals the
    /// query task's id.
    bool exclude_self = false;
};

/// Top-k cosine retrieval by exhaustive scan. Ties break by insertion
/// order (earlier record wins), then task_id lexicographic.
std::vector<RetrievalResult> retrieve(const MemoryIndex& index, const Task& query_task, int k,
                                      EmbeddingProvider& embedder,
                                      const RetrieveOptions& options = {});

/// Same, for a raw query text (no self-exclusion possible).
std::vector<RetrievalResult> retrieve_text(const MemoryIndex& index, const std::string& query_text,
                                           int k, EmbeddingProvider& embedder,
                                           const std::string& exclude_task_id = "");

/// Index files are newline-delimited JSON: line 1 is the header
/// {"version", "provider_name", "dim", "knowledge_type"}, each
/// following line one KnowledgeRecord. Round-trips exactly,
/// embedding bits included.
void save_index(const MemoryIndex& index, const std::string& path);
MemoryIndex load_index(const std::string& path);

inline constexpr int kIndexSchemaVersion = 1;

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double train_fraction,
                                                                            std::uint64_t seed);

/// Deterministic seeded split; |train| = round(train_fraction * n).
/// Both sides preserve the original dataset order. Throws
/// DegenerateSplit when either side would be empty.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_train_test(const std::vector<T>& dataset,
                                                           double train_fraction,
                                                           std::uint64_t seed) {
    auto [train_idx, test_idx] = split_indices(dataset.size(), train_fraction, seed);
    std::pair<std::vector<T>, std::vector<T>> out;
    out.first.reserve(train_idx.size());
    out.second.reserve(test_idx.size());
    for (auto i : train_idx) out.first.push_back(dataset[i]);
    for (auto i : test_idx) out.second.push_back(dataset[i]);
    return out;
}

}  // namespace reap
