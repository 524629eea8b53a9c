#include "reap/memory_index.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "json.hpp"

namespace reap {

using nlohmann::json;

const char* to_string(OutcomeFilter filter) {
    switch (filter) {
        case OutcomeFilter::All: return "all";
        case OutcomeFilter::PositiveOnly: return "positive_only";
        case OutcomeFilter::NegativeOnly: return "negative_only";
    }
    return "unknown";
}

OutcomeFilter outcome_filter_from_string(const std::string& s) {
    if (s == "all") return OutcomeFilter::All;
    if (s == "positive_only") return OutcomeFilter::PositiveOnly;
    if (s == "negative_only") return OutcomeFilter::NegativeOnly;
    throw Error(ErrorCode::InvalidArgument, "unknown outcome filter '" + s + "'");
}

MemoryIndex::MemoryIndex(std::string provider_name, std::size_t dim, KnowledgeType knowledge_type)
    : provider_name_(std::move(provider_name)), dim_(dim), knowledge_type_(knowledge_type) {
    if (dim_ == 0) {
        throw Error(ErrorCode::InvalidArgument, "index dim must be positive");
    }
}

void MemoryIndex::insert(KnowledgeRecord record) {
    if (record.content.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "record '" + record.task_id + "' has empty content");
    }
    if (record.embedding.dim() != dim_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "record '" + record.task_id + "' embedding dim " +
                        std::to_string(record.embedding.dim()) + " != index dim " +
                        std::to_string(dim_));
    }
    for (auto& existing : records_) {
        if (existing.task_id == record.task_id &&
            existing.knowledge_type == record.knowledge_type) {
            existing = std::move(record);
            return;
        }
    }
    records_.push_back(std::move(record));
}

namespace {

bool survives(OutcomeFilter filter, int reward) {
    switch (filter) {
        case OutcomeFilter::All: return true;
        case OutcomeFilter::PositiveOnly: return reward == 1;
        case OutcomeFilter::NegativeOnly: return reward == 0;
    }
    return true;
}

}  // namespace

MemoryIndex build_memory(const Dataset& dataset, KnowledgeType type, GenerationProvider& gen,
                         EmbeddingProvider& embedder, const BuildOptions& options,
                         std::vector<SkippedItem>* skipped) {
    std::vector<const DatasetItem*> items;
    items.reserve(dataset.size());
    for (const auto& item : dataset) {
        if (survives(options.filter, item.trajectory.reward)) items.push_back(&item);
    }
    // Stable task_id order makes the merge deterministic regardless of
    // worker completion order; duplicates keep dataset order so the
    // later item wins on insert.
    std::stable_sort(items.begin(), items.end(),
                     [](const DatasetItem* a, const DatasetItem* b) {
                         return a->task.id < b->task.id;
                     });

    struct Slot {
        std::optional<KnowledgeRecord> record;
        std::string error;
    };
    std::vector<Slot> slots(items.size());

    int jobs = std::max(1, options.extraction.jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= items.size()) return;
            try {
                slots[i].record = extract_knowledge(items[i]->trajectory, items[i]->task, type,
                                                    gen, embedder, options.extraction);
            } catch (const std::exception& e) {
                slots[i].error = e.what();
            }
        }
    };
    if (jobs == 1 || items.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& thread : threads) thread.join();
    }

    std::size_t dim = embedder.dim();
    if (dim == 0) {
        for (const auto& slot : slots) {
            if (slot.record) {
                dim = slot.record->embedding.dim();
                break;
            }
        }
    }
    MemoryIndex index(embedder.name(), dim == 0 ? 1 : dim, type);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].record) {
            index.insert(std::move(*slots[i].record));
        } else if (options.skip_failed_items) {
            if (skipped != nullptr) {
                skipped->push_back(SkippedItem{items[i]->task.id, slots[i].error});
            }
        } else {
            throw Error(ErrorCode::ProviderFailure,
                        "extraction failed for task '" + items[i]->task.id +
                            "': " + slots[i].error);
        }
    }
    return index;
}

std::vector<RetrievalResult> retrieve_text(const MemoryIndex& index, const std::string& query_text,
                                           int k, EmbeddingProvider& embedder,
                                           const std::string& exclude_task_id) {
    if (k < 1) {
        throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    }
    if (embedder.name() != index.provider_name()) {
        throw Error(ErrorCode::ProviderMismatch,
                    "index built with provider '" + index.provider_name() + "', queried with '" +
                        embedder.name() + "'");
    }
    if (index.empty()) return {};

    EmbeddingVector query = embed_text(embedder, query_text);

    struct Scored {
        double score;
        std::size_t insertion;
    };
    std::vector<Scored> scored;
    scored.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& record = index.records()[i];
        if (!exclude_task_id.empty() && record.task_id == exclude_task_id) continue;
        scored.push_back(Scored{cosine_similarity(query, record.embedding), i});
    }
    std::sort(scored.begin(), scored.end(), [&index](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.insertion != b.insertion) return a.insertion < b.insertion;
        return index.records()[a.insertion].task_id < index.records()[b.insertion].task_id;
    });

    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    std::vector<RetrievalResult> results;
    results.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        results.push_back(RetrievalResult{index.records()[scored[r].insertion], scored[r].score,
                                          static_cast<int>(r + 1)});
    }
    return results;
}

std::vector<RetrievalResult> retrieve(const MemoryIndex& index, const Task& query_task, int k,
                                      EmbeddingProvider& embedder,
                                      const RetrieveOptions& options) {
    return retrieve_text(index, task_key(query_task), k, embedder,
                         options.exclude_self ? query_task.id : std::string());
}

namespace {

json record_to_json(const KnowledgeRecord& record) {
    return json{{"task_id", record.task_id},
                {"task_text", record.task_text},
                {"knowledge_type", to_string(record.knowledge_type)},
                {"outcome", to_string(record.outcome)},
                {"content", record.content},
                {"embedding", record.embedding.values}};
}

KnowledgeRecord record_from_json(const json& j) {
    KnowledgeRecord record;
    record.task_id = j.at("task_id").get<std::string>();
    record.task_text = j.at("task_text").get<std::string>();
    record.knowledge_type = knowledge_type_from_string(j.at("knowledge_type").get<std::string>());
    record.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    record.content = j.at("content").get<std::string>();
    record.embedding.values = j.at("embedding").get<std::vector<double>>();
    return record;
}

}  // namespace

void save_index(const MemoryIndex& index, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot write index file '" + path + "'");
    }
    json header{{"version", kIndexSchemaVersion},
                {"provider_name", index.provider_name()},
                {"dim", index.dim()},
                {"knowledge_type", to_string(index.knowledge_type())}};
    out << header.dump() << '\n';
    for (const auto& record : index.records()) {
        out << record_to_json(record).dump() << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoFailure, "short write to '" + path + "'");
    }
}

MemoryIndex load_index(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open index file '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::CorruptRecord, "index file '" + path + "' is empty", false, 1);
    }
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
        throw Error(ErrorCode::CorruptRecord, "index header is not valid JSON", false, 1);
    }
    if (!header.contains("version") || !header.at("version").is_number_integer()) {
        throw Error(ErrorCode::CorruptRecord, "index header lacks a version", false, 1);
    }
    if (header.at("version").get<int>() != kIndexSchemaVersion) {
        throw Error(ErrorCode::SchemaVersionMismatch,
                    "index schema version " + header.at("version").dump() + ", expected " +
                        std::to_string(kIndexSchemaVersion));
    }

    MemoryIndex index(header.at("provider_name").get<std::string>(),
                      header.at("dim").get<std::size_t>(),
                      knowledge_type_from_string(header.at("knowledge_type").get<std::string>()));

    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorCode::CorruptRecord,
                        "index line " + std::to_string(line_no) + " is not valid JSON", false,
                        line_no);
        }
        try {
            index.insert(record_from_json(j));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::CorruptRecord,
                        "index line " + std::to_string(line_no) + ": " + e.what(), false,
                        line_no);
        } catch (const Error& e) {
            throw Error(ErrorCode::CorruptRecord,
                        "index line " + std::to_string(line_no) + ": " + e.what(), false,
                        line_no);
        }
    }
    return index;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double train_fraction,
                                                                            std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "train_fraction must be in (0, 1)");
    }
    std::size_t n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n) {
        throw Error(ErrorCode::DegenerateSplit,
                    "split of " + std::to_string(n) + " items at fraction " +
                        std::to_string(train_fraction) + " leaves an empty side");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Hand-rolled Fisher-Yates: std::shuffle output differs across
    // standard libraries, and splits must be reproducible everywhere.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }

    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<long>(n_train));
    std::vector<std::size_t> test(order.begin() + static_cast<long>(n_train), order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

}  // namespace reap
