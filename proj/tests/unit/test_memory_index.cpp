#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "reap/memory_index.hpp"
#include "test_support.hpp"

using namespace reap;
using namespace reap::test;

namespace {

KnowledgeRecord make_record(EmbeddingProvider& embedder, const std::string& task_id,
                            const std::string& intent,
                            KnowledgeType type = KnowledgeType::WebReflection,
                            OutcomeLabel outcome = OutcomeLabel::Success,
                            const std::string& content = "lesson") {
    std::string key = task_key({task_id, "site", "SHOP", intent});
    return {task_id, key, type, outcome, content, embed_text(embedder, key)};
}

/// Independent retrieval oracle: score every record, sort by
/// (score desc, insertion index asc, task_id asc), take k.
std::vector<std::pair<std::string, double>> brute_force(const MemoryIndex& index,
                                                        const EmbeddingVector& query, int k,
                                                        const std::string& exclude_task_id = "") {
    struct Row {
        double score;
        std::size_t insertion;
        std::string task_id;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < index.records().size(); ++i) {
        const auto& record = index.records()[i];
        if (!exclude_task_id.empty() && record.task_id == exclude_task_id) continue;
        rows.push_back({cosine_similarity(query, record.embedding), i, record.task_id});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.insertion != b.insertion) return a.insertion < b.insertion;
        return a.task_id < b.task_id;
    });
    if (static_cast<int>(rows.size()) > k) rows.resize(static_cast<std::size_t>(k));
    std::vector<std::pair<std::string, double>> out;
    for (const auto& row : rows) out.push_back({row.task_id, row.score});
    return out;
}

Dataset make_dataset(const std::vector<std::tuple<std::string, std::string, int>>& specs) {
    Dataset dataset;
    for (const auto& [id, intent, reward] : specs) {
        auto traj = make_trajectory(id, reward);
        dataset.push_back({{id, "site", "SHOP", intent}, traj});
    }
    return dataset;
}

}  // namespace

TEST_SUITE("memory_index") {

TEST_CASE("index constructor rejects zero dim") {
    CHECK_THROWS_AS(MemoryIndex("mock", 0, KnowledgeType::OneShot), Error);
}

TEST_CASE("insert validates content and dimension, replaces by task_id") {
    MockEmbeddingProvider mock(8);
    MemoryIndex index("mock-bow-8", 8, KnowledgeType::WebReflection);

    auto record = make_record(mock, "a", "find mugs");
    index.insert(record);
    CHECK(index.size() == 1);

    auto blank = record;
    blank.content = "";
    CHECK_THROWS_AS(index.insert(blank), Error);

    auto short_vec = record;
    short_vec.embedding.values.resize(4);
    CHECK_THROWS_AS(index.insert(short_vec), Error);

    auto replacement = make_record(mock, "a", "find mugs", KnowledgeType::WebReflection,
                                   OutcomeLabel::Failure, "updated lesson");
    index.insert(replacement);
    REQUIRE(index.size() == 1);
    CHECK(index.records()[0].content == "updated lesson");
    CHECK(index.records()[0].outcome == OutcomeLabel::Failure);
}

TEST_CASE("build_memory filters by outcome") {
    MockEmbeddingProvider mock;
    ScriptedGenerationProvider gen;
    auto dataset = make_dataset({{"a", "first", 1}, {"b", "second", 0}, {"c", "third", 1}});

    BuildOptions positive;
    positive.filter = OutcomeFilter::PositiveOnly;
    auto index = build_memory(dataset, KnowledgeType::OneShot, gen, mock, positive);
    REQUIRE(index.size() == 2);
    for (const auto& record : index.records()) CHECK(record.outcome == OutcomeLabel::Success);

    BuildOptions negative;
    negative.filter = OutcomeFilter::NegativeOnly;
    auto neg = build_memory(dataset, KnowledgeType::OneShot, gen, mock, negative);
    REQUIRE(neg.size() == 1);
    CHECK(neg.records()[0].task_id == "b");

    auto all = build_memory(dataset, KnowledgeType::OneShot, gen, mock);
    CHECK(all.size() == 3);
}

TEST_CASE("filter soundness over random datasets") {
    MockEmbeddingProvider mock;
    ScriptedGenerationProvider gen;
    std::mt19937_64 rng(11);
    Dataset dataset;
    for (int i = 0; i < 30; ++i) {
        dataset.push_back({{"t" + std::to_string(i), "site", "SHOP", random_text(rng)},
                           make_trajectory("t" + std::to_string(i), static_cast<int>(rng() % 2))});
    }
    BuildOptions positive;
    positive.filter = OutcomeFilter::PositiveOnly;
    auto index = build_memory(dataset, KnowledgeType::OneShot, gen, mock, positive);
    std::size_t expected = 0;
    for (const auto& item : dataset)
        if (item.trajectory.reward == 1) ++expected;
    CHECK(index.size() == expected);
    for (const auto& record : index.records()) CHECK(record.outcome == OutcomeLabel::Success);
}

TEST_CASE("empty dataset builds an empty index; retrieval returns nothing") {
    MockEmbeddingProvider mock;
    ScriptedGenerationProvider gen;
    auto index = build_memory({}, KnowledgeType::WebReflection, gen, mock);
    CHECK(index.empty());
    CHECK(retrieve(index, make_task("q"), 5, mock).empty());
}

TEST_CASE("duplicate task_id keeps the later item's content") {
    MockEmbeddingProvider mock;
    ScriptedGenerationProvider gen;
    Dataset dataset;
    dataset.push_back({{"dup", "site", "SHOP", "find mugs"}, make_trajectory("dup", 1, 2)});
    dataset.push_back({{"dup", "site", "SHOP", "find mugs"}, make_trajectory("dup", 1, 5)});

    auto index = build_memory(dataset, KnowledgeType::OneShot, gen, mock);
    REQUIRE(index.size() == 1);
    // later trajectory has 5 steps; one-shot content renders all of them
    CHECK(index.records()[0].content.find("click item 5") != std::string::npos);
}

TEST_CASE("build merges records in stable task_id order regardless of jobs") {
    MockEmbeddingProvider mock;
    ScriptedGenerationProvider gen;
    auto dataset =
        make_dataset({{"zeta", "last", 1}, {"alpha", "first", 1}, {"mid", "middle", 0}});

    BuildOptions serial;
    serial.extraction.jobs = 1;
    BuildOptions parallel;
    parallel.extraction.jobs = 4;

    auto a = build_memory(dataset, KnowledgeType::OneShot, gen, mock, serial);
    auto b = build_memory(dataset, KnowledgeType::OneShot, gen, mock, parallel);
    REQUIRE(a.size() == 3);
    REQUIRE(b.size() == 3);
    CHECK(a.records()[0].task_id == "alpha");
    CHECK(a.records()[1].task_id == "mid");
    CHECK(a.records()[2].task_id == "zeta");
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.records()[i].task_id == b.records()[i].task_id);
        CHECK(a.records()[i].content == b.records()[i].content);
        CHECK(a.records()[i].embedding.values == b.records()[i].embedding.values);
    }
}

TEST_CASE("per-item failures abort by default and skip when asked") {
    MockEmbeddingProvider mock;
    FailingProvider failing;
    auto dataset = make_dataset({{"a", "first", 1}, {"b", "second", 1}});

    CHECK_THROWS_AS(build_memory(dataset, KnowledgeType::Summary, failing, mock), Error);

    BuildOptions skip;
    skip.skip_failed_items = true;
    std::vector<SkippedItem> skipped;
    auto index = build_memory(dataset, KnowledgeType::Summary, failing, mock, skip, &skipped);
    CHECK(index.empty());
    REQUIRE(skipped.size() == 2);
    CHECK(skipped[0].task_id == "a");
    CHECK_FALSE(skipped[0].message.empty());

    // One-shot extraction needs no generation; the same provider succeeds.
    auto oneshot = build_memory(dataset, KnowledgeType::OneShot, failing, mock, skip, &skipped);
    CHECK(oneshot.size() == 2);
}

TEST_CASE("retrieve returns min(k, size) ranked results") {
    MockEmbeddingProvider mock;
    MemoryIndex index("mock-bow-256", 256, KnowledgeType::WebReflection);
    index.insert(make_record(mock, "a", "find blue mugs"));
    index.insert(make_record(mock, "b", "find red mugs"));
    index.insert(make_record(mock, "c", "track my order"));

    auto results = retrieve(index, {"q", "site", "SHOP", "find green mugs"}, 5, mock);
    REQUIRE(results.size() == 3);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].rank == static_cast<int>(i) + 1);
        if (i > 0) CHECK(results[i - 1].score >= results[i].score);
        CHECK(results[i].score <= 1.0 + 1e-12);
        CHECK(results[i].score >= -1.0 - 1e-12);
    }
}

TEST_CASE("self-retrieval puts the exact key at rank 1 with score 1") {
    MockEmbeddingProvider mock;
    MemoryIndex index("mock-bow-256", 256, KnowledgeType::WebReflection);
    index.insert(make_record(mock, "a", "find blue mugs"));
    index.insert(make_record(mock, "b", "plan a transit route"));

    auto results = retrieve(index, {"b", "site", "SHOP", "plan a transit route"}, 2, mock);
    REQUIRE_FALSE(results.empty());
    CHECK(results[0].record.task_id == "b");
    CHECK(std::abs(results[0].score - 1.0) < 1e-9);
}

TEST_CASE("exclude_self drops the query task's own record") {
    MockEmbeddingProvider mock;
    MemoryIndex index("mock-bow-256", 256, KnowledgeType::WebReflection);
    index.insert(make_record(mock, "a", "find blue mugs"));
    index.insert(make_record(mock, "b", "find red mugs"));

    RetrieveOptions options;
    options.exclude_self = true;
    auto results = retrieve(index, {"a", "site", "SHOP", "find blue mugs"}, 5, mock, options);
    REQUIRE(results.size() == 1);
    CHECK(results[0].record.task_id == "b");
    CHECK(results[0].rank == 1);
}

TEST_CASE("ties break by insertion order") {
    MockEmbeddingProvider mock;
    MemoryIndex index("mock-bow-256", 256, KnowledgeType::WebReflection);
    // identical key text => identical embeddings => exact score ties
    std::string key = task_key({"", "", "SHOP", "find mugs"});
    auto vec = embed_text(mock, key);
    index.insert({"zz-first", key, KnowledgeType::WebReflection, OutcomeLabel::Success, "c1", vec});
    index.insert({"aa-second", key, KnowledgeType::WebReflection, OutcomeLabel::Success, "c2", vec});

    auto results = retrieve_text(index, key, 2, mock);
    REQUIRE(results.size() == 2);
    CHECK(results[0].record.task_id == "zz-first");  // earlier insert wins despite id order
    CHECK(results[1].record.task_id == "aa-second");
}

TEST_CASE("k below one is rejected") {
    MockEmbeddingProvider mock;
    MemoryIndex index("mock-bow-256", 256, KnowledgeType::WebReflection);
    index.insert(make_record(mock, "a", "find mugs"));
    CHECK_THROWS_AS(retrieve(index, make_task("q"), 0, mock), Error);
    CHECK_THROWS_AS(retrieve(index, make_task("q"), -3, mock), Error);
}

TEST_CASE("provider mismatch is detected") {
    MockEmbeddingProvider big;
    MemoryIndex index("mock-bow-256", 256, KnowledgeType::WebReflection);
    index.insert(make_record(big, "a", "find mugs"));

    MockEmbeddingProvider small(64);
    try {
        retrieve(index, make_task("q"), 1, small);
        FAIL("expected ProviderMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProviderMismatch);
    }
}

TEST_CASE("retrieval equals the brute-force oracle on random indices") {
    MockEmbeddingProvider mock;
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        MemoryIndex index("mock-bow-256", 256, KnowledgeType::WebReflection);
        int n = 1 + static_cast<int>(rng() % 200);
        for (int i = 0; i < n; ++i)
            index.insert(make_record(mock, "t" + std::to_string(i), random_text(rng)));

        std::string query = random_text(rng);
        auto query_vec = embed_text(mock, query);
        for (int k : {1, 5, 10}) {
            auto got = retrieve_text(index, query, k, mock);
            auto want = brute_force(index, query_vec, k);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].record.task_id == want[i].first);
                CHECK(got[i].score == want[i].second);
                CHECK(got[i].rank == static_cast<int>(i) + 1);
            }
        }
    }
}

TEST_CASE("index save/load round-trips exactly") {
    MockEmbeddingProvider mock;
    MemoryIndex index("mock-bow-256", 256, KnowledgeType::Summary);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        auto record = make_record(mock, "t" + std::to_string(i), random_text(rng),
                                  KnowledgeType::Summary,
                                  i % 2 ? OutcomeLabel::Success : OutcomeLabel::Failure,
                                  "content " + random_text(rng));
        index.insert(record);
    }

    auto path = temp_path("index");
    save_index(index, path);
    auto back = load_index(path);

    CHECK(back.provider_name() == index.provider_name());
    CHECK(back.dim() == index.dim());
    CHECK(back.knowledge_type() == index.knowledge_type());
    REQUIRE(back.size() == index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& a = index.records()[i];
        const auto& b = back.records()[i];
        CHECK(a.task_id == b.task_id);
        CHECK(a.task_text == b.task_text);
        CHECK(a.knowledge_type == b.knowledge_type);
        CHECK(a.outcome == b.outcome);
        CHECK(a.content == b.content);
        CHECK(a.embedding.values == b.embedding.values);  // bit-exact
    }
    std::remove(path.c_str());
}

TEST_CASE("loading a truncated record names its line") {
    MockEmbeddingProvider mock;
    MemoryIndex index("mock-bow-256", 256, KnowledgeType::WebReflection);
    for (int i = 0; i < 3; ++i)
        index.insert(make_record(mock, "t" + std::to_string(i), "intent " + std::to_string(i)));

    auto path = temp_path("index-corrupt");
    save_index(index, path);

    // truncate the third line (second record)
    auto text = read_file(path);
    std::size_t line_start = 0;
    for (int line = 1; line < 3; ++line) line_start = text.find('\n', line_start) + 1;
    std::size_t line_end = text.find('\n', line_start);
    std::string mangled =
        text.substr(0, line_start + 20) + "\n" + text.substr(line_end + 1);
    write_file(path, mangled);

    try {
        load_index(path);
        FAIL("expected CorruptRecord");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptRecord);
        CHECK(e.line() == 3);
    }
    std::remove(path.c_str());
}

TEST_CASE("unknown schema versions are rejected") {
    MockEmbeddingProvider mock;
    MemoryIndex index("mock-bow-256", 256, KnowledgeType::WebReflection);
    index.insert(make_record(mock, "a", "find mugs"));

    auto path = temp_path("index-version");
    save_index(index, path);
    auto text = read_file(path);
    auto pos = text.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 11, "\"version\":9");
    write_file(path, text);

    try {
        load_index(path);
        FAIL("expected SchemaVersionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaVersionMismatch);
    }
    std::remove(path.c_str());
}

TEST_CASE("missing and malformed index files fail cleanly") {
    try {
        load_index(temp_path("no-such-index"));
        FAIL("expected IoFailure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoFailure);
    }

    auto path = temp_path("index-garbage");
    write_file(path, "not a header\n");
    try {
        load_index(path);
        FAIL("expected CorruptRecord");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptRecord);
        CHECK(e.line() == 1);
    }
    std::remove(path.c_str());
}

TEST_CASE("loaded index with another provider's dim rejects retrieval") {
    MockEmbeddingProvider small(64);
    MemoryIndex index("mock-bow-64", 64, KnowledgeType::WebReflection);
    index.insert(make_record(small, "a", "find mugs"));

    auto path = temp_path("index-dim");
    save_index(index, path);
    auto back = load_index(path);
    CHECK(back.dim() == 64);

    MockEmbeddingProvider standard;
    CHECK_THROWS_AS(retrieve(back, make_task("q"), 1, standard), Error);
    std::remove(path.c_str());
}

TEST_CASE("split_indices honours the paper's 80-20 protocol") {
    auto [train, test] = split_indices(70, 0.8, 0);
    CHECK(train.size() == 56);
    CHECK(test.size() == 14);

    // deterministic for a fixed seed
    auto [train2, test2] = split_indices(70, 0.8, 0);
    CHECK(train == train2);
    CHECK(test == test2);

    // disjoint and exhaustive
    std::set<std::size_t> all(train.begin(), train.end());
    all.insert(test.begin(), test.end());
    CHECK(all.size() == 70);
    CHECK(*all.rbegin() == 69);

    // both sides preserve original order
    CHECK(std::is_sorted(train.begin(), train.end()));
    CHECK(std::is_sorted(test.begin(), test.end()));
}

TEST_CASE("different seeds give different partitions") {
    auto [train0, test0] = split_indices(70, 0.8, 0);
    bool any_different = false;
    for (std::uint64_t seed = 1; seed <= 5 && !any_different; ++seed) {
        auto [train, test] = split_indices(70, 0.8, seed);
        any_different = train != train0;
    }
    CHECK(any_different);
}

TEST_CASE("degenerate splits are rejected") {
    CHECK_THROWS_AS(split_indices(1, 0.8, 0), Error);
    CHECK_THROWS_AS(split_indices(0, 0.8, 0), Error);
    CHECK_THROWS_AS(split_indices(10, 0.0, 0), Error);
    CHECK_THROWS_AS(split_indices(10, 1.0, 0), Error);
    try {
        split_indices(3, 0.99, 0);  // round(2.97) = 3 => empty test side
        FAIL("expected DegenerateSplit");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateSplit);
    }
}

TEST_CASE("split_train_test carries dataset items through the index split") {
    std::vector<std::string> items;
    for (int i = 0; i < 10; ++i) items.push_back("item" + std::to_string(i));
    auto [train, test] = split_train_test(items, 0.8, 42);
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);
    std::set<std::string> all(train.begin(), train.end());
    all.insert(test.begin(), test.end());
    CHECK(all.size() == 10);
}

}  // TEST_SUITE
