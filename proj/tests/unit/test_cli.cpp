#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "reap/core.hpp"
#include "reap/memory_index.hpp"
#include "test_support.hpp"

using namespace reap;
using namespace reap::test;
using nlohmann::json;

namespace {

struct RunOutput {
    int status = -1;
    std::string out;
    std::string err;
};

RunOutput run_cli(const std::string& args) {
    auto out_path = temp_path("cli-out");
    auto err_path = temp_path("cli-err");
    std::string cmd =
        std::string(REAP_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
    int rc = std::system(cmd.c_str());

    RunOutput result;
    result.status = rc == -1 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -2);
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return result;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::string write_dataset(int items) {
    Dataset dataset;
    const char* intents[] = {"find blue mugs", "plan a transit route", "close the stale issue",
                             "count march invoices", "download the release tarball"};
    for (int i = 0; i < items; ++i) {
        std::string id = "task-" + std::to_string(i);
        dataset.push_back(
            {{id, "site", "SHOP", intents[i % 5]}, make_trajectory(id, i % 2 == 0 ? 1 : 0, 2)});
    }
    auto path = temp_path("cli-dataset");
    save_dataset(dataset, path);
    return path;
}

std::string write_task_file(const Task& task) {
    auto path = temp_path("cli-task");
    write_file(path, task_to_json(task) + "\n");
    return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("no subcommand is a usage error") {
    CHECK(run_cli("").status == 2);
}

TEST_CASE("build writes an index and reports the record count") {
    auto dataset = write_dataset(3);
    auto index_path = temp_path("cli-index");

    auto result = run_cli("build --dataset " + dataset + " --out " + index_path +
                          " --type one_shot");
    CHECK(result.status == 0);
    auto summary = json::parse(result.out);
    CHECK(summary.at("records") == 3);
    CHECK(summary.at("skipped") == 0);

    auto index = load_index(index_path);
    CHECK(index.size() == 3);
    CHECK(index.knowledge_type() == KnowledgeType::OneShot);

    std::remove(dataset.c_str());
    std::remove(index_path.c_str());
}

TEST_CASE("build with a missing dataset exits 1 and names the path") {
    auto missing = temp_path("cli-no-dataset");
    auto result = run_cli("build --dataset " + missing + " --out /dev/null --type one_shot");
    CHECK(result.status == 1);
    CHECK(result.err.find(missing) != std::string::npos);
    CHECK(result.err.find("IoFailure") != std::string::npos);
}

TEST_CASE("unknown knowledge type is a usage error") {
    auto dataset = write_dataset(1);
    auto result =
        run_cli("build --dataset " + dataset + " --out /dev/null --type bogus_type");
    CHECK(result.status == 2);
    std::remove(dataset.c_str());
}

TEST_CASE("retrieve defaults to five results and ranks them") {
    auto dataset = write_dataset(3);
    auto index_path = temp_path("cli-index");
    REQUIRE(run_cli("build --dataset " + dataset + " --out " + index_path +
                    " --type web_reflection")
                .status == 0);

    auto result = run_cli("retrieve --index " + index_path + " --key \"find red mugs\"");
    CHECK(result.status == 0);
    auto lines = lines_of(result.out);
    REQUIRE(lines.size() == 3);  // min(5, index size)
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto j = json::parse(lines[i]);
        CHECK(j.at("rank") == static_cast<int>(i) + 1);
        CHECK(j.at("knowledge_type") == "web_reflection");
        CHECK(j.contains("score"));
        CHECK(j.contains("content"));
    }
    // the mug task must outrank unrelated intents for this query
    CHECK(json::parse(lines[0]).at("task_text").get<std::string>().find("mugs") !=
          std::string::npos);

    std::remove(dataset.c_str());
    std::remove(index_path.c_str());
}

TEST_CASE("retrieve with k=0 is a usage error") {
    auto dataset = write_dataset(1);
    auto index_path = temp_path("cli-index");
    REQUIRE(run_cli("build --dataset " + dataset + " --out " + index_path + " --type summary")
                .status == 0);
    auto result = run_cli("retrieve --index " + index_path + " --key x --k 0");
    CHECK(result.status == 2);
    std::remove(dataset.c_str());
    std::remove(index_path.c_str());
}

TEST_CASE("retrieving from an empty index returns no lines and exit 0") {
    auto dataset = temp_path("cli-empty-dataset");
    write_file(dataset, "");
    auto index_path = temp_path("cli-index");
    REQUIRE(run_cli("build --dataset " + dataset + " --out " + index_path + " --type summary")
                .status == 0);

    auto result = run_cli("retrieve --index " + index_path + " --key \"anything\"");
    CHECK(result.status == 0);
    CHECK(lines_of(result.out).empty());

    std::remove(dataset.c_str());
    std::remove(index_path.c_str());
}

TEST_CASE("compose renders retrieved knowledge before the new task") {
    auto results_path = temp_path("cli-results");
    json line{{"rank", 1},
              {"score", 0.9},
              {"task_id", "m1"},
              {"task_text", "Go to SHOP, find mugs"},
              {"knowledge_type", "web_reflection"},
              {"outcome", "failure"},
              {"content", "avoid the rating filter"}};
    write_file(results_path, line.dump() + "\n");
    auto task_path = write_task_file({"q1", "shopping", "SHOP", "find plates"});

    auto result = run_cli("compose --task " + task_path + " --results " + results_path +
                          " --type web_reflection");
    CHECK(result.status == 0);
    CHECK(result.out.find("Key Learnings: avoid the rating filter") != std::string::npos);
    CHECK(result.out.find("### NEW TASK") != std::string::npos);
    CHECK(result.err.find("knowledge_count=1") != std::string::npos);

    std::remove(results_path.c_str());
    std::remove(task_path.c_str());
}

TEST_CASE("compose with mixed knowledge types exits 1") {
    auto results_path = temp_path("cli-results");
    json a{{"rank", 1},         {"score", 0.9},
           {"task_id", "m1"},   {"task_text", "Go to SHOP, find mugs"},
           {"knowledge_type", "summary"},
           {"outcome", "success"},
           {"content", "c1"}};
    json b = a;
    b["rank"] = 2;
    b["task_id"] = "m2";
    b["knowledge_type"] = "web_reflection";
    write_file(results_path, a.dump() + "\n" + b.dump() + "\n");
    auto task_path = write_task_file({"q1", "shopping", "SHOP", "find plates"});

    auto result = run_cli("compose --task " + task_path + " --results " + results_path +
                          " --type summary");
    CHECK(result.status == 1);
    CHECK(result.err.find("MixedKnowledgeTypes") != std::string::npos);

    std::remove(results_path.c_str());
    std::remove(task_path.c_str());
}

TEST_CASE("compose without results prints the bare objective block") {
    auto task_path = write_task_file({"q1", "shopping", "SHOP", "find plates"});
    auto result = run_cli("compose --task " + task_path + " --type one_shot");
    CHECK(result.status == 0);
    CHECK(result.out == "### NEW TASK\nOBJECTIVE:\nfind plates");
    std::remove(task_path.c_str());
}

TEST_CASE("eval runs are deterministic for a fixed seed") {
    auto dir_a = temp_path("cli-eval-a");
    auto dir_b = temp_path("cli-eval-b");

    auto first = run_cli("eval --mode h2 --seed 7 --out-dir " + dir_a);
    CHECK(first.status == 0);
    auto summary = json::parse(first.out);
    CHECK(summary.contains("baseline_sr"));
    CHECK(summary.contains("treated_sr"));

    auto second = run_cli("eval --mode h2 --seed 7 --out-dir " + dir_b);
    CHECK(second.status == 0);

    CHECK(read_file(dir_a + "/results.ndjson") == read_file(dir_b + "/results.ndjson"));
    CHECK(read_file(dir_a + "/table.csv") == read_file(dir_b + "/table.csv"));
    CHECK(read_file(dir_a + "/table.txt").find("condition") == 0);

    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("eval h1 on the fixture lifts the treated success rate") {
    auto dir = temp_path("cli-eval-h1");
    auto result = run_cli("eval --mode h1 --out-dir " + dir);
    CHECK(result.status == 0);
    auto summary = json::parse(result.out);
    CHECK(summary.at("treated_sr").get<double>() > summary.at("baseline_sr").get<double>());
    std::filesystem::remove_all(dir);
}

TEST_CASE("analyze emits a unit-diagonal matrix and positive margin") {
    auto matrix_path = temp_path("cli-matrix");
    auto stats_path = temp_path("cli-stats");
    auto result =
        run_cli("analyze --matrix-out " + matrix_path + " --stats-out " + stats_path);
    CHECK(result.status == 0);

    auto csv_lines = lines_of(read_file(matrix_path));
    REQUIRE(csv_lines.size() == 13);  // header + 12 fixture tasks
    CHECK(csv_lines[0].rfind("task_id,", 0) == 0);
    for (std::size_t i = 1; i < csv_lines.size(); ++i) {
        // cell i on row i (after the id column) is the diagonal
        std::istringstream row(csv_lines[i]);
        std::string cell;
        for (std::size_t c = 0; c <= i; ++c) std::getline(row, cell, ',');
        CHECK(cell == "1");
    }

    auto stats = json::parse(read_file(stats_path));
    CHECK(stats.at("margin").get<double>() > 0.0);
    CHECK(stats.at("n_categories") == 4);

    std::remove(matrix_path.c_str());
    std::remove(stats_path.c_str());
}

TEST_CASE("config files fill in flags and explicit flags win") {
    auto dataset = write_dataset(4);
    auto index_path = temp_path("cli-index");
    REQUIRE(run_cli("build --dataset " + dataset + " --out " + index_path +
                    " --type web_reflection")
                .status == 0);

    auto config_path = temp_path("cli-config");
    write_file(config_path, json{{"k", 1}, {"index", index_path}}.dump());

    auto from_config = run_cli("retrieve --config " + config_path + " --key \"find mugs\"");
    CHECK(from_config.status == 0);
    CHECK(lines_of(from_config.out).size() == 1);

    auto flag_wins =
        run_cli("retrieve --config " + config_path + " --key \"find mugs\" --k 2");
    CHECK(flag_wins.status == 0);
    CHECK(lines_of(flag_wins.out).size() == 2);

    std::remove(dataset.c_str());
    std::remove(index_path.c_str());
    std::remove(config_path.c_str());
}

}  // TEST_SUITE
