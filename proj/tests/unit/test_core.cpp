#include <set>

#include "doctest.h"
#include "reap/core.hpp"
#include "test_support.hpp"

using namespace reap;
using namespace reap::test;

TEST_SUITE("core") {

TEST_CASE("task_key renders the canonical pattern") {
    CHECK(task_key({"t1", "map", "MAP", "Which US states border Illinois?"}) ==
          "Go to MAP, Which US states border Illinois?");
    CHECK(task_key({"t2", "", "", ""}) == "Go to , ");
    CHECK(task_key({"t3", "shopping", "SHOP", "find mugs"}) == "Go to SHOP, find mugs");
}

TEST_CASE("task_key is injective when start_url avoids the separator") {
    std::mt19937_64 rng(7);
    std::set<std::pair<std::string, std::string>> inputs;
    std::set<std::string> keys;
    for (int i = 0; i < 200; ++i) {
        std::string url = random_token(rng) + std::to_string(rng() % 50);
        std::string intent = random_text(rng);
        if (!inputs.insert({url, intent}).second) continue;
        keys.insert(task_key({"id", "site", url, intent}));
    }
    CHECK(keys.size() == inputs.size());
}

TEST_CASE("outcome label round-trips with reward") {
    CHECK(outcome_from_reward(1) == OutcomeLabel::Success);
    CHECK(outcome_from_reward(0) == OutcomeLabel::Failure);
    CHECK(reward_from_outcome(OutcomeLabel::Success) == 1);
    CHECK(reward_from_outcome(OutcomeLabel::Failure) == 0);
    for (auto label : {OutcomeLabel::Success, OutcomeLabel::Failure})
        CHECK(outcome_from_reward(reward_from_outcome(label)) == label);
}

TEST_CASE("enum string round-trips") {
    for (auto type :
         {KnowledgeType::OneShot, KnowledgeType::Summary, KnowledgeType::WebReflection})
        CHECK(knowledge_type_from_string(to_string(type)) == type);
    for (auto label : {OutcomeLabel::Success, OutcomeLabel::Failure})
        CHECK(outcome_from_string(to_string(label)) == label);
    CHECK_THROWS_AS(knowledge_type_from_string("bogus"), Error);
    CHECK_THROWS_AS(outcome_from_string(""), Error);
}

TEST_CASE("llm config defaults and validation") {
    LLMConfig config;
    CHECK(config.temperature == 0.0);
    CHECK(config.top_p == 0.5);
    CHECK_NOTHROW(validate_llm_config(config));
    CHECK_NOTHROW(validate_llm_config({1.5, 1.0}));

    CHECK_THROWS_AS(validate_llm_config({-0.1, 0.5}), Error);
    CHECK_THROWS_AS(validate_llm_config({0.0, 0.0}), Error);
    CHECK_THROWS_AS(validate_llm_config({0.0, 1.1}), Error);
}

TEST_CASE("trajectory validation enforces the dataset contract") {
    CHECK_NOTHROW(validate_trajectory(make_trajectory("t", 1)));
    CHECK_NOTHROW(validate_trajectory(make_trajectory("t", 0)));

    auto no_steps = make_trajectory("t");
    no_steps.steps.clear();
    CHECK_THROWS_AS(validate_trajectory(no_steps), Error);

    auto graded = make_trajectory("t");
    graded.reward = 2;
    CHECK_THROWS_AS(validate_trajectory(graded), Error);

    auto blank_action = make_trajectory("t");
    blank_action.steps[0].action = "";
    CHECK_THROWS_AS(validate_trajectory(blank_action), Error);

    auto inverted = make_trajectory("t");
    inverted.prompt_tokens = inverted.total_tokens + 1;
    CHECK_THROWS_AS(validate_trajectory(inverted), Error);

    auto negative_time = make_trajectory("t");
    negative_time.wall_time_s = -1.0;
    CHECK_THROWS_AS(validate_trajectory(negative_time), Error);

    auto negative_tokens = make_trajectory("t");
    negative_tokens.prompt_tokens = -5;
    CHECK_THROWS_AS(validate_trajectory(negative_tokens), Error);
}

TEST_CASE("task json round-trip") {
    Task task{"task-9", "map", "MAP", "plan a route, with a comma"};
    Task back = task_from_json(task_to_json(task));
    CHECK(back.id == task.id);
    CHECK(back.site == task.site);
    CHECK(back.start_url == task.start_url);
    CHECK(back.intent == task.intent);
}

TEST_CASE("dataset save/load round-trips") {
    Dataset dataset;
    dataset.push_back({make_task("a", "shopping"), make_trajectory("a", 1, 3)});
    dataset.push_back({make_task("b", "map", "MAP", "find route"), make_trajectory("b", 0, 5)});

    auto path = temp_path("dataset");
    save_dataset(dataset, path);
    Dataset back = load_dataset(path);

    REQUIRE(back.size() == 2);
    CHECK(back[0].task.id == "a");
    CHECK(back[1].task.intent == "find route");
    CHECK(back[0].trajectory.steps.size() == 3);
    CHECK(back[1].trajectory.reward == 0);
    CHECK(back[1].trajectory.total_tokens == dataset[1].trajectory.total_tokens);
    CHECK(back[0].trajectory.wall_time_s == dataset[0].trajectory.wall_time_s);
    std::remove(path.c_str());
}

TEST_CASE("dataset load reports the corrupt line") {
    auto path = temp_path("dataset-bad");
    write_file(path,
               R"({"task":{"id":"a","site":"s","start_url":"U","intent":"i"},"trajectory":{"task_id":"a","steps":[{"observation":"o","action":"a"}],"reward":1,"wall_time_s":1.0,"total_tokens":2,"prompt_tokens":1}})"
               "\nnot json\n");
    try {
        load_dataset(path);
        FAIL("expected CorruptRecord");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptRecord);
        CHECK(e.line() == 2);
    }
    std::remove(path.c_str());
}

TEST_CASE("missing dataset file is an io failure") {
    try {
        load_dataset(temp_path("nonexistent"));
        FAIL("expected IoFailure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoFailure);
    }
}

}  // TEST_SUITE
