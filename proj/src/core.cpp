#include "reap/core.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace reap {

using nlohmann::json;

std::string task_key(const Task& task) {
    return "Go to " + task.start_url + ", " + task.intent;
}

OutcomeLabel outcome_from_reward(int reward) {
    return reward == 1 ? OutcomeLabel::Success : OutcomeLabel::Failure;
}

int reward_from_outcome(OutcomeLabel label) {
    return label == OutcomeLabel::Success ? 1 : 0;
}

const char* to_string(KnowledgeType type) {
    switch (type) {
        case KnowledgeType::OneShot: return "one_shot";
        case KnowledgeType::Summary: return "summary";
        case KnowledgeType::WebReflection: return "web_reflection";
    }
    return "unknown";
}

const char* to_string(OutcomeLabel label) {
    return label == OutcomeLabel::Success ? "success" : "failure";
}

KnowledgeType knowledge_type_from_string(const std::string& s) {
    if (s == "one_shot") return KnowledgeType::OneShot;
    if (s == "summary") return KnowledgeType::Summary;
    if (s == "web_reflection") return KnowledgeType::WebReflection;
    throw Error(ErrorCode::InvalidArgument, "unknown knowledge type '" + s + "'");
}

OutcomeLabel outcome_from_string(const std::string& s) {
    if (s == "success") return OutcomeLabel::Success;
    if (s == "failure") return OutcomeLabel::Failure;
    throw Error(ErrorCode::InvalidArgument, "unknown outcome label '" + s + "'");
}

void validate_llm_config(const LLMConfig& config) {
    if (config.temperature < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
    }
    if (config.top_p <= 0.0 || config.top_p > 1.0) {
        throw Error(ErrorCode::InvalidArgument, "top_p must be in (0, 1]");
    }
}

void validate_trajectory(const Trajectory& trajectory) {
    if (trajectory.steps.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "trajectory for task '" + trajectory.task_id + "' has no steps");
    }
    if (trajectory.reward != 0 && trajectory.reward != 1) {
        throw Error(ErrorCode::InvalidArgument, "reward must be 0 or 1");
    }
    for (const auto& step : trajectory.steps) {
        if (step.action.empty()) {
            throw Error(ErrorCode::InvalidArgument, "step action must be non-empty");
        }
    }
    if (trajectory.wall_time_s < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "wall_time_s must be non-negative");
    }
    if (trajectory.total_tokens < 0 || trajectory.prompt_tokens < 0) {
        throw Error(ErrorCode::InvalidArgument, "token counts must be non-negative");
    }
    if (trajectory.prompt_tokens > trajectory.total_tokens) {
        throw Error(ErrorCode::InvalidArgument, "prompt_tokens must not exceed total_tokens");
    }
}

namespace {

json task_to_json_obj(const Task& task) {
    return json{{"id", task.id},
                {"site", task.site},
                {"start_url", task.start_url},
                {"intent", task.intent}};
}

Task task_from_json_obj(const json& j) {
    Task task;
    task.id = j.at("id").get<std::string>();
    task.site = j.at("site").get<std::string>();
    task.start_url = j.at("start_url").get<std::string>();
    task.intent = j.at("intent").get<std::string>();
    if (task.id.empty()) {
        throw Error(ErrorCode::InvalidArgument, "task id must be non-empty");
    }
    return task;
}

json trajectory_to_json_obj(const Trajectory& t) {
    json steps = json::array();
    for (const auto& step : t.steps) {
        steps.push_back(json{{"observation", step.observation}, {"action", step.action}});
    }
    return json{{"task_id", t.task_id},
                {"steps", std::move(steps)},
                {"reward", t.reward},
                {"wall_time_s", t.wall_time_s},
                {"total_tokens", t.total_tokens},
                {"prompt_tokens", t.prompt_tokens}};
}

Trajectory trajectory_from_json_obj(const json& j) {
    Trajectory t;
    t.task_id = j.at("task_id").get<std::string>();
    for (const auto& s : j.at("steps")) {
        t.steps.push_back(Step{s.at("observation").get<std::string>(),
                               s.at("action").get<std::string>()});
    }
    t.reward = j.at("reward").get<int>();
    t.wall_time_s = j.at("wall_time_s").get<double>();
    t.total_tokens = j.at("total_tokens").get<long>();
    t.prompt_tokens = j.at("prompt_tokens").get<long>();
    validate_trajectory(t);
    return t;
}

}  // namespace

std::string task_to_json(const Task& task) { return task_to_json_obj(task).dump(); }

Task task_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::CorruptRecord, "task is not valid JSON");
    }
    try {
        return task_from_json_obj(j);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptRecord, std::string("bad task object: ") + e.what());
    }
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open dataset file '" + path + "'");
    }
    Dataset dataset;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorCode::CorruptRecord,
                        "dataset line " + std::to_string(line_no) + " is not valid JSON",
                        false, line_no);
        }
        try {
            DatasetItem item;
            item.task = task_from_json_obj(j.at("task"));
            item.trajectory = trajectory_from_json_obj(j.at("trajectory"));
            dataset.push_back(std::move(item));
        } catch (const Error& e) {
            throw Error(ErrorCode::CorruptRecord,
                        "dataset line " + std::to_string(line_no) + ": " + e.what(), false,
                        line_no);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::CorruptRecord,
                        "dataset line " + std::to_string(line_no) + ": " + e.what(), false,
                        line_no);
        }
    }
    return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot write dataset file '" + path + "'");
    }
    for (const auto& item : dataset) {
        json j{{"task", task_to_json_obj(item.task)},
               {"trajectory", trajectory_to_json_obj(item.trajectory)}};
        out << j.dump() << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoFailure, "short write to '" + path + "'");
    }
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::EmptyCompletion: return "EmptyCompletion";
        case ErrorCode::ProviderFailure: return "ProviderFailure";
        case ErrorCode::ProviderMismatch: return "ProviderMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::UnparseableReflection: return "UnparseableReflection";
        case ErrorCode::MixedKnowledgeTypes: return "MixedKnowledgeTypes";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
        case ErrorCode::CorruptRecord: return "CorruptRecord";
        case ErrorCode::DegenerateSplit: return "DegenerateSplit";
        case ErrorCode::UnknownTask: return "UnknownTask";
        case ErrorCode::NonPositiveBaseline: return "NonPositiveBaseline";
        case ErrorCode::SingleCategory: return "SingleCategory";
    }
    return "Error";
}

}  // namespace reap
