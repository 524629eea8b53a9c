#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reap/error.hpp"

namespace reap {

/// A navigation objective. `site` is a category label such as
/// "shopping" or "map"; `start_url` and `intent` together form the
/// canonical key text used for embedding.
struct Task {
    std::string id;
    std::string site;
    std::string start_url;
    std::string intent;
};

/// Canonical key text: "Go to {start_url}, {intent}".
std::string task_key(const Task& task);

struct Step {
    std::string observation;
    std::string action;
};

/// One episode of experience: the step transcript, its binary reward
/// and the measured cost of producing it.
struct Trajectory {
    std::string task_id;
    std::vector<Step> steps;
    int reward = 0;  // 0 = failure, 1 = success
    double wall_time_s = 0.0;
    long total_tokens = 0;
    long prompt_tokens = 0;
};

enum class KnowledgeType {
    OneShot,
    Summary,
    WebReflection,
};

enum class OutcomeLabel {
    Success,
    Failure,
};

OutcomeLabel outcome_from_reward(int reward);
int reward_from_outcome(OutcomeLabel label);

const char* to_string(KnowledgeType type);
const char* to_string(OutcomeLabel label);
KnowledgeType knowledge_type_from_string(const std::string& s);
OutcomeLabel outcome_from_string(const std::string& s);

/// Sampling configuration forwarded to generation providers on every
/// request. Defaults favour determinism.
struct LLMConfig {
    double temperature = 0.0;
    double top_p = 0.5;
};

void validate_llm_config(const LLMConfig& config);

/// Throws InvalidArgument when a trajectory violates the dataset
/// contract (empty steps, non-binary reward, empty action,
/// prompt_tokens > total_tokens, negative counts or wall time).
void validate_trajectory(const Trajectory& trajectory);

struct DatasetItem {
    Task task;
    Trajectory trajectory;
};

using Dataset = std::vector<DatasetItem>;

/// Dataset files are newline-delimited JSON, one
/// {"task": {...}, "trajectory": {...}} object per line.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path);

std::string task_to_json(const Task& task);
Task task_from_json(const std::string& text);

}  // namespace reap
