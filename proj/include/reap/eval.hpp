#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reap/memory_index.hpp"
#include "reap/prompt_composer.hpp"

namespace reap::eval {

struct PageAction {
    std::string name;
    std::string target;
    bool trap = false;  // trap actions never lead back toward a goal
};

struct Page {
    std::string id;
    std::string observation;
    std::vector<PageAction> actions;
};

/// One registered task plus the routes the scripted policy can take.
/// `naive_route` is the default behaviour; `informed_route` replaces
/// it when the prompt carries `trap_hint`; `shortcut_route` when it
/// carries `shortcut_hint` (shortcut wins if both match).
struct EnvTask {
    Task task;
    std::string start_page;
    std::string goal_page;
    std::vector<std::string> naive_route;
    std::vector<std::string> informed_route;
    std::string trap_hint;
    std::vector<std::string> shortcut_route;
    std::string shortcut_hint;
};

/// Deterministic page-graph environment standing in for a live web
/// benchmark. Simulated wall time: steps * step_seconds +
/// total_tokens * token_seconds.
struct ToyEnvironment {
    std::map<std::string, Page> pages;
    std::vector<EnvTask> tasks;
    int max_steps = 12;
    double step_seconds = 2.0;
    double token_seconds = 0.01;

    const Page& page(const std::string& id) const;
    const EnvTask& env_task(const std::string& task_id) const;

    /// Checks the graph contract: every goal reachable from its start
    /// within max_steps without trap edges, and no trap page can
    /// reach a goal. Throws InvalidArgument on violation.
    void validate() const;
};

/// The bundled 12-task fixture: 4 sites x 3 tasks. Per site, one
/// clean-success task with a discoverable shortcut and two tasks
/// whose naive route falls into the same broken-feature trap.
ToyEnvironment fixture_environment();

struct ScriptedAgent {
    /// Case-insensitive substring matching of hint strings against
    /// the prompt text.
    static bool prompt_mentions(const std::string& prompt_text, const std::string& hint);
};

struct RunResult {
    std::string task_id;
    int success = 0;
    int steps = 0;
    long total_tokens = 0;
    long prompt_tokens = 0;
    double wall_time_s = 0.0;
    std::optional<KnowledgeType> knowledge_type;  // empty for the baseline condition
    std::optional<int> baseline_success;
};

struct EpisodeOutcome {
    RunResult result;
    Trajectory trajectory;
};

/// Plays one deterministic episode and also returns the produced
/// trajectory (the unit of experience memory is built from).
EpisodeOutcome play_episode(const ToyEnvironment& env, const Task& task,
                            const ComposedPrompt* prompt = nullptr);

RunResult run_episode(const ToyEnvironment& env, const Task& task,
                      const ComposedPrompt* prompt = nullptr);

struct SuccessSplit {
    double overall = 0.0;
    std::optional<double> prev_success;  // absent when no task has baseline_success = 1
    std::optional<double> prev_fail;
};

/// SR overall and split by the baseline agent's outcome on each task.
SuccessSplit compute_success_split(const std::vector<RunResult>& results);

enum class Subset {
    Overall,
    PositiveOnly,  // tasks the baseline succeeded
    NegativeOnly,  // tasks the baseline failed
};

const char* to_string(Subset subset);

struct MetricsCell {
    int count = 0;
    double mean_total_tokens = 0.0;
    double mean_prompt_tokens = 0.0;
    double mean_wall_time_s = 0.0;
    double mean_steps = 0.0;
    double success_rate = 0.0;
};

struct MetricsTable {
    std::vector<std::string> conditions;  // render order
    std::map<std::pair<std::string, Subset>, MetricsCell> cells;

    const MetricsCell* cell(const std::string& condition, Subset subset) const;
};

/// Per-cell arithmetic means over the tasks in each subset; empty
/// subsets yield an absent cell. Rounding happens only at render
/// time.
MetricsTable compute_cost_table(
    const std::vector<std::pair<std::string, std::vector<RunResult>>>& grouped);

/// Paper-style rendering: token means as "<n>k", wall time as whole
/// seconds, steps and SR with two decimals.
std::string render_table_text(const MetricsTable& table);

/// Machine-readable rendering with unrounded values.
std::string render_table_csv(const MetricsTable& table);

/// 100 * (baseline - treated) / baseline. Throws NonPositiveBaseline.
double reduction_pct(double baseline, double treated);

enum class ExperimentMode {
    H1,  // memory built from rollouts of the evaluated tasks themselves
    H2,  // train/test split; memory from train, evaluation on held-out tasks
};

const char* to_string(ExperimentMode mode);
ExperimentMode experiment_mode_from_string(const std::string& s);

struct ExperimentPaths {
    std::string results_ndjson;
    std::string table_text;
    std::string table_csv;
};

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::H1;
    KnowledgeType knowledge_type = KnowledgeType::WebReflection;
    OutcomeFilter filter = OutcomeFilter::All;
    int k = 5;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;  // H2 only
    bool exclude_self = false;
    std::optional<ExperimentPaths> paths;  // written when set
};

void validate_experiment_config(const ExperimentConfig& config);

struct ExperimentOutput {
    std::vector<RunResult> baseline;  // over the evaluated task set
    std::vector<RunResult> treated;
    MetricsTable table;
    SuccessSplit baseline_split;
    SuccessSplit treated_split;
};

/// Baseline pass, memory build from baseline trajectories, treated
/// pass with retrieval-composed prompts. Fully deterministic for a
/// fixed seed with deterministic providers. Partial results are
/// persisted when a pass aborts and paths are configured.
ExperimentOutput run_experiment(const ToyEnvironment& env, const ExperimentConfig& config,
                                EmbeddingProvider& embedder, GenerationProvider& gen);

std::string results_to_ndjson(const std::vector<RunResult>& results, const std::string& condition);
std::vector<RunResult> results_from_ndjson(const std::string& text);

}  // namespace reap::eval
