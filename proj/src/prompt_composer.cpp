#include "reap/prompt_composer.hpp"

#include <algorithm>
#include <sstream>

namespace reap {

namespace {

const std::string kInjectOneShotTemplate =
    R"tmpl(Here are some examples of prior web interactions. Each example shows the task, the steps taken, and the outcome.

### Example {task_id} (Reward: {reward})
OBJECTIVE: {objective}
{trajectory}

### NEW TASK
OBJECTIVE:
{objective})tmpl";

const std::string kInjectSummaryTemplate =
    R"tmpl(Here are some information from prior web interactions and their outcome.
Example {task_id}:
Task: {objective}
Outcome: {was_success}
Summary: {summary_str})tmpl";

const std::string kInjectReflectionTemplate =
    R"tmpl(Here are some tips from prior web interactions and their outcome.
Example {task_id}:
Task: {objective}
Outcome: {was_success}
Key Learnings: {reflect_str})tmpl";

std::string knowledge_block(const KnowledgeRecord& record) {
    switch (record.knowledge_type) {
        case KnowledgeType::OneShot:
            return "### Example " + record.task_id +
                   " (Reward: " + std::to_string(reward_from_outcome(record.outcome)) + ")\n" +
                   record.content;
        case KnowledgeType::Summary:
            return "Example " + record.task_id + ":\nTask: " + record.task_text + "\nOutcome: " +
                   (record.outcome == OutcomeLabel::Success ? "Success" : "Failure") +
                   "\nSummary: " + record.content;
        case KnowledgeType::WebReflection:
            return "Example " + record.task_id + ":\nTask: " + record.task_text + "\nOutcome: " +
                   (record.outcome == OutcomeLabel::Success ? "Success" : "Failure") +
                   "\nKey Learnings: " + record.content;
    }
    return "";
}

std::string header_for(KnowledgeType type) {
    switch (type) {
        case KnowledgeType::OneShot:
            // Blank line after the preamble, matching the one-shot layout.
            return "Here are some examples of prior web interactions. Each example shows the "
                   "task, the steps taken, and the outcome.\n\n";
        case KnowledgeType::Summary:
            return "Here are some information from prior web interactions and their outcome.\n";
        case KnowledgeType::WebReflection:
            return "Here are some tips from prior web interactions and their outcome.\n";
    }
    return "";
}

std::string assemble(KnowledgeType type, const std::vector<std::string>& blocks,
                     const std::string& trailer) {
    if (blocks.empty()) return trailer;
    std::ostringstream out;
    out << header_for(type);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i > 0) out << "\n\n";
        out << blocks[i];
    }
    out << "\n\n" << trailer;
    return out.str();
}

}  // namespace

long estimate_tokens(const std::string& text) {
    return static_cast<long>((text.size() + 3) / 4);
}

std::string objective_block(const Task& task) {
    return "### NEW TASK\nOBJECTIVE:\n" + task.intent;
}

const std::string& inject_one_shot_template() { return kInjectOneShotTemplate; }
const std::string& inject_summary_template() { return kInjectSummaryTemplate; }
const std::string& inject_reflection_template() { return kInjectReflectionTemplate; }

ComposedPrompt compose_prompt(const Task& task, const std::vector<RetrievalResult>& results,
                              KnowledgeType type, const ComposeOptions& options) {
    for (const auto& result : results) {
        if (result.record.knowledge_type != type) {
            throw Error(ErrorCode::MixedKnowledgeTypes,
                        "record '" + result.record.task_id + "' has type " +
                            to_string(result.record.knowledge_type) + ", composing " +
                            to_string(type));
        }
    }

    std::vector<const RetrievalResult*> ordered;
    ordered.reserve(results.size());
    for (const auto& result : results) ordered.push_back(&result);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const RetrievalResult* a, const RetrievalResult* b) {
                         return a->rank < b->rank;
                     });

    std::vector<std::string> blocks;
    blocks.reserve(ordered.size());
    for (const auto* result : ordered) blocks.push_back(knowledge_block(result->record));

    const std::string trailer = objective_block(task);
    std::string text = assemble(type, blocks, trailer);

    if (options.max_tokens) {
        // Drop lowest-ranked blocks first; the new-task block always stays.
        while (!blocks.empty() && estimate_tokens(text) > *options.max_tokens) {
            blocks.pop_back();
            text = assemble(type, blocks, trailer);
        }
    }

    ComposedPrompt prompt;
    prompt.text = std::move(text);
    prompt.knowledge_count = static_cast<int>(blocks.size());
    prompt.estimated_tokens = estimate_tokens(prompt.text);
    prompt.knowledge_type = type;
    return prompt;
}

}  // namespace reap
