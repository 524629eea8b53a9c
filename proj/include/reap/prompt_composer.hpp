#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reap/memory_index.hpp"

namespace reap {

struct ComposedPrompt {
    std::string text;
    int knowledge_count = 0;
    long estimated_tokens = 0;
    KnowledgeType knowledge_type = KnowledgeType::WebReflection;
};

/// Heuristic token estimate: ceil(byte_count / 4). Distinct from the
/// measured provider counts carried on trajectories.
long estimate_tokens(const std::string& text);

struct ComposeOptions {
    /// When set, lowest-ranked knowledge blocks are dropped first
    /// until the estimate fits. The new-task block is never dropped.
    std::optional<long> max_tokens;
};

/// Renders the injection template for `type` with the retrieved
/// knowledge blocks in rank order, then the new-task objective block.
/// Zero results produce the bare objective block. Throws
/// MixedKnowledgeTypes when a result's type differs from `type`.
ComposedPrompt compose_prompt(const Task& task, const std::vector<RetrievalResult>& results,
                              KnowledgeType type, const ComposeOptions& options = {});

/// Unfilled injection templates (also shipped under templates/).
const std::string& inject_one_shot_template();
const std::string& inject_summary_template();
const std::string& inject_reflection_template();

/// "### NEW TASK" trailer used for every knowledge type.
std::string objective_block(const Task& task);

}  // namespace reap
