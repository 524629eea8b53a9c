#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reap/core.hpp"
#include "reap/embedding.hpp"

namespace reap {

struct GenerationResult {
    std::string text;
    long prompt_tokens = 0;
    long total_tokens = 0;
};

class GenerationProvider {
public:
    virtual ~GenerationProvider() = default;

    virtual const std::string& name() const = 0;
    virtual const LLMConfig& config() const = 0;
    virtual GenerationResult generate(const std::string& prompt) = 0;
};

/// Accumulates provider token usage across extraction calls.
struct TokenUsage {
    long prompt_tokens = 0;
    long total_tokens = 0;

    void add(const GenerationResult& r) {
        prompt_tokens += r.prompt_tokens;
        total_tokens += r.total_tokens;
    }
};

/// One memory entry. The embedding is always computed from
/// `task_text` (the task key), never from `content`.
struct KnowledgeRecord {
    std::string task_id;
    std::string task_text;
    KnowledgeType knowledge_type = KnowledgeType::OneShot;
    OutcomeLabel outcome = OutcomeLabel::Failure;
    std::string content;
    EmbeddingVector embedding;
};

/// The five reflection components, each a list of bullet strings.
struct StructuredReflection {
    std::vector<std::string> useful_subgoals;
    std::vector<std::string> backtracking_challenges;
    std::vector<std::string> limited_functionalities;
    std::vector<std::string> shortcuts;
    std::vector<std::string> other_feedback;

    bool empty() const;
    bool operator==(const StructuredReflection&) const = default;
};

/// Transcript rendering limits for one-shot records and extraction
/// prompt snapshots. Keeping the LAST steps preserves the part of a
/// failed trajectory where the failure shows up.
struct TranscriptOptions {
    std::size_t max_steps = 10;
    std::size_t max_observation_chars = 2000;
};

/// Renders "OBSERVATION:/ACTION:" lines for the trajectory, keeping
/// the last `max_steps` steps behind a truncation marker line.
std::string render_transcript(const Trajectory& trajectory, const TranscriptOptions& options = {});

/// Verbatim one-shot knowledge: objective line, step transcript and
/// the reward line.
std::string format_one_shot(const Trajectory& trajectory, const Task& task,
                            const TranscriptOptions& options = {});

/// Unfilled extraction prompt templates (also shipped under
/// templates/ in the repository). Placeholders: {objective},
/// {is_success}, {trajectory}.
const std::string& summary_prompt_template();
const std::string& web_reflection_prompt_template();

std::string fill_summary_prompt(const std::string& objective, bool is_success,
                                const std::string& transcript);
std::string fill_web_reflection_prompt(const std::string& objective, bool is_success,
                                       const std::string& transcript);

std::string generate_summary(const Trajectory& trajectory, const Task& task,
                             GenerationProvider& gen, const TranscriptOptions& options = {},
                             TokenUsage* usage = nullptr);

std::string generate_web_reflection(const Trajectory& trajectory, const Task& task,
                                    GenerationProvider& gen,
                                    const TranscriptOptions& options = {},
                                    TokenUsage* usage = nullptr);

/// Splits reflection text on the five section headers (tolerant to
/// renumbering, markdown markers and case). Throws
/// UnparseableReflection when no header or no entry is found.
StructuredReflection parse_reflection_sections(const std::string& content);

/// Canonical rendering; parse_reflection_sections(render_reflection(x)) == x
/// for well-formed structures.
std::string render_reflection(const StructuredReflection& reflection);

struct ExtractionOptions {
    TranscriptOptions transcript;
    int jobs = 4;  // bounded parallelism for dataset-wide extraction
};

KnowledgeRecord extract_knowledge(const Trajectory& trajectory, const Task& task,
                                  KnowledgeType type, GenerationProvider& gen,
                                  EmbeddingProvider& embedder,
                                  const ExtractionOptions& options = {},
                                  TokenUsage* usage = nullptr);

/// Deterministic generation provider for offline runs. It reads the
/// extraction prompt it receives and answers from the trajectory
/// snapshot alone: observation lines carrying "NOTICE:" become
/// limited-functionality bullets, lines carrying "TIP:" become
/// shortcut bullets, and the taken actions become subgoal bullets.
class ScriptedGenerationProvider : public GenerationProvider {
public:
    explicit ScriptedGenerationProvider(LLMConfig config = {});

    const std::string& name() const override { return name_; }
    const LLMConfig& config() const override { return config_; }
    GenerationResult generate(const std::string& prompt) override;

private:
    std::string name_;
    LLMConfig config_;
};

}  // namespace reap
