#include "reap/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "reap/prompt_composer.hpp"

namespace reap {

namespace {

const std::string kSummaryTemplate = R"tmpl(You are summarizing a prior web navigation episode from an autonomous agent.
Please answer the following based on the trajectory. Write out answers coherently as if you are passing along this information to an inexperience web navigation agent.

OBJECTIVE: {objective}

SUCCESSFUL?: {is_success}

SUMMARY GUIDELINES:
- What did the agent attempt to do?
- If successful, what were the key actions that worked?
- If unsuccessful, where did it go wrong and why?
- What parts of the environment were especially tricky?
- What should future agents be aware of on this type of website?

TRAJECTORY SNAPSHOT: {trajectory})tmpl";

const std::string kWebReflectionTemplate = R"tmpl(You are analyzing a prior web navigation episode from an autonomous agent. Your goal is to output strategic advice and lessons learned to help an inexperienced agent perform better on similar websites or task in the future. Please answer the following based on the trajectory and objective shown:

1. Useful Subgoals: Which subgoals were necessary to accomplish the overall plan and sucessfully accomplished? For each sucessfully accomplished subgoal, what actions were taken to accomplish this?

2. Backtracking & Unexpected Challenges Faced: It's possible that there unexpected challenged while executing the objective. This can lead to unnecessary steps taken while executing the objective. If there was any backtracking, can you provide advice on how the backtracked steps can be avoided and how the task can be accomplished directly? Please do not provide any advice which you did not witness in the given trajectory.

3. Limited Functionalities Learned: Based on the trajectory, the agent may have learned there are certain capabilities not possible on certain websites (i.e. allrecipes.com has no option to filter recipes by rating). If any, what limitations does this current website have?

4. Shortcuts Suggestions: Can you suggest any shortcuts for accomplishing the objective with fewer steps? Please only provide shortcuts you are certain are possible on the given website. If any shortcuts are suggested, please write them in a list.

5. Other Feedback: If the prior plan did not work, where did the agent go wrong? Please be specific. Do you have any tips which can help a inexperience agent avoid making the same mistake(s)?

Please write out answers is if you are speaking directly to the inexperience web navigation agent. Note the agent cannot see the full trajectory that you are viewing, so please answer accordingly. In each category, provide the answers as a bullet point list. Please do not call the agent an inexperienced -- that is rude.

OBJECTIVE: {objective}

SUCCESSFUL?: {is_success}

TRAJECTORY SNAPSHOT: {trajectory})tmpl";

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

const char* bool_text(bool value) { return value ? "True" : "False"; }

}  // namespace

bool StructuredReflection::empty() const {
    return useful_subgoals.empty() && backtracking_challenges.empty() &&
           limited_functionalities.empty() && shortcuts.empty() && other_feedback.empty();
}

const std::string& summary_prompt_template() { return kSummaryTemplate; }
const std::string& web_reflection_prompt_template() { return kWebReflectionTemplate; }

std::string render_transcript(const Trajectory& trajectory, const TranscriptOptions& options) {
    validate_trajectory(trajectory);
    std::size_t n = trajectory.steps.size();
    std::size_t keep = options.max_steps == 0 ? n : std::min(n, options.max_steps);
    std::size_t first = n - keep;

    std::ostringstream out;
    if (first > 0) {
        out << "[... " << first << " earlier steps omitted ...]\n";
    }
    for (std::size_t i = first; i < n; ++i) {
        const Step& step = trajectory.steps[i];
        std::string obs = step.observation;
        if (options.max_observation_chars > 0 && obs.size() > options.max_observation_chars) {
            obs = obs.substr(0, options.max_observation_chars) + " [truncated]";
        }
        out << "OBSERVATION: " << obs << "\nACTION: " << step.action;
        if (i + 1 < n) out << '\n';
    }
    return out.str();
}

std::string format_one_shot(const Trajectory& trajectory, const Task& task,
                            const TranscriptOptions& options) {
    return "OBJECTIVE: " + task.intent + "\n" + render_transcript(trajectory, options) +
           "\nREWARD: " + std::to_string(trajectory.reward);
}

std::string fill_summary_prompt(const std::string& objective, bool is_success,
                                const std::string& transcript) {
    std::string text = replace_all(kSummaryTemplate, "{objective}", objective);
    text = replace_all(text, "{is_success}", bool_text(is_success));
    return replace_all(text, "{trajectory}", transcript);
}

std::string fill_web_reflection_prompt(const std::string& objective, bool is_success,
                                       const std::string& transcript) {
    std::string text = replace_all(kWebReflectionTemplate, "{objective}", objective);
    text = replace_all(text, "{is_success}", bool_text(is_success));
    return replace_all(text, "{trajectory}", transcript);
}

namespace {

std::string run_generation(GenerationProvider& gen, const std::string& prompt,
                           TokenUsage* usage) {
    GenerationResult result = gen.generate(prompt);
    if (result.prompt_tokens < 0 || result.total_tokens < 0 ||
        result.prompt_tokens > result.total_tokens) {
        throw Error(ErrorCode::ProviderFailure,
                    "provider '" + gen.name() + "' reported inconsistent token counts");
    }
    if (trim(result.text).empty()) {
        throw Error(ErrorCode::EmptyCompletion,
                    "provider '" + gen.name() + "' returned an empty completion");
    }
    if (usage != nullptr) usage->add(result);
    return result.text;
}

}  // namespace

std::string generate_summary(const Trajectory& trajectory, const Task& task,
                             GenerationProvider& gen, const TranscriptOptions& options,
                             TokenUsage* usage) {
    std::string prompt = fill_summary_prompt(task.intent, trajectory.reward == 1,
                                             render_transcript(trajectory, options));
    return run_generation(gen, prompt, usage);
}

std::string generate_web_reflection(const Trajectory& trajectory, const Task& task,
                                    GenerationProvider& gen, const TranscriptOptions& options,
                                    TokenUsage* usage) {
    std::string prompt = fill_web_reflection_prompt(task.intent, trajectory.reward == 1,
                                                    render_transcript(trajectory, options));
    return run_generation(gen, prompt, usage);
}

namespace {

enum class Section { None, Subgoals, Backtracking, Limited, Shortcuts, Feedback };

// Header key phrases; matching is prefix-based after decoration strip.
struct HeaderKey {
    const char* phrase;
    Section section;
};

constexpr HeaderKey kHeaderKeys[] = {
    {"useful subgoals", Section::Subgoals},
    {"backtracking", Section::Backtracking},
    {"limited functionalit", Section::Limited},
    {"shortcuts", Section::Shortcuts},
    {"other feedback", Section::Feedback},
};

// Strips "1." / "###" / "**" style decoration before a header phrase.
std::string strip_decoration(const std::string& line) {
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == ' ' || c == '\t' || c == '#' || c == '*' || c == '>' || c == '.' || c == ')' ||
            (c >= '0' && c <= '9')) {
            ++i;
        } else {
            break;
        }
    }
    return line.substr(i);
}

// A header needs its phrase at line start plus either a colon or a
// bare header-only line; plain prose starting with the same word
// stays content.
std::optional<std::pair<Section, std::string>> match_header(const std::string& line) {
    std::string stripped = strip_decoration(line);
    std::string lower = to_lower(stripped);
    for (const auto& key : kHeaderKeys) {
        std::string phrase(key.phrase);
        if (lower.rfind(phrase, 0) != 0) continue;
        std::size_t colon = stripped.find(':', phrase.size() - 1);
        if (colon != std::string::npos) {
            return std::make_pair(key.section, trim(stripped.substr(colon + 1)));
        }
        if (trim(stripped).size() <= phrase.size() + 32) {
            return std::make_pair(key.section, std::string());
        }
    }
    return std::nullopt;
}

// Strips one leading bullet marker: "-", "*", "•" or "<digits>." /
// "<digits>)".
std::string strip_bullet(const std::string& line) {
    std::string s = trim(line);
    if (s.empty()) return s;
    if (s[0] == '-' || s[0] == '*') return trim(s.substr(1));
    if (s.rfind("\xe2\x80\xa2", 0) == 0) return trim(s.substr(3));
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) return trim(s.substr(i + 1));
    return s;
}

}  // namespace

StructuredReflection parse_reflection_sections(const std::string& content) {
    if (trim(content).empty()) {
        throw Error(ErrorCode::InvalidArgument, "reflection content must be non-empty");
    }

    StructuredReflection out;
    auto list_for = [&out](Section s) -> std::vector<std::string>* {
        switch (s) {
            case Section::Subgoals: return &out.useful_subgoals;
            case Section::Backtracking: return &out.backtracking_challenges;
            case Section::Limited: return &out.limited_functionalities;
            case Section::Shortcuts: return &out.shortcuts;
            case Section::Feedback: return &out.other_feedback;
            case Section::None: return nullptr;
        }
        return nullptr;
    };

    Section current = Section::None;
    int headers_found = 0;
    std::vector<std::string> preamble;

    for (const auto& line : split_lines(content)) {
        if (trim(line).empty()) continue;
        if (auto header = match_header(line)) {
            current = header->first;
            ++headers_found;
            if (!header->second.empty()) list_for(current)->push_back(header->second);
            continue;
        }
        if (current == Section::None) {
            preamble.push_back(trim(line));
            continue;
        }
        std::string entry = strip_bullet(line);
        if (!entry.empty()) list_for(current)->push_back(entry);
    }

    if (headers_found == 0) {
        throw Error(ErrorCode::UnparseableReflection, "no reflection section headers found");
    }
    if (!preamble.empty()) {
        std::string joined;
        for (const auto& p : preamble) {
            if (!joined.empty()) joined += ' ';
            joined += p;
        }
        out.other_feedback.push_back(joined);
    }
    if (out.empty()) {
        throw Error(ErrorCode::UnparseableReflection, "reflection sections carry no entries");
    }
    return out;
}

std::string render_reflection(const StructuredReflection& reflection) {
    struct Part {
        const char* header;
        const std::vector<std::string>* entries;
    };
    const Part parts[] = {
        {"1. Useful Subgoals:", &reflection.useful_subgoals},
        {"2. Backtracking & Unexpected Challenges Faced:", &reflection.backtracking_challenges},
        {"3. Limited Functionalities Learned:", &reflection.limited_functionalities},
        {"4. Shortcuts Suggestions:", &reflection.shortcuts},
        {"5. Other Feedback:", &reflection.other_feedback},
    };
    std::ostringstream out;
    bool first = true;
    for (const auto& part : parts) {
        if (!first) out << "\n\n";
        first = false;
        out << part.header;
        for (const auto& entry : *part.entries) out << "\n- " << entry;
    }
    return out.str();
}

KnowledgeRecord extract_knowledge(const Trajectory& trajectory, const Task& task,
                                  KnowledgeType type, GenerationProvider& gen,
                                  EmbeddingProvider& embedder, const ExtractionOptions& options,
                                  TokenUsage* usage) {
    KnowledgeRecord record;
    record.task_id = task.id;
    record.task_text = task_key(task);
    record.knowledge_type = type;
    record.outcome = outcome_from_reward(trajectory.reward);
    switch (type) {
        case KnowledgeType::OneShot:
            record.content = format_one_shot(trajectory, task, options.transcript);
            break;
        case KnowledgeType::Summary:
            record.content = generate_summary(trajectory, task, gen, options.transcript, usage);
            break;
        case KnowledgeType::WebReflection:
            record.content =
                generate_web_reflection(trajectory, task, gen, options.transcript, usage);
            break;
    }
    record.embedding = embed_text(embedder, record.task_text);
    return record;
}

ScriptedGenerationProvider::ScriptedGenerationProvider(LLMConfig config)
    : name_("scripted"), config_(config) {
    validate_llm_config(config_);
}

namespace {

std::string line_value(const std::string& prompt, const std::string& marker) {
    std::size_t pos = prompt.find(marker);
    if (pos == std::string::npos) return "";
    pos += marker.size();
    std::size_t end = prompt.find('\n', pos);
    if (end == std::string::npos) end = prompt.size();
    return trim(prompt.substr(pos, end - pos));
}

// Collects "<marker> ..." payloads out of observation text, one entry
// per sentence, deduplicated in first-seen order.
std::vector<std::string> marker_sentences(const std::string& text, const std::string& marker) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = text.find(marker, pos)) != std::string::npos) {
        std::size_t begin = pos + marker.size();
        std::size_t end = text.find('\n', begin);
        if (end == std::string::npos) end = text.size();
        std::string sentence = trim(text.substr(begin, end - begin));
        if (!sentence.empty() && std::find(out.begin(), out.end(), sentence) == out.end()) {
            out.push_back(sentence);
        }
        pos = begin;
    }
    return out;
}

std::vector<std::string> action_chain(const std::string& transcript) {
    std::vector<std::string> actions;
    for (const auto& line : split_lines(transcript)) {
        if (line.rfind("ACTION: ", 0) == 0) actions.push_back(line.substr(8));
    }
    return actions;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

}  // namespace

GenerationResult ScriptedGenerationProvider::generate(const std::string& prompt) {
    std::string objective = line_value(prompt, "OBJECTIVE: ");
    bool succeeded = line_value(prompt, "SUCCESSFUL?: ") == "True";

    std::size_t snapshot_pos = prompt.find("TRAJECTORY SNAPSHOT: ");
    std::string transcript =
        snapshot_pos == std::string::npos ? prompt : prompt.substr(snapshot_pos + 21);

    std::vector<std::string> limitations = marker_sentences(transcript, "NOTICE:");
    std::vector<std::string> tips = marker_sentences(transcript, "TIP:");
    std::vector<std::string> actions = action_chain(transcript);

    std::string completion;
    if (prompt.find("1. Useful Subgoals") != std::string::npos) {
        StructuredReflection reflection;
        if (!actions.empty()) {
            reflection.useful_subgoals.push_back(
                (succeeded ? "The goal was reached by taking: " : "The attempt followed: ") +
                join(actions, " -> "));
        }
        if (!succeeded) {
            reflection.backtracking_challenges.push_back(
                "The run looped on the same page without reaching the goal; take the working "
                "route instead of retrying the unavailable feature.");
        }
        reflection.limited_functionalities = limitations;
        reflection.shortcuts = tips;
        reflection.other_feedback.push_back(
            succeeded ? "This objective is repeatable with the subgoal chain above."
                      : "Check the page notices before relying on a built-in feature.");
        completion = render_reflection(reflection);
    } else if (prompt.find("SUMMARY GUIDELINES:") != std::string::npos) {
        std::ostringstream out;
        out << "The agent attempted: " << objective << ". The attempt "
            << (succeeded ? "succeeded." : "failed.");
        if (!actions.empty()) out << " Actions taken: " << join(actions, " -> ") << ".";
        for (const auto& l : limitations) out << " Known limitation: " << l;
        for (const auto& t : tips) out << " Shortcut: " << t;
        completion = out.str();
    } else {
        completion = "No structured advice available for this prompt.";
    }

    GenerationResult result;
    result.text = std::move(completion);
    result.prompt_tokens = estimate_tokens(prompt);
    result.total_tokens = result.prompt_tokens + estimate_tokens(result.text);
    return result;
}

}  // namespace reap
