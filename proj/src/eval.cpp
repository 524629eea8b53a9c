#include "reap/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace reap::eval {

using nlohmann::json;

const Page& ToyEnvironment::page(const std::string& id) const {
    auto it = pages.find(id);
    if (it == pages.end()) {
        throw Error(ErrorCode::InvalidArgument, "unknown page '" + id + "'");
    }
    return it->second;
}

const EnvTask& ToyEnvironment::env_task(const std::string& task_id) const {
    for (const auto& et : tasks) {
        if (et.task.id == task_id) return et;
    }
    throw Error(ErrorCode::UnknownTask, "task '" + task_id + "' is not registered");
}

namespace {

const PageAction* find_action(const Page& page, const std::string& name) {
    for (const auto& action : page.actions) {
        if (action.name == name) return &action;
    }
    return nullptr;
}

// Walks a scripted route and checks every action exists where the
// route expects it. Returns the final page.
std::string walk_route(const ToyEnvironment& env, const std::string& start,
                       const std::vector<std::string>& route, const std::string& label) {
    std::string current = start;
    for (const auto& name : route) {
        const Page& page = env.page(current);
        const PageAction* action = find_action(page, name);
        if (action == nullptr) {
            throw Error(ErrorCode::InvalidArgument,
                        label + " names action '" + name + "' absent from page '" + current + "'");
        }
        current = action->target;
    }
    return current;
}

}  // namespace

void ToyEnvironment::validate() const {
    if (max_steps <= 0) {
        throw Error(ErrorCode::InvalidArgument, "max_steps must be positive");
    }
    if (step_seconds < 0.0 || token_seconds < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "simulated time rates must be non-negative");
    }
    std::set<std::string> goals;
    for (const auto& et : tasks) goals.insert(et.goal_page);

    for (const auto& [id, p] : pages) {
        for (const auto& action : p.actions) {
            if (pages.find(action.target) == pages.end()) {
                throw Error(ErrorCode::InvalidArgument, "page '" + id + "' action '" +
                                                            action.name +
                                                            "' targets unknown page '" +
                                                            action.target + "'");
            }
            if (!action.trap) continue;
            // No trap edge may lead anywhere that reaches a goal.
            std::set<std::string> seen{action.target};
            std::deque<std::string> frontier{action.target};
            while (!frontier.empty()) {
                std::string cur = frontier.front();
                frontier.pop_front();
                if (goals.count(cur) > 0) {
                    throw Error(ErrorCode::InvalidArgument,
                                "trap action '" + action.name + "' on page '" + id +
                                    "' can reach goal page '" + cur + "'");
                }
                for (const auto& next : page(cur).actions) {
                    if (seen.insert(next.target).second) frontier.push_back(next.target);
                }
            }
        }
    }

    for (const auto& et : tasks) {
        page(et.start_page);
        page(et.goal_page);
        if (et.naive_route.empty()) {
            throw Error(ErrorCode::InvalidArgument,
                        "task '" + et.task.id + "' has an empty naive route");
        }
        walk_route(*this, et.start_page, et.naive_route, "task '" + et.task.id + "' naive route");
        if (!et.informed_route.empty()) {
            std::string end = walk_route(*this, et.start_page, et.informed_route,
                                         "task '" + et.task.id + "' informed route");
            if (end != et.goal_page || et.informed_route.size() > static_cast<std::size_t>(max_steps)) {
                throw Error(ErrorCode::InvalidArgument,
                            "task '" + et.task.id + "' informed route misses its goal");
            }
        }
        if (!et.shortcut_route.empty()) {
            std::string end = walk_route(*this, et.start_page, et.shortcut_route,
                                         "task '" + et.task.id + "' shortcut route");
            if (end != et.goal_page) {
                throw Error(ErrorCode::InvalidArgument,
                            "task '" + et.task.id + "' shortcut route misses its goal");
            }
        }
        // Goal reachable from start via non-trap edges within budget.
        std::set<std::string> seen{et.start_page};
        std::deque<std::pair<std::string, int>> frontier{{et.start_page, 0}};
        bool reachable = et.start_page == et.goal_page;
        while (!frontier.empty() && !reachable) {
            auto [cur, depth] = frontier.front();
            frontier.pop_front();
            if (depth >= max_steps) continue;
            for (const auto& action : page(cur).actions) {
                if (action.trap) continue;
                if (action.target == et.goal_page) {
                    reachable = true;
                    break;
                }
                if (seen.insert(action.target).second) frontier.push_back({action.target, depth + 1});
            }
        }
        if (!reachable) {
            throw Error(ErrorCode::InvalidArgument,
                        "task '" + et.task.id + "' goal '" + et.goal_page +
                            "' unreachable from '" + et.start_page + "' within " +
                            std::to_string(max_steps) + " trap-free steps");
        }
    }
}

namespace {

struct SiteSpec {
    std::string site;        // category label and URL host
    std::string feature;     // the broken tool, named in the NOTICE
    std::string menu;        // the working alternative menu
    std::string intent_a;    // clean task with a shortcut
    std::string intent_b;    // trap task
    std::string intent_c;    // trap task sharing the same broken feature
};

void add_site(ToyEnvironment& env, const SiteSpec& s) {
    auto pid = [&s](const char* leaf) { return s.site + "/" + leaf; };

    Page home;
    home.id = pid("home");
    home.observation = "You are on the " + s.site + " portal home page. TIP: the " + s.site +
                       " search box jumps straight to any page.";
    home.actions = {{"open_catalog", pid("catalog"), false},
                    {"search_target_a", pid("target_a"), false},
                    {"search_target_b", pid("target_b"), false},
                    {"search_target_c", pid("target_c"), false}};

    Page catalog;
    catalog.id = pid("catalog");
    catalog.observation = "The " + s.site + " catalog lists sections, the " + s.feature +
                          " and the " + s.menu + " menu.";
    catalog.actions = {{"open_archive", pid("archive"), false},
                       {"open_feature", pid("broken"), true},
                       {"open_menu", pid("menu"), false}};

    Page archive;
    archive.id = pid("archive");
    archive.observation = "Archived " + s.site + " records sorted by date.";
    archive.actions = {{"open_target_a", pid("target_a"), false}};

    Page broken;
    broken.id = pid("broken");
    broken.observation = "The " + s.site + " " + s.feature +
                         " page failed to load. NOTICE: the " + s.feature + " on the " + s.site +
                         " site is broken; use the " + s.menu + " menu from the catalog instead.";
    broken.actions = {{"retry", pid("broken"), true}};

    Page menu;
    menu.id = pid("menu");
    menu.observation = "The " + s.site + " " + s.menu + " menu with working filters.";
    menu.actions = {{"open_target_b", pid("target_b"), false},
                    {"open_target_c", pid("target_c"), false}};

    auto terminal = [&](const char* leaf, const std::string& what) {
        Page p;
        p.id = pid(leaf);
        p.observation = "The " + what + " you were looking for on " + s.site + ".";
        p.actions = {{"back_home", pid("home"), false}};
        return p;
    };

    for (auto& p : {home, catalog, archive, broken, menu, terminal("target_a", "record"),
                    terminal("target_b", "listing"), terminal("target_c", "report")}) {
        env.pages[p.id] = p;
    }

    std::string url = "http://" + s.site + ".example.com";

    EnvTask a;
    a.task = {s.site + "-a", s.site, url, s.intent_a};
    a.start_page = pid("home");
    a.goal_page = pid("target_a");
    a.naive_route = {"open_catalog", "open_archive", "open_target_a"};
    a.shortcut_route = {"search_target_a"};
    a.shortcut_hint = s.site + " search box";

    std::string trap_hint = s.feature + " on the " + s.site + " site is broken";

    EnvTask b;
    b.task = {s.site + "-b", s.site, url, s.intent_b};
    b.start_page = pid("home");
    b.goal_page = pid("target_b");
    b.naive_route = {"open_catalog", "open_feature"};
    b.informed_route = {"open_catalog", "open_menu", "open_target_b"};
    b.trap_hint = trap_hint;

    EnvTask c;
    c.task = {s.site + "-c", s.site, url, s.intent_c};
    c.start_page = pid("home");
    c.goal_page = pid("target_c");
    c.naive_route = {"open_catalog", "open_feature"};
    c.informed_route = {"open_catalog", "open_menu", "open_target_c"};
    c.trap_hint = trap_hint;

    env.tasks.push_back(a);
    env.tasks.push_back(b);
    env.tasks.push_back(c);
}

}  // namespace

ToyEnvironment fixture_environment() {
    ToyEnvironment env;
    add_site(env, {"shopping", "rating filter", "sort",
                   "check the delivery status of shopping order 4021",
                   "show refunds above 50 dollars issued by the shopping desk",
                   "count invoices from march in the shopping ledger"});
    add_site(env, {"maps", "transit layer", "directions",
                   "find the saved harbor route pinned in the maps workspace",
                   "measure the cycling distance between two pinned maps markers",
                   "collect bookmarked maps places near the central station"});
    add_site(env, {"forum", "keyword alert", "topics",
                   "reopen the locked keyboard thread stored in the forum vault",
                   "name the forum members who replied to the sticky post",
                   "find the forum rules update posted in january"});
    add_site(env, {"code", "blame view", "commits",
                   "download the latest release tarball from the code project",
                   "review open merge requests assigned to dana in the code tracker",
                   "count commits tagged hotfix in the code history"});
    env.validate();
    return env;
}

bool ScriptedAgent::prompt_mentions(const std::string& prompt_text, const std::string& hint) {
    if (hint.empty()) return false;
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    };
    return lower(prompt_text).find(lower(hint)) != std::string::npos;
}

EpisodeOutcome play_episode(const ToyEnvironment& env, const Task& task,
                            const ComposedPrompt* prompt) {
    const EnvTask& et = env.env_task(task.id);

    const std::vector<std::string>* route = &et.naive_route;
    if (prompt != nullptr) {
        if (!et.shortcut_route.empty() &&
            ScriptedAgent::prompt_mentions(prompt->text, et.shortcut_hint)) {
            route = &et.shortcut_route;
        } else if (!et.informed_route.empty() &&
                   ScriptedAgent::prompt_mentions(prompt->text, et.trap_hint)) {
            route = &et.informed_route;
        }
    }
    std::string base = prompt != nullptr ? prompt->text : objective_block(et.task);

    EpisodeOutcome out;
    out.trajectory.task_id = task.id;
    out.result.task_id = task.id;
    if (prompt != nullptr) out.result.knowledge_type = prompt->knowledge_type;

    std::string current = et.start_page;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    int steps = 0;
    bool success = current == et.goal_page;
    std::size_t route_pos = 0;

    while (!success && steps < env.max_steps) {
        const Page& page = env.page(current);
        prompt_tokens += estimate_tokens(base) + estimate_tokens(page.observation);

        std::string action_name;
        if (route_pos < route->size()) {
            action_name = (*route)[route_pos++];
        } else if (!page.actions.empty()) {
            action_name = page.actions.front().name;
        } else {
            action_name = "wait";
        }
        const PageAction* action = find_action(page, action_name);
        if (action == nullptr) {
            // The environment rejects the action and re-prompts; the
            // agent falls back to the first listed action.
            prompt_tokens +=
                estimate_tokens("Invalid action: " + action_name + ". " + page.observation);
            if (!page.actions.empty()) {
                action = &page.actions.front();
                action_name = action->name;
            }
        }
        completion_tokens += estimate_tokens(action_name);
        out.trajectory.steps.push_back(Step{page.observation, action_name});
        ++steps;
        if (action != nullptr) current = action->target;
        success = current == et.goal_page;
    }

    out.result.success = success ? 1 : 0;
    out.result.steps = steps;
    out.result.prompt_tokens = prompt_tokens;
    out.result.total_tokens = prompt_tokens + completion_tokens;
    out.result.wall_time_s = static_cast<double>(steps) * env.step_seconds +
                             static_cast<double>(out.result.total_tokens) * env.token_seconds;

    out.trajectory.reward = out.result.success;
    out.trajectory.wall_time_s = out.result.wall_time_s;
    out.trajectory.total_tokens = out.result.total_tokens;
    out.trajectory.prompt_tokens = prompt_tokens;
    return out;
}

RunResult run_episode(const ToyEnvironment& env, const Task& task, const ComposedPrompt* prompt) {
    return play_episode(env, task, prompt).result;
}

SuccessSplit compute_success_split(const std::vector<RunResult>& results) {
    if (results.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot split an empty result set");
    }
    double sum = 0.0, pos_sum = 0.0, neg_sum = 0.0;
    int pos_n = 0, neg_n = 0;
    for (const auto& r : results) {
        if (!r.baseline_success.has_value()) {
            throw Error(ErrorCode::InvalidArgument,
                        "result for task '" + r.task_id + "' lacks baseline_success");
        }
        sum += r.success;
        if (*r.baseline_success == 1) {
            pos_sum += r.success;
            ++pos_n;
        } else {
            neg_sum += r.success;
            ++neg_n;
        }
    }
    SuccessSplit split;
    split.overall = sum / static_cast<double>(results.size());
    if (pos_n > 0) split.prev_success = pos_sum / pos_n;
    if (neg_n > 0) split.prev_fail = neg_sum / neg_n;
    return split;
}

const char* to_string(Subset subset) {
    switch (subset) {
        case Subset::Overall: return "overall";
        case Subset::PositiveOnly: return "positive_only";
        case Subset::NegativeOnly: return "negative_only";
    }
    return "unknown";
}

const MetricsCell* MetricsTable::cell(const std::string& condition, Subset subset) const {
    auto it = cells.find({condition, subset});
    return it == cells.end() ? nullptr : &it->second;
}

MetricsTable compute_cost_table(
    const std::vector<std::pair<std::string, std::vector<RunResult>>>& grouped) {
    MetricsTable table;
    for (const auto& [condition, results] : grouped) {
        table.conditions.push_back(condition);
        for (Subset subset : {Subset::Overall, Subset::PositiveOnly, Subset::NegativeOnly}) {
            double total = 0.0, prompt = 0.0, wall = 0.0, steps = 0.0, success = 0.0;
            int n = 0;
            for (const auto& r : results) {
                if (subset == Subset::PositiveOnly &&
                    !(r.baseline_success.has_value() && *r.baseline_success == 1)) {
                    continue;
                }
                if (subset == Subset::NegativeOnly &&
                    !(r.baseline_success.has_value() && *r.baseline_success == 0)) {
                    continue;
                }
                total += static_cast<double>(r.total_tokens);
                prompt += static_cast<double>(r.prompt_tokens);
                wall += r.wall_time_s;
                steps += r.steps;
                success += r.success;
                ++n;
            }
            if (n == 0) continue;  // empty subsets have no cell
            MetricsCell cell;
            cell.count = n;
            cell.mean_total_tokens = total / n;
            cell.mean_prompt_tokens = prompt / n;
            cell.mean_wall_time_s = wall / n;
            cell.mean_steps = steps / n;
            cell.success_rate = success / n;
            table.cells[{condition, subset}] = cell;
        }
    }
    return table;
}

namespace {

std::string thousands(double mean) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lldk", static_cast<long long>(std::llround(mean / 1000.0)));
    return buf;
}

std::string fixed2(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string whole(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(std::llround(value)));
    return buf;
}

std::string full(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void pad_to(std::string& line, std::size_t width) {
    if (line.size() < width) line.append(width - line.size(), ' ');
    line += "  ";
}

}  // namespace

std::string render_table_text(const MetricsTable& table) {
    const std::vector<std::string> headers = {"condition", "subset",    "n",    "total_tok",
                                              "prompt_tok", "tct_s",    "steps", "sr"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& condition : table.conditions) {
        for (Subset subset : {Subset::Overall, Subset::PositiveOnly, Subset::NegativeOnly}) {
            const MetricsCell* cell = table.cell(condition, subset);
            if (cell == nullptr) continue;
            rows.push_back({condition, to_string(subset), std::to_string(cell->count),
                            thousands(cell->mean_total_tokens),
                            thousands(cell->mean_prompt_tokens), whole(cell->mean_wall_time_s),
                            fixed2(cell->mean_steps), fixed2(cell->success_rate)});
        }
    }
    std::vector<std::size_t> widths(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
    }
    std::string out;
    auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            line += row[c];
            if (c + 1 < row.size()) pad_to(line, line.size() + (widths[c] - row[c].size()));
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    };
    emit(headers);
    for (const auto& row : rows) emit(row);
    return out;
}

std::string render_table_csv(const MetricsTable& table) {
    std::string out =
        "condition,subset,count,mean_total_tokens,mean_prompt_tokens,mean_wall_time_s,"
        "mean_steps,success_rate\n";
    for (const auto& condition : table.conditions) {
        for (Subset subset : {Subset::Overall, Subset::PositiveOnly, Subset::NegativeOnly}) {
            const MetricsCell* cell = table.cell(condition, subset);
            if (cell == nullptr) continue;
            out += condition;
            out += ',';
            out += to_string(subset);
            out += ',';
            out += std::to_string(cell->count);
            out += ',';
            out += full(cell->mean_total_tokens);
            out += ',';
            out += full(cell->mean_prompt_tokens);
            out += ',';
            out += full(cell->mean_wall_time_s);
            out += ',';
            out += full(cell->mean_steps);
            out += ',';
            out += full(cell->success_rate);
            out += '\n';
        }
    }
    return out;
}

double reduction_pct(double baseline, double treated) {
    if (!(baseline > 0.0)) {
        throw Error(ErrorCode::NonPositiveBaseline,
                    "reduction needs a positive baseline, got " + std::to_string(baseline));
    }
    return 100.0 * (baseline - treated) / baseline;
}

const char* to_string(ExperimentMode mode) {
    return mode == ExperimentMode::H1 ? "h1" : "h2";
}

ExperimentMode experiment_mode_from_string(const std::string& s) {
    if (s == "h1" || s == "H1") return ExperimentMode::H1;
    if (s == "h2" || s == "H2") return ExperimentMode::H2;
    throw Error(ErrorCode::InvalidArgument, "unknown experiment mode '" + s + "'");
}

void validate_experiment_config(const ExperimentConfig& config) {
    if (config.k < 1) {
        throw Error(ErrorCode::InvalidArgument,
                    "k must be >= 1, got " + std::to_string(config.k));
    }
    if (config.mode == ExperimentMode::H2 &&
        !(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "train_fraction must be in (0, 1)");
    }
}

namespace {

json result_to_json(const RunResult& r, const std::string& condition) {
    json j{{"condition", condition},
           {"task_id", r.task_id},
           {"success", r.success},
           {"steps", r.steps},
           {"total_tokens", r.total_tokens},
           {"prompt_tokens", r.prompt_tokens},
           {"wall_time_s", r.wall_time_s}};
    j["knowledge_type"] =
        r.knowledge_type.has_value() ? json(to_string(*r.knowledge_type)) : json(nullptr);
    j["baseline_success"] =
        r.baseline_success.has_value() ? json(*r.baseline_success) : json(nullptr);
    return j;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot write '" + path + "'");
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoFailure, "short write to '" + path + "'");
    }
}

void persist(const ExperimentPaths& paths, const std::vector<RunResult>& baseline,
             const std::vector<RunResult>& treated, const std::string& condition,
             const MetricsTable* table) {
    write_file(paths.results_ndjson,
               results_to_ndjson(baseline, "baseline") + results_to_ndjson(treated, condition));
    if (table != nullptr) {
        write_file(paths.table_text, render_table_text(*table));
        write_file(paths.table_csv, render_table_csv(*table));
    }
}

}  // namespace

ExperimentOutput run_experiment(const ToyEnvironment& env, const ExperimentConfig& config,
                                EmbeddingProvider& embedder, GenerationProvider& gen) {
    validate_experiment_config(config);
    env.validate();
    if (env.tasks.empty()) {
        throw Error(ErrorCode::InvalidArgument, "environment has no tasks");
    }

    std::vector<std::size_t> memory_src(env.tasks.size());
    std::vector<std::size_t> eval_set(env.tasks.size());
    for (std::size_t i = 0; i < env.tasks.size(); ++i) memory_src[i] = eval_set[i] = i;
    if (config.mode == ExperimentMode::H2) {
        std::tie(memory_src, eval_set) =
            split_indices(env.tasks.size(), config.train_fraction, config.seed);
    }

    // Baseline pass over every task: eval tasks need baseline rows and
    // memory-source tasks need trajectories.
    std::vector<EpisodeOutcome> baseline_runs;
    baseline_runs.reserve(env.tasks.size());
    for (const auto& et : env.tasks) baseline_runs.push_back(play_episode(env, et.task, nullptr));

    Dataset dataset;
    dataset.reserve(memory_src.size());
    for (std::size_t i : memory_src) {
        dataset.push_back(DatasetItem{env.tasks[i].task, baseline_runs[i].trajectory});
    }

    ExperimentOutput out;
    for (std::size_t i : eval_set) {
        RunResult r = baseline_runs[i].result;
        r.baseline_success = r.success;
        out.baseline.push_back(r);
    }
    auto by_task_id = [](const RunResult& a, const RunResult& b) { return a.task_id < b.task_id; };
    std::sort(out.baseline.begin(), out.baseline.end(), by_task_id);

    std::string condition = to_string(config.knowledge_type);
    RetrieveOptions retrieve_options;
    retrieve_options.exclude_self = config.exclude_self;
    try {
        BuildOptions build_options;
        build_options.filter = config.filter;
        MemoryIndex index =
            build_memory(dataset, config.knowledge_type, gen, embedder, build_options);
        for (std::size_t i : eval_set) {
            const Task& task = env.tasks[i].task;
            auto retrieved = retrieve(index, task, config.k, embedder, retrieve_options);
            ComposedPrompt prompt = compose_prompt(task, retrieved, config.knowledge_type);
            RunResult r = run_episode(env, task, &prompt);
            r.baseline_success = baseline_runs[i].result.success;
            out.treated.push_back(r);
        }
    } catch (...) {
        if (config.paths.has_value()) {
            std::sort(out.treated.begin(), out.treated.end(), by_task_id);
            persist(*config.paths, out.baseline, out.treated, condition, nullptr);
        }
        throw;
    }
    std::sort(out.treated.begin(), out.treated.end(), by_task_id);

    out.table = compute_cost_table({{"baseline", out.baseline}, {condition, out.treated}});
    out.baseline_split = compute_success_split(out.baseline);
    out.treated_split = compute_success_split(out.treated);

    if (config.paths.has_value()) {
        persist(*config.paths, out.baseline, out.treated, condition, &out.table);
    }
    return out;
}

std::string results_to_ndjson(const std::vector<RunResult>& results,
                              const std::string& condition) {
    std::string out;
    for (const auto& r : results) {
        out += result_to_json(r, condition).dump();
        out += '\n';
    }
    return out;
}

std::vector<RunResult> results_from_ndjson(const std::string& text) {
    std::vector<RunResult> results;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error(ErrorCode::CorruptRecord,
                        "results line " + std::to_string(line_no) + " is not valid JSON", false,
                        line_no);
        }
        try {
            RunResult r;
            r.task_id = j.at("task_id").get<std::string>();
            r.success = j.at("success").get<int>();
            r.steps = j.at("steps").get<int>();
            r.total_tokens = j.at("total_tokens").get<long>();
            r.prompt_tokens = j.at("prompt_tokens").get<long>();
            r.wall_time_s = j.at("wall_time_s").get<double>();
            if (j.contains("knowledge_type") && !j.at("knowledge_type").is_null()) {
                r.knowledge_type =
                    knowledge_type_from_string(j.at("knowledge_type").get<std::string>());
            }
            if (j.contains("baseline_success") && !j.at("baseline_success").is_null()) {
                r.baseline_success = j.at("baseline_success").get<int>();
            }
            results.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::CorruptRecord,
                        "results line " + std::to_string(line_no) + ": " + e.what(), false,
                        line_no);
        }
    }
    return results;
}

}  // namespace reap::eval
