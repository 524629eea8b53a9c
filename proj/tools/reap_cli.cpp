// reap: build knowledge memories from trajectories, retrieve and
// compose prompts, run the offline eval harness, analyze embeddings.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reap/eval.hpp"
#include "reap/memory_index.hpp"
#include "reap/prompt_composer.hpp"
#include "reap/remote.hpp"
#include "reap/similarity.hpp"

namespace {

using nlohmann::json;

struct ProviderFlags {
    std::string provider = "mock";
    std::size_t dim = reap::MockEmbeddingProvider::kDefaultDim;
    std::string base_url;
    std::string model;
    std::string embed_path;
    std::string gen_path;
    std::string api_key_env = "REAP_API_KEY";
};

struct ProviderOptions {
    CLI::Option* provider = nullptr;
    CLI::Option* dim = nullptr;
    CLI::Option* base_url = nullptr;
    CLI::Option* model = nullptr;
};

ProviderOptions add_provider_flags(CLI::App* cmd, ProviderFlags& flags) {
    ProviderOptions opts;
    opts.provider = cmd->add_option("--provider", flags.provider, "mock or remote")
                        ->check(CLI::IsMember({"mock", "remote"}));
    opts.dim = cmd->add_option("--dim", flags.dim, "mock embedder dimension");
    opts.base_url = cmd->add_option("--base-url", flags.base_url, "remote provider base URL");
    opts.model = cmd->add_option("--model", flags.model, "remote model name");
    cmd->add_option("--embed-path", flags.embed_path, "remote embeddings endpoint path");
    cmd->add_option("--gen-path", flags.gen_path, "remote completions endpoint path");
    cmd->add_option("--api-key-env", flags.api_key_env,
                    "environment variable holding the API key");
    return opts;
}

std::unique_ptr<reap::EmbeddingProvider> make_embedder(const ProviderFlags& flags) {
    if (flags.provider == "mock") {
        return std::make_unique<reap::MockEmbeddingProvider>(flags.dim);
    }
    reap::RemoteProviderConfig config;
    config.base_url = flags.base_url;
    config.model = flags.model;
    config.path = flags.embed_path;
    config.api_key_env = flags.api_key_env;
    return std::make_unique<reap::RemoteEmbeddingProvider>(config);
}

std::unique_ptr<reap::GenerationProvider> make_generator(const ProviderFlags& flags) {
    if (flags.provider == "mock") {
        return std::make_unique<reap::ScriptedGenerationProvider>();
    }
    reap::RemoteProviderConfig config;
    config.base_url = flags.base_url;
    config.model = flags.model;
    config.path = flags.gen_path;
    config.api_key_env = flags.api_key_env;
    return std::make_unique<reap::RemoteGenerationProvider>(config);
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw reap::Error(reap::ErrorCode::IoFailure, "cannot open config file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw reap::Error(reap::ErrorCode::CorruptRecord,
                          "config file '" + path + "' is not a JSON object");
    }
    return j;
}

// Config supplies a value only when the flag was not given: flags win.
template <typename T>
void merge(const CLI::Option* opt, const json& config, const char* key, T& value) {
    if (opt != nullptr && opt->count() == 0 && config.contains(key)) {
        value = config.at(key).get<T>();
    }
}

void merge_providers(const ProviderOptions& opts, const json& config, ProviderFlags& flags) {
    merge(opts.provider, config, "provider", flags.provider);
    merge(opts.dim, config, "dim", flags.dim);
    merge(opts.base_url, config, "base_url", flags.base_url);
    merge(opts.model, config, "model", flags.model);
}

reap::Task load_task_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw reap::Error(reap::ErrorCode::IoFailure, "cannot open task file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return reap::task_from_json(buf.str());
}

std::vector<reap::Task> load_tasks_ndjson(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw reap::Error(reap::ErrorCode::IoFailure, "cannot open tasks file '" + path + "'");
    }
    std::vector<reap::Task> tasks;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            tasks.push_back(reap::task_from_json(line));
        } catch (const reap::Error& e) {
            throw reap::Error(reap::ErrorCode::CorruptRecord,
                              "tasks line " + std::to_string(line_no) + ": " + e.what(), false,
                              line_no);
        }
    }
    return tasks;
}

json retrieval_to_json(const reap::RetrievalResult& r) {
    return json{{"rank", r.rank},
                {"score", r.score},
                {"task_id", r.record.task_id},
                {"task_text", r.record.task_text},
                {"knowledge_type", reap::to_string(r.record.knowledge_type)},
                {"outcome", reap::to_string(r.record.outcome)},
                {"content", r.record.content}};
}

reap::RetrievalResult retrieval_from_json(const json& j) {
    reap::RetrievalResult r;
    r.rank = j.at("rank").get<int>();
    r.score = j.at("score").get<double>();
    r.record.task_id = j.at("task_id").get<std::string>();
    r.record.task_text = j.at("task_text").get<std::string>();
    r.record.knowledge_type =
        reap::knowledge_type_from_string(j.at("knowledge_type").get<std::string>());
    r.record.outcome = reap::outcome_from_string(j.at("outcome").get<std::string>());
    r.record.content = j.at("content").get<std::string>();
    return r;
}

std::vector<reap::RetrievalResult> load_results_ndjson(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw reap::Error(reap::ErrorCode::IoFailure, "cannot open results file '" + path + "'");
    }
    std::vector<reap::RetrievalResult> results;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw reap::Error(reap::ErrorCode::CorruptRecord,
                              "results line " + std::to_string(line_no) + " is not valid JSON",
                              false, line_no);
        }
        try {
            results.push_back(retrieval_from_json(j));
        } catch (const json::exception& e) {
            throw reap::Error(reap::ErrorCode::CorruptRecord,
                              "results line " + std::to_string(line_no) + ": " + e.what(), false,
                              line_no);
        }
    }
    return results;
}

void write_or_print(const std::optional<std::string>& path, const std::string& text) {
    if (!path.has_value() || path->empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(*path);
    if (!out) {
        throw reap::Error(reap::ErrorCode::IoFailure, "cannot write '" + *path + "'");
    }
    out << text;
}

std::string dump(const json& j, bool pretty) { return pretty ? j.dump(2) + "\n" : j.dump() + "\n"; }

// Enum flags arriving via --config bypass CLI11 validation; parse
// errors here are usage errors (exit 2), not component failures.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

reap::KnowledgeType parse_type(const std::string& s) {
    try {
        return reap::knowledge_type_from_string(s);
    } catch (const reap::Error& e) {
        throw UsageError(e.what());
    }
}

reap::OutcomeFilter parse_filter(const std::string& s) {
    try {
        return reap::outcome_filter_from_string(s);
    } catch (const reap::Error& e) {
        throw UsageError(e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reflection-memory engine for web agents"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    bool pretty = false;
    int jobs = 4;
    app.add_option("--config", config_path, "JSON config file; explicit flags win")
        ->type_name("FILE");
    app.add_flag("--pretty", pretty, "human-friendly output");
    auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads for extraction")
                         ->check(CLI::PositiveNumber);

    // ---- build ----
    auto* build = app.add_subcommand("build", "extract knowledge from a trajectory dataset");
    std::string build_dataset, build_out;
    std::string build_type = "web_reflection", build_filter = "all";
    bool build_skip_failed = false;
    ProviderFlags build_provider;
    auto* build_dataset_opt =
        build->add_option("--dataset", build_dataset, "trajectory dataset (NDJSON)");
    auto* build_out_opt = build->add_option("--out", build_out, "index file to write");
    auto* build_type_opt =
        build->add_option("--type", build_type, "one_shot, summary or web_reflection")
            ->check(CLI::IsMember({"one_shot", "summary", "web_reflection"}));
    auto* build_filter_opt =
        build->add_option("--filter", build_filter, "all, positive_only or negative_only")
            ->check(CLI::IsMember({"all", "positive_only", "negative_only"}));
    build->add_flag("--skip-failed", build_skip_failed,
                    "skip items whose extraction fails instead of aborting");
    ProviderOptions build_provider_opts = add_provider_flags(build, build_provider);

    // ---- retrieve ----
    auto* retrieve_cmd = app.add_subcommand("retrieve", "top-k similar records for a query task");
    std::string retrieve_index, retrieve_key, retrieve_task_file;
    int retrieve_k = 5;
    bool retrieve_exclude_self = false;
    ProviderFlags retrieve_provider;
    auto* retrieve_index_opt =
        retrieve_cmd->add_option("--index", retrieve_index, "index file to query");
    retrieve_cmd->add_option("--key", retrieve_key, "query key text");
    retrieve_cmd->add_option("--task", retrieve_task_file, "query task JSON file");
    auto* retrieve_k_opt = retrieve_cmd->add_option("--k", retrieve_k, "results to return")
                               ->check(CLI::PositiveNumber);
    retrieve_cmd->add_flag("--exclude-self", retrieve_exclude_self,
                           "drop records with the query task's id (needs --task)");
    ProviderOptions retrieve_provider_opts = add_provider_flags(retrieve_cmd, retrieve_provider);

    // ---- compose ----
    auto* compose = app.add_subcommand("compose", "render an agent prompt from retrieval results");
    std::string compose_task_file, compose_results, compose_type = "web_reflection";
    std::optional<std::string> compose_out;
    long compose_max_tokens = 0;
    auto* compose_task_opt =
        compose->add_option("--task", compose_task_file, "new task JSON file");
    compose->add_option("--results", compose_results,
                        "retrieval results (NDJSON, as printed by retrieve)");
    auto* compose_type_opt =
        compose->add_option("--type", compose_type, "one_shot, summary or web_reflection")
            ->check(CLI::IsMember({"one_shot", "summary", "web_reflection"}));
    compose->add_option("--max-tokens", compose_max_tokens,
                        "drop lowest-ranked knowledge to fit this estimate");
    compose->add_option("--out", compose_out, "write the prompt here instead of stdout");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "run the offline experiment on the bundled fixture");
    std::string eval_mode = "h1", eval_type = "web_reflection", eval_filter = "all";
    int eval_k = 5;
    std::uint64_t eval_seed = 0;
    double eval_train_fraction = 0.8;
    bool eval_exclude_self = false;
    std::string eval_out_dir = "eval_out";
    ProviderFlags eval_provider;
    auto* eval_mode_opt = eval_cmd->add_option("--mode", eval_mode, "h1 or h2")
                              ->check(CLI::IsMember({"h1", "h2"}));
    auto* eval_type_opt =
        eval_cmd->add_option("--type", eval_type, "one_shot, summary or web_reflection")
            ->check(CLI::IsMember({"one_shot", "summary", "web_reflection"}));
    auto* eval_filter_opt =
        eval_cmd->add_option("--filter", eval_filter, "memory outcome filter")
            ->check(CLI::IsMember({"all", "positive_only", "negative_only"}));
    auto* eval_k_opt = eval_cmd->add_option("--k", eval_k, "retrieved records per task")
                           ->check(CLI::PositiveNumber);
    auto* eval_seed_opt = eval_cmd->add_option("--seed", eval_seed, "split seed (h2)");
    auto* eval_frac_opt =
        eval_cmd->add_option("--train-fraction", eval_train_fraction, "train share (h2)");
    eval_cmd->add_flag("--exclude-self", eval_exclude_self, "leave-one-out retrieval");
    auto* eval_out_opt =
        eval_cmd->add_option("--out-dir", eval_out_dir, "directory for results and tables");
    ProviderOptions eval_provider_opts = add_provider_flags(eval_cmd, eval_provider);

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "pairwise task similarity and site separation");
    std::string analyze_tasks;
    std::optional<std::string> analyze_matrix_out, analyze_stats_out;
    ProviderFlags analyze_provider;
    analyze->add_option("--tasks", analyze_tasks,
                        "tasks file (NDJSON); default: bundled fixture tasks");
    analyze->add_option("--matrix-out", analyze_matrix_out, "CSV matrix path (default stdout)");
    analyze->add_option("--stats-out", analyze_stats_out, "stats JSON path (default stdout)");
    ProviderOptions analyze_provider_opts = add_provider_flags(analyze, analyze_provider);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        json config = json::object();
        if (!config_path.empty()) config = load_config_file(config_path);
        merge(jobs_opt, config, "jobs", jobs);

        if (app.got_subcommand(build)) {
            merge(build_dataset_opt, config, "dataset", build_dataset);
            merge(build_out_opt, config, "out", build_out);
            merge(build_type_opt, config, "knowledge_type", build_type);
            merge(build_filter_opt, config, "filter", build_filter);
            merge_providers(build_provider_opts, config, build_provider);
            if (build_dataset.empty()) throw UsageError("build needs --dataset");
            if (build_out.empty()) throw UsageError("build needs --out");

            reap::Dataset dataset = reap::load_dataset(build_dataset);
            auto embedder = make_embedder(build_provider);
            auto generator = make_generator(build_provider);
            reap::BuildOptions options;
            options.filter = parse_filter(build_filter);
            options.extraction.jobs = jobs;
            options.skip_failed_items = build_skip_failed;
            std::vector<reap::SkippedItem> skipped;
            reap::MemoryIndex index = reap::build_memory(dataset, parse_type(build_type),
                                                         *generator, *embedder, options, &skipped);
            reap::save_index(index, build_out);
            for (const auto& item : skipped) {
                std::cerr << "skipped " << item.task_id << ": " << item.message << "\n";
            }
            std::cout << dump(json{{"records", index.size()},
                                   {"skipped", skipped.size()},
                                   {"out", build_out}},
                              pretty);
        } else if (app.got_subcommand(retrieve_cmd)) {
            merge(retrieve_index_opt, config, "index", retrieve_index);
            merge(retrieve_k_opt, config, "k", retrieve_k);
            merge_providers(retrieve_provider_opts, config, retrieve_provider);
            if (retrieve_index.empty()) throw UsageError("retrieve needs --index");
            if (retrieve_key.empty() == retrieve_task_file.empty()) {
                throw UsageError("retrieve needs exactly one of --key or --task");
            }
            if (retrieve_k < 1) throw UsageError("--k must be >= 1");

            reap::MemoryIndex index = reap::load_index(retrieve_index);
            auto embedder = make_embedder(retrieve_provider);
            std::vector<reap::RetrievalResult> results;
            if (!retrieve_task_file.empty()) {
                reap::RetrieveOptions options;
                options.exclude_self = retrieve_exclude_self;
                results = reap::retrieve(index, load_task_file(retrieve_task_file), retrieve_k,
                                         *embedder, options);
            } else {
                results = reap::retrieve_text(index, retrieve_key, retrieve_k, *embedder);
            }
            for (const auto& r : results) std::cout << dump(retrieval_to_json(r), pretty);
        } else if (app.got_subcommand(compose)) {
            merge(compose_task_opt, config, "task", compose_task_file);
            merge(compose_type_opt, config, "knowledge_type", compose_type);
            if (compose_task_file.empty()) throw UsageError("compose needs --task");

            std::vector<reap::RetrievalResult> results;
            if (!compose_results.empty()) results = load_results_ndjson(compose_results);
            reap::ComposeOptions options;
            if (compose_max_tokens > 0) options.max_tokens = compose_max_tokens;
            reap::ComposedPrompt prompt = reap::compose_prompt(
                load_task_file(compose_task_file), results, parse_type(compose_type), options);
            write_or_print(compose_out, prompt.text);
            std::cerr << "knowledge_count=" << prompt.knowledge_count
                      << " estimated_tokens=" << prompt.estimated_tokens << "\n";
        } else if (app.got_subcommand(eval_cmd)) {
            merge(eval_mode_opt, config, "mode", eval_mode);
            merge(eval_type_opt, config, "knowledge_type", eval_type);
            merge(eval_filter_opt, config, "filter", eval_filter);
            merge(eval_k_opt, config, "k", eval_k);
            merge(eval_seed_opt, config, "seed", eval_seed);
            merge(eval_frac_opt, config, "train_fraction", eval_train_fraction);
            merge(eval_out_opt, config, "out_dir", eval_out_dir);
            merge_providers(eval_provider_opts, config, eval_provider);
            if (eval_k < 1) throw UsageError("--k must be >= 1");

            std::filesystem::create_directories(eval_out_dir);
            reap::eval::ExperimentConfig experiment;
            try {
                experiment.mode = reap::eval::experiment_mode_from_string(eval_mode);
            } catch (const reap::Error& e) {
                throw UsageError(e.what());
            }
            experiment.knowledge_type = parse_type(eval_type);
            experiment.filter = parse_filter(eval_filter);
            experiment.k = eval_k;
            experiment.seed = eval_seed;
            experiment.train_fraction = eval_train_fraction;
            experiment.exclude_self = eval_exclude_self;
            experiment.paths = reap::eval::ExperimentPaths{
                eval_out_dir + "/results.ndjson", eval_out_dir + "/table.txt",
                eval_out_dir + "/table.csv"};

            reap::eval::ToyEnvironment env = reap::eval::fixture_environment();
            auto embedder = make_embedder(eval_provider);
            auto generator = make_generator(eval_provider);
            reap::eval::ExperimentOutput output =
                reap::eval::run_experiment(env, experiment, *embedder, *generator);

            json summary{{"baseline_sr", output.baseline_split.overall},
                         {"treated_sr", output.treated_split.overall},
                         {"out_dir", eval_out_dir}};
            if (output.treated_split.prev_success.has_value()) {
                summary["treated_sr_prev_success"] = *output.treated_split.prev_success;
            }
            if (output.treated_split.prev_fail.has_value()) {
                summary["treated_sr_prev_fail"] = *output.treated_split.prev_fail;
            }
            std::cout << dump(summary, pretty);
            if (pretty) std::cout << reap::eval::render_table_text(output.table);
        } else if (app.got_subcommand(analyze)) {
            merge_providers(analyze_provider_opts, config, analyze_provider);
            std::vector<reap::Task> tasks;
            if (!analyze_tasks.empty()) {
                tasks = load_tasks_ndjson(analyze_tasks);
            } else {
                for (const auto& et : reap::eval::fixture_environment().tasks) {
                    tasks.push_back(et.task);
                }
            }
            auto embedder = make_embedder(analyze_provider);
            auto matrix = reap::pairwise_matrix(tasks, *embedder);
            std::vector<std::string> labels;
            for (const auto& task : tasks) labels.push_back(task.site);
            reap::SeparationStats stats = reap::category_separation(matrix, labels);
            write_or_print(analyze_matrix_out, reap::matrix_to_csv(tasks, matrix));
            json stats_json = json::parse(reap::separation_stats_to_json(stats));
            write_or_print(analyze_stats_out, dump(stats_json, pretty));
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const reap::Error& e) {
        std::cerr << "error [" << reap::error_code_name(e.code()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
