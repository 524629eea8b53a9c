// Python bindings for the main operations: mock embedding, memory
// build/retrieve/persist, prompt composition, the fixture experiment
// and similarity analysis.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "reap/eval.hpp"
#include "reap/memory_index.hpp"
#include "reap/prompt_composer.hpp"
#include "reap/similarity.hpp"

namespace py = pybind11;

namespace {

reap::eval::ExperimentConfig make_config(const std::string& mode, const std::string& type,
                                         const std::string& filter, int k, std::uint64_t seed,
                                         double train_fraction, bool exclude_self) {
    reap::eval::ExperimentConfig config;
    config.mode = reap::eval::experiment_mode_from_string(mode);
    config.knowledge_type = reap::knowledge_type_from_string(type);
    config.filter = reap::outcome_filter_from_string(filter);
    config.k = k;
    config.seed = seed;
    config.train_fraction = train_fraction;
    config.exclude_self = exclude_self;
    return config;
}

py::dict result_to_dict(const reap::eval::RunResult& r) {
    py::dict d;
    d["task_id"] = r.task_id;
    d["success"] = r.success;
    d["steps"] = r.steps;
    d["total_tokens"] = r.total_tokens;
    d["prompt_tokens"] = r.prompt_tokens;
    d["wall_time_s"] = r.wall_time_s;
    d["knowledge_type"] = r.knowledge_type.has_value()
                              ? py::object(py::str(reap::to_string(*r.knowledge_type)))
                              : py::object(py::none());
    d["baseline_success"] = r.baseline_success.has_value() ? py::object(py::int_(*r.baseline_success))
                                                           : py::object(py::none());
    return d;
}

}  // namespace

PYBIND11_MODULE(_reap, m) {
    m.doc() = "reflection-memory engine for web agents";

    py::register_exception<reap::Error>(m, "ReapError");

    py::class_<reap::Task>(m, "Task")
        .def(py::init<>())
        .def(py::init([](std::string id, std::string site, std::string start_url,
                         std::string intent) {
                 return reap::Task{std::move(id), std::move(site), std::move(start_url),
                                   std::move(intent)};
             }),
             py::arg("id"), py::arg("site"), py::arg("start_url"), py::arg("intent"))
        .def_readwrite("id", &reap::Task::id)
        .def_readwrite("site", &reap::Task::site)
        .def_readwrite("start_url", &reap::Task::start_url)
        .def_readwrite("intent", &reap::Task::intent);

    m.def("task_key", &reap::task_key, py::arg("task"));
    m.def("estimate_tokens", &reap::estimate_tokens, py::arg("text"));

    py::class_<reap::MockEmbeddingProvider>(m, "MockEmbeddingProvider")
        .def(py::init<std::size_t>(), py::arg("dim") = reap::MockEmbeddingProvider::kDefaultDim)
        .def_property_readonly("name", &reap::MockEmbeddingProvider::name)
        .def_property_readonly("dim", &reap::MockEmbeddingProvider::dim)
        .def("embed", [](reap::MockEmbeddingProvider& self, const std::string& text) {
            return reap::embed_text(self, text).values;
        });

    m.def(
        "cosine_similarity",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return reap::cosine_similarity(reap::EmbeddingVector{a}, reap::EmbeddingVector{b});
        },
        py::arg("a"), py::arg("b"));

    py::class_<reap::KnowledgeRecord>(m, "KnowledgeRecord")
        .def_readonly("task_id", &reap::KnowledgeRecord::task_id)
        .def_readonly("task_text", &reap::KnowledgeRecord::task_text)
        .def_readonly("content", &reap::KnowledgeRecord::content)
        .def_property_readonly("knowledge_type",
                               [](const reap::KnowledgeRecord& r) {
                                   return std::string(reap::to_string(r.knowledge_type));
                               })
        .def_property_readonly("outcome", [](const reap::KnowledgeRecord& r) {
            return std::string(reap::to_string(r.outcome));
        });

    py::class_<reap::RetrievalResult>(m, "RetrievalResult")
        .def_readonly("record", &reap::RetrievalResult::record)
        .def_readonly("score", &reap::RetrievalResult::score)
        .def_readonly("rank", &reap::RetrievalResult::rank);

    py::class_<reap::MemoryIndex>(m, "MemoryIndex")
        .def_property_readonly("provider_name", &reap::MemoryIndex::provider_name)
        .def_property_readonly("dim", &reap::MemoryIndex::dim)
        .def("__len__", &reap::MemoryIndex::size);

    m.def(
        "build_fixture_memory",
        [](const std::string& type, const std::string& filter) {
            reap::eval::ToyEnvironment env = reap::eval::fixture_environment();
            reap::Dataset dataset;
            for (const auto& et : env.tasks) {
                dataset.push_back(
                    reap::DatasetItem{et.task, reap::eval::play_episode(env, et.task).trajectory});
            }
            reap::MockEmbeddingProvider embedder;
            reap::ScriptedGenerationProvider generator;
            reap::BuildOptions options;
            options.filter = reap::outcome_filter_from_string(filter);
            return reap::build_memory(dataset, reap::knowledge_type_from_string(type), generator,
                                      embedder, options);
        },
        py::arg("type") = "web_reflection", py::arg("filter") = "all",
        "Builds a memory index from baseline rollouts of the bundled fixture.");

    m.def(
        "retrieve",
        [](const reap::MemoryIndex& index, const reap::Task& task, int k, bool exclude_self) {
            reap::MockEmbeddingProvider embedder;
            reap::RetrieveOptions options;
            options.exclude_self = exclude_self;
            return reap::retrieve(index, task, k, embedder, options);
        },
        py::arg("index"), py::arg("task"), py::arg("k") = 5, py::arg("exclude_self") = false);

    m.def(
        "compose_prompt",
        [](const reap::Task& task, const std::vector<reap::RetrievalResult>& results,
           const std::string& type) {
            reap::ComposedPrompt prompt =
                reap::compose_prompt(task, results, reap::knowledge_type_from_string(type));
            py::dict d;
            d["text"] = prompt.text;
            d["knowledge_count"] = prompt.knowledge_count;
            d["estimated_tokens"] = prompt.estimated_tokens;
            return d;
        },
        py::arg("task"), py::arg("results"), py::arg("type") = "web_reflection");

    m.def("save_index", &reap::save_index, py::arg("index"), py::arg("path"));
    m.def("load_index", &reap::load_index, py::arg("path"));

    m.def(
        "split_indices",
        [](std::size_t n, double train_fraction, std::uint64_t seed) {
            return reap::split_indices(n, train_fraction, seed);
        },
        py::arg("n"), py::arg("train_fraction"), py::arg("seed"));

    m.def(
        "run_fixture_experiment",
        [](const std::string& mode, const std::string& type, const std::string& filter, int k,
           std::uint64_t seed, double train_fraction, bool exclude_self) {
            reap::eval::ToyEnvironment env = reap::eval::fixture_environment();
            reap::MockEmbeddingProvider embedder;
            reap::ScriptedGenerationProvider generator;
            reap::eval::ExperimentOutput output = reap::eval::run_experiment(
                env, make_config(mode, type, filter, k, seed, train_fraction, exclude_self),
                embedder, generator);
            py::dict d;
            py::list baseline, treated;
            for (const auto& r : output.baseline) baseline.append(result_to_dict(r));
            for (const auto& r : output.treated) treated.append(result_to_dict(r));
            d["baseline"] = baseline;
            d["treated"] = treated;
            d["baseline_sr"] = output.baseline_split.overall;
            d["treated_sr"] = output.treated_split.overall;
            d["table_text"] = reap::eval::render_table_text(output.table);
            d["table_csv"] = reap::eval::render_table_csv(output.table);
            return d;
        },
        py::arg("mode") = "h1", py::arg("type") = "web_reflection", py::arg("filter") = "all",
        py::arg("k") = 5, py::arg("seed") = 0, py::arg("train_fraction") = 0.8,
        py::arg("exclude_self") = false);

    m.def("fixture_tasks", [] {
        std::vector<reap::Task> tasks;
        for (const auto& et : reap::eval::fixture_environment().tasks) tasks.push_back(et.task);
        return tasks;
    });

    m.def(
        "pairwise_matrix",
        [](const std::vector<reap::Task>& tasks) {
            reap::MockEmbeddingProvider embedder;
            return reap::pairwise_matrix(tasks, embedder);
        },
        py::arg("tasks"));

    m.def(
        "category_separation",
        [](const std::vector<std::vector<double>>& matrix, const std::vector<std::string>& labels) {
            reap::SeparationStats stats = reap::category_separation(matrix, labels);
            py::dict d;
            d["mean_intra"] = stats.mean_intra;
            d["mean_inter"] = stats.mean_inter;
            d["margin"] = stats.margin;
            d["n_tasks"] = stats.n_tasks;
            d["n_categories"] = stats.n_categories;
            return d;
        },
        py::arg("matrix"), py::arg("labels"));
}
