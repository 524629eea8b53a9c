#include "reap/similarity.hpp"

#include <cstdio>
#include <set>

#include "json.hpp"

namespace reap {

std::vector<std::vector<double>> pairwise_matrix(const std::vector<Task>& tasks,
                                                 EmbeddingProvider& embedder) {
    if (tasks.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "pairwise matrix needs at least two tasks");
    }
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(tasks.size());
    for (const auto& task : tasks) vectors.push_back(embed_text(embedder, task_key(task)));

    std::size_t n = tasks.size();
    std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        matrix[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = cosine_similarity(vectors[i], vectors[j]);
            matrix[i][j] = s;
            matrix[j][i] = s;
        }
    }
    return matrix;
}

SeparationStats category_separation(const std::vector<std::vector<double>>& matrix,
                                    const std::vector<std::string>& site_labels) {
    if (matrix.size() != site_labels.size()) {
        throw Error(ErrorCode::InvalidArgument, "matrix size does not match label count");
    }
    std::size_t n = matrix.size();
    for (const auto& row : matrix) {
        if (row.size() != n) {
            throw Error(ErrorCode::InvalidArgument, "matrix is not square");
        }
    }
    std::set<std::string> categories(site_labels.begin(), site_labels.end());
    if (categories.size() < 2) {
        throw Error(ErrorCode::SingleCategory,
                    "separation needs at least two distinct site labels");
    }

    double intra_sum = 0.0, inter_sum = 0.0;
    std::size_t intra_n = 0, inter_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (site_labels[i] == site_labels[j]) {
                intra_sum += matrix[i][j];
                ++intra_n;
            } else {
                inter_sum += matrix[i][j];
                ++inter_n;
            }
        }
    }
    if (intra_n == 0) {
        throw Error(ErrorCode::InvalidArgument,
                    "no same-site pair exists; every label is unique");
    }

    SeparationStats stats;
    stats.mean_intra = intra_sum / static_cast<double>(intra_n);
    stats.mean_inter = inter_sum / static_cast<double>(inter_n);
    stats.margin = stats.mean_intra - stats.mean_inter;
    stats.n_tasks = n;
    stats.n_categories = categories.size();
    return stats;
}

std::string matrix_to_csv(const std::vector<Task>& tasks,
                          const std::vector<std::vector<double>>& matrix) {
    if (tasks.size() != matrix.size()) {
        throw Error(ErrorCode::InvalidArgument, "matrix size does not match task count");
    }
    std::string out = "task_id";
    for (const auto& task : tasks) {
        out += ',';
        out += task.id;
    }
    out += '\n';
    char buf[64];
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        out += tasks[i].id;
        for (std::size_t j = 0; j < matrix[i].size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", matrix[i][j]);
            out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string separation_stats_to_json(const SeparationStats& stats) {
    nlohmann::json j{{"mean_intra", stats.mean_intra},
                     {"mean_inter", stats.mean_inter},
                     {"margin", stats.margin},
                     {"n_tasks", stats.n_tasks},
                     {"n_categories", stats.n_categories}};
    return j.dump();
}

}  // namespace reap
