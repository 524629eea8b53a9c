#pragma once

#include <string>
#include <vector>

#include "reap/core.hpp"
#include "reap/embedding.hpp"

namespace reap {

/// Pairwise cosine similarity over the tasks' key texts. Symmetric
/// with unit diagonal. Requires at least two tasks.
std::vector<std::vector<double>> pairwise_matrix(const std::vector<Task>& tasks,
                                                 EmbeddingProvider& embedder);

struct SeparationStats {
    double mean_intra = 0.0;
    double mean_inter = 0.0;
    double margin = 0.0;  // mean_intra - mean_inter
    std::size_t n_tasks = 0;
    std::size_t n_categories = 0;
};

/// Off-diagonal means of same-site vs cross-site similarity. Throws
/// SingleCategory when fewer than two distinct labels are present.
SeparationStats category_separation(const std::vector<std::vector<double>>& matrix,
                                    const std::vector<std::string>& site_labels);

/// CSV with a task-id header row and column.
std::string matrix_to_csv(const std::vector<Task>& tasks,
                          const std::vector<std::vector<double>>& matrix);

std::string separation_stats_to_json(const SeparationStats& stats);

}  // namespace reap
