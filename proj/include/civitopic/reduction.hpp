#pragma once

#include "civitopic/embeddings.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace civitopic::reduction {

/// Principal-component projection fitted on centered data. `components` is
/// row-major target_dim x input_dim with orthonormal rows; each row's
/// largest-magnitude entry is positive.
struct ReducerModel {
  std::size_t input_dim = 0;
  std::size_t target_dim = 0;
  std::vector<double> mean_vector;
  std::vector<double> components;
  std::vector<double> explained_variance;

  const double* component(std::size_t k) const { return components.data() + k * input_dim; }
};

/// Requires 2 <= target_dim < min(N, D).
ReducerModel fit_reducer(const embeddings::EmbeddingMatrix& matrix, std::size_t target_dim);

embeddings::EmbeddingMatrix transform(const ReducerModel& model, const embeddings::EmbeddingMatrix& matrix);

std::string to_json(const ReducerModel& model);
ReducerModel from_json(const std::string& json_text);

}  // namespace civitopic::reduction
