#include "civitopic/reduction.hpp"

#include "civitopic/error.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace civitopic::reduction {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ReducerModel fit_reducer(const embeddings::EmbeddingMatrix& matrix, std::size_t target_dim) {
  const std::size_t n = matrix.rows();
  const std::size_t d = matrix.dim;
  require(target_dim >= 2, ErrorCode::parameter, "target_dim must be >= 2");
  require(target_dim < d, ErrorCode::parameter,
          "target_dim " + std::to_string(target_dim) + " must be below the input dimension " + std::to_string(d));
  require(target_dim < n, ErrorCode::parameter,
          "target_dim " + std::to_string(target_dim) + " needs more than " + std::to_string(target_dim) + " rows");

  Eigen::Map<const RowMatrix> x(matrix.values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMatrix centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  require(solver.info() == Eigen::Success, ErrorCode::internal, "eigen decomposition failed");

  ReducerModel model;
  model.input_dim = d;
  model.target_dim = target_dim;
  model.mean_vector.assign(mean.data(), mean.data() + d);
  model.components.resize(target_dim * d);
  model.explained_variance.resize(target_dim);
  // Eigenvalues come back ascending.
  for (std::size_t k = 0; k < target_dim; ++k) {
    const auto col = static_cast<Eigen::Index>(d - 1 - k);
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (std::abs(v[j]) > best) {
        best = std::abs(v[j]);
        arg = j;
      }
    }
    if (v[arg] < 0) v = -v;
    for (std::size_t j = 0; j < d; ++j) model.components[k * d + j] = v[static_cast<Eigen::Index>(j)];
    model.explained_variance[k] = std::max(0.0, solver.eigenvalues()[col]);
  }
  return model;
}

embeddings::EmbeddingMatrix transform(const ReducerModel& model, const embeddings::EmbeddingMatrix& matrix) {
  require(matrix.dim == model.input_dim, ErrorCode::parameter,
          "reducer expects dimension " + std::to_string(model.input_dim) + ", got " + std::to_string(matrix.dim));
  embeddings::EmbeddingMatrix out;
  out.doc_ids = matrix.doc_ids;
  out.provider_tag = matrix.provider_tag;
  out.dim = model.target_dim;
  out.values.assign(matrix.rows() * model.target_dim, 0.0);
  std::vector<double> centered(model.input_dim);
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    auto row = matrix.row(i);
    for (std::size_t j = 0; j < model.input_dim; ++j) centered[j] = row[j] - model.mean_vector[j];
    for (std::size_t k = 0; k < model.target_dim; ++k) {
      const double* comp = model.component(k);
      double acc = 0.0;
      for (std::size_t j = 0; j < model.input_dim; ++j) acc += centered[j] * comp[j];
      out.values[i * model.target_dim + k] = acc;
    }
  }
  return out;
}

std::string to_json(const ReducerModel& model) {
  nlohmann::json j = {{"kind", "pca"},
                      {"input_dim", model.input_dim},
                      {"target_dim", model.target_dim},
                      {"mean", model.mean_vector},
                      {"components", model.components},
                      {"explained_variance", model.explained_variance}};
  return j.dump(1) + "\n";
}

ReducerModel from_json(const std::string& json_text) {
  ReducerModel m;
  try {
    const auto j = nlohmann::json::parse(json_text);
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.target_dim = j.at("target_dim").get<std::size_t>();
    m.mean_vector = j.at("mean").get<std::vector<double>>();
    m.components = j.at("components").get<std::vector<double>>();
    m.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, std::string("reducer model: ") + e.what());
  }
  require(m.mean_vector.size() == m.input_dim && m.components.size() == m.input_dim * m.target_dim &&
              m.explained_variance.size() == m.target_dim,
          ErrorCode::format, "reducer model arrays do not match its dimensions");
  return m;
}

}  // namespace civitopic::reduction
