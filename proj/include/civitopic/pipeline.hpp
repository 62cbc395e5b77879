#pragma once

#include "civitopic/clustering.hpp"
#include "civitopic/corpus.hpp"
#include "civitopic/embeddings.hpp"
#include "civitopic/reduction.hpp"
#include "civitopic/taxonomy.hpp"
#include "civitopic/topics.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace civitopic::pipeline {

enum class Mode { unsupervised, semisupervised };

std::string_view to_string(Mode mode);
/// Accepts "unsupervised"/"unsup" and "semisupervised"/"semi".
Mode parse_mode(std::string_view name);

struct PipelineConfig {
  Mode mode = Mode::unsupervised;
  topics::NgramRange n_gram_range{1, 1};
  std::optional<int> nr_topics;  // nullopt = auto
  std::size_t min_topic_size = 10;
  std::size_t min_samples = 0;   // 0 = min_topic_size
  std::uint64_t seed = 42;
  double seed_multiplier = 2.0;
  /// Cosine similarity a document needs to be pulled toward a seed topic.
  /// Anything above 1 disables blending.
  double blend_threshold = 0.0;
  std::size_t target_dim = 5;
  std::size_t k_top = 10;
  std::size_t max_seed_subterms = 5;
};

void validate(const PipelineConfig& config);
nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

/// Semi-supervised inputs: the taxonomy (seed-word boost) and seed topic
/// embeddings (document guidance). An empty seed_topics list skips guidance.
struct Guidance {
  Taxonomy taxonomy;
  std::vector<embeddings::SeedTopic> seed_topics;
  corpus::PreprocessConfig preprocess;
};

/// Everything needed to re-score or assign new documents.
struct FittedModel {
  PipelineConfig config;
  std::string provider_tag;
  std::size_t input_dim = 0;
  reduction::ReducerModel reducer;
  clustering::ClusterParams cluster_params;
  std::vector<embeddings::SeedTopic> seed_topics;

  std::vector<std::string> train_ids;
  std::vector<double> train_points;  // reduced, row-major N x target_dim
  std::vector<double> train_core;
  std::vector<int> train_labels;     // final topics after reduction
  std::vector<double> train_probabilities;
  std::vector<double> topic_reach;   // max core distance per final topic

  topics::Vectorizer vectorizer;
  topics::TopicWeights weights;
  std::vector<topics::TopicRepresentation> representations;
  std::vector<topics::Merge> merges;

  std::size_t topic_count() const { return weights.topics; }
};

struct FitResult {
  FittedModel model;
  clustering::ClusterAssignment assignment;
};

/// guidance (semi only) -> reduce -> cluster -> vectorize -> c-TF-IDF
/// (boost only in semi mode) -> reduce_topics. Documents must already be
/// preprocessed; `embeddings` is aligned to them by id.
FitResult fit(const std::vector<corpus::Document>& train, const embeddings::EmbeddingMatrix& embeddings,
              const PipelineConfig& config, const Guidance* guidance = nullptr);

/// Each point takes the label of its nearest training point under mutual
/// reachability; -1 when that neighbour is an outlier or the reachability
/// exceeds the neighbour topic's largest training core distance.
clustering::ClusterAssignment transform(const FittedModel& model, const std::vector<corpus::Document>& docs,
                                        const embeddings::EmbeddingMatrix& embeddings);

/// Token lists of the documents, for coherence scoring.
std::vector<std::vector<std::string>> token_lists(const std::vector<corpus::Document>& docs);

/// Writes reducer.json, cluster_model.json, clusters.csv, vocabulary.txt,
/// weights.bin (+ weights.json), topics.csv and config.json.
void save_bundle(const FitResult& result, const std::filesystem::path& dir);
FittedModel load_bundle(const std::filesystem::path& dir);

}  // namespace civitopic::pipeline
