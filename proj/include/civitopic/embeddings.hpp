#pragma once

#include "civitopic/taxonomy.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace civitopic::embeddings {

/// Dense row-major N x D matrix, one row per document id.
struct EmbeddingMatrix {
  std::vector<std::string> doc_ids;
  std::string provider_tag;
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t rows() const { return doc_ids.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
};

/// Throws unless rows match ids, D >= 2 and every entry is finite.
void validate(const EmbeddingMatrix& matrix);

/// Auto-detects the format: text files start with `civemb v1`; anything else
/// is read as a raw float32 block next to a `<stem>.json` sidecar.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
void save_text(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
void save_binary(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& binary_path);

/// Rows reordered to follow `ids`; missing ids are a configuration error.
EmbeddingMatrix align(const EmbeddingMatrix& matrix, std::span<const std::string> ids);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct SeedTopic {
  std::string label;
  std::vector<std::string> seed_words;
  std::vector<double> seed_embedding;
  std::string provider_tag;
};

/// Mean of the phrase vectors (looked up by id in `phrase_embeddings`),
/// normalized to unit length.
SeedTopic make_seed_topic(const std::string& label, const std::vector<std::string>& seed_words,
                          const EmbeddingMatrix& phrase_embeddings);
std::vector<SeedTopic> make_seed_topics(const std::vector<SeedList>& lists,
                                        const EmbeddingMatrix& phrase_embeddings);

/// Each document moves halfway toward its most similar seed when that
/// similarity reaches `blend_threshold`. First seed wins ties.
EmbeddingMatrix guide_with_seeds(const EmbeddingMatrix& matrix, const std::vector<SeedTopic>& seeds,
                                 double blend_threshold);

struct FetchOptions {
  std::string endpoint;
  std::string model_name;
  std::size_t batch_size = 32;
  int retries = 3;
  double timeout_seconds = 60.0;
  std::size_t max_in_flight = 4;
  std::optional<std::filesystem::path> cache_dir;
};

/// Keys: endpoint, model, batch_size, retries, timeout_seconds,
/// max_in_flight, cache_dir.
FetchOptions fetch_options_from_json(std::string_view json_text);

struct FetchStats {
  std::size_t requests = 0;
  std::size_t cache_hits = 0;
};

/// POST {model, input:[...]} -> {vectors:[[...]]}, batched; results cached per
/// (model, text) when cache_dir is set. Row ids default to "0".."N-1".
EmbeddingMatrix fetch_embeddings(const std::vector<std::string>& texts, const FetchOptions& options,
                                 const std::vector<std::string>& ids = {}, FetchStats* stats = nullptr);

}  // namespace civitopic::embeddings
