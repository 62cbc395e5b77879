#pragma once

#include "civitopic/corpus.hpp"
#include "civitopic/embeddings.hpp"
#include "civitopic/llm.hpp"
#include "civitopic/taxonomy.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

// Seeded labeled corpora with matching embeddings, for tests and desk-scale
// runs. Each category owns a vocabulary that overlaps its taxonomy names and
// an embedding centroid; documents mix category words with shared filler.
namespace civitopic::synthetic {

struct FixtureSpec {
  std::size_t documents = 1000;
  std::size_t categories = 6;     // 1..10
  std::size_t subcategories = 3;  // 1..3 per category
  std::size_t dim = 64;
  std::uint64_t seed = 7;
  /// Norm of the isotropic noise added to each document vector (centroids
  /// have unit norm).
  double noise = 3.0;
  double subcategory_weight = 0.35;
  std::size_t min_words = 10;
  std::size_t max_words = 20;
  /// Share of label rows replaced by no_match.
  double no_match_rate = 0.02;
  std::string provider_tag = "synthetic";
};

struct Fixture {
  corpus::Corpus corpus;
  embeddings::EmbeddingMatrix embeddings;
  /// One row per taxonomy option, id = option text.
  embeddings::EmbeddingMatrix seed_embeddings;
  Taxonomy taxonomy;
  std::vector<llm::LabelResult> labels;
  std::set<std::string> stopwords;
};

Fixture make_fixture(const FixtureSpec& spec);

/// Same ids and shape as `like`, entries drawn from a standard normal.
embeddings::EmbeddingMatrix noise_embeddings(const embeddings::EmbeddingMatrix& like, std::uint64_t seed,
                                             const std::string& provider_tag);

/// corpus.csv, embeddings.bin (+ embeddings.json), seed_embeddings.txt,
/// taxonomy.json, labels.csv, stopwords.txt.
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

}  // namespace civitopic::synthetic
