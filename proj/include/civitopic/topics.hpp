#pragma once

#include "civitopic/corpus.hpp"
#include "civitopic/taxonomy.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace civitopic::topics {

struct NgramRange {
  int lo = 1;
  int hi = 1;

  bool operator==(const NgramRange&) const = default;
};

void validate(const NgramRange& range);

/// Space-joined n-grams of the token sequence, all lengths lo..hi, ordered by
/// length then position.
std::vector<std::string> ngrams(std::span<const std::string> tokens, NgramRange range);

using TermCounts = std::vector<std::pair<std::size_t, std::size_t>>;  // (term index, count), sorted

struct Vectorizer {
  NgramRange range;
  std::vector<std::string> vocabulary;  // sorted
  std::vector<TermCounts> doc_counts;

  std::optional<std::size_t> term_index(const std::string& term) const;

 private:
  friend Vectorizer fit_vectorizer(const std::vector<std::vector<std::string>>&, NgramRange);
  friend Vectorizer make_vectorizer(NgramRange, std::vector<std::string>);
  std::unordered_map<std::string, std::size_t> index_;
};

Vectorizer fit_vectorizer(const std::vector<std::vector<std::string>>& token_lists, NgramRange range);
/// Vocabulary-only vectorizer, e.g. rebuilt from a saved model bundle.
Vectorizer make_vectorizer(NgramRange range, std::vector<std::string> vocabulary);

struct SeedBoostConfig {
  std::set<std::string> seed_words;
  double seed_multiplier = 2.0;
};

/// Seed phrases normalized with the corpus preprocessing; every n-gram of a
/// phrase within `range` becomes a seed term.
std::set<std::string> seed_terms(const std::vector<SeedList>& lists, const corpus::PreprocessConfig& config,
                                 NgramRange range);

/// Topic x term weights for topics 0..K-1 (row-major).
struct TopicWeights {
  std::size_t topics = 0;
  std::size_t terms = 0;
  std::vector<double> values;
  std::vector<std::size_t> sizes;  // documents per topic

  std::span<const double> row(std::size_t topic) const { return {values.data() + topic * terms, terms}; }
  double at(std::size_t topic, std::size_t term) const { return values[topic * terms + term]; }
};

/// Class-based TF-IDF over the documents grouped by label. Every label
/// (including -1) is a class when computing the average class length A and
/// term frequencies f_t; weights are returned for labels >= 0 only:
/// tf(t,c) * log(1 + A / f_t), multiplied by seed_multiplier for seed terms.
TopicWeights class_tfidf(const Vectorizer& vectorizer, std::span<const int> labels,
                         const SeedBoostConfig* boost = nullptr);

struct TopicWord {
  std::string term;
  double weight = 0.0;
};

struct TopicRepresentation {
  int topic_id = 0;
  std::size_t size = 0;
  std::vector<TopicWord> top_words;
  std::string name;
  std::optional<std::string> llm_label;
};

/// Up to k_top positive-weight terms per topic, weight descending, ties
/// alphabetical. Name = "<id>_" + first four terms joined by "_".
std::vector<TopicRepresentation> top_k_words(const TopicWeights& weights, std::span<const std::string> vocabulary,
                                             std::size_t k_top);

struct Merge {
  int from = 0;  // topic ids before this merge step
  int into = 0;
};

struct ReducedTopics {
  std::vector<int> labels;
  TopicWeights weights;
  std::vector<Merge> merges;
};

/// Repeatedly merges the smallest topic into the topic with the most similar
/// weight row until nr_topics remain. nullopt ("auto") leaves topics alone.
ReducedTopics reduce_topics(const Vectorizer& vectorizer, std::vector<int> labels, std::optional<int> nr_topics,
                            const SeedBoostConfig* boost = nullptr);

/// CSV `topic,size,name,top_words` (top words pipe-separated); an outlier
/// row is written first when outlier_count > 0.
void write_topic_table(const std::vector<TopicRepresentation>& topics, std::size_t outlier_count,
                       const std::string& path);

}  // namespace civitopic::topics
